#pragma once

#include "xdr/core/types.hpp"

#include <string>
#include <vector>

namespace xdr::diffusion {

enum class BetaRamp { Linear, ScaledLinear };

BetaRamp parse_beta_ramp(const std::string& name);
const char* beta_ramp_name(BetaRamp ramp);

/// Cumulative products alpha_bar_t = prod_{s<=t} (1 - beta_s), t = 1..T.
struct NoiseSchedule {
  BetaRamp kind = BetaRamp::ScaledLinear;
  double beta_start = 0.0;
  double beta_end = 0.0;
  std::vector<double> alpha_bar;  // index t-1

  int steps() const { return static_cast<int>(alpha_bar.size()); }
  /// t is 1-based; throws RangeError outside [1, T].
  double alpha_bar_at(int t) const;

  bool operator==(const NoiseSchedule&) const = default;
};

/// Linear ramps beta linearly from start to end. ScaledLinear ramps
/// sqrt(beta) linearly and squares, as latent-diffusion checkpoints do.
NoiseSchedule build_noise_schedule(int steps, BetaRamp kind, double beta_start, double beta_end);
/// Defaults: scaled_linear 0.00085 -> 0.012, linear 0.0001 -> 0.02.
NoiseSchedule build_noise_schedule(int steps, BetaRamp kind);

/// sqrt(alpha_bar_t) * x0 + sqrt(1 - alpha_bar_t) * eps.
Vector add_noise(const Vector& x0, int t, const Vector& eps, const NoiseSchedule& schedule);

}  // namespace xdr::diffusion
