#include "xdr/diffusion/schedule.hpp"

#include "xdr/core/errors.hpp"

#include <cmath>

namespace xdr::diffusion {

BetaRamp parse_beta_ramp(const std::string& name) {
  if (name == "linear") return BetaRamp::Linear;
  if (name == "scaled_linear") return BetaRamp::ScaledLinear;
  throw ValidationError("unknown noise schedule '" + name + "'");
}

const char* beta_ramp_name(BetaRamp ramp) { return ramp == BetaRamp::Linear ? "linear" : "scaled_linear"; }

double NoiseSchedule::alpha_bar_at(int t) const {
  if (t < 1 || t > steps()) {
    throw RangeError("timestep " + std::to_string(t) + " outside [1, " + std::to_string(steps()) + "]");
  }
  return alpha_bar[t - 1];
}

NoiseSchedule build_noise_schedule(int steps, BetaRamp kind, double beta_start, double beta_end) {
  if (steps < 1) throw ValidationError("noise schedule needs T >= 1");
  if (!(beta_start >= 0.0 && beta_end < 1.0 && beta_start <= beta_end)) {
    throw ValidationError("noise betas must satisfy 0 <= start <= end < 1");
  }
  NoiseSchedule s;
  s.kind = kind;
  s.beta_start = beta_start;
  s.beta_end = beta_end;
  s.alpha_bar.resize(steps);
  double prod = 1.0;
  for (int i = 0; i < steps; ++i) {
    const double frac = steps == 1 ? 0.0 : static_cast<double>(i) / (steps - 1);
    double beta;
    if (kind == BetaRamp::Linear) {
      beta = beta_start + (beta_end - beta_start) * frac;
    } else {
      const double r = std::sqrt(beta_start) + (std::sqrt(beta_end) - std::sqrt(beta_start)) * frac;
      beta = r * r;
    }
    prod *= 1.0 - beta;
    s.alpha_bar[i] = prod;
  }
  for (int i = 1; i < steps; ++i) {
    if (!(s.alpha_bar[i] < s.alpha_bar[i - 1])) throw ValidationError("noise schedule is not strictly decreasing");
  }
  return s;
}

NoiseSchedule build_noise_schedule(int steps, BetaRamp kind) {
  return kind == BetaRamp::ScaledLinear ? build_noise_schedule(steps, kind, 0.00085, 0.012)
                                        : build_noise_schedule(steps, kind, 0.0001, 0.02);
}

Vector add_noise(const Vector& x0, int t, const Vector& eps, const NoiseSchedule& schedule) {
  if (x0.size() != eps.size()) {
    throw ValidationError("add_noise: latent has " + std::to_string(x0.size()) + " entries but noise has " +
                          std::to_string(eps.size()));
  }
  const double ab = schedule.alpha_bar_at(t);
  return std::sqrt(ab) * x0 + std::sqrt(1.0 - ab) * eps;
}

}  // namespace xdr::diffusion
