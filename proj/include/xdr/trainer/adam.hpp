#pragma once

#include <cstdint>
#include <span>
#include <vector>

namespace xdr::trainer {

struct AdamState {
  double lr = 2.5e-4;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
  std::int64_t step = 0;
  std::vector<double> m;
  std::vector<double> v;

  bool operator==(const AdamState&) const = default;
};

AdamState make_adam(std::size_t parameter_count, double lr);

/// Bias-corrected Adam update, no weight decay.
void adam_step(AdamState& state, std::span<double> params, std::span<const double> grad);

}  // namespace xdr::trainer
