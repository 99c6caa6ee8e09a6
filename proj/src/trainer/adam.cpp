#include "xdr/trainer/adam.hpp"

#include "xdr/core/errors.hpp"

#include <cmath>

namespace xdr::trainer {

AdamState make_adam(std::size_t n, double lr) {
  AdamState s;
  s.lr = lr;
  s.m.assign(n, 0.0);
  s.v.assign(n, 0.0);
  return s;
}

void adam_step(AdamState& s, std::span<double> params, std::span<const double> grad) {
  if (params.size() != s.m.size() || grad.size() != s.m.size()) throw ValidationError("adam: size mismatch");
  ++s.step;
  const double c1 = 1.0 - std::pow(s.beta1, static_cast<double>(s.step));
  const double c2 = 1.0 - std::pow(s.beta2, static_cast<double>(s.step));
  for (std::size_t i = 0; i < params.size(); ++i) {
    s.m[i] = s.beta1 * s.m[i] + (1.0 - s.beta1) * grad[i];
    s.v[i] = s.beta2 * s.v[i] + (1.0 - s.beta2) * grad[i] * grad[i];
    const double mh = s.m[i] / c1;
    const double vh = s.v[i] / c2;
    if (s.lr != 0.0) params[i] -= s.lr * mh / (std::sqrt(vh) + s.eps);
  }
}

}  // namespace xdr::trainer
