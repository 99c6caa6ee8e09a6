#pragma once

#include "xdr/core/types.hpp"
#include "xdr/diffusion/prompt.hpp"
#include "xdr/diffusion/schedule.hpp"

#include <string>
#include <vector>

namespace xdr::diffusion {

/// Frozen latent-diffusion model as seen by the disentangler.
///
/// An adapter for a pretrained model implements the latent encoder (image ->
/// latent) and the noise predictor, plus the vector-Jacobian product of the
/// predictor with respect to the object-slot token, which is the only path
/// by which training gradients enter. Implementations must be safe for
/// concurrent const calls and must never change their parameters.
class DenoiserBackend {
 public:
  virtual ~DenoiserBackend() = default;

  virtual std::string name() const = 0;
  virtual std::vector<int> latent_shape() const = 0;
  virtual int token_dim() const = 0;
  /// Schedule the noise predictor was trained under.
  virtual const NoiseSchedule& schedule() const = 0;

  virtual Vector encode_to_latent(const Image& image) const = 0;
  virtual Vector predict_noise(const Vector& x_t, const PromptEmbedding& prompt, int t) const = 0;
  /// Gradient of <upstream, predict_noise(x_t, prompt, t)> w.r.t. the
  /// prompt's object-slot row.
  virtual Vector predict_noise_object_vjp(const Vector& x_t, const PromptEmbedding& prompt, int t,
                                          const Vector& upstream) const = 0;

  /// Flat copy of every parameter, for frozenness checks.
  virtual std::vector<double> parameter_snapshot() const = 0;

  int latent_size() const {
    int n = 1;
    for (int d : latent_shape()) n *= d;
    return n;
  }
};

}  // namespace xdr::diffusion
