#pragma once

#include "xdr/core/rng.hpp"
#include "xdr/core/types.hpp"
#include "xdr/diffusion/backend.hpp"
#include "xdr/encoder/encoder.hpp"

#include <map>
#include <span>
#include <vector>

namespace xdr::diffusion {

struct NoiseDraw {
  int t = 1;
  Vector eps;
};

/// One (t, eps) per element: t uniform on {1..T}, eps standard normal.
std::vector<NoiseDraw> draw_noise(int count, int latent_size, int steps, Rng& rng);

struct EmbeddingLoss {
  double value = 0.0;
  Matrix grad;  // d(value)/d(z), one row per element
};

/// Denoising loss with explicit object tokens z (one row per element):
/// mean over elements and latent entries of |eps - eps_hat(x_t, c(z), t)|^2.
EmbeddingLoss disentanglement_loss_embeddings(const Matrix& z, std::span<const Vector> latents,
                                              std::span<const DomainSpec> specs, const TokenTable& table,
                                              const DenoiserBackend& backend, const NoiseSchedule& schedule,
                                              std::span<const NoiseDraw> draws);

struct ParameterLoss {
  double value = 0.0;
  std::vector<double> grad;  // d(value)/d(encoder params)
};

/// Denoising loss for a batch of images with z = f(image). Gradients reach the
/// encoder only; the backend is read-only. Throws LookupError when a record's
/// domain has no spec.
ParameterLoss disentanglement_loss(std::span<const ImageRecord* const> batch, const encoder::Encoder& enc,
                                   const std::map<DomainId, DomainSpec>& specs, const TokenTable& table,
                                   const DenoiserBackend& backend, const NoiseSchedule& schedule, Rng& rng);

}  // namespace xdr::diffusion
