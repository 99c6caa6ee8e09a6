#include "xdr/diffusion/od_loss.hpp"

#include "xdr/core/errors.hpp"

namespace xdr::diffusion {

std::vector<NoiseDraw> draw_noise(int count, int latent_size, int steps, Rng& rng) {
  std::uniform_int_distribution<int> pick_t(1, steps);
  std::vector<NoiseDraw> draws;
  draws.reserve(count);
  for (int i = 0; i < count; ++i) {
    NoiseDraw d;
    d.t = pick_t(rng);
    d.eps = standard_normal(rng, latent_size);
    draws.push_back(std::move(d));
  }
  return draws;
}

EmbeddingLoss disentanglement_loss_embeddings(const Matrix& z, std::span<const Vector> latents,
                                              std::span<const DomainSpec> specs, const TokenTable& table,
                                              const DenoiserBackend& backend, const NoiseSchedule& schedule,
                                              std::span<const NoiseDraw> draws) {
  const auto n = static_cast<std::size_t>(z.rows());
  if (n == 0) throw ValidationError("disentanglement loss needs a non-empty batch");
  if (latents.size() != n || specs.size() != n || draws.size() != n) {
    throw ValidationError("disentanglement loss: batch components have different lengths");
  }
  if (!(schedule == backend.schedule())) throw ValidationError("noise schedule differs from the backend's schedule");
  const int d = backend.latent_size();
  const double scale = 1.0 / (static_cast<double>(n) * d);
  EmbeddingLoss out;
  out.grad = Matrix::Zero(z.rows(), z.cols());
  for (std::size_t i = 0; i < n; ++i) {
    const auto row = static_cast<Eigen::Index>(i);
    const Vector zi = z.row(row).transpose();
    const Vector x_t = add_noise(latents[i], draws[i].t, draws[i].eps, schedule);
    const PromptEmbedding prompt = assemble_prompt(specs[i], zi, table);
    const Vector residual = draws[i].eps - backend.predict_noise(x_t, prompt, draws[i].t);
    out.value += scale * residual.squaredNorm();
    const Vector upstream = -2.0 * scale * residual;
    out.grad.row(row) = backend.predict_noise_object_vjp(x_t, prompt, draws[i].t, upstream).transpose();
  }
  return out;
}

ParameterLoss disentanglement_loss(std::span<const ImageRecord* const> batch, const encoder::Encoder& enc,
                                   const std::map<DomainId, DomainSpec>& specs, const TokenTable& table,
                                   const DenoiserBackend& backend, const NoiseSchedule& schedule, Rng& rng) {
  if (batch.empty()) throw ValidationError("disentanglement loss needs a non-empty batch");
  if (enc.token_dim() != backend.token_dim()) throw ValidationError("encoder token_dim differs from backend token_dim");
  const auto n = batch.size();
  std::vector<encoder::Encoder::Tape> tapes(n);
  std::vector<Vector> latents;
  std::vector<DomainSpec> row_specs;
  Matrix z(static_cast<Eigen::Index>(n), enc.token_dim());
  for (std::size_t i = 0; i < n; ++i) {
    const ImageRecord& rec = *batch[i];
    auto it = specs.find(rec.domain);
    if (it == specs.end()) throw LookupError("no domain spec for domain " + std::to_string(rec.domain));
    row_specs.push_back(it->second);
    z.row(static_cast<Eigen::Index>(i)) = enc.forward(rec.image, tapes[i]).transpose();
    latents.push_back(backend.encode_to_latent(rec.image));
  }
  const auto draws = draw_noise(static_cast<int>(n), backend.latent_size(), schedule.steps(), rng);
  const auto loss = disentanglement_loss_embeddings(z, latents, row_specs, table, backend, schedule, draws);
  ParameterLoss out;
  out.value = loss.value;
  out.grad.assign(enc.parameter_count(), 0.0);
  for (std::size_t i = 0; i < n; ++i) {
    enc.backward(tapes[i], loss.grad.row(static_cast<Eigen::Index>(i)).transpose(), out.grad);
  }
  return out;
}

}  // namespace xdr::diffusion
