#pragma once

#include "xdr/diffusion/backend.hpp"

#include <filesystem>

namespace xdr::diffusion {

struct ToyBackendOptions {
  int object_dim = 8;
  int style_dim = 4;
  int latent_dim = 16;
  int image_height = 6;
  int image_width = 6;
  int image_channels = 3;
  double style_gain = 3.0;
  /// Largest |R [o; s]| entry that still renders inside [0, 1].
  double render_radius = 2.0;
  NoiseSchedule schedule = build_noise_schedule(100, BetaRamp::Linear, 0.01, 0.2);
};

/// Analytic stand-in for a pretrained denoiser.
///
/// Latents are x0 = A o + B s where o is the image's object vector and s its
/// style vector; A and B have mutually orthonormal columns. A prompt maps to
/// (c_obj, c_style) with c_obj the object-slot row and c_style = G * (sum of
/// style rows). The predictor
///
///   eps_hat(x_t, c, t) = (x_t - sqrt(ab_t) (A c_obj + B c_style)) / sqrt(1 - ab_t)
///
/// is the exact posterior-mean denoiser when the prompt carries the true
/// (o, s), so under the denoising loss the minimising object slot is o.
///
/// Images are rendered as 0.5 + scale * R [o; s] with R orthonormal, and
/// encode_to_latent inverts that map exactly.
class ToyLinearBackend final : public DenoiserBackend {
 public:
  ToyLinearBackend(const ToyBackendOptions& options, std::uint64_t seed);

  std::string name() const override { return "toy-linear"; }
  std::vector<int> latent_shape() const override { return {options_.latent_dim}; }
  int token_dim() const override { return options_.object_dim; }
  const NoiseSchedule& schedule() const override { return options_.schedule; }

  Vector encode_to_latent(const Image& image) const override;
  Vector predict_noise(const Vector& x_t, const PromptEmbedding& prompt, int t) const override;
  Vector predict_noise_object_vjp(const Vector& x_t, const PromptEmbedding& prompt, int t,
                                  const Vector& upstream) const override;
  std::vector<double> parameter_snapshot() const override;

  const ToyBackendOptions& options() const { return options_; }
  std::uint64_t seed() const { return seed_; }
  const Matrix& object_map() const { return a_; }
  const Matrix& style_map() const { return b_; }
  const Matrix& style_readout() const { return g_; }

  /// Style vector a prompt carries: G * (sum of non-object rows).
  Vector prompt_style(const PromptEmbedding& prompt) const;
  Vector latent_of(const Vector& object, const Vector& style) const;
  /// max |R [o; s]| over pixels, for choosing render_radius.
  double render_extent(const Vector& object, const Vector& style) const;
  /// Throws ValidationError when the render leaves [0, 1].
  Image render(const Vector& object, const Vector& style) const;

  /// JSON header plus a raw little-endian float64 sidecar next to it
  /// (`<stem>.bin`).
  void save(const std::filesystem::path& json_path) const;
  static ToyLinearBackend load(const std::filesystem::path& json_path);

 private:
  ToyLinearBackend() = default;

  ToyBackendOptions options_;
  std::uint64_t seed_ = 0;
  Matrix a_;       // latent x object
  Matrix b_;       // latent x style
  Matrix g_;       // style x token
  Matrix render_;  // pixels x (object + style)
  double render_scale_ = 1.0;
};

}  // namespace xdr::diffusion
