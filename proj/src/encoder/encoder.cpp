#include "xdr/encoder/encoder.hpp"

#include "xdr/core/errors.hpp"

#include <cmath>

namespace xdr::encoder {

nlohmann::json arch_to_json(const EncoderArch& a) {
  return {{"backbone", a.backbone},
          {"height", a.input.height},
          {"width", a.input.width},
          {"channels", a.input.channels},
          {"backbone_width", a.width},
          {"activation", activation_name(a.activation)},
          {"token_dim", a.token_dim}};
}

EncoderArch arch_from_json(const nlohmann::json& doc) {
  EncoderArch a;
  a.backbone = doc.at("backbone").get<std::string>();
  a.input = {doc.at("height").get<int>(), doc.at("width").get<int>(), doc.at("channels").get<int>()};
  a.width = doc.at("backbone_width").get<int>();
  a.activation = parse_activation(doc.at("activation").get<std::string>());
  a.token_dim = doc.at("token_dim").get<int>();
  return a;
}

EncoderArch arch_from_settings(const EncoderSettings& s, InputShape input, int token_dim) {
  EncoderArch a;
  a.backbone = s.backbone;
  a.input = input;
  a.width = s.backbone == "conv" ? s.conv_channels : s.hidden_dim;
  a.activation = parse_activation(s.activation);
  a.token_dim = token_dim;
  return a;
}

std::shared_ptr<const Backbone> make_backbone(const EncoderArch& a) {
  if (a.backbone == "conv") return std::make_shared<ConvBackbone>(a.input, a.width, a.activation);
  if (a.backbone == "mlp") return std::make_shared<MlpBackbone>(a.input, a.width, a.activation);
  throw ValidationError("unknown backbone '" + a.backbone + "'");
}

Encoder::Encoder(const EncoderArch& arch, std::uint64_t seed) : Encoder(make_backbone(arch), arch.token_dim, seed) {
  arch_ = arch;
}

Encoder::Encoder(std::shared_ptr<const Backbone> backbone, int token_dim, std::uint64_t seed)
    : backbone_(std::move(backbone)), token_dim_(token_dim) {
  if (token_dim < 1) throw ValidationError("token_dim must be >= 1");
  arch_.backbone = backbone_->kind();
  arch_.input = backbone_->input_shape();
  arch_.token_dim = token_dim;
  const int nb = backbone_->parameter_count();
  const int nf = backbone_->output_dim();
  params_.assign(static_cast<std::size_t>(nb) + token_dim * nf + token_dim, 0.0);
  Rng rng(seed);
  backbone_->init_parameters(std::span<double>(params_).first(nb), rng);
  std::normal_distribution<double> normal(0.0, 1.0 / std::sqrt(static_cast<double>(nf)));
  for (int i = 0; i < token_dim * nf; ++i) params_[nb + i] = normal(rng);
}

bool Encoder::compatible_with(const Encoder& other) const {
  return arch_ == other.arch_ && params_.size() == other.params_.size();
}

Vector Encoder::to_input(const Image& image) const {
  const auto shape = backbone_->input_shape();
  if (image.height != shape.height || image.width != shape.width || image.channels != shape.channels) {
    throw ValidationError("encoder expects " + std::to_string(shape.height) + "x" + std::to_string(shape.width) +
                          "x" + std::to_string(shape.channels) + " input, got " + std::to_string(image.height) +
                          "x" + std::to_string(image.width) + "x" + std::to_string(image.channels));
  }
  // Fixed standardisation of [0, 1] pixels to [-1, 1].
  const Eigen::Map<const Vector> px(image.pixels.data(), static_cast<Eigen::Index>(image.pixels.size()));
  return (px.array() - 0.5) * 2.0;
}

Vector Encoder::forward(const Image& image, Tape& tape) const {
  const Vector input = to_input(image);
  const int nb = backbone_->parameter_count();
  const int nf = backbone_->output_dim();
  std::span<const double> all(params_);
  tape.features = backbone_->forward(all.first(nb), input, &tape.backbone);
  Eigen::Map<const Matrix> w(params_.data() + nb, token_dim_, nf);
  Eigen::Map<const Vector> b(params_.data() + nb + token_dim_ * nf, token_dim_);
  tape.projected = w * tape.features + b;
  tape.norm = tape.projected.norm();
  if (tape.norm == 0.0) throw ValidationError("encoder produced a zero vector; cannot normalise");
  tape.output = tape.projected / tape.norm;
  return tape.output;
}

Vector Encoder::encode(const Image& image) const {
  Tape tape;
  return forward(image, tape);
}

Matrix Encoder::encode_all(std::span<const ImageRecord> records) const {
  Matrix out(static_cast<Eigen::Index>(records.size()), token_dim_);
  for (std::size_t i = 0; i < records.size(); ++i) out.row(static_cast<Eigen::Index>(i)) = encode(records[i].image);
  return out;
}

void Encoder::backward(const Tape& tape, const Vector& grad_output, std::span<double> grad) const {
  if (grad.size() != params_.size()) throw ValidationError("gradient buffer size mismatch");
  const int nb = backbone_->parameter_count();
  const int nf = backbone_->output_dim();
  // d/du of u/|u|: (g - z (z.g)) / |u|
  const Vector& z = tape.output;
  const Vector g_proj = (grad_output - z * z.dot(grad_output)) / tape.norm;
  Eigen::Map<Matrix> gw(grad.data() + nb, token_dim_, nf);
  Eigen::Map<Vector> gb(grad.data() + nb + token_dim_ * nf, token_dim_);
  gw.noalias() += g_proj * tape.features.transpose();
  gb += g_proj;
  Eigen::Map<const Matrix> w(params_.data() + nb, token_dim_, nf);
  const Vector g_feat = w.transpose() * g_proj;
  backbone_->backward(std::span<const double>(params_).first(nb), tape.backbone, g_feat, grad.first(nb));
}

void momentum_update(const Encoder& enc, MomentumEncoder& menc, double m) {
  if (!(m >= 0.0 && m <= 1.0)) throw ValidationError("momentum must be in [0, 1]");
  if (!enc.compatible_with(menc.net)) throw ValidationError("momentum encoder shape differs from encoder");
  auto pm = menc.net.parameters();
  auto pt = enc.parameters();
  const double keep = m;
  const double take = 1.0 - m;
  for (std::size_t i = 0; i < pm.size(); ++i) pm[i] = keep * pm[i] + take * pt[i];
  menc.m = m;
}

}  // namespace xdr::encoder
