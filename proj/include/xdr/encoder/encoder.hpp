#pragma once

#include "xdr/core/config.hpp"
#include "xdr/core/types.hpp"
#include "xdr/encoder/backbone.hpp"

#include <json.hpp>

#include <memory>
#include <span>
#include <vector>

namespace xdr::encoder {

/// Serializable description of an encoder's shape.
struct EncoderArch {
  std::string backbone = "conv";
  InputShape input;
  int width = 4;  // conv output channels or mlp hidden units
  Activation activation = Activation::Tanh;
  int token_dim = 8;

  bool operator==(const EncoderArch&) const = default;
};

nlohmann::json arch_to_json(const EncoderArch& arch);
EncoderArch arch_from_json(const nlohmann::json& doc);
EncoderArch arch_from_settings(const EncoderSettings& settings, InputShape input, int token_dim);

std::shared_ptr<const Backbone> make_backbone(const EncoderArch& arch);

/// Backbone followed by a linear projection to the token dimension and an L2
/// normalisation. All parameters live in one flat vector:
/// [backbone | projection weights (token_dim x feature_dim) | projection bias].
class Encoder {
 public:
  struct Tape {
    BackboneTape backbone;
    Vector features;
    Vector projected;
    Vector output;
    double norm = 0.0;
  };

  Encoder(const EncoderArch& arch, std::uint64_t seed);
  Encoder(std::shared_ptr<const Backbone> backbone, int token_dim, std::uint64_t seed);

  const EncoderArch& arch() const { return arch_; }
  const Backbone& backbone() const { return *backbone_; }
  int token_dim() const { return token_dim_; }
  InputShape input_shape() const { return backbone_->input_shape(); }

  std::size_t parameter_count() const { return params_.size(); }
  std::span<const double> parameters() const { return params_; }
  std::span<double> parameters() { return params_; }
  /// Same architecture (parameter layout) as other.
  bool compatible_with(const Encoder& other) const;

  /// Unit-norm embedding. Throws ValidationError if the image shape does not
  /// match input_shape().
  Vector encode(const Image& image) const;
  Matrix encode_all(std::span<const ImageRecord> records) const;

  Vector forward(const Image& image, Tape& tape) const;
  /// Accumulates d(loss)/d(params) into grad given d(loss)/d(output).
  void backward(const Tape& tape, const Vector& grad_output, std::span<double> grad) const;

 private:
  Vector to_input(const Image& image) const;

  EncoderArch arch_;
  std::shared_ptr<const Backbone> backbone_;
  int token_dim_;
  std::vector<double> params_;
};

/// Exponential moving average copy of an Encoder.
struct MomentumEncoder {
  Encoder net;
  double m = 0.999;
};

/// p_m <- m * p_m + (1 - m) * p_theta for every parameter.
void momentum_update(const Encoder& enc, MomentumEncoder& menc, double m);

}  // namespace xdr::encoder
