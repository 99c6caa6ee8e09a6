#pragma once

#include "xdr/core/rng.hpp"
#include "xdr/core/types.hpp"

#include <memory>
#include <span>
#include <string>
#include <vector>

namespace xdr::encoder {

enum class Activation { Identity, Relu, Tanh };

Activation parse_activation(const std::string& name);
const char* activation_name(Activation act);

struct InputShape {
  int height = 0;
  int width = 0;
  int channels = 0;

  int size() const { return height * width * channels; }
  bool operator==(const InputShape&) const = default;
};

/// Intermediate values a backbone keeps from forward() for backward().
struct BackboneTape {
  std::vector<Vector> values;
};

/// Image -> feature map, parameterised by an externally owned flat vector.
/// Implementations are immutable and safe to share between encoders.
class Backbone {
 public:
  virtual ~Backbone() = default;

  virtual std::string kind() const = 0;
  virtual InputShape input_shape() const = 0;
  virtual int output_dim() const = 0;
  virtual int parameter_count() const = 0;
  virtual void init_parameters(std::span<double> params, Rng& rng) const = 0;

  virtual Vector forward(std::span<const double> params, const Vector& input, BackboneTape* tape) const = 0;
  /// Accumulates d(loss)/d(params) into grad_params given d(loss)/d(output).
  virtual void backward(std::span<const double> params, const BackboneTape& tape, const Vector& grad_output,
                        std::span<double> grad_params) const = 0;
};

/// 3x3 convolution (stride 1, zero padding 1) + activation, flattened HWC.
class ConvBackbone final : public Backbone {
 public:
  ConvBackbone(InputShape input, int out_channels, Activation act);

  std::string kind() const override { return "conv"; }
  InputShape input_shape() const override { return input_; }
  int output_dim() const override { return input_.height * input_.width * out_channels_; }
  int parameter_count() const override;
  void init_parameters(std::span<double> params, Rng& rng) const override;
  Vector forward(std::span<const double> params, const Vector& input, BackboneTape* tape) const override;
  void backward(std::span<const double> params, const BackboneTape& tape, const Vector& grad_output,
                std::span<double> grad_params) const override;

  int out_channels() const { return out_channels_; }
  Activation activation() const { return act_; }

 private:
  InputShape input_;
  int out_channels_;
  Activation act_;
};

/// One dense hidden layer + activation.
class MlpBackbone final : public Backbone {
 public:
  MlpBackbone(InputShape input, int hidden, Activation act);

  std::string kind() const override { return "mlp"; }
  InputShape input_shape() const override { return input_; }
  int output_dim() const override { return hidden_; }
  int parameter_count() const override { return hidden_ * input_.size() + hidden_; }
  void init_parameters(std::span<double> params, Rng& rng) const override;
  Vector forward(std::span<const double> params, const Vector& input, BackboneTape* tape) const override;
  void backward(std::span<const double> params, const BackboneTape& tape, const Vector& grad_output,
                std::span<double> grad_params) const override;

  int hidden() const { return hidden_; }
  Activation activation() const { return act_; }

 private:
  InputShape input_;
  int hidden_;
  Activation act_;
};

}  // namespace xdr::encoder
