#include "xdr/encoder/backbone.hpp"

#include "xdr/core/errors.hpp"

#include <cmath>

namespace xdr::encoder {
namespace {

double activate(Activation act, double x) {
  switch (act) {
    case Activation::Identity: return x;
    case Activation::Relu: return x > 0 ? x : 0.0;
    case Activation::Tanh: return std::tanh(x);
  }
  return x;
}

double activate_grad(Activation act, double pre) {
  switch (act) {
    case Activation::Identity: return 1.0;
    case Activation::Relu: return pre > 0 ? 1.0 : 0.0;
    case Activation::Tanh: {
      const double t = std::tanh(pre);
      return 1.0 - t * t;
    }
  }
  return 1.0;
}

void fill_normal(std::span<double> out, double stddev, Rng& rng) {
  std::normal_distribution<double> normal(0.0, stddev);
  for (auto& v : out) v = normal(rng);
}

}  // namespace

Activation parse_activation(const std::string& name) {
  if (name == "identity") return Activation::Identity;
  if (name == "relu") return Activation::Relu;
  if (name == "tanh") return Activation::Tanh;
  throw ValidationError("unknown activation '" + name + "'");
}

const char* activation_name(Activation act) {
  switch (act) {
    case Activation::Identity: return "identity";
    case Activation::Relu: return "relu";
    case Activation::Tanh: return "tanh";
  }
  return "?";
}

// ---- conv ----------------------------------------------------------------
// Parameter layout: weights[out][ky][kx][in] followed by bias[out].

ConvBackbone::ConvBackbone(InputShape input, int out_channels, Activation act)
    : input_(input), out_channels_(out_channels), act_(act) {
  if (input.height < 1 || input.width < 1 || input.channels < 1 || out_channels < 1) {
    throw ValidationError("conv backbone dimensions must be >= 1");
  }
}

int ConvBackbone::parameter_count() const { return out_channels_ * 9 * input_.channels + out_channels_; }

void ConvBackbone::init_parameters(std::span<double> params, Rng& rng) const {
  const int nw = out_channels_ * 9 * input_.channels;
  fill_normal(params.first(nw), 1.0 / std::sqrt(9.0 * input_.channels), rng);
  for (int i = nw; i < parameter_count(); ++i) params[i] = 0.0;
}

Vector ConvBackbone::forward(std::span<const double> params, const Vector& input, BackboneTape* tape) const {
  if (input.size() != input_.size()) throw ValidationError("conv backbone: wrong input size");
  const int H = input_.height, W = input_.width, C = input_.channels, O = out_channels_;
  const double* w = params.data();
  const double* b = params.data() + O * 9 * C;
  Vector pre(H * W * O);
  for (int y = 0; y < H; ++y) {
    for (int x = 0; x < W; ++x) {
      for (int o = 0; o < O; ++o) {
        double acc = b[o];
        for (int ky = 0; ky < 3; ++ky) {
          const int iy = y + ky - 1;
          if (iy < 0 || iy >= H) continue;
          for (int kx = 0; kx < 3; ++kx) {
            const int ix = x + kx - 1;
            if (ix < 0 || ix >= W) continue;
            const double* wk = w + ((o * 3 + ky) * 3 + kx) * C;
            const double* in = input.data() + (iy * W + ix) * C;
            for (int c = 0; c < C; ++c) acc += wk[c] * in[c];
          }
        }
        pre[(y * W + x) * O + o] = acc;
      }
    }
  }
  Vector out = pre.unaryExpr([this](double v) { return activate(act_, v); });
  if (tape) tape->values = {input, pre};
  return out;
}

void ConvBackbone::backward(std::span<const double> params, const BackboneTape& tape, const Vector& grad_output,
                            std::span<double> grad_params) const {
  const int H = input_.height, W = input_.width, C = input_.channels, O = out_channels_;
  const Vector& input = tape.values.at(0);
  const Vector& pre = tape.values.at(1);
  double* gw = grad_params.data();
  double* gb = grad_params.data() + O * 9 * C;
  for (int y = 0; y < H; ++y) {
    for (int x = 0; x < W; ++x) {
      for (int o = 0; o < O; ++o) {
        const int idx = (y * W + x) * O + o;
        const double g = grad_output[idx] * activate_grad(act_, pre[idx]);
        if (g == 0.0) continue;
        gb[o] += g;
        for (int ky = 0; ky < 3; ++ky) {
          const int iy = y + ky - 1;
          if (iy < 0 || iy >= H) continue;
          for (int kx = 0; kx < 3; ++kx) {
            const int ix = x + kx - 1;
            if (ix < 0 || ix >= W) continue;
            double* gk = gw + ((o * 3 + ky) * 3 + kx) * C;
            const double* in = input.data() + (iy * W + ix) * C;
            for (int c = 0; c < C; ++c) gk[c] += g * in[c];
          }
        }
      }
    }
  }
}

// ---- mlp -----------------------------------------------------------------
// Parameter layout: weights[hidden][in] row-major followed by bias[hidden].

MlpBackbone::MlpBackbone(InputShape input, int hidden, Activation act) : input_(input), hidden_(hidden), act_(act) {
  if (input.size() < 1 || hidden < 1) throw ValidationError("mlp backbone dimensions must be >= 1");
}

void MlpBackbone::init_parameters(std::span<double> params, Rng& rng) const {
  const int nw = hidden_ * input_.size();
  fill_normal(params.first(nw), 1.0 / std::sqrt(static_cast<double>(input_.size())), rng);
  for (int i = nw; i < parameter_count(); ++i) params[i] = 0.0;
}

Vector MlpBackbone::forward(std::span<const double> params, const Vector& input, BackboneTape* tape) const {
  const int n = input_.size();
  if (input.size() != n) throw ValidationError("mlp backbone: wrong input size");
  Eigen::Map<const Matrix> w(params.data(), hidden_, n);
  Eigen::Map<const Vector> b(params.data() + hidden_ * n, hidden_);
  Vector pre = w * input + b;
  Vector out = pre.unaryExpr([this](double v) { return activate(act_, v); });
  if (tape) tape->values = {input, pre};
  return out;
}

void MlpBackbone::backward(std::span<const double> params, const BackboneTape& tape, const Vector& grad_output,
                           std::span<double> grad_params) const {
  const int n = input_.size();
  const Vector& input = tape.values.at(0);
  const Vector& pre = tape.values.at(1);
  Vector g(hidden_);
  for (int i = 0; i < hidden_; ++i) g[i] = grad_output[i] * activate_grad(act_, pre[i]);
  Eigen::Map<Matrix> gw(grad_params.data(), hidden_, n);
  Eigen::Map<Vector> gb(grad_params.data() + hidden_ * n, hidden_);
  gw.noalias() += g * input.transpose();
  gb += g;
}

}  // namespace xdr::encoder
