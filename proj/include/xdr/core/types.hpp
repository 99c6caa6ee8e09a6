#pragma once

#include <Eigen/Dense>

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace xdr {

/// Row-major so that one embedding occupies one contiguous row.
using Matrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using Vector = Eigen::VectorXd;

using DomainId = int;
using RecordId = int;

inline constexpr const char* kObjectSlot = "{object}";

/// A domain and its handcrafted prompt, e.g. "a sketch of a {object}".
struct DomainSpec {
  DomainId id = 0;
  std::string name;
  std::string prompt_template;

  /// Whitespace-separated template words; the object slot appears verbatim.
  std::vector<std::string> template_tokens() const;
  /// Position of the object slot within template_tokens().
  int object_slot() const;

  bool operator==(const DomainSpec&) const = default;
};

/// Throws ValidationError unless the template has exactly one object slot
/// and at least one style word.
void validate_domain_spec(const DomainSpec& spec);
/// Validates every spec plus uniqueness of names and ids.
void validate_domain_specs(const std::vector<DomainSpec>& specs);

/// Class label that records whether anything has read it. Training code must
/// never call read_for_evaluation(); tests assert was_read() stays false.
class EvalLabel {
 public:
  EvalLabel() = default;
  explicit EvalLabel(int value) : value_(value) {}

  bool has_value() const { return value_.has_value(); }
  int read_for_evaluation() const;
  bool was_read() const { return read_; }
  void clear_read_flag() const { read_ = false; }

 private:
  std::optional<int> value_;
  mutable bool read_ = false;
};

/// H x W x C image, interleaved channels, values in [0, 1].
struct Image {
  int height = 0;
  int width = 0;
  int channels = 0;
  std::vector<double> pixels;

  Image() = default;
  Image(int h, int w, int c, double fill = 0.0)
      : height(h), width(w), channels(c), pixels(static_cast<std::size_t>(h) * w * c, fill) {}

  std::size_t size() const { return pixels.size(); }
  double& at(int y, int x, int c) { return pixels[(static_cast<std::size_t>(y) * width + x) * channels + c]; }
  double at(int y, int x, int c) const {
    return pixels[(static_cast<std::size_t>(y) * width + x) * channels + c];
  }
  bool same_shape(const Image& o) const {
    return height == o.height && width == o.width && channels == o.channels;
  }
  bool operator==(const Image&) const = default;
};

struct ImageRecord {
  RecordId id = 0;
  DomainId domain = 0;
  Image image;
  EvalLabel label;
  std::string source;
};

struct Embedding {
  Vector values;
  DomainId domain = 0;
  RecordId record = 0;
};

struct HyperParams {
  double tau = 0.2;
  int k = 50;
  double beta = 0.5;
  double lambda = 1.0;
  double eps_div = 1e-8;
  double momentum_m = 0.999;
  int bank_capacity = 4096;
  int diffusion_steps = 1000;
  double learning_rate = 2.5e-4;
  int batch_size = 64;

  bool operator==(const HyperParams&) const = default;
};

struct PhaseSchedule {
  int od_epochs = 50;
  int pa1_epochs = 30;
  int pa2_epochs = 20;

  int total() const { return od_epochs + pa1_epochs + pa2_epochs; }
  bool operator==(const PhaseSchedule&) const = default;
};

enum class Phase { OD, PA1, PA2 };

const char* phase_name(Phase phase);

}  // namespace xdr
