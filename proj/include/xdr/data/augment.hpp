#pragma once

#include "xdr/core/types.hpp"

#include <cstdint>
#include <string>
#include <variant>
#include <vector>

namespace xdr::data {

struct RandomResizedCrop {
  double scale_min = 0.2;
  double scale_max = 1.0;
  double ratio_min = 3.0 / 4.0;
  double ratio_max = 4.0 / 3.0;
};

struct HorizontalFlip {
  double p = 0.5;
};

struct ColorJitter {
  double brightness = 0.4;
  double contrast = 0.4;
  double saturation = 0.4;
  double p = 0.8;
};

struct Grayscale {
  double p = 0.2;
};

struct GaussianNoise {
  double stddev = 0.01;
};

using Transform = std::variant<RandomResizedCrop, HorizontalFlip, ColorJitter, Grayscale, GaussianNoise>;

struct AugmentationPolicy {
  std::string name;
  std::vector<Transform> transforms;

  /// One human-readable line per transform, for manifests.
  std::vector<std::string> describe() const;
};

/// "identity", "default" (crop, flip, jitter, grayscale), "toy" (mild
/// brightness jitter and pixel noise) or "hflip" (always flip).
AugmentationPolicy make_policy(const std::string& name);

/// Deterministic in (image, policy, seed). Output has the input's resolution
/// and lies in [0, 1].
Image augment(const Image& image, const AugmentationPolicy& policy, std::uint64_t seed);

Image horizontal_flip(const Image& image);

}  // namespace xdr::data
