#include "xdr/data/augment.hpp"

#include "xdr/core/errors.hpp"
#include "xdr/core/rng.hpp"
#include "xdr/data/image_io.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace xdr::data {
namespace {

template <class... Ts>
struct Overloaded : Ts... {
  using Ts::operator()...;
};
template <class... Ts>
Overloaded(Ts...) -> Overloaded<Ts...>;

double uniform(Rng& rng, double lo, double hi) { return std::uniform_real_distribution<double>(lo, hi)(rng); }
bool coin(Rng& rng, double p) { return uniform(rng, 0.0, 1.0) < p; }

void clamp01(Image& img) {
  for (auto& v : img.pixels) v = std::clamp(v, 0.0, 1.0);
}

double luma(const Image& img, int y, int x) {
  if (img.channels < 3) return img.at(y, x, 0);
  return 0.299 * img.at(y, x, 0) + 0.587 * img.at(y, x, 1) + 0.114 * img.at(y, x, 2);
}

Image crop(const Image& img, const RandomResizedCrop& t, Rng& rng) {
  const double area = static_cast<double>(img.height) * img.width;
  for (int attempt = 0; attempt < 10; ++attempt) {
    const double target = area * uniform(rng, t.scale_min, t.scale_max);
    const double ratio = std::exp(uniform(rng, std::log(t.ratio_min), std::log(t.ratio_max)));
    const int w = static_cast<int>(std::lround(std::sqrt(target * ratio)));
    const int h = static_cast<int>(std::lround(std::sqrt(target / ratio)));
    if (w < 1 || h < 1 || w > img.width || h > img.height) continue;
    const int y0 = std::uniform_int_distribution<int>(0, img.height - h)(rng);
    const int x0 = std::uniform_int_distribution<int>(0, img.width - w)(rng);
    Image patch(h, w, img.channels);
    for (int y = 0; y < h; ++y) {
      for (int x = 0; x < w; ++x) {
        for (int c = 0; c < img.channels; ++c) patch.at(y, x, c) = img.at(y0 + y, x0 + x, c);
      }
    }
    return resize_bilinear(patch, img.height, img.width);
  }
  return img;
}

void jitter(Image& img, const ColorJitter& t, Rng& rng) {
  if (!coin(rng, t.p)) return;
  const double b = uniform(rng, std::max(0.0, 1 - t.brightness), 1 + t.brightness);
  const double c = uniform(rng, std::max(0.0, 1 - t.contrast), 1 + t.contrast);
  const double s = uniform(rng, std::max(0.0, 1 - t.saturation), 1 + t.saturation);
  for (auto& v : img.pixels) v *= b;
  clamp01(img);
  double mean = 0.0;
  for (int y = 0; y < img.height; ++y) {
    for (int x = 0; x < img.width; ++x) mean += luma(img, y, x);
  }
  mean /= static_cast<double>(img.height) * img.width;
  for (auto& v : img.pixels) v = (v - mean) * c + mean;
  clamp01(img);
  if (img.channels >= 3) {
    for (int y = 0; y < img.height; ++y) {
      for (int x = 0; x < img.width; ++x) {
        const double g = luma(img, y, x);
        for (int ch = 0; ch < img.channels; ++ch) img.at(y, x, ch) = g + (img.at(y, x, ch) - g) * s;
      }
    }
  }
  clamp01(img);
}

void grayscale(Image& img, const Grayscale& t, Rng& rng) {
  if (!coin(rng, t.p) || img.channels < 3) return;
  for (int y = 0; y < img.height; ++y) {
    for (int x = 0; x < img.width; ++x) {
      const double g = luma(img, y, x);
      for (int c = 0; c < img.channels; ++c) img.at(y, x, c) = g;
    }
  }
}

}  // namespace

Image horizontal_flip(const Image& img) {
  Image out(img.height, img.width, img.channels);
  for (int y = 0; y < img.height; ++y) {
    for (int x = 0; x < img.width; ++x) {
      for (int c = 0; c < img.channels; ++c) out.at(y, img.width - 1 - x, c) = img.at(y, x, c);
    }
  }
  return out;
}

std::vector<std::string> AugmentationPolicy::describe() const {
  std::vector<std::string> out;
  for (const auto& t : transforms) {
    std::ostringstream s;
    std::visit(Overloaded{
                   [&](const RandomResizedCrop& c) {
                     s << "random_resized_crop(scale=" << c.scale_min << ".." << c.scale_max << ", ratio=" << c.ratio_min
                       << ".." << c.ratio_max << ")";
                   },
                   [&](const HorizontalFlip& f) { s << "horizontal_flip(p=" << f.p << ")"; },
                   [&](const ColorJitter& j) {
                     s << "color_jitter(b=" << j.brightness << ", c=" << j.contrast << ", s=" << j.saturation
                       << ", p=" << j.p << ")";
                   },
                   [&](const Grayscale& g) { s << "grayscale(p=" << g.p << ")"; },
                   [&](const GaussianNoise& n) { s << "gaussian_noise(std=" << n.stddev << ")"; },
               },
               t);
    out.push_back(s.str());
  }
  return out;
}

AugmentationPolicy make_policy(const std::string& name) {
  if (name == "identity") return {name, {}};
  if (name == "default") {
    return {name, {RandomResizedCrop{}, HorizontalFlip{}, ColorJitter{}, Grayscale{}}};
  }
  if (name == "toy") return {name, {ColorJitter{0.1, 0.1, 0.0, 1.0}, GaussianNoise{0.01}}};
  if (name == "hflip") return {name, {HorizontalFlip{1.0}}};
  throw ValidationError("unknown augmentation policy '" + name + "'");
}

Image augment(const Image& image, const AugmentationPolicy& policy, std::uint64_t seed) {
  Rng rng(seed);
  Image out = image;
  for (const auto& t : policy.transforms) {
    std::visit(Overloaded{
                   [&](const RandomResizedCrop& c) { out = crop(out, c, rng); },
                   [&](const HorizontalFlip& f) {
                     if (coin(rng, f.p)) out = horizontal_flip(out);
                   },
                   [&](const ColorJitter& j) { jitter(out, j, rng); },
                   [&](const Grayscale& g) { grayscale(out, g, rng); },
                   [&](const GaussianNoise& n) {
                     std::normal_distribution<double> normal(0.0, n.stddev);
                     for (auto& v : out.pixels) v += normal(rng);
                   },
               },
               t);
    clamp01(out);
  }
  return out;
}

}  // namespace xdr::data
