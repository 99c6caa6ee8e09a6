#pragma once

#include "xdr/core/types.hpp"

#include <filesystem>
#include <optional>

namespace xdr::data {

/// Decodes any format OpenCV reads, converts to RGB and resizes to
/// size x size. Returns nullopt when the file cannot be decoded.
std::optional<Image> read_image(const std::filesystem::path& path, int size);

/// Writes an 8-bit image; the format follows the extension.
void write_image(const std::filesystem::path& path, const Image& image);

/// Bilinear resize, align-corners=false convention.
Image resize_bilinear(const Image& image, int height, int width);

bool has_image_extension(const std::filesystem::path& path);

}  // namespace xdr::data
