#pragma once

#include <cstdint>
#include <span>
#include <string>

#include "probfuse/raster.hpp"

namespace probfuse {

/// Reads a single-channel 8-bit grayscale PNG. Values >= 128 become 1, everything else 0.
/// Throws UnsupportedFormatError for colour, alpha, palette or 16-bit input and IoError
/// when the file cannot be read.
BinaryMask read_mask(const std::string& path, std::string class_name = {});

/// Writes a mask as 8-bit grayscale PNG with values 0 and 255.
void write_mask(const BinaryMask& mask, const std::string& path);

/// Reads an 8-bit PNG as RGB. Grayscale is replicated, alpha is dropped.
RgbImage read_rgb(const std::string& path);
void write_rgb(const RgbImage& image, const std::string& path);

/// Writes raw 8-bit grayscale pixels.
void write_gray8(std::span<const std::uint8_t> pixels, int width, int height,
                 const std::string& path);

struct PngInfo {
  int width = 0;
  int height = 0;
};

/// Header-only probe; does not decode pixel data.
PngInfo probe_png(const std::string& path);

}  // namespace probfuse
