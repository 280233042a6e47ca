#pragma once

#include <cstdint>
#include <string>
#include <string_view>

#include "probfuse/raster.hpp"

namespace probfuse {

/// Rigid translation in whole pixels. Positive dx moves content right, positive dy down.
struct ShiftSpec {
  int dx = 0;
  int dy = 0;
  friend bool operator==(const ShiftSpec&, const ShiftSpec&) = default;
};

/// Random-shift protocol: magnitude drawn uniformly in [min_frac, max_frac] * image width,
/// direction uniform on the circle.
struct ShiftPolicy {
  double min_frac = 0.05;
  double max_frac = 0.10;
  std::uint64_t master_seed = 0;

  void validate() const;
};

/// Translates mask content by `spec`; vacated cells are 0 and content leaving the frame is
/// dropped. Throws ParameterError when |dx| > width or |dy| > height.
BinaryMask apply_shift(const BinaryMask& mask, const ShiftSpec& spec);

/// Draws the shift for one image. The draw depends only on (master_seed, image_id, width),
/// never on call order.
ShiftSpec sample_shift(const ShiftPolicy& policy, std::string_view image_id, int width,
                       int height);

/// Stable 64-bit seed for a (master_seed, key) pair.
std::uint64_t derive_seed(std::uint64_t master_seed, std::string_view key);

}  // namespace probfuse
