#pragma once

#include <cmath>
#include <cstdint>
#include <span>
#include <vector>

#include "probfuse/raster.hpp"

namespace probfuse {

/// Per-cell Euclidean distance to the nearest set cell of a mask.
///
/// Stored as exact integer squared distances between cell centres; `distance()`
/// applies the one square root.
class DistanceField {
 public:
  DistanceField() = default;
  DistanceField(int width, int height, std::vector<std::int64_t> squared)
      : width_(width), height_(height), squared_(std::move(squared)) {}

  int width() const noexcept { return width_; }
  int height() const noexcept { return height_; }
  std::size_t size() const noexcept { return squared_.size(); }

  std::int64_t squared(int x, int y) const { return squared_[index(x, y)]; }
  double distance(int x, int y) const { return std::sqrt(static_cast<double>(squared(x, y))); }
  std::span<const std::int64_t> squared() const noexcept { return squared_; }

  /// Materialises all distances, row-major.
  std::vector<double> distances() const;
  double max_distance() const;

  friend bool operator==(const DistanceField&, const DistanceField&) = default;

 private:
  std::size_t index(int x, int y) const noexcept {
    return std::size_t(y) * std::size_t(width_) + std::size_t(x);
  }

  int width_ = 0;
  int height_ = 0;
  std::vector<std::int64_t> squared_;
};

/// Exact Euclidean distance transform in O(width * height).
///
/// A vertical nearest-cell sweep is followed by a per-row lower envelope of
/// parabolas. All arithmetic is integral. Throws EmptyMaskError when no cell is set.
DistanceField edt(const BinaryMask& mask);

/// Literal min over all set cells for every cell. O(n * |mask|); test oracle.
DistanceField edt_bruteforce(const BinaryMask& mask);

}  // namespace probfuse
