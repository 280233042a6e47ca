#include "probfuse/raster.hpp"

#include <algorithm>

#include "probfuse/errors.hpp"

namespace probfuse {

namespace {

void check_dims(int width, int height) {
  if (width < 1 || height < 1) {
    throw ShapeError("mask dimensions must be at least 1x1, got " + std::to_string(width) + "x" +
                     std::to_string(height));
  }
}

}  // namespace

BinaryMask::BinaryMask(int width, int height, std::string class_name)
    : width_(width), height_(height), class_name_(std::move(class_name)) {
  check_dims(width, height);
  cells_.assign(std::size_t(width) * std::size_t(height), 0);
}

BinaryMask::BinaryMask(int width, int height, std::vector<std::uint8_t> cells,
                       std::string class_name)
    : width_(width), height_(height), cells_(std::move(cells)), class_name_(std::move(class_name)) {
  check_dims(width, height);
  if (cells_.size() != std::size_t(width) * std::size_t(height)) {
    throw ShapeError("cell count does not match mask dimensions");
  }
  for (auto& c : cells_) c = c ? 1 : 0;
}

std::size_t BinaryMask::count() const noexcept {
  return static_cast<std::size_t>(std::count(cells_.begin(), cells_.end(), std::uint8_t{1}));
}

}  // namespace probfuse
