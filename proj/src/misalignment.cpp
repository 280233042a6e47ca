#include "probfuse/misalignment.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>

#include "probfuse/errors.hpp"

namespace probfuse {

namespace {

std::uint64_t fnv1a64(std::string_view s) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : s) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

// Uniform in [0, 1) from the top 53 bits; identical on every standard library.
double unit_double(std::mt19937_64& gen) { return static_cast<double>(gen() >> 11) * 0x1.0p-53; }

}  // namespace

void ShiftPolicy::validate() const {
  if (!(min_frac >= 0.0) || !(max_frac <= 1.0)) {
    throw ParameterError("shift fractions must lie in [0, 1]");
  }
  if (min_frac > max_frac) throw ParameterError("shift min_frac exceeds max_frac");
}

std::uint64_t derive_seed(std::uint64_t master_seed, std::string_view key) {
  return splitmix64(splitmix64(master_seed) ^ fnv1a64(key));
}

BinaryMask apply_shift(const BinaryMask& mask, const ShiftSpec& spec) {
  const int w = mask.width();
  const int h = mask.height();
  if (std::abs(spec.dx) > w || std::abs(spec.dy) > h) {
    throw ParameterError("shift (" + std::to_string(spec.dx) + ", " + std::to_string(spec.dy) +
                         ") exceeds raster " + std::to_string(w) + "x" + std::to_string(h));
  }
  BinaryMask out(w, h, mask.class_name());
  for (int y = 0; y < h; ++y) {
    const int sy = y - spec.dy;
    if (sy < 0 || sy >= h) continue;
    for (int x = 0; x < w; ++x) {
      const int sx = x - spec.dx;
      if (sx >= 0 && sx < w && mask.at(sx, sy)) out.set(x, y);
    }
  }
  return out;
}

ShiftSpec sample_shift(const ShiftPolicy& policy, std::string_view image_id, int width,
                       int height) {
  policy.validate();
  if (width < 1 || height < 1) throw ParameterError("image dimensions must be positive");

  std::mt19937_64 gen(derive_seed(policy.master_seed, image_id));
  const double u = policy.min_frac + (policy.max_frac - policy.min_frac) * unit_double(gen);
  const double theta = 2.0 * std::numbers::pi * unit_double(gen);
  const double magnitude = u * width;
  ShiftSpec spec{static_cast<int>(std::lround(magnitude * std::cos(theta))),
                 static_cast<int>(std::lround(magnitude * std::sin(theta)))};
  // magnitude is referenced to width, so a tall-thin raster can need a vertical clamp
  spec.dy = std::clamp(spec.dy, -height, height);
  return spec;
}

}  // namespace probfuse
