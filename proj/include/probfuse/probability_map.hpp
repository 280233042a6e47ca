#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "probfuse/raster.hpp"

namespace probfuse {

enum class MapMethod { Eq1, Eq2 };

std::string_view to_string(MapMethod m);
MapMethod parse_map_method(std::string_view s);

/// Parameters of the neighbourhood-weighted map.
struct Eq2Params {
  double alpha = 1.0;  // decay rate of exp(-alpha * distance)
  int radius = 1;      // Chebyshev radius of the neighbourhood, in cells

  /// Throws ParameterError unless alpha > 0, radius >= 1 and the radius-edge weight
  /// exp(-alpha * radius * sqrt 2) is representable.
  void validate() const;
};

/// How prob_map_eq2 evaluates the contribution of mask cells outside the neighbourhood.
enum class Eq2Strategy {
  Auto,    // pick by problem size
  Direct,  // explicit sum over mask cells, only at cells with a non-empty neighbourhood
  Fft,     // one FFT convolution over the whole raster
};

/// H x W raster of probabilities in [0, 1].
///
/// Values are kept in double precision; fused tensors narrow them to 32-bit floats.
struct ProbabilityMap {
  int width = 0;
  int height = 0;
  std::vector<double> values;  // row-major
  MapMethod method = MapMethod::Eq1;
  std::optional<Eq2Params> params;

  double at(int x, int y) const { return values[std::size_t(y) * std::size_t(width) + std::size_t(x)]; }

  /// All-zero map, used when a context class has no mask cell in an image.
  static ProbabilityMap zeros(int width, int height, MapMethod method,
                              std::optional<Eq2Params> params = std::nullopt);

  /// round(255 * P) per cell, for 8-bit image export.
  std::vector<std::uint8_t> to_gray8() const;
};

/// P = 1 - d / max(d) with d the exact EDT. An all-ones mask maps to P = 1 everywhere.
/// Throws EmptyMaskError on an empty mask.
ProbabilityMap prob_map_eq1(const BinaryMask& mask);

/// P(p) = sum_{r in R(p)} exp(-a |r-p|) / sum_{m in M} exp(-a |m-p|), where M is the set of
/// mask cells and R(p) the mask cells within Chebyshev `radius` of p. Distances inside the
/// exponentials are Euclidean. P(p) = 0 when R(p) is empty.
ProbabilityMap prob_map_eq2(const BinaryMask& mask, const Eq2Params& params,
                            Eq2Strategy strategy = Eq2Strategy::Auto);

/// Literal double loop over cells x mask cells. Test oracle.
ProbabilityMap prob_map_eq2_bruteforce(const BinaryMask& mask, const Eq2Params& params);

/// Dispatch on method; `params` is ignored for Eq1.
ProbabilityMap make_probability_map(const BinaryMask& mask, MapMethod method,
                                    const Eq2Params& params = {});

void write_probability_png(const ProbabilityMap& map, const std::string& path);

}  // namespace probfuse
