#pragma once

#include <span>
#include <string>

#include "probfuse/annotations.hpp"
#include "probfuse/raster.hpp"

namespace probfuse {

/// Burns every polygon of `class_name` into a width x height mask.
///
/// Cell (x, y) is sampled at the point (x, y). A cell is set when that point lies
/// inside a polygon under the even-odd rule or on its boundary. Polygons of other
/// classes are ignored, so an absent class yields an all-zero mask.
BinaryMask rasterize(std::span<const AnnotationRecord> records, const std::string& class_name,
                     int width, int height);

/// Burns a single polygon into `mask` (OR-ed with existing content).
void fill_polygon(BinaryMask& mask, std::span<const Point> polygon);

}  // namespace probfuse
