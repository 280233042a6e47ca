#pragma once

#include <string>
#include <utility>
#include <vector>

#include "probfuse/context_mapping.hpp"
#include "probfuse/fused_tensor.hpp"
#include "probfuse/probability_map.hpp"
#include "probfuse/raster.hpp"

namespace probfuse {

using NamedMap = std::pair<std::string, ProbabilityMap>;

/// Concatenates RGB (scaled by 1/255) with one probability channel per entry of
/// `mapping.channel_order`. A context class without a map contributes an all-zero channel;
/// maps for classes outside the channel order are ignored.
///
/// Throws ShapeError when a map's size differs from the image and InputError when a class
/// appears twice in `maps`.
FusedTensor build_fused(const RgbImage& image, const std::vector<NamedMap>& maps,
                        const ContextMapping& mapping);

}  // namespace probfuse
