#include "probfuse/fusion.hpp"

#include <algorithm>
#include <map>

#include "probfuse/errors.hpp"

namespace probfuse {

FusedTensor build_fused(const RgbImage& image, const std::vector<NamedMap>& maps,
                        const ContextMapping& mapping) {
  if (image.width < 1 || image.height < 1 ||
      image.pixels.size() != std::size_t(image.width) * std::size_t(image.height) * 3) {
    throw ShapeError("RGB image buffer does not match its dimensions");
  }
  for (std::size_t k = 0; k < mapping.channel_order.size(); ++k) {
    const auto& c = mapping.channel_order[k];
    if (c == "R" || c == "G" || c == "B" ||
        std::find(mapping.channel_order.begin(), mapping.channel_order.begin() + k, c) !=
            mapping.channel_order.begin() + k) {
      throw InputError("channel name '" + c + "' is not unique");
    }
  }
  std::map<std::string, const ProbabilityMap*> by_class;
  for (const auto& [name, map] : maps) {
    if (map.width != image.width || map.height != image.height) {
      throw ShapeError("map '" + name + "' is " + std::to_string(map.width) + "x" +
                       std::to_string(map.height) + ", image is " + std::to_string(image.width) +
                       "x" + std::to_string(image.height));
    }
    if (!by_class.emplace(name, &map).second) {
      throw InputError("duplicate map for class '" + name + "'");
    }
  }

  FusedTensor t;
  t.width = static_cast<std::uint32_t>(image.width);
  t.height = static_cast<std::uint32_t>(image.height);
  t.channel_names = {"R", "G", "B"};
  t.channel_names.insert(t.channel_names.end(), mapping.channel_order.begin(),
                         mapping.channel_order.end());
  const std::size_t plane = t.plane_size();
  t.data.assign(std::size_t(t.channels()) * plane, 0.0f);

  for (std::size_t i = 0; i < plane; ++i) {
    for (std::size_t c = 0; c < 3; ++c) {
      t.data[c * plane + i] = static_cast<float>(image.pixels[i * 3 + c]) / 255.0f;
    }
  }
  for (std::size_t k = 0; k < mapping.channel_order.size(); ++k) {
    auto it = by_class.find(mapping.channel_order[k]);
    if (it == by_class.end()) continue;
    float* dst = &t.data[(3 + k) * plane];
    const auto& values = it->second->values;
    for (std::size_t i = 0; i < plane; ++i) {
      dst[i] = static_cast<float>(std::clamp(values[i], 0.0, 1.0));
    }
  }
  return t;
}

}  // namespace probfuse
