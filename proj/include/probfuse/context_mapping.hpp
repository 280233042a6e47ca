#pragma once

#include <string>
#include <string_view>
#include <vector>

namespace probfuse {

enum class MappingMode { Direct, Indirect, Single };

std::string_view to_string(MappingMode m);
MappingMode parse_mapping_mode(std::string_view s);

/// A context class and the detection targets it is meant to support.
struct ContextEntry {
  std::string context;
  std::vector<std::string> targets;
  friend bool operator==(const ContextEntry&, const ContextEntry&) = default;
};

/// Which context masks become input channels, and in what order.
struct ContextMapping {
  MappingMode mode = MappingMode::Direct;
  std::vector<ContextEntry> entries;
  std::vector<std::string> channel_order;

  /// One channel per class, each supporting itself.
  static ContextMapping direct(const std::vector<std::string>& classes);
  /// harbor -> ship; bridge, roundabout -> small-vehicle, large-vehicle.
  static ContextMapping indirect_default();
  static ContextMapping indirect(std::vector<ContextEntry> entries);
  /// Exactly one context channel.
  static ContextMapping single(const std::string& context_class);

  /// Checks the mode's shape rules and that every name is in `classes`.
  void validate(const std::vector<std::string>& classes) const;

  friend bool operator==(const ContextMapping&, const ContextMapping&) = default;
};

}  // namespace probfuse
