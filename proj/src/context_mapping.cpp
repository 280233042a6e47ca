#include "probfuse/context_mapping.hpp"

#include <algorithm>
#include <set>

#include "probfuse/errors.hpp"

namespace probfuse {

namespace {

bool in(const std::vector<std::string>& v, const std::string& s) {
  return std::find(v.begin(), v.end(), s) != v.end();
}

}  // namespace

std::string_view to_string(MappingMode m) {
  switch (m) {
    case MappingMode::Direct: return "direct";
    case MappingMode::Indirect: return "indirect";
    case MappingMode::Single: return "single";
  }
  return "direct";
}

MappingMode parse_mapping_mode(std::string_view s) {
  if (s == "direct") return MappingMode::Direct;
  if (s == "indirect") return MappingMode::Indirect;
  if (s == "single") return MappingMode::Single;
  throw ParameterError("unknown mapping mode '" + std::string(s) +
                       "' (expected direct, indirect or single)");
}

ContextMapping ContextMapping::direct(const std::vector<std::string>& classes) {
  ContextMapping m;
  m.mode = MappingMode::Direct;
  m.channel_order = classes;
  for (const auto& c : classes) m.entries.push_back({c, {c}});
  return m;
}

ContextMapping ContextMapping::indirect_default() {
  return indirect({{"harbor", {"ship"}},
                   {"bridge", {"small-vehicle", "large-vehicle"}},
                   {"roundabout", {"small-vehicle", "large-vehicle"}}});
}

ContextMapping ContextMapping::indirect(std::vector<ContextEntry> entries) {
  ContextMapping m;
  m.mode = MappingMode::Indirect;
  for (const auto& e : entries) m.channel_order.push_back(e.context);
  m.entries = std::move(entries);
  return m;
}

ContextMapping ContextMapping::single(const std::string& context_class) {
  ContextMapping m;
  m.mode = MappingMode::Single;
  m.entries.push_back({context_class, {}});
  m.channel_order.push_back(context_class);
  return m;
}

void ContextMapping::validate(const std::vector<std::string>& classes) const {
  std::set<std::string> seen;
  for (const auto& c : channel_order) {
    if (!in(classes, c)) throw InputError("context class '" + c + "' is not in the class list");
    if (!seen.insert(c).second) throw InputError("context class '" + c + "' listed twice");
    if (c == "R" || c == "G" || c == "B") throw InputError("context class may not be named " + c);
  }
  for (const auto& e : entries) {
    if (!in(channel_order, e.context)) {
      throw InputError("mapping entry '" + e.context + "' has no channel");
    }
    for (const auto& t : e.targets) {
      if (!in(classes, t)) throw InputError("target class '" + t + "' is not in the class list");
    }
  }
  switch (mode) {
    case MappingMode::Direct:
      if (channel_order != classes) {
        throw InputError("direct mapping must use the full class list as channel order");
      }
      break;
    case MappingMode::Single:
      if (channel_order.size() != 1) {
        throw InputError("single mapping must have exactly one context class");
      }
      break;
    case MappingMode::Indirect:
      break;
  }
}

}  // namespace probfuse
