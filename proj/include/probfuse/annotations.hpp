#pragma once

#include <array>
#include <string>
#include <string_view>
#include <vector>

namespace probfuse {

struct Point {
  double x = 0.0;
  double y = 0.0;
};

/// One object of a DOTA ground-truth file: a 4-corner polygon in pixel coordinates.
struct AnnotationRecord {
  std::string class_name;
  std::array<Point, 4> polygon{};
  int difficulty = 0;
};

/// The 15 DOTA v1.0 categories, in the column order of the usual results table.
const std::vector<std::string>& dota_classes();

/// Parses the text of a DOTA annotation file.
///
/// Each data line is `x1 y1 x2 y2 x3 y3 x4 y4 class difficulty`. Lines starting with
/// `imagesource` or `gsd` and blank lines are skipped. Throws ParseError on the first
/// malformed line. When `class_list` is non-empty, class names outside it are rejected.
std::vector<AnnotationRecord> parse_annotations(std::string_view contents,
                                                const std::vector<std::string>& class_list = {});

std::vector<AnnotationRecord> load_annotations(const std::string& path,
                                               const std::vector<std::string>& class_list = {});

}  // namespace probfuse
