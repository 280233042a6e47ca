#include "probfuse/annotations.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>

#include "probfuse/errors.hpp"

namespace probfuse {

namespace {

std::vector<std::string_view> split_ws(std::string_view line) {
  std::vector<std::string_view> out;
  std::size_t i = 0;
  while (i < line.size()) {
    while (i < line.size() && std::isspace(static_cast<unsigned char>(line[i]))) ++i;
    std::size_t j = i;
    while (j < line.size() && !std::isspace(static_cast<unsigned char>(line[j]))) ++j;
    if (j > i) out.push_back(line.substr(i, j - i));
    i = j;
  }
  return out;
}

bool parse_double(std::string_view tok, double& out) {
  auto [ptr, ec] = std::from_chars(tok.data(), tok.data() + tok.size(), out);
  return ec == std::errc() && ptr == tok.data() + tok.size();
}

bool parse_int(std::string_view tok, int& out) {
  auto [ptr, ec] = std::from_chars(tok.data(), tok.data() + tok.size(), out);
  return ec == std::errc() && ptr == tok.data() + tok.size();
}

}  // namespace

const std::vector<std::string>& dota_classes() {
  static const std::vector<std::string> classes = {
      "plane",         "ship",           "storage-tank",     "baseball-diamond",
      "tennis-court",  "basketball-court", "ground-track-field", "harbor",
      "bridge",        "large-vehicle",  "small-vehicle",    "helicopter",
      "roundabout",    "soccer-ball-field", "swimming-pool"};
  return classes;
}

std::vector<AnnotationRecord> parse_annotations(std::string_view contents,
                                                const std::vector<std::string>& class_list) {
  std::vector<AnnotationRecord> records;
  std::size_t line_no = 0;
  std::size_t pos = 0;
  while (pos <= contents.size()) {
    std::size_t end = contents.find('\n', pos);
    if (end == std::string_view::npos) end = contents.size();
    std::string_view line = contents.substr(pos, end - pos);
    pos = end + 1;
    ++line_no;

    auto tokens = split_ws(line);
    if (tokens.empty()) {
      if (end == contents.size()) break;
      continue;
    }
    if (tokens[0].starts_with("imagesource") || tokens[0].starts_with("gsd")) continue;

    if (tokens.size() != 10) {
      throw ParseError(line_no, "expected 10 tokens, found " + std::to_string(tokens.size()));
    }
    AnnotationRecord rec;
    for (int k = 0; k < 4; ++k) {
      double x = 0, y = 0;
      if (!parse_double(tokens[2 * k], x) || !parse_double(tokens[2 * k + 1], y)) {
        throw ParseError(line_no, "non-numeric coordinate");
      }
      if (!std::isfinite(x) || !std::isfinite(y) || x < 0 || y < 0) {
        throw ParseError(line_no, "coordinate must be finite and non-negative");
      }
      rec.polygon[k] = {x, y};
    }
    rec.class_name = std::string(tokens[8]);
    if (!class_list.empty() &&
        std::find(class_list.begin(), class_list.end(), rec.class_name) == class_list.end()) {
      throw ParseError(line_no, "unknown class '" + rec.class_name + "'");
    }
    if (!parse_int(tokens[9], rec.difficulty)) {
      throw ParseError(line_no, "non-integer difficulty flag");
    }
    records.push_back(std::move(rec));
    if (end == contents.size()) break;
  }
  return records;
}

std::vector<AnnotationRecord> load_annotations(const std::string& path,
                                               const std::vector<std::string>& class_list) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open annotation file " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  try {
    return parse_annotations(ss.str(), class_list);
  } catch (const ParseError& e) {
    throw ParseError(e.line(), std::string(path) + ": " +
                                   std::string(e.what()).substr(std::string(e.what()).find(": ") + 2));
  }
}

}  // namespace probfuse
