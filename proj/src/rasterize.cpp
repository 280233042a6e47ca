#include "probfuse/rasterize.hpp"

#include <algorithm>
#include <cmath>
#include <vector>

namespace probfuse {

namespace {

// Integer range [lo, hi] of cells covering the closed real interval [a, b], clipped to [0, n).
bool cell_span(double a, double b, int n, int& lo, int& hi) {
  const double l = std::max(std::ceil(a), 0.0);
  const double h = std::min(std::floor(b), static_cast<double>(n - 1));
  if (l > h) return false;
  lo = static_cast<int>(l);
  hi = static_cast<int>(h);
  return true;
}

void mark_boundary(BinaryMask& mask, const Point& a, const Point& b) {
  int y0 = 0, y1 = 0;
  if (!cell_span(std::min(a.y, b.y), std::max(a.y, b.y), mask.height(), y0, y1)) return;
  for (int y = y0; y <= y1; ++y) {
    if (a.y == b.y) {
      int x0 = 0, x1 = 0;
      if (!cell_span(std::min(a.x, b.x), std::max(a.x, b.x), mask.width(), x0, x1)) continue;
      for (int x = x0; x <= x1; ++x) mask.set(x, y);
    } else {
      const double x = a.x + (y - a.y) * (b.x - a.x) / (b.y - a.y);
      if (x == std::floor(x) && x >= 0 && x < mask.width()) mask.set(static_cast<int>(x), y);
    }
  }
}

}  // namespace

void fill_polygon(BinaryMask& mask, std::span<const Point> polygon) {
  const std::size_t n = polygon.size();
  if (n == 0) return;

  double min_y = polygon[0].y, max_y = polygon[0].y;
  for (const auto& p : polygon) {
    min_y = std::min(min_y, p.y);
    max_y = std::max(max_y, p.y);
  }

  int y0 = 0, y1 = 0;
  std::vector<double> crossings;
  if (cell_span(min_y, max_y, mask.height(), y0, y1)) {
    for (int y = y0; y <= y1; ++y) {
      crossings.clear();
      for (std::size_t i = 0; i < n; ++i) {
        const Point& a = polygon[i];
        const Point& b = polygon[(i + 1) % n];
        if (a.y == b.y) continue;
        const double lo = std::min(a.y, b.y);
        const double hi = std::max(a.y, b.y);
        // half-open so a vertex shared by two edges is counted once
        if (y < lo || y >= hi) continue;
        crossings.push_back(a.x + (y - a.y) * (b.x - a.x) / (b.y - a.y));
      }
      std::sort(crossings.begin(), crossings.end());
      for (std::size_t k = 0; k + 1 < crossings.size(); k += 2) {
        int x0 = 0, x1 = 0;
        if (!cell_span(crossings[k], crossings[k + 1], mask.width(), x0, x1)) continue;
        for (int x = x0; x <= x1; ++x) mask.set(x, y);
      }
    }
  }

  for (std::size_t i = 0; i < n; ++i) mark_boundary(mask, polygon[i], polygon[(i + 1) % n]);
}

BinaryMask rasterize(std::span<const AnnotationRecord> records, const std::string& class_name,
                     int width, int height) {
  BinaryMask mask(width, height, class_name);
  for (const auto& rec : records) {
    if (rec.class_name != class_name) continue;
    fill_polygon(mask, rec.polygon);
  }
  return mask;
}

}  // namespace probfuse
