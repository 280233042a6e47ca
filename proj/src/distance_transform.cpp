#include "probfuse/distance_transform.hpp"

#include <algorithm>
#include <limits>

#include "probfuse/errors.hpp"

namespace probfuse {

namespace {

constexpr std::int64_t kUnset = -1;

// Lower envelope of parabolas y = (x - site)^2 + f[site] over the sites with f >= 0.
// Breakpoints are kept as exact fractions num / den (den > 0).
class RowEnvelope {
 public:
  explicit RowEnvelope(int n) : sites_(n), num_(n + 1), den_(n + 1) {}

  // f[x] is the squared vertical distance at column x, or kUnset. Writes d[x] in place.
  void transform(std::span<std::int64_t> f) {
    const int n = static_cast<int>(f.size());
    int k = -1;
    for (int q = 0; q < n; ++q) {
      if (f[q] == kUnset) continue;
      while (k >= 0) {
        const int p = sites_[k];
        // intersection of parabolas p and q: s = (f[q]+q^2 - f[p]-p^2) / (2(q-p))
        const std::int64_t s_num = f[q] + std::int64_t(q) * q - f[p] - std::int64_t(p) * p;
        const std::int64_t s_den = 2 * std::int64_t(q - p);
        // drop p when s <= breakpoint that opened p's interval
        if (k > 0 && s_num * den_[k] <= num_[k] * s_den) {
          --k;
          continue;
        }
        ++k;
        sites_[k] = q;
        num_[k] = s_num;
        den_[k] = s_den;
        break;
      }
      if (k < 0) {
        k = 0;
        sites_[0] = q;
      }
    }
    // k >= 0 is guaranteed by the caller: at least one column is set
    const int count = k + 1;
    int j = 0;
    for (int q = 0; q < n; ++q) {
      // advance while the next breakpoint is < q
      while (j + 1 < count && num_[j + 1] < std::int64_t(q) * den_[j + 1]) ++j;
      const std::int64_t dx = q - sites_[j];
      buffer_.push_back(dx * dx + f[sites_[j]]);
    }
    std::copy(buffer_.begin(), buffer_.end(), f.begin());
    buffer_.clear();
  }

 private:
  std::vector<int> sites_;
  std::vector<std::int64_t> num_;
  std::vector<std::int64_t> den_;
  std::vector<std::int64_t> buffer_;
};

}  // namespace

std::vector<double> DistanceField::distances() const {
  std::vector<double> out(squared_.size());
  std::transform(squared_.begin(), squared_.end(), out.begin(),
                 [](std::int64_t s) { return std::sqrt(static_cast<double>(s)); });
  return out;
}

double DistanceField::max_distance() const {
  if (squared_.empty()) return 0.0;
  return std::sqrt(static_cast<double>(*std::max_element(squared_.begin(), squared_.end())));
}

DistanceField edt(const BinaryMask& mask) {
  const int w = mask.width();
  const int h = mask.height();
  const auto cells = mask.cells();
  const std::size_t W = std::size_t(w);

  // Pass 1: vertical distance to the nearest set cell in the same column, swept row by row
  // so memory access stays sequential.
  std::vector<std::int64_t> out(cells.size(), kUnset);
  std::vector<int> last(W, -1);
  for (int y = 0; y < h; ++y) {
    const std::size_t row = std::size_t(y) * W;
    for (int x = 0; x < w; ++x) {
      if (cells[row + x]) last[x] = y;
      if (last[x] >= 0) out[row + x] = y - last[x];
    }
  }
  std::fill(last.begin(), last.end(), -1);
  bool any = false;
  for (int y = h - 1; y >= 0; --y) {
    const std::size_t row = std::size_t(y) * W;
    for (int x = 0; x < w; ++x) {
      if (cells[row + x]) {
        last[x] = y;
        any = true;
      }
      if (last[x] >= 0) {
        const std::int64_t down = last[x] - y;
        if (out[row + x] == kUnset || down < out[row + x]) out[row + x] = down;
      }
    }
  }
  if (!any) throw EmptyMaskError();
  for (auto& v : out) {
    if (v != kUnset) v *= v;
  }

  // Pass 2: per-row lower envelope.
  RowEnvelope envelope(w);
  for (int y = 0; y < h; ++y) {
    envelope.transform(std::span<std::int64_t>(out.data() + std::size_t(y) * W, W));
  }
  return DistanceField(w, h, std::move(out));
}

DistanceField edt_bruteforce(const BinaryMask& mask) {
  std::vector<Cell> set;
  for (int y = 0; y < mask.height(); ++y)
    for (int x = 0; x < mask.width(); ++x)
      if (mask.at(x, y)) set.push_back({x, y});
  if (set.empty()) throw EmptyMaskError();

  std::vector<std::int64_t> out(mask.size());
  for (int y = 0; y < mask.height(); ++y) {
    for (int x = 0; x < mask.width(); ++x) {
      std::int64_t best = std::numeric_limits<std::int64_t>::max();
      for (const Cell& c : set) {
        const std::int64_t dx = x - c.x;
        const std::int64_t dy = y - c.y;
        best = std::min(best, dx * dx + dy * dy);
      }
      out[std::size_t(y) * std::size_t(mask.width()) + std::size_t(x)] = best;
    }
  }
  return DistanceField(mask.width(), mask.height(), std::move(out));
}

}  // namespace probfuse
