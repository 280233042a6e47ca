#include "probfuse/probability_map.hpp"

#include <fftw3.h>

#include <algorithm>
#include <cmath>
#include <memory>
#include <mutex>

#include "probfuse/distance_transform.hpp"
#include "probfuse/errors.hpp"
#include "probfuse/png_io.hpp"

namespace probfuse {

namespace {

// Below this many (active cell, mask cell) pairs the direct far-field sum beats an FFT.
constexpr double kDirectPairBudget = 4.0e6;

// Bound on the change in P from dropping far-kernel terms beyond the truncation reach.
constexpr double kTruncationTolerance = 1e-12;

std::vector<Cell> mask_cells(const BinaryMask& mask) {
  std::vector<Cell> cells;
  cells.reserve(mask.count());
  for (int y = 0; y < mask.height(); ++y)
    for (int x = 0; x < mask.width(); ++x)
      if (mask.at(x, y)) cells.push_back({x, y});
  return cells;
}

int chebyshev(int dx, int dy) { return std::max(std::abs(dx), std::abs(dy)); }

// Smallest n' >= n whose only prime factors are 2, 3, 5, 7.
int fft_size(int n) {
  for (int m = std::max(n, 1);; ++m) {
    int r = m;
    for (int f : {2, 3, 5, 7})
      while (r % f == 0) r /= f;
    if (r == 1) return m;
  }
}

// FFTW planning is not thread-safe; execution is.
std::mutex& fftw_planner_mutex() {
  static std::mutex m;
  return m;
}

struct FftwFree {
  void operator()(void* p) const { fftw_free(p); }
};
template <class T>
using FftwBuffer = std::unique_ptr<T[], FftwFree>;

class FftwPlan {
 public:
  explicit FftwPlan(fftw_plan p) : plan_(p) {}
  ~FftwPlan() {
    std::lock_guard lock(fftw_planner_mutex());
    fftw_destroy_plan(plan_);
  }
  FftwPlan(const FftwPlan&) = delete;
  FftwPlan& operator=(const FftwPlan&) = delete;
  void execute() const { fftw_execute(plan_); }

 private:
  fftw_plan plan_;
};

// Kernel offsets with Chebyshev norm above this contribute at most
// total * exp(-alpha * reach) to the far sum, while the numerator at any cell that has a
// mask cell in its window is at least exp(-alpha * radius * sqrt 2). Their ratio bounds the
// change in P.
int truncation_reach(const Eq2Params& params, std::size_t total) {
  const double reach = params.radius * std::sqrt(2.0) +
                       (std::log(double(total)) - std::log(kTruncationTolerance)) / params.alpha;
  return reach >= 1e9 ? 1'000'000'000 : static_cast<int>(std::ceil(reach));
}

// sum over mask cells m with radius < Chebyshev(m - p) <= reach of exp(-alpha |m - p|), for
// all p, as a linear convolution evaluated by FFT.
std::vector<double> far_field_fft(const BinaryMask& mask, const Eq2Params& params,
                                  std::size_t total) {
  const int h = mask.height();
  const int w = mask.width();
  const int reach = truncation_reach(params, total);
  const int ry = std::min(h - 1, reach);
  const int rx = std::min(w - 1, reach);
  // padding of n + reach keeps the circular wrap out of [0, n)
  const int ph = fft_size(h + ry);
  const int pw = fft_size(w + rx);
  const std::size_t real_n = std::size_t(ph) * std::size_t(pw);
  const std::size_t cplx_n = std::size_t(ph) * std::size_t(pw / 2 + 1);

  FftwBuffer<double> signal(fftw_alloc_real(real_n));
  FftwBuffer<double> kernel(fftw_alloc_real(real_n));
  FftwBuffer<fftw_complex> signal_hat(fftw_alloc_complex(cplx_n));
  FftwBuffer<fftw_complex> kernel_hat(fftw_alloc_complex(cplx_n));
  if (!signal || !kernel || !signal_hat || !kernel_hat) throw std::bad_alloc();

  std::unique_ptr<FftwPlan> fwd_signal, fwd_kernel, inverse;
  {
    std::lock_guard lock(fftw_planner_mutex());
    fwd_signal = std::make_unique<FftwPlan>(
        fftw_plan_dft_r2c_2d(ph, pw, signal.get(), signal_hat.get(), FFTW_ESTIMATE));
    fwd_kernel = std::make_unique<FftwPlan>(
        fftw_plan_dft_r2c_2d(ph, pw, kernel.get(), kernel_hat.get(), FFTW_ESTIMATE));
    inverse = std::make_unique<FftwPlan>(
        fftw_plan_dft_c2r_2d(ph, pw, signal_hat.get(), signal.get(), FFTW_ESTIMATE));
  }

  std::fill_n(signal.get(), real_n, 0.0);
  std::fill_n(kernel.get(), real_n, 0.0);
  const auto cells = mask.cells();
  for (int y = 0; y < h; ++y)
    for (int x = 0; x < w; ++x)
      signal[std::size_t(y) * pw + x] = cells[std::size_t(y) * std::size_t(w) + std::size_t(x)];

  for (int dy = -ry; dy <= ry; ++dy) {
    const std::size_t row = std::size_t((dy + ph) % ph) * std::size_t(pw);
    for (int dx = -rx; dx <= rx; ++dx) {
      if (chebyshev(dx, dy) <= params.radius) continue;
      kernel[row + std::size_t((dx + pw) % pw)] =
          std::exp(-params.alpha * std::sqrt(double(dx) * dx + double(dy) * dy));
    }
  }

  fwd_signal->execute();
  fwd_kernel->execute();
  const double scale = 1.0 / static_cast<double>(real_n);
  for (std::size_t i = 0; i < cplx_n; ++i) {
    const double ar = signal_hat[i][0], ai = signal_hat[i][1];
    const double br = kernel_hat[i][0], bi = kernel_hat[i][1];
    signal_hat[i][0] = (ar * br - ai * bi) * scale;
    signal_hat[i][1] = (ar * bi + ai * br) * scale;
  }
  inverse->execute();

  std::vector<double> out(std::size_t(w) * std::size_t(h));
  for (int y = 0; y < h; ++y)
    for (int x = 0; x < w; ++x)
      out[std::size_t(y) * std::size_t(w) + std::size_t(x)] =
          std::max(0.0, signal[std::size_t(y) * pw + x]);
  return out;
}

}  // namespace

std::string_view to_string(MapMethod m) { return m == MapMethod::Eq1 ? "eq1" : "eq2"; }

MapMethod parse_map_method(std::string_view s) {
  if (s == "eq1" || s == "EQ1") return MapMethod::Eq1;
  if (s == "eq2" || s == "EQ2") return MapMethod::Eq2;
  throw ParameterError("unknown map method '" + std::string(s) + "' (expected eq1 or eq2)");
}

void Eq2Params::validate() const {
  if (!(alpha > 0.0) || !std::isfinite(alpha)) {
    throw ParameterError("alpha must be a positive finite number");
  }
  if (radius < 1) throw ParameterError("radius must be at least 1");
  if (alpha * radius * std::sqrt(2.0) > 700.0) {
    throw ParameterError("alpha * radius too large: neighbourhood weights underflow");
  }
}

ProbabilityMap ProbabilityMap::zeros(int width, int height, MapMethod method,
                                     std::optional<Eq2Params> params) {
  ProbabilityMap m;
  m.width = width;
  m.height = height;
  m.values.assign(std::size_t(width) * std::size_t(height), 0.0);
  m.method = method;
  m.params = params;
  return m;
}

std::vector<std::uint8_t> ProbabilityMap::to_gray8() const {
  std::vector<std::uint8_t> out(values.size());
  std::transform(values.begin(), values.end(), out.begin(), [](double v) {
    return static_cast<std::uint8_t>(std::lround(std::clamp(v, 0.0, 1.0) * 255.0));
  });
  return out;
}

ProbabilityMap prob_map_eq1(const BinaryMask& mask) {
  const DistanceField field = edt(mask);
  ProbabilityMap map = ProbabilityMap::zeros(mask.width(), mask.height(), MapMethod::Eq1);
  const auto sq = field.squared();
  const std::int64_t max_sq = *std::max_element(sq.begin(), sq.end());
  if (max_sq == 0) {
    std::fill(map.values.begin(), map.values.end(), 1.0);
    return map;
  }
  const double max_d = std::sqrt(static_cast<double>(max_sq));
  for (std::size_t i = 0; i < sq.size(); ++i) {
    // integer compare keeps P exactly 0 at every cell attaining the maximum
    map.values[i] = sq[i] == max_sq ? 0.0 : 1.0 - std::sqrt(static_cast<double>(sq[i])) / max_d;
  }
  return map;
}

ProbabilityMap prob_map_eq2(const BinaryMask& mask, const Eq2Params& params,
                            Eq2Strategy strategy) {
  params.validate();
  const std::vector<Cell> cells = mask_cells(mask);
  if (cells.empty()) throw EmptyMaskError();

  const int w = mask.width();
  const int h = mask.height();
  const int r = params.radius;
  const std::size_t n = mask.size();

  // Neighbourhood weights for offsets in [-r, r]^2.
  const int side = 2 * r + 1;
  std::vector<double> weight(std::size_t(side) * std::size_t(side));
  for (int dy = -r; dy <= r; ++dy)
    for (int dx = -r; dx <= r; ++dx)
      weight[std::size_t(dy + r) * side + std::size_t(dx + r)] =
          std::exp(-params.alpha * std::sqrt(double(dx) * dx + double(dy) * dy));

  // Numerator and neighbourhood population, scattered from each mask cell.
  std::vector<double> near(n, 0.0);
  std::vector<std::uint32_t> population(n, 0);
  for (const Cell& c : cells) {
    const int y0 = std::max(0, c.y - r), y1 = std::min(h - 1, c.y + r);
    const int x0 = std::max(0, c.x - r), x1 = std::min(w - 1, c.x + r);
    for (int y = y0; y <= y1; ++y) {
      const std::size_t row = std::size_t(y) * std::size_t(w);
      const double* wrow = &weight[std::size_t(y - c.y + r) * side];
      for (int x = x0; x <= x1; ++x) {
        near[row + x] += wrow[x - c.x + r];
        ++population[row + x];
      }
    }
  }

  const std::size_t total = cells.size();
  std::size_t active = 0;
  for (auto p : population)
    if (p > 0 && p < total) ++active;

  if (strategy == Eq2Strategy::Auto) {
    strategy = static_cast<double>(active) * static_cast<double>(total) <= kDirectPairBudget
                   ? Eq2Strategy::Direct
                   : Eq2Strategy::Fft;
  }

  std::vector<double> far;
  if (active > 0 && strategy == Eq2Strategy::Fft) far = far_field_fft(mask, params, total);

  ProbabilityMap map = ProbabilityMap::zeros(w, h, MapMethod::Eq2, params);
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      const std::size_t i = std::size_t(y) * std::size_t(w) + std::size_t(x);
      if (population[i] == 0) continue;
      if (population[i] == total) {
        map.values[i] = 1.0;
        continue;
      }
      double rest = 0.0;
      if (strategy == Eq2Strategy::Fft) {
        rest = far[i];
      } else {
        for (const Cell& c : cells) {
          const int dx = c.x - x, dy = c.y - y;
          if (chebyshev(dx, dy) <= r) continue;
          rest += std::exp(-params.alpha * std::sqrt(double(dx) * dx + double(dy) * dy));
        }
      }
      map.values[i] = near[i] / (near[i] + rest);
    }
  }
  return map;
}

ProbabilityMap prob_map_eq2_bruteforce(const BinaryMask& mask, const Eq2Params& params) {
  params.validate();
  const std::vector<Cell> cells = mask_cells(mask);
  if (cells.empty()) throw EmptyMaskError();

  ProbabilityMap map = ProbabilityMap::zeros(mask.width(), mask.height(), MapMethod::Eq2, params);
  for (int y = 0; y < mask.height(); ++y) {
    for (int x = 0; x < mask.width(); ++x) {
      double num = 0.0, den = 0.0;
      for (const Cell& c : cells) {
        const double dx = c.x - x, dy = c.y - y;
        const double term = std::exp(-params.alpha * std::sqrt(dx * dx + dy * dy));
        den += term;
        if (chebyshev(c.x - x, c.y - y) <= params.radius) num += term;
      }
      map.values[std::size_t(y) * std::size_t(mask.width()) + std::size_t(x)] =
          num > 0.0 ? num / den : 0.0;
    }
  }
  return map;
}

ProbabilityMap make_probability_map(const BinaryMask& mask, MapMethod method,
                                    const Eq2Params& params) {
  return method == MapMethod::Eq1 ? prob_map_eq1(mask) : prob_map_eq2(mask, params);
}

void write_probability_png(const ProbabilityMap& map, const std::string& path) {
  write_gray8(map.to_gray8(), map.width, map.height, path);
}

}  // namespace probfuse
