#include "probfuse/synthetic.hpp"

#include <array>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <numbers>
#include <random>
#include <sstream>

#include "probfuse/annotations.hpp"
#include "probfuse/errors.hpp"
#include "probfuse/fused_tensor.hpp"
#include "probfuse/png_io.hpp"
#include "probfuse/rasterize.hpp"

namespace probfuse {

namespace fs = std::filesystem;

namespace {

double unit(std::mt19937_64& g) { return static_cast<double>(g() >> 11) * 0x1.0p-53; }
int below(std::mt19937_64& g, int n) { return static_cast<int>(unit(g) * n); }

}  // namespace

void generate_synthetic_dataset(const fs::path& root, const SyntheticOptions& o) {
  fs::create_directories(root / "images");
  fs::create_directories(root / "annotations");
  const auto& classes = dota_classes();
  std::mt19937_64 gen(o.seed);

  for (int i = 0; i < o.count; ++i) {
    std::ostringstream id;
    id << "P" << std::setw(4) << std::setfill('0') << i;

    RgbImage img(o.width, o.height);
    for (int y = 0; y < o.height; ++y)
      for (int x = 0; x < o.width; ++x)
        for (int c = 0; c < 3; ++c)
          img.at(x, y, c) = static_cast<std::uint8_t>(40 + (x * 3 + y * 5 + c * 17) % 60);

    std::ostringstream ann;
    ann << "imagesource:synthetic\ngsd:0.5\n";
    const int objects = 2 + below(gen, 5);
    for (int k = 0; k < objects; ++k) {
      // bias toward the indirect-context classes so every mapping mode has content
      const std::string& cls =
          k == 0 ? classes[std::size_t(7 + below(gen, 2) * 5)] : classes[std::size_t(below(gen, 15))];
      const double cx = 14 + unit(gen) * (o.width - 28);
      const double cy = 14 + unit(gen) * (o.height - 28);
      const double hw = 3 + unit(gen) * 8, hh = 3 + unit(gen) * 8;
      const double th = unit(gen) * std::numbers::pi;
      std::array<Point, 4> poly;
      const double sx[4] = {-hw, hw, hw, -hw}, sy[4] = {-hh, -hh, hh, hh};
      for (int v = 0; v < 4; ++v) {
        poly[v] = {std::round((cx + sx[v] * std::cos(th) - sy[v] * std::sin(th)) * 10) / 10,
                   std::round((cy + sx[v] * std::sin(th) + sy[v] * std::cos(th)) * 10) / 10};
      }
      for (const auto& p : poly) ann << p.x << ' ' << p.y << ' ';
      ann << cls << ' ' << (k % 4 == 3 ? 1 : 0) << '\n';

      BinaryMask stamp(o.width, o.height);
      fill_polygon(stamp, poly);
      const std::uint8_t tint[3] = {std::uint8_t(120 + below(gen, 120)),
                                    std::uint8_t(120 + below(gen, 120)),
                                    std::uint8_t(120 + below(gen, 120))};
      for (int y = 0; y < o.height; ++y)
        for (int x = 0; x < o.width; ++x)
          if (stamp.at(x, y))
            for (int c = 0; c < 3; ++c) img.at(x, y, c) = tint[c];
    }

    write_rgb(img, (root / "images" / (id.str() + ".png")).string());
    if (o.drop_last_annotation && i == o.count - 1) continue;
    std::ofstream out(root / "annotations" / (id.str() + ".txt"), std::ios::binary);
    if (!out) throw IoError("cannot write annotation for " + id.str());
    out << ann.str();
  }
}

void write_golden_corpus(const fs::path& dir) {
  fs::create_directories(dir);
  auto ramp = [](FusedTensor& t) {
    t.data.resize(std::size_t(t.channels()) * t.plane_size());
    for (std::size_t i = 0; i < t.data.size(); ++i) {
      t.data[i] = static_cast<float>((i * 37) % 101) / 100.0f;
    }
  };

  FusedTensor one{1, 1, {"R", "G", "B", "harbor"}, {}};
  ramp(one);
  write_fused(one, (dir / "one_by_one.fus").string());

  FusedTensor wide{3, 7, {"R", "G", "B", "harbor", "bridge", "roundabout"}, {}};
  ramp(wide);
  write_fused(wide, (dir / "non_square_3x7.fus").string());

  FusedTensor rgb_only{5, 4, {"R", "G", "B"}, {}};
  ramp(rgb_only);
  write_fused(rgb_only, (dir / "rgb_only.fus").string());

  FusedTensor edge{2, 2, {"R", "G", "B", "ship"}, {0.0f, 1.0f, 0.5f, 0.25f, 1.0f, 0.0f, 0.1f, 0.9f,
                                                   0.0f, 0.0f, 1.0f, 1.0f, 0.2929f, 1.0f, 0.0f, 1e-7f}};
  write_fused(edge, (dir / "edge_values.fus").string());
}

}  // namespace probfuse
