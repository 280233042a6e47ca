#include <gtest/gtest.h>

#include <algorithm>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "cli.hpp"
#include "probfuse/fused_tensor.hpp"
#include "probfuse/png_io.hpp"
#include "probfuse/synthetic.hpp"
#include "test_support.hpp"

using namespace probfuse;
namespace fs = std::filesystem;
namespace pt = probfuse::testing;
using nlohmann::json;

namespace {

struct Result {
  int code;
  std::string out;
  std::string err;
};

Result run(std::vector<std::string> args) {
  args.insert(args.begin(), "probfuse");
  std::ostringstream out, err;
  const int code = cli::run(args, out, err);
  return {code, out.str(), err.str()};
}

void write_text(const fs::path& p, const std::string& s) {
  fs::create_directories(p.parent_path());
  std::ofstream(p) << s;
}

}  // namespace

TEST(Cli, ProbmapEq2OnTwoCellMask) {
  pt::TempDir dir("cli_pm");
  BinaryMask m(4, 4);
  m.set(1, 0);
  m.set(2, 1);
  write_mask(m, dir.str("m.png"));
  const auto r = run({"probmap", "--mask", dir.str("m.png"), "--method", "eq2", "--alpha", "1",
                      "--radius", "1", "--out", dir.str("p.png")});
  ASSERT_EQ(r.code, 0) << r.err;
  const json s = json::parse(r.out);
  EXPECT_EQ(s.at("method"), "eq2");
  EXPECT_EQ(s.at("max"), 1.0);
  EXPECT_EQ(s.at("min"), 0.0);
  const BinaryMask p = read_mask(dir.str("p.png"));  // 255 cells read back as set
  EXPECT_TRUE(p.at(1, 1));
  EXPECT_FALSE(p.at(3, 3));
}

TEST(Cli, ProbmapEmptyMaskPolicy) {
  pt::TempDir dir("cli_empty");
  write_mask(BinaryMask(3, 3), dir.str("m.png"));
  auto r = run({"probmap", "--mask", dir.str("m.png"), "--method", "eq1", "--out", dir.str("p.png")});
  EXPECT_EQ(r.code, 2);
  EXPECT_NE(r.err.find("error[validation]"), std::string::npos);
  r = run({"probmap", "--mask", dir.str("m.png"), "--method", "eq1", "--empty", "zero", "--out",
           dir.str("p.png")});
  EXPECT_EQ(r.code, 0) << r.err;
}

TEST(Cli, RasterizeShiftFuse) {
  pt::TempDir dir("cli_chain");
  write_text(dir.path() / "a.txt", "1 1 4 1 4 4 1 4 harbor 0\n");
  write_rgb(RgbImage(8, 6), dir.str("img.png"));
  auto r = run({"rasterize", "--annotations", dir.str("a.txt"), "--class", "harbor", "--like",
                dir.str("img.png"), "--out", dir.str("harbor.png")});
  ASSERT_EQ(r.code, 0) << r.err;
  EXPECT_EQ(json::parse(r.out).at("set_cells"), 16);
  r = run({"shift", "--mask", dir.str("harbor.png"), "--dx", "2", "--dy", "-1", "--out",
           dir.str("shifted.png")});
  ASSERT_EQ(r.code, 0) << r.err;
  const BinaryMask shifted = read_mask(dir.str("shifted.png"));
  EXPECT_TRUE(shifted.at(3, 0));
  EXPECT_FALSE(shifted.at(1, 1));
  r = run({"fuse", "--image", dir.str("img.png"), "--mask", "harbor=" + dir.str("shifted.png"),
           "--mode", "indirect", "--method", "eq1", "--out", dir.str("t.fus")});
  ASSERT_EQ(r.code, 0) << r.err;
  const FusedTensor t = read_fused(dir.str("t.fus"));
  EXPECT_EQ(t.channels(), 6u);
  EXPECT_EQ(t.at(3, 0, 3), 1.0f);
}

TEST(Cli, RandomShiftIsReproducible) {
  pt::TempDir dir("cli_rshift");
  BinaryMask m(40, 40);
  m.set(20, 20);
  write_mask(m, dir.str("m.png"));
  const std::vector<std::string> args = {"shift", "--mask", dir.str("m.png"), "--seed", "9",
                                         "--image-id", "P0001", "--out", dir.str("s.png")};
  const auto a = run(args), b = run(args);
  ASSERT_EQ(a.code, 0) << a.err;
  EXPECT_EQ(a.out, b.out);
}

TEST(Cli, PipelineDryRunOnEmptyDataset) {
  pt::TempDir dir("cli_dry");
  fs::create_directories(dir.path() / "ds" / "images");
  write_text(dir.path() / "cfg.json", R"({"dataset_root": "ds", "method": "eq1"})");
  const auto r = run({"pipeline", "--config", dir.str("cfg.json"), "--dry-run"});
  ASSERT_EQ(r.code, 0) << r.err;
  EXPECT_TRUE(json::parse(r.out).at("images").empty());
  EXPECT_TRUE(fs::is_empty(dir.path() / "ds" / "images"));
  EXPECT_EQ(std::distance(fs::directory_iterator(dir.path() / "ds"), fs::directory_iterator()), 1);
}

TEST(Cli, PipelineThenRegen) {
  pt::TempDir dir("cli_regen");
  ASSERT_EQ(run({"synth", "--out", dir.str("ds"), "--count", "3", "--width", "40", "--height",
                 "32"}).code,
            0);
  write_text(dir.path() / "cfg.json",
             R"({"dataset_root": "ds", "mapping": {"mode": "indirect"}, "shift": {"master_seed": 3}})");
  auto r = run({"pipeline", "--config", dir.str("cfg.json"), "--quiet"});
  ASSERT_EQ(r.code, 0) << r.err;
  EXPECT_EQ(json::parse(r.out).at("images"), 3);
  r = run({"regen", "--manifest", dir.str("ds/manifest.json"), "--out-root", dir.str("re"),
           "--quiet"});
  ASSERT_EQ(r.code, 0) << r.err;
  EXPECT_EQ(read_fused(dir.str("re/fused/P0001.fus")), read_fused(dir.str("ds/fused/P0001.fus")));
}

TEST(Cli, EvalPerfectDetections) {
  pt::TempDir dir("cli_eval");
  write_text(dir.path() / "gt" / "P1.txt",
             "0 0 10 0 10 10 0 10 ship 0\n20 20 30 20 30 30 20 30 plane 0\n");
  write_text(dir.path() / "dets.txt", "P1 ship 0.9 0 0 10 10\nP1 plane 0.8 20 20 30 30\n");
  const auto r = run({"eval", "--detections", dir.str("dets.txt"), "--gt", dir.str("gt"), "--iou",
                      "0.5", "--csv", dir.str("r.csv")});
  ASSERT_EQ(r.code, 0) << r.err;
  const auto last = r.out.rfind("\nmAP");
  ASSERT_NE(last, std::string::npos) << r.out;
  EXPECT_NE(r.out.find("1.0000", last), std::string::npos) << r.out;
  std::ifstream csv(dir.str("r.csv"));
  std::string header;
  std::getline(csv, header);
  EXPECT_EQ(header, "class,AP,n_gt,n_tp,n_fp");
}

TEST(Cli, UnknownFlagIsUsageError) {
  const auto r = run({"probmap", "--bogus"});
  EXPECT_EQ(r.code, 2);
  EXPECT_NE(r.err.find("error[usage]"), std::string::npos);
  EXPECT_EQ(run({}).code, 2);
  EXPECT_EQ(run({"frobnicate"}).code, 2);
}

TEST(Cli, MissingInputIsUsageError) {
  pt::TempDir dir("cli_missing");
  auto r = run({"probmap", "--mask", dir.str("nope.png"), "--out", dir.str("p.png")});
  EXPECT_EQ(r.code, 2);
  r = run({"pipeline", "--config", dir.str("nope.json")});
  EXPECT_EQ(r.code, 2);
}

TEST(Cli, BadParametersAreValidationErrors) {
  pt::TempDir dir("cli_param");
  write_mask(BinaryMask(2, 2, std::vector<std::uint8_t>{1, 0, 0, 0}), dir.str("m.png"));
  auto r = run({"probmap", "--mask", dir.str("m.png"), "--alpha", "-1", "--out", dir.str("p.png")});
  EXPECT_EQ(r.code, 2);
  EXPECT_NE(r.err.find("error[validation]"), std::string::npos);
  r = run({"probmap", "--mask", dir.str("m.png"), "--method", "eq7", "--out", dir.str("p.png")});
  EXPECT_EQ(r.code, 2);
}

TEST(Cli, IoFailureExitsOne) {
  pt::TempDir dir("cli_io");
  write_mask(BinaryMask(2, 2, std::vector<std::uint8_t>{1, 0, 0, 0}), dir.str("m.png"));
  auto r = run({"probmap", "--mask", dir.str("m.png"), "--out", dir.str("no/such/dir/p.png")});
  EXPECT_EQ(r.code, 1);
  EXPECT_NE(r.err.find("error[io]"), std::string::npos);
  std::ofstream(dir.str("junk.png")) << "not a png";
  r = run({"probmap", "--mask", dir.str("junk.png"), "--out", dir.str("p.png")});
  EXPECT_EQ(r.code, 1);
  std::ofstream(dir.str("bad.fus")) << "FUSE";
  write_text(dir.path() / "m.json", "{");
  r = run({"regen", "--manifest", dir.str("m.json")});
  EXPECT_EQ(r.code, 2);
}

TEST(Cli, ErrorIsSingleLine) {
  const auto r = run({"probmap", "--bogus"});
  EXPECT_EQ(std::count(r.err.begin(), r.err.end(), '\n'), 1);
}
