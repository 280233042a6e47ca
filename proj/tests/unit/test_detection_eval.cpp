#include <gtest/gtest.h>

#include <algorithm>
#include <random>

#include "probfuse/detection_eval.hpp"
#include "probfuse/errors.hpp"
#include "test_support.hpp"

using namespace probfuse;
namespace pt = probfuse::testing;

namespace {

Detection det(std::string img, std::string cls, double conf, Box b) {
  return {std::move(img), std::move(cls), b, conf};
}
GroundTruth gt(std::string img, std::string cls, Box b, bool difficult = false) {
  return {std::move(img), std::move(cls), b, difficult};
}

std::vector<MatchLabel> labels_of(const std::vector<bool>& tp) {
  std::vector<MatchLabel> out;
  for (bool b : tp) out.push_back(b ? MatchLabel::TruePositive : MatchLabel::FalsePositive);
  return out;
}

struct Scene {
  std::vector<Detection> dets;
  std::vector<GroundTruth> gts;
};

Scene random_scene(std::mt19937_64& gen, const std::vector<std::string>& classes) {
  std::uniform_real_distribution<double> pos(0, 100), size(4, 30), jitter(-6, 6), conf(0, 1);
  std::uniform_int_distribution<int> n_obj(0, 6), n_extra(0, 4), pick(0, int(classes.size()) - 1);
  Scene s;
  for (int img = 0; img < 3; ++img) {
    const std::string id = "I" + std::to_string(img);
    const int n = n_obj(gen);
    for (int k = 0; k < n; ++k) {
      const double x = pos(gen), y = pos(gen), w = size(gen), h = size(gen);
      const std::string& cls = classes[std::size_t(pick(gen))];
      s.gts.push_back(gt(id, cls, {x, y, x + w, y + h}, gen() % 5 == 0));
      if (gen() % 4 != 0) {
        const double dx = jitter(gen), dy = jitter(gen);
        s.dets.push_back(det(id, cls, conf(gen), {x + dx, y + dy, x + dx + w, y + dy + h}));
      }
    }
    const int extra = n_extra(gen);
    for (int k = 0; k < extra; ++k) {
      const double x = pos(gen), y = pos(gen), w = size(gen), h = size(gen);
      s.dets.push_back(det(id, classes[std::size_t(pick(gen))], conf(gen), {x, y, x + w, y + h}));
    }
  }
  return s;
}

}  // namespace

TEST(Iou, KnownValues) {
  EXPECT_NEAR(iou({0, 0, 2, 2}, {1, 1, 3, 3}), 1.0 / 7.0, 1e-15);
  EXPECT_EQ(iou({0, 0, 1, 1}, {0, 0, 1, 1}), 1.0);
  EXPECT_EQ(iou({0, 0, 1, 1}, {1, 0, 2, 1}), 0.0);   // touching edge
  EXPECT_EQ(iou({0, 0, 1, 1}, {5, 5, 6, 6}), 0.0);
  EXPECT_EQ(iou({0, 0, 2, 1}, {0, 0, 1, 1}), 0.5);
}

TEST(Iou, SymmetricAndBounded) {
  std::mt19937_64 gen(1);
  std::uniform_real_distribution<double> u(0, 10);
  for (int i = 0; i < 1000; ++i) {
    const double ax = u(gen), ay = u(gen), bx = u(gen), by = u(gen);
    const Box a{ax, ay, ax + 1 + u(gen), ay + 1 + u(gen)};
    const Box b{bx, by, bx + 1 + u(gen), by + 1 + u(gen)};
    const double o = iou(a, b);
    EXPECT_EQ(o, iou(b, a));
    EXPECT_GE(o, 0.0);
    EXPECT_LE(o, 1.0);
  }
}

TEST(Matching, EachGroundTruthMatchedOnce) {
  const std::vector<GroundTruth> g = {gt("a", "ship", {0, 0, 10, 10})};
  const std::vector<Detection> d = {det("a", "ship", 0.9, {0, 0, 10, 10}),
                                    det("a", "ship", 0.8, {0, 0, 10, 10})};
  const auto l = match_detections(d, g);
  EXPECT_EQ(l[0], MatchLabel::TruePositive);
  EXPECT_EQ(l[1], MatchLabel::FalsePositive);
}

TEST(Matching, HigherConfidenceWinsRegardlessOfInputOrder) {
  const std::vector<GroundTruth> g = {gt("a", "ship", {0, 0, 10, 10})};
  const std::vector<Detection> d = {det("a", "ship", 0.3, {0, 0, 10, 10}),
                                    det("a", "ship", 0.7, {1, 1, 10, 10})};
  const auto l = match_detections(d, g);
  EXPECT_EQ(l[0], MatchLabel::FalsePositive);
  EXPECT_EQ(l[1], MatchLabel::TruePositive);
}

TEST(Matching, ClassAndImageMustAgree) {
  const std::vector<GroundTruth> g = {gt("a", "ship", {0, 0, 10, 10})};
  const std::vector<Detection> d = {det("a", "plane", 0.9, {0, 0, 10, 10}),
                                    det("b", "ship", 0.9, {0, 0, 10, 10})};
  const auto l = match_detections(d, g);
  EXPECT_EQ(l[0], MatchLabel::FalsePositive);
  EXPECT_EQ(l[1], MatchLabel::FalsePositive);
}

TEST(Matching, ThresholdIsStrictUnlessInclusive) {
  const std::vector<GroundTruth> g = {gt("a", "ship", {0, 0, 2, 1})};
  const std::vector<Detection> d = {det("a", "ship", 0.9, {0, 0, 1, 1})};
  EXPECT_EQ(match_detections(d, g)[0], MatchLabel::FalsePositive);
  EvalOptions o;
  o.inclusive_threshold = true;
  EXPECT_EQ(match_detections(d, g, o)[0], MatchLabel::TruePositive);
}

TEST(Matching, ThresholdMustBeOpenUnitInterval) {
  for (double t : {0.0, 1.0, -0.1, 1.5}) {
    EvalOptions o;
    o.iou_threshold = t;
    EXPECT_THROW(match_detections({}, {}, o), ParameterError);
  }
}

TEST(Matching, DifficultGroundTruthIgnoredWhenExcluded) {
  const std::vector<GroundTruth> g = {gt("a", "ship", {0, 0, 10, 10}, true)};
  const std::vector<Detection> d = {det("a", "ship", 0.9, {0, 0, 10, 10})};
  EXPECT_EQ(match_detections(d, g)[0], MatchLabel::TruePositive);
  EvalOptions o;
  o.exclude_difficult = true;
  EXPECT_EQ(match_detections(d, g, o)[0], MatchLabel::Ignored);
  const auto r = evaluate(d, g, o);
  EXPECT_EQ(r.per_class.at("ship").n_gt, 0u);
  EXPECT_FALSE(r.per_class.at("ship").ap.has_value());
  EXPECT_EQ(r.per_class.at("ship").n_fp, 0u);
}

TEST(AveragePrecision, TwoOfThreeWithFalsePositiveBetween) {
  const auto l = labels_of({true, false, true});
  EXPECT_NEAR(average_precision(l, 2), 5.0 / 6.0, 1e-12);
}

TEST(AveragePrecision, EdgeCases) {
  EXPECT_EQ(average_precision({}, 3), 0.0);
  EXPECT_EQ(average_precision(labels_of({true, true}), 2), 1.0);
  EXPECT_EQ(average_precision(labels_of({false, false}), 2), 0.0);
  EXPECT_NEAR(average_precision(labels_of({true}), 4), 0.25, 1e-15);
  EXPECT_THROW(average_precision(labels_of({true}), 0), ParameterError);
  const std::vector<MatchLabel> with_ignored = {MatchLabel::TruePositive, MatchLabel::Ignored,
                                                MatchLabel::FalsePositive,
                                                MatchLabel::TruePositive};
  EXPECT_NEAR(average_precision(with_ignored, 2), 5.0 / 6.0, 1e-12);
}

TEST(AveragePrecision, ElevenPoint) {
  EXPECT_NEAR(average_precision(labels_of({true, true}), 2, ApInterpolation::ElevenPoint), 1.0,
              1e-12);
  // recall 0.5 at precision 1, recall 1 at precision 2/3
  EXPECT_NEAR(average_precision(labels_of({true, false, true}), 2, ApInterpolation::ElevenPoint),
              (6 * 1.0 + 5 * (2.0 / 3.0)) / 11.0, 1e-12);
}

TEST(AveragePrecision, MatchesOracleOnRandomSequences) {
  std::mt19937_64 gen(21);
  for (int trial = 0; trial < 500; ++trial) {
    const std::size_t n = gen() % 30;
    std::vector<bool> seq(n);
    std::size_t tp = 0;
    for (std::size_t i = 0; i < n; ++i) tp += (seq[i] = gen() % 2);
    const std::size_t n_gt = tp + gen() % 5 + (tp == 0 ? 1 : 0);
    EXPECT_NEAR(average_precision(labels_of(seq), n_gt), pt::ap_oracle(seq, n_gt), 1e-12);
  }
}

TEST(Evaluate, PerfectDetectionsGiveMapOne) {
  std::vector<GroundTruth> g;
  std::vector<Detection> d;
  for (int i = 0; i < 5; ++i) {
    const Box b{double(i * 20), 0, double(i * 20 + 10), 10};
    g.push_back(gt("a", i % 2 ? "ship" : "plane", b));
    d.push_back(det("a", i % 2 ? "ship" : "plane", 0.5 + 0.1 * i, b));
  }
  const auto r = evaluate(d, g);
  EXPECT_EQ(r.mAP, 1.0);
  EXPECT_EQ(*r.per_class.at("ship").ap, 1.0);
  EXPECT_FALSE(r.per_class.at("harbor").ap.has_value());
}

TEST(Evaluate, NoDetectionsGiveZero) {
  const std::vector<GroundTruth> g = {gt("a", "ship", {0, 0, 1, 1})};
  EXPECT_EQ(evaluate({}, g).mAP, 0.0);
  EXPECT_EQ(evaluate({}, {}).mAP, 0.0);
}

TEST(Evaluate, UnknownClassesCountedNotScored) {
  EvalOptions o;
  o.classes = {"ship"};
  const std::vector<GroundTruth> g = {gt("a", "ship", {0, 0, 1, 1}), gt("a", "boat", {0, 0, 1, 1})};
  const std::vector<Detection> d = {det("a", "ship", 0.9, {0, 0, 1, 1}),
                                    det("a", "boat", 0.9, {0, 0, 1, 1})};
  const auto r = evaluate(d, g, o);
  EXPECT_EQ(r.unknown_class_detections, 1u);
  EXPECT_EQ(r.unknown_class_ground_truths, 1u);
  EXPECT_EQ(r.mAP, 1.0);
  EXPECT_EQ(r.class_order, (std::vector<std::string>{"ship"}));
}

TEST(Evaluate, InvariantUnderPermutationOfInputs) {
  std::mt19937_64 gen(31);
  const std::vector<std::string> classes = {"ship", "plane", "harbor"};
  EvalOptions o;
  o.classes = classes;
  for (int trial = 0; trial < 50; ++trial) {
    Scene s = random_scene(gen, classes);
    const auto a = evaluate(s.dets, s.gts, o);
    std::shuffle(s.dets.begin(), s.dets.end(), gen);
    std::shuffle(s.gts.begin(), s.gts.end(), gen);
    const auto b = evaluate(s.dets, s.gts, o);
    EXPECT_NEAR(a.mAP, b.mAP, 1e-12);
  }
}

TEST(Evaluate, MonotoneInThreshold) {
  std::mt19937_64 gen(41);
  const std::vector<std::string> classes = {"ship", "plane"};
  for (int trial = 0; trial < 50; ++trial) {
    const Scene s = random_scene(gen, classes);
    double prev = 2.0;
    std::size_t prev_tp = SIZE_MAX;
    for (double t : {0.1, 0.3, 0.5, 0.7, 0.9}) {
      EvalOptions o;
      o.classes = classes;
      o.iou_threshold = t;
      const auto r = evaluate(s.dets, s.gts, o);
      std::size_t tp = 0;
      for (const auto& [c, cr] : r.per_class) tp += cr.n_tp;
      EXPECT_LE(tp, prev_tp);
      EXPECT_LE(r.mAP, prev + 1e-12);
      prev = r.mAP;
      prev_tp = tp;
    }
  }
}

TEST(Evaluate, InvariantUnderMonotoneConfidenceRescale) {
  std::mt19937_64 gen(51);
  const std::vector<std::string> classes = {"ship", "plane"};
  EvalOptions o;
  o.classes = classes;
  for (int trial = 0; trial < 50; ++trial) {
    Scene s = random_scene(gen, classes);
    const auto a = evaluate(s.dets, s.gts, o);
    for (auto& d : s.dets) d.confidence = d.confidence * d.confidence * 0.5;
    const auto b = evaluate(s.dets, s.gts, o);
    EXPECT_NEAR(a.mAP, b.mAP, 1e-12);
  }
}

TEST(Evaluate, GroundTruthFromAnnotationsUsesEnvelope) {
  const std::vector<AnnotationRecord> recs = {
      {"ship", {{{4, 0}, {8, 4}, {4, 8}, {0, 4}}}, 1}};
  const auto g = ground_truth_from_annotations("x", recs);
  ASSERT_EQ(g.size(), 1u);
  EXPECT_EQ(g[0].box.x_min, 0);
  EXPECT_EQ(g[0].box.x_max, 8);
  EXPECT_EQ(g[0].box.y_max, 8);
  EXPECT_TRUE(g[0].difficult);
}

TEST(Detections, Parse) {
  const auto d = parse_detections("# header\nP1 ship 0.9 1 2 3 4\n\nP2 plane 1 0 0 5.5 6\n");
  ASSERT_EQ(d.size(), 2u);
  EXPECT_EQ(d[0].image_id, "P1");
  EXPECT_EQ(d[0].confidence, 0.9);
  EXPECT_EQ(d[0].box.x_max, 3);
  EXPECT_EQ(d[1].box.x_max, 5.5);
}

TEST(Detections, ParseErrorsCarryLineNumber) {
  for (const char* text : {"P1 ship 0.9 1 2 3\n", "P1 ship x 1 2 3 4\n", "P1 ship 1.5 1 2 3 4\n",
                           "P1 ship 0.5 3 2 1 4\n", "P1 ship 0.5 1 2 3 nan\n"}) {
    try {
      parse_detections(std::string("P0 ship 0.1 0 0 1 1\n") + text);
      FAIL() << text;
    } catch (const ParseError& e) {
      EXPECT_EQ(e.line(), 2u) << text;
    }
  }
  EXPECT_THROW(load_detections("/nonexistent/dets.txt"), IoError);
}

TEST(Report, CsvAndTable) {
  EvalOptions o;
  o.classes = {"ship", "plane"};
  const std::vector<GroundTruth> g = {gt("a", "ship", {0, 0, 1, 1})};
  const std::vector<Detection> d = {det("a", "ship", 0.9, {0, 0, 1, 1})};
  const auto r = evaluate(d, g, o);
  EXPECT_EQ(r.to_csv(),
            "class,AP,n_gt,n_tp,n_fp\n"
            "ship,1.000000,1,1,0\n"
            "plane,NA,0,0,0\n"
            "mAP,1.000000,1,1,0\n");
  const std::string table = r.to_table();
  const auto last = table.rfind("\nmAP");
  ASSERT_NE(last, std::string::npos) << table;
  EXPECT_NE(table.find("1.0000", last), std::string::npos) << table;
}
