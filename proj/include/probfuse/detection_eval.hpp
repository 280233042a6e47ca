#pragma once

#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "probfuse/annotations.hpp"

namespace probfuse {

/// Axis-aligned box in pixel coordinates.
struct Box {
  double x_min = 0, y_min = 0, x_max = 0, y_max = 0;

  double area() const { return (x_max - x_min) * (y_max - y_min); }
  bool valid() const;
};

struct Detection {
  std::string image_id;
  std::string class_name;
  Box box;
  double confidence = 0.0;
};

struct GroundTruth {
  std::string image_id;
  std::string class_name;
  Box box;
  bool difficult = false;
};

enum class ApInterpolation { AllPoint, ElevenPoint };

struct EvalOptions {
  double iou_threshold = 0.5;
  bool inclusive_threshold = false;  // true: IoU >= threshold counts; default is strictly greater
  bool exclude_difficult = false;    // true: difficult GTs neither count nor penalise
  ApInterpolation interpolation = ApInterpolation::AllPoint;
  std::vector<std::string> classes;  // report order; empty means the DOTA list
};

struct ClassResult {
  std::optional<double> ap;  // empty when the class has no ground truth
  std::size_t n_gt = 0;
  std::size_t n_tp = 0;
  std::size_t n_fp = 0;
};

struct EvalReport {
  std::vector<std::string> class_order;
  std::map<std::string, ClassResult> per_class;
  double mAP = 0.0;
  double iou_threshold = 0.5;
  std::size_t unknown_class_detections = 0;
  std::size_t unknown_class_ground_truths = 0;

  std::string to_csv() const;
  std::string to_table() const;
};

double iou(const Box& a, const Box& b);

/// Axis-aligned envelope of an annotation polygon.
Box envelope(const AnnotationRecord& record);
std::vector<GroundTruth> ground_truth_from_annotations(const std::string& image_id,
                                                       std::span<const AnnotationRecord> records);

enum class MatchLabel { TruePositive, FalsePositive, Ignored };

/// Greedy matching per (image, class): detections in descending confidence (stable on ties)
/// each take the unmatched ground truth with the highest IoU; the detection is a true positive
/// iff that IoU passes the threshold. Returns one label per input detection, in input order.
std::vector<MatchLabel> match_detections(std::span<const Detection> detections,
                                         std::span<const GroundTruth> ground_truths,
                                         const EvalOptions& options = {});

/// All-point (or 11-point) interpolated AP of a ranked label sequence, highest confidence
/// first, against n_gt ground truths. Ignored labels are skipped.
/// Throws ParameterError when n_gt == 0.
double average_precision(std::span<const MatchLabel> ranked, std::size_t n_gt,
                         ApInterpolation interpolation = ApInterpolation::AllPoint);

EvalReport evaluate(std::span<const Detection> detections,
                    std::span<const GroundTruth> ground_truths, const EvalOptions& options = {});

/// One detection per line: `image_id class_name confidence x_min y_min x_max y_max`.
std::vector<Detection> parse_detections(std::string_view contents);
std::vector<Detection> load_detections(const std::string& path);

}  // namespace probfuse
