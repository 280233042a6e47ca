#include "probfuse/detection_eval.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <numeric>
#include <sstream>

#include "probfuse/errors.hpp"

namespace probfuse {

namespace {

using GroupKey = std::pair<std::string, std::string>;  // (image_id, class)

bool passes(double overlap, const EvalOptions& o) {
  return o.inclusive_threshold ? overlap >= o.iou_threshold : overlap > o.iou_threshold;
}

const std::vector<std::string>& class_list(const EvalOptions& o) {
  return o.classes.empty() ? dota_classes() : o.classes;
}

bool known(const std::vector<std::string>& classes, const std::string& c) {
  return std::find(classes.begin(), classes.end(), c) != classes.end();
}

// Indices sorted by descending confidence; ties keep input order.
std::vector<std::size_t> rank_by_confidence(std::span<const Detection> dets,
                                            std::vector<std::size_t> idx) {
  std::stable_sort(idx.begin(), idx.end(), [&](std::size_t a, std::size_t b) {
    return dets[a].confidence > dets[b].confidence;
  });
  return idx;
}

}  // namespace

bool Box::valid() const {
  return std::isfinite(x_min) && std::isfinite(y_min) && std::isfinite(x_max) &&
         std::isfinite(y_max) && x_min < x_max && y_min < y_max;
}

double iou(const Box& a, const Box& b) {
  const double iw = std::min(a.x_max, b.x_max) - std::max(a.x_min, b.x_min);
  const double ih = std::min(a.y_max, b.y_max) - std::max(a.y_min, b.y_min);
  if (iw <= 0 || ih <= 0) return 0.0;
  const double inter = iw * ih;
  return inter / (a.area() + b.area() - inter);
}

Box envelope(const AnnotationRecord& record) {
  Box b{record.polygon[0].x, record.polygon[0].y, record.polygon[0].x, record.polygon[0].y};
  for (const auto& p : record.polygon) {
    b.x_min = std::min(b.x_min, p.x);
    b.y_min = std::min(b.y_min, p.y);
    b.x_max = std::max(b.x_max, p.x);
    b.y_max = std::max(b.y_max, p.y);
  }
  return b;
}

std::vector<GroundTruth> ground_truth_from_annotations(const std::string& image_id,
                                                       std::span<const AnnotationRecord> records) {
  std::vector<GroundTruth> out;
  out.reserve(records.size());
  for (const auto& r : records) {
    out.push_back({image_id, r.class_name, envelope(r), r.difficulty != 0});
  }
  return out;
}

std::vector<MatchLabel> match_detections(std::span<const Detection> detections,
                                         std::span<const GroundTruth> ground_truths,
                                         const EvalOptions& options) {
  if (!(options.iou_threshold > 0.0 && options.iou_threshold < 1.0)) {
    throw ParameterError("IoU threshold must lie in (0, 1)");
  }
  const auto& classes = class_list(options);

  std::map<GroupKey, std::vector<std::size_t>> gt_groups;
  for (std::size_t i = 0; i < ground_truths.size(); ++i) {
    gt_groups[{ground_truths[i].image_id, ground_truths[i].class_name}].push_back(i);
  }
  std::map<GroupKey, std::vector<std::size_t>> det_groups;
  std::vector<MatchLabel> labels(detections.size(), MatchLabel::FalsePositive);
  for (std::size_t i = 0; i < detections.size(); ++i) {
    if (!known(classes, detections[i].class_name)) {
      labels[i] = MatchLabel::Ignored;
      continue;
    }
    det_groups[{detections[i].image_id, detections[i].class_name}].push_back(i);
  }

  for (auto& [key, det_idx] : det_groups) {
    auto git = gt_groups.find(key);
    if (git == gt_groups.end()) continue;  // every detection stays FP
    const auto& gts = git->second;
    std::vector<bool> taken(gts.size(), false);
    for (std::size_t d : rank_by_confidence(detections, det_idx)) {
      double best = 0.0;
      std::size_t best_k = gts.size();
      for (std::size_t k = 0; k < gts.size(); ++k) {
        if (taken[k]) continue;
        const double o = iou(detections[d].box, ground_truths[gts[k]].box);
        if (best_k == gts.size() || o > best) {
          best = o;
          best_k = k;
        }
      }
      if (best_k == gts.size() || !passes(best, options)) continue;
      if (options.exclude_difficult && ground_truths[gts[best_k]].difficult) {
        labels[d] = MatchLabel::Ignored;
        continue;
      }
      taken[best_k] = true;
      labels[d] = MatchLabel::TruePositive;
    }
  }
  return labels;
}

double average_precision(std::span<const MatchLabel> ranked, std::size_t n_gt,
                         ApInterpolation interpolation) {
  if (n_gt == 0) throw ParameterError("average precision is undefined without ground truth");
  std::vector<bool> is_tp;
  for (auto l : ranked)
    if (l != MatchLabel::Ignored) is_tp.push_back(l == MatchLabel::TruePositive);
  const std::size_t n = is_tp.size();
  std::vector<double> recall(n), precision(n);
  std::size_t tp = 0;
  for (std::size_t i = 0; i < n; ++i) {
    if (is_tp[i]) ++tp;
    recall[i] = static_cast<double>(tp) / static_cast<double>(n_gt);
    precision[i] = static_cast<double>(tp) / static_cast<double>(i + 1);
  }

  if (interpolation == ApInterpolation::ElevenPoint) {
    double ap = 0.0;
    for (int t = 0; t <= 10; ++t) {
      const double level = t / 10.0;
      double p = 0.0;
      for (std::size_t i = 0; i < n; ++i)
        if (recall[i] >= level) p = std::max(p, precision[i]);
      ap += p / 11.0;
    }
    return ap;
  }

  // envelope: precision made monotone from high recall to low
  for (std::size_t i = n; i-- > 1;) precision[i - 1] = std::max(precision[i - 1], precision[i]);
  double ap = 0.0;
  double prev_recall = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    if (recall[i] > prev_recall) {
      ap += (recall[i] - prev_recall) * precision[i];
      prev_recall = recall[i];
    }
  }
  return ap;
}

EvalReport evaluate(std::span<const Detection> detections,
                    std::span<const GroundTruth> ground_truths, const EvalOptions& options) {
  const auto& classes = class_list(options);
  const auto labels = match_detections(detections, ground_truths, options);

  EvalReport report;
  report.class_order = classes;
  report.iou_threshold = options.iou_threshold;
  for (const auto& c : classes) report.per_class[c] = {};

  for (const auto& g : ground_truths) {
    if (!known(classes, g.class_name)) {
      ++report.unknown_class_ground_truths;
      continue;
    }
    if (options.exclude_difficult && g.difficult) continue;
    ++report.per_class[g.class_name].n_gt;
  }

  std::map<std::string, std::vector<std::size_t>> by_class;
  for (std::size_t i = 0; i < detections.size(); ++i) {
    if (!known(classes, detections[i].class_name)) {
      ++report.unknown_class_detections;
      continue;
    }
    if (labels[i] == MatchLabel::Ignored) continue;
    by_class[detections[i].class_name].push_back(i);
  }

  double sum = 0.0;
  std::size_t with_gt = 0;
  for (const auto& c : classes) {
    ClassResult& r = report.per_class[c];
    std::vector<MatchLabel> ranked;
    for (std::size_t i : rank_by_confidence(detections, by_class[c])) {
      ranked.push_back(labels[i]);
      ++(labels[i] == MatchLabel::TruePositive ? r.n_tp : r.n_fp);
    }
    if (r.n_gt == 0) continue;
    r.ap = average_precision(ranked, r.n_gt, options.interpolation);
    sum += *r.ap;
    ++with_gt;
  }
  report.mAP = with_gt ? sum / static_cast<double>(with_gt) : 0.0;
  return report;
}

std::string EvalReport::to_csv() const {
  std::ostringstream os;
  os << std::fixed << std::setprecision(6);
  os << "class,AP,n_gt,n_tp,n_fp\n";
  std::size_t gt = 0, tp = 0, fp = 0;
  for (const auto& c : class_order) {
    const auto& r = per_class.at(c);
    os << c << ',';
    if (r.ap) os << *r.ap; else os << "NA";
    os << ',' << r.n_gt << ',' << r.n_tp << ',' << r.n_fp << '\n';
    gt += r.n_gt;
    tp += r.n_tp;
    fp += r.n_fp;
  }
  os << "mAP," << mAP << ',' << gt << ',' << tp << ',' << fp << '\n';
  return os.str();
}

std::string EvalReport::to_table() const {
  std::size_t width = 5;
  for (const auto& c : class_order) width = std::max(width, c.size());
  std::ostringstream os;
  os << std::fixed << std::setprecision(4);
  os << std::left << std::setw(int(width)) << "class" << std::right << std::setw(9) << "AP"
     << std::setw(8) << "n_gt" << std::setw(8) << "n_tp" << std::setw(8) << "n_fp" << '\n';
  for (const auto& c : class_order) {
    const auto& r = per_class.at(c);
    os << std::left << std::setw(int(width)) << c << std::right << std::setw(9);
    if (r.ap) os << *r.ap; else os << "n/a";
    os << std::setw(8) << r.n_gt << std::setw(8) << r.n_tp << std::setw(8) << r.n_fp << '\n';
  }
  os << std::left << std::setw(int(width)) << "mAP" << std::right << std::setw(9) << mAP << '\n';
  return os.str();
}

std::vector<Detection> parse_detections(std::string_view contents) {
  std::vector<Detection> out;
  std::istringstream in{std::string(contents)};
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    std::istringstream ls(line);
    std::vector<std::string> tok;
    for (std::string t; ls >> t;) tok.push_back(t);
    if (tok.empty() || tok[0].starts_with('#')) continue;
    if (tok.size() != 7) {
      throw ParseError(line_no, "expected 7 tokens, found " + std::to_string(tok.size()));
    }
    double v[5];
    for (int k = 0; k < 5; ++k) {
      const auto& s = tok[2 + k];
      auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v[k]);
      if (ec != std::errc() || ptr != s.data() + s.size() || !std::isfinite(v[k])) {
        throw ParseError(line_no, "non-numeric field '" + s + "'");
      }
    }
    Detection d{tok[0], tok[1], {v[1], v[2], v[3], v[4]}, v[0]};
    if (d.confidence < 0.0 || d.confidence > 1.0) {
      throw ParseError(line_no, "confidence outside [0, 1]");
    }
    if (!d.box.valid()) throw ParseError(line_no, "box must satisfy x_min < x_max, y_min < y_max");
    out.push_back(std::move(d));
  }
  return out;
}

std::vector<Detection> load_detections(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open detections file " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse_detections(ss.str());
}

}  // namespace probfuse
