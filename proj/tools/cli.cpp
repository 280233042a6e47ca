#include "cli.hpp"

#include <CLI11.hpp>

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <map>
#include <ostream>

#include <json.hpp>

#include "probfuse/annotations.hpp"
#include "probfuse/context_mapping.hpp"
#include "probfuse/detection_eval.hpp"
#include "probfuse/errors.hpp"
#include "probfuse/fused_tensor.hpp"
#include "probfuse/fusion.hpp"
#include "probfuse/misalignment.hpp"
#include "probfuse/pipeline.hpp"
#include "probfuse/png_io.hpp"
#include "probfuse/probability_map.hpp"
#include "probfuse/rasterize.hpp"
#include "probfuse/synthetic.hpp"

namespace probfuse::cli {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

std::vector<std::string> split_list(const std::string& s) {
  std::vector<std::string> out;
  std::string cur;
  for (char c : s) {
    if (c == ',') {
      if (!cur.empty()) out.push_back(cur);
      cur.clear();
    } else {
      cur += c;
    }
  }
  if (!cur.empty()) out.push_back(cur);
  return out;
}

std::vector<std::string> class_list_or_default(const std::string& classes) {
  return classes.empty() ? dota_classes() : split_list(classes);
}

void require_class(const std::vector<std::string>& classes, const std::string& name) {
  if (std::find(classes.begin(), classes.end(), name) == classes.end()) {
    throw InputError("class '" + name + "' is not in the class list");
  }
}

void require_output_dir(const std::string& path) {
  const fs::path parent = fs::path(path).parent_path();
  if (!parent.empty() && !fs::is_directory(parent)) {
    throw IoError("output directory " + parent.string() + " does not exist");
  }
}

std::string one_line(std::string s) {
  std::replace(s.begin(), s.end(), '\n', ' ');
  return s;
}

struct MapOptions {
  std::string method = "eq2";
  double alpha = 1.0;
  int radius = 1;

  void add_to(CLI::App* app) {
    app->add_option("--method", method, "Probability map: eq1 (normalised distance) or eq2 "
                                        "(neighbourhood-weighted)")
        ->check(CLI::IsMember({"eq1", "eq2"}));
    app->add_option("--alpha", alpha, "eq2 decay rate");
    app->add_option("--radius", radius, "eq2 Chebyshev neighbourhood radius in cells");
  }
  MapMethod parsed() const {
    const MapMethod m = parse_map_method(method);
    if (m == MapMethod::Eq2) params().validate();
    return m;
  }
  Eq2Params params() const { return {alpha, radius}; }
};

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Probability-map preprocessing for multimodal detection datasets"};
  app.name("probfuse");
  app.require_subcommand(1);

  // rasterize
  std::string r_ann, r_class, r_out, r_like, r_classes;
  int r_w = 0, r_h = 0;
  auto* rasterize_cmd = app.add_subcommand("rasterize", "Burn one class of a DOTA file into a mask PNG");
  rasterize_cmd->add_option("--annotations", r_ann, "DOTA annotation file")
      ->required()->check(CLI::ExistingFile);
  rasterize_cmd->add_option("--class", r_class, "Class to rasterise")->required();
  rasterize_cmd->add_option("--width", r_w, "Mask width");
  rasterize_cmd->add_option("--height", r_h, "Mask height");
  rasterize_cmd->add_option("--like", r_like, "Take width/height from this PNG")
      ->check(CLI::ExistingFile);
  rasterize_cmd->add_option("--classes", r_classes, "Comma-separated class list (default DOTA)");
  rasterize_cmd->add_option("--out", r_out, "Output mask PNG")->required();

  // probmap
  std::string p_mask, p_out, p_empty = "error";
  MapOptions p_map;
  auto* probmap_cmd = app.add_subcommand("probmap", "Convert a binary mask PNG into a probability map PNG");
  probmap_cmd->add_option("--mask", p_mask, "Mask PNG")->required()->check(CLI::ExistingFile);
  p_map.add_to(probmap_cmd);
  probmap_cmd->add_option("--empty", p_empty, "Empty-mask policy: error or zero")
      ->check(CLI::IsMember({"error", "zero"}));
  probmap_cmd->add_option("--out", p_out, "Output 8-bit PNG, value round(255 P)")->required();

  // shift
  std::string s_mask, s_out, s_id;
  int s_dx = 0, s_dy = 0;
  std::uint64_t s_seed = 0;
  double s_min = 0.05, s_max = 0.10;
  auto* shift_cmd = app.add_subcommand("shift", "Translate a mask, explicitly or by the random protocol");
  shift_cmd->add_option("--mask", s_mask, "Mask PNG")->required()->check(CLI::ExistingFile);
  auto* dx_opt = shift_cmd->add_option("--dx", s_dx, "Explicit shift, positive = right");
  auto* dy_opt = shift_cmd->add_option("--dy", s_dy, "Explicit shift, positive = down");
  auto* seed_opt = shift_cmd->add_option("--seed", s_seed, "Master seed for a random shift");
  auto* id_opt = shift_cmd->add_option("--image-id", s_id, "Image id keying the random stream");
  shift_cmd->add_option("--min-frac", s_min, "Minimum shift as a fraction of width");
  shift_cmd->add_option("--max-frac", s_max, "Maximum shift as a fraction of width");
  shift_cmd->add_option("--out", s_out, "Output mask PNG")->required();
  seed_opt->needs(id_opt);
  id_opt->needs(seed_opt);
  seed_opt->excludes(dx_opt)->excludes(dy_opt);

  // fuse
  std::string f_image, f_out, f_mode = "direct", f_context, f_classes;
  std::vector<std::string> f_masks;
  MapOptions f_map;
  auto* fuse_cmd = app.add_subcommand("fuse", "Build one fused RGB + probability tensor (.fus)");
  fuse_cmd->add_option("--image", f_image, "RGB PNG")->required()->check(CLI::ExistingFile);
  fuse_cmd->add_option("--mask", f_masks, "CLASS=mask.png, repeatable");
  fuse_cmd->add_option("--mode", f_mode, "direct, indirect or single")
      ->check(CLI::IsMember({"direct", "indirect", "single"}));
  fuse_cmd->add_option("--context", f_context, "Context class for --mode single");
  fuse_cmd->add_option("--classes", f_classes, "Comma-separated class list (default DOTA)");
  f_map.add_to(fuse_cmd);
  fuse_cmd->add_option("--out", f_out, "Output .fus file")->required();

  // eval
  std::string e_dets, e_gt, e_csv, e_classes;
  double e_iou = 0.5;
  bool e_inclusive = false, e_exclude_difficult = false, e_eleven = false;
  auto* eval_cmd = app.add_subcommand("eval", "Score detections against DOTA ground truth");
  eval_cmd->add_option("--detections", e_dets, "Detections: image_id class conf x0 y0 x1 y1")
      ->required()->check(CLI::ExistingFile);
  eval_cmd->add_option("--gt", e_gt, "Directory of DOTA annotation files (image_id.txt)")
      ->required()->check(CLI::ExistingDirectory);
  eval_cmd->add_option("--iou", e_iou, "IoU threshold");
  eval_cmd->add_flag("--inclusive", e_inclusive, "Count IoU == threshold as a match");
  eval_cmd->add_flag("--exclude-difficult", e_exclude_difficult, "Ignore difficult ground truth");
  eval_cmd->add_flag("--eleven-point", e_eleven, "11-point interpolated AP");
  eval_cmd->add_option("--classes", e_classes, "Comma-separated class list (default DOTA)");
  eval_cmd->add_option("--csv", e_csv, "Also write the report as CSV");

  // pipeline
  std::string pl_config;
  bool pl_dry = false, pl_quiet = false;
  int pl_threads = 0;
  auto* pipeline_cmd = app.add_subcommand("pipeline", "Run rasterize, shift, probmap and fuse over a dataset");
  pipeline_cmd->add_option("--config", pl_config, "Pipeline JSON config")
      ->required()->check(CLI::ExistingFile);
  pipeline_cmd->add_flag("--dry-run", pl_dry, "Print the plan, write nothing");
  pipeline_cmd->add_option("--threads", pl_threads, "Worker count (PROBFUSE_THREADS overrides)");
  pipeline_cmd->add_flag("--quiet", pl_quiet, "No per-image progress");

  // regen
  std::string rg_manifest, rg_out_root;
  auto* regen_cmd = app.add_subcommand("regen", "Rebuild fused tensors from a manifest");
  regen_cmd->add_option("--manifest", rg_manifest, "Manifest JSON")
      ->required()->check(CLI::ExistingFile);
  regen_cmd->add_option("--out-root", rg_out_root, "Write outputs under this root instead");
  regen_cmd->add_flag("--quiet", pl_quiet, "No per-image progress");

  // synth
  std::string sy_out;
  SyntheticOptions sy;
  auto* synth_cmd = app.add_subcommand("synth", "Write a small synthetic DOTA-layout dataset");
  synth_cmd->add_option("--out", sy_out, "Dataset root")->required();
  synth_cmd->add_option("--count", sy.count, "Number of images");
  synth_cmd->add_option("--width", sy.width, "Image width");
  synth_cmd->add_option("--height", sy.height, "Image height");
  synth_cmd->add_option("--seed", sy.seed, "Generator seed");

  // golden
  std::string g_out;
  auto* golden_cmd = app.add_subcommand("golden", "Write reference .fus files for reader parity tests");
  golden_cmd->add_option("--out", g_out, "Output directory")->required();

  std::vector<const char*> argv;
  for (const auto& a : args) argv.push_back(a.c_str());
  try {
    app.parse(static_cast<int>(argv.size()), argv.data());
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e, out, err);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e, out, err);
  } catch (const CLI::ParseError& e) {
    err << "error[usage] " << one_line(e.what()) << "\n";
    return kUsage;
  }

  try {
    if (rasterize_cmd->parsed()) {
      const auto classes = class_list_or_default(r_classes);
      require_class(classes, r_class);
      if (!r_like.empty()) {
        const auto info = probe_png(r_like);
        r_w = info.width;
        r_h = info.height;
      }
      if (r_w < 1 || r_h < 1) throw ParameterError("need --width/--height >= 1 or --like");
      require_output_dir(r_out);
      const auto records = load_annotations(r_ann, classes);
      const BinaryMask mask = rasterize(records, r_class, r_w, r_h);
      write_mask(mask, r_out);
      out << json{{"out", r_out}, {"class", r_class}, {"set_cells", mask.count()}}.dump() << "\n";
    } else if (probmap_cmd->parsed()) {
      const MapMethod method = p_map.parsed();
      require_output_dir(p_out);
      const BinaryMask mask = read_mask(p_mask);
      ProbabilityMap map = mask.empty() && p_empty == "zero"
                               ? ProbabilityMap::zeros(mask.width(), mask.height(), method)
                               : make_probability_map(mask, method, p_map.params());
      write_probability_png(map, p_out);
      const auto [lo, hi] = std::minmax_element(map.values.begin(), map.values.end());
      json summary = {{"out", p_out}, {"method", to_string(method)}, {"min", *lo}, {"max", *hi}};
      if (method == MapMethod::Eq2) {
        summary["alpha"] = p_map.alpha;
        summary["radius"] = p_map.radius;
      }
      out << summary.dump() << "\n";
    } else if (shift_cmd->parsed()) {
      require_output_dir(s_out);
      const BinaryMask mask = read_mask(s_mask);
      ShiftSpec spec{s_dx, s_dy};
      if (*seed_opt) {
        ShiftPolicy policy{s_min, s_max, s_seed};
        spec = sample_shift(policy, s_id, mask.width(), mask.height());
      }
      const BinaryMask shifted = apply_shift(mask, spec);
      write_mask(shifted, s_out);
      out << json{{"out", s_out}, {"dx", spec.dx}, {"dy", spec.dy}, {"set_cells", shifted.count()}}
                 .dump()
          << "\n";
    } else if (fuse_cmd->parsed()) {
      const auto classes = class_list_or_default(f_classes);
      const MapMethod method = f_map.parsed();
      ContextMapping mapping;
      const auto mode = parse_mapping_mode(f_mode);
      if (mode == MappingMode::Direct) mapping = ContextMapping::direct(classes);
      if (mode == MappingMode::Indirect) mapping = ContextMapping::indirect_default();
      if (mode == MappingMode::Single) {
        if (f_context.empty()) throw ParameterError("--mode single needs --context");
        mapping = ContextMapping::single(f_context);
      }
      mapping.validate(classes);
      std::vector<std::pair<std::string, std::string>> mask_args;
      for (const auto& m : f_masks) {
        const auto eq = m.find('=');
        if (eq == std::string::npos || eq == 0 || eq + 1 == m.size()) {
          throw ParameterError("--mask expects CLASS=path, got '" + m + "'");
        }
        const std::string cls = m.substr(0, eq), path = m.substr(eq + 1);
        require_class(classes, cls);
        if (!fs::is_regular_file(path)) throw InputError("mask file " + path + " does not exist");
        mask_args.emplace_back(cls, path);
      }
      require_output_dir(f_out);

      const RgbImage rgb = read_rgb(f_image);
      std::vector<NamedMap> maps;
      for (const auto& [cls, path] : mask_args) {
        const BinaryMask mask = read_mask(path, cls);
        maps.emplace_back(cls, mask.empty()
                                   ? ProbabilityMap::zeros(mask.width(), mask.height(), method)
                                   : make_probability_map(mask, method, f_map.params()));
      }
      const FusedTensor tensor = build_fused(rgb, maps, mapping);
      write_fused(tensor, f_out);
      out << json{{"out", f_out},
                  {"channels", tensor.channel_names},
                  {"height", tensor.height},
                  {"width", tensor.width}}
                 .dump()
          << "\n";
    } else if (eval_cmd->parsed()) {
      EvalOptions opts;
      opts.iou_threshold = e_iou;
      opts.inclusive_threshold = e_inclusive;
      opts.exclude_difficult = e_exclude_difficult;
      opts.interpolation = e_eleven ? ApInterpolation::ElevenPoint : ApInterpolation::AllPoint;
      opts.classes = class_list_or_default(e_classes);
      if (!(e_iou > 0.0 && e_iou < 1.0)) throw ParameterError("--iou must lie in (0, 1)");
      if (!e_csv.empty()) require_output_dir(e_csv);

      const auto dets = load_detections(e_dets);
      std::vector<GroundTruth> gts;
      std::vector<fs::path> files;
      for (const auto& e : fs::directory_iterator(e_gt))
        if (e.is_regular_file() && e.path().extension() == ".txt") files.push_back(e.path());
      std::sort(files.begin(), files.end());
      for (const auto& f : files) {
        const auto records = load_annotations(f.string());
        auto g = ground_truth_from_annotations(f.stem().string(), records);
        gts.insert(gts.end(), g.begin(), g.end());
      }
      const EvalReport report = evaluate(dets, gts, opts);
      if (!e_csv.empty()) {
        std::ofstream csv(e_csv, std::ios::binary | std::ios::trunc);
        if (!csv) throw IoError("cannot write " + e_csv);
        csv << report.to_csv();
      }
      out << report.to_table();
      if (report.unknown_class_detections + report.unknown_class_ground_truths > 0) {
        err << "warning: excluded " << report.unknown_class_detections
            << " detections and " << report.unknown_class_ground_truths
            << " ground truths with unknown classes\n";
      }
    } else if (pipeline_cmd->parsed()) {
      const PipelineConfig config = load_config(pl_config);
      RunOptions opts;
      opts.dry_run = pl_dry;
      opts.threads = pl_threads;
      opts.quiet = pl_quiet;
      const json manifest = run_pipeline(config, opts);
      if (pl_dry) {
        out << manifest.dump(2) << "\n";
      } else {
        out << json{{"images", manifest.at("images").size()},
                    {"warnings", manifest.at("warnings").size()},
                    {"manifest", (config.dataset_root / config.manifest_name).string()}}
                   .dump()
            << "\n";
      }
    } else if (regen_cmd->parsed()) {
      std::ifstream in(rg_manifest);
      json manifest;
      try {
        manifest = json::parse(in);
      } catch (const json::parse_error& e) {
        throw InputError("manifest is not valid JSON: " + std::string(e.what()));
      }
      RunOptions opts;
      opts.quiet = pl_quiet;
      if (!rg_out_root.empty()) opts.output_root = rg_out_root;
      const auto written = regenerate_from_manifest(manifest, opts);
      json paths = json::array();
      for (const auto& p : written) paths.push_back(p.string());
      out << json{{"regenerated", paths}}.dump() << "\n";
    } else if (synth_cmd->parsed()) {
      if (sy.count < 1 || sy.width < 24 || sy.height < 24) {
        throw ParameterError("synth needs --count >= 1 and images at least 24x24");
      }
      generate_synthetic_dataset(sy_out, sy);
      out << json{{"out", sy_out}, {"images", sy.count}}.dump() << "\n";
    } else if (golden_cmd->parsed()) {
      write_golden_corpus(g_out);
      out << json{{"out", g_out}}.dump() << "\n";
    }
  } catch (const IoError& e) {
    err << "error[io] " << one_line(e.what()) << "\n";
    return kIoFailure;
  } catch (const FormatError& e) {
    err << "error[format] " << one_line(e.what()) << "\n";
    return kIoFailure;
  } catch (const Error& e) {
    err << "error[validation] " << one_line(e.what()) << "\n";
    return kUsage;
  } catch (const fs::filesystem_error& e) {
    err << "error[io] " << one_line(e.what()) << "\n";
    return kIoFailure;
  }
  return kOk;
}

}  // namespace probfuse::cli
