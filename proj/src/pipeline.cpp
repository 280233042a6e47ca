#include "probfuse/pipeline.hpp"

#include <algorithm>
#include <atomic>
#include <cstdlib>
#include <exception>
#include <fstream>
#include <iostream>
#include <mutex>
#include <set>
#include <thread>

#include "probfuse/annotations.hpp"
#include "probfuse/errors.hpp"
#include "probfuse/fused_tensor.hpp"
#include "probfuse/fusion.hpp"
#include "probfuse/png_io.hpp"
#include "probfuse/rasterize.hpp"

namespace probfuse {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

template <class T>
T get_or(const json& j, const char* key, T fallback) {
  auto it = j.find(key);
  if (it == j.end() || it->is_null()) return fallback;
  try {
    return it->get<T>();
  } catch (const json::exception&) {
    throw ParameterError(std::string("config key '") + key + "' has the wrong type");
  }
}

void reject_unknown_keys(const json& j, std::initializer_list<const char*> allowed,
                         const std::string& where) {
  if (!j.is_object()) throw ParameterError(where + " must be a JSON object");
  for (auto it = j.begin(); it != j.end(); ++it) {
    if (std::none_of(allowed.begin(), allowed.end(),
                     [&](const char* k) { return it.key() == k; })) {
      throw ParameterError("unknown key '" + it.key() + "' in " + where);
    }
  }
}

ContextMapping mapping_from_json(const json& j, const std::vector<std::string>& classes) {
  reject_unknown_keys(j, {"mode", "entries", "context", "channel_order"}, "mapping");
  const auto mode = parse_mapping_mode(get_or<std::string>(j, "mode", "direct"));
  switch (mode) {
    case MappingMode::Direct:
      return ContextMapping::direct(classes);
    case MappingMode::Single: {
      const auto ctx = get_or<std::string>(j, "context", "");
      if (ctx.empty()) throw ParameterError("single mapping needs a 'context' class");
      return ContextMapping::single(ctx);
    }
    case MappingMode::Indirect: {
      if (!j.contains("entries")) return ContextMapping::indirect_default();
      std::vector<ContextEntry> entries;
      for (const auto& e : j.at("entries")) {
        reject_unknown_keys(e, {"context", "targets"}, "mapping entry");
        entries.push_back({get_or<std::string>(e, "context", ""),
                           get_or<std::vector<std::string>>(e, "targets", {})});
      }
      return ContextMapping::indirect(std::move(entries));
    }
  }
  return ContextMapping::direct(classes);
}

json mapping_to_json(const ContextMapping& m) {
  json entries = json::array();
  for (const auto& e : m.entries) entries.push_back({{"context", e.context}, {"targets", e.targets}});
  json j = {{"mode", to_string(m.mode)}, {"entries", entries}, {"channel_order", m.channel_order}};
  if (m.mode == MappingMode::Single) j["context"] = m.channel_order.front();
  return j;
}

struct DatasetImage {
  std::string id;
  fs::path image;
  std::optional<fs::path> annotation;
};

std::vector<DatasetImage> scan_dataset(const fs::path& root) {
  const fs::path images = root / "images";
  if (!fs::is_directory(images)) throw IoError("missing directory " + images.string());
  std::vector<DatasetImage> out;
  for (const auto& e : fs::directory_iterator(images)) {
    if (!e.is_regular_file() || e.path().extension() != ".png") continue;
    DatasetImage img;
    img.id = e.path().stem().string();
    img.image = e.path();
    const fs::path ann = root / "annotations" / (img.id + ".txt");
    if (fs::is_regular_file(ann)) img.annotation = ann;
    out.push_back(std::move(img));
  }
  std::sort(out.begin(), out.end(), [](const auto& a, const auto& b) { return a.id < b.id; });
  return out;
}

std::string map_file_name(const std::string& id, const std::string& cls) {
  return id + "__" + cls + ".png";
}

template <class Fn>
void parallel_for(std::size_t n, int threads, Fn&& fn) {
  const std::size_t workers = std::min<std::size_t>(n, std::size_t(std::max(1, threads)));
  if (workers <= 1) {
    for (std::size_t i = 0; i < n; ++i) fn(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::exception_ptr first_error;
  std::mutex error_mutex;
  {
    std::vector<std::jthread> pool;
    for (std::size_t w = 0; w < workers; ++w) {
      pool.emplace_back([&] {
        for (std::size_t i = next++; i < n; i = next++) {
          try {
            fn(i);
          } catch (...) {
            std::lock_guard lock(error_mutex);
            if (!first_error) first_error = std::current_exception();
            next = n;
          }
        }
      });
    }
  }
  if (first_error) std::rethrow_exception(first_error);
}

struct ImageResult {
  FusedTensor tensor;
  std::vector<std::pair<std::string, ProbabilityMap>> maps;
  std::vector<bool> empty;
};

// Builds the fused tensor for one manifest entry from the embedded config and recorded shifts.
ImageResult process_entry(const json& entry, const PipelineConfig& config) {
  const fs::path root = config.dataset_root;
  const RgbImage rgb = read_rgb((root / entry.at("image").get<std::string>()).string());
  const int w = entry.at("width").get<int>();
  const int h = entry.at("height").get<int>();
  if (rgb.width != w || rgb.height != h) {
    throw ShapeError("image " + entry.at("id").get<std::string>() + " changed size since planning");
  }
  std::vector<AnnotationRecord> records;
  if (!entry.at("annotation").is_null()) {
    records = load_annotations((root / entry.at("annotation").get<std::string>()).string(),
                               config.classes);
  }

  ImageResult result;
  for (const auto& ch : entry.at("channels")) {
    const auto cls = ch.at("class").get<std::string>();
    const ShiftSpec shift{ch.at("shift").at("dx").get<int>(), ch.at("shift").at("dy").get<int>()};
    const BinaryMask shifted = apply_shift(rasterize(records, cls, w, h), shift);
    const bool empty = shifted.empty();
    result.empty.push_back(empty);
    result.maps.emplace_back(cls, empty ? ProbabilityMap::zeros(w, h, config.method)
                                        : make_probability_map(shifted, config.method, config.eq2));
  }
  result.tensor = build_fused(rgb, result.maps, config.mapping);
  return result;
}

void write_text_file(const fs::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot open " + path.string() + " for writing");
  out << text;
  if (!out) throw IoError("write failed for " + path.string());
}

// Tracks temporary outputs and renames them into place only on commit.
class StagedOutputs {
 public:
  ~StagedOutputs() {
    if (committed_) return;
    std::error_code ec;
    for (const auto& [tmp, final_path] : files_) fs::remove(tmp, ec);
  }
  fs::path stage(const fs::path& final_path) {
    fs::path tmp = final_path;
    tmp += ".partial";
    std::lock_guard lock(mutex_);
    files_.emplace_back(tmp, final_path);
    return tmp;
  }
  void commit() {
    for (const auto& [tmp, final_path] : files_) fs::rename(tmp, final_path);
    committed_ = true;
  }

 private:
  std::mutex mutex_;
  std::vector<std::pair<fs::path, fs::path>> files_;
  bool committed_ = false;
};

}  // namespace

int resolve_thread_count(int requested) {
  if (const char* env = std::getenv("PROBFUSE_THREADS"); env && *env) {
    try {
      const int n = std::stoi(env);
      if (n > 0) return n;
    } catch (const std::exception&) {
    }
    throw ParameterError(std::string("PROBFUSE_THREADS must be a positive integer, got '") + env +
                         "'");
  }
  if (requested > 0) return requested;
  return std::max(1u, std::thread::hardware_concurrency());
}

void PipelineConfig::validate() const {
  if (classes.empty()) throw ParameterError("class list is empty");
  std::set<std::string> unique(classes.begin(), classes.end());
  if (unique.size() != classes.size()) throw ParameterError("class list has duplicates");
  if (method == MapMethod::Eq2) eq2.validate();
  shift.validate();
  mapping.validate(classes);
  if (fused_dir.empty() || maps_dir.empty() || manifest_name.empty()) {
    throw ParameterError("output names must be non-empty");
  }
  if (threads < 0) throw ParameterError("threads must be >= 0");
}

PipelineConfig config_from_json(const json& j, const fs::path& base_dir) {
  reject_unknown_keys(j,
                      {"dataset_root", "method", "alpha", "radius", "mapping", "shift", "classes",
                       "fused_dir", "maps_dir", "manifest", "write_maps", "threads"},
                      "config");
  PipelineConfig c;
  const auto root = get_or<std::string>(j, "dataset_root", "");
  if (root.empty()) throw ParameterError("config needs 'dataset_root'");
  c.dataset_root = fs::path(root).is_absolute() ? fs::path(root) : base_dir / root;
  c.method = parse_map_method(get_or<std::string>(j, "method", "eq2"));
  c.eq2.alpha = get_or<double>(j, "alpha", 1.0);
  c.eq2.radius = get_or<int>(j, "radius", 1);
  c.classes = get_or<std::vector<std::string>>(j, "classes", dota_classes());
  c.mapping = mapping_from_json(j.value("mapping", json::object()), c.classes);
  if (auto s = j.find("shift"); s != j.end()) {
    reject_unknown_keys(*s, {"enabled", "min_frac", "max_frac", "master_seed", "share_per_image"},
                        "shift");
    c.shift_enabled = get_or<bool>(*s, "enabled", true);
    c.shift.min_frac = get_or<double>(*s, "min_frac", 0.05);
    c.shift.max_frac = get_or<double>(*s, "max_frac", 0.10);
    c.shift.master_seed = get_or<std::uint64_t>(*s, "master_seed", 0);
    c.share_shift_per_image = get_or<bool>(*s, "share_per_image", false);
  }
  c.fused_dir = get_or<std::string>(j, "fused_dir", "fused");
  c.maps_dir = get_or<std::string>(j, "maps_dir", "maps");
  c.manifest_name = get_or<std::string>(j, "manifest", "manifest.json");
  c.write_maps = get_or<bool>(j, "write_maps", true);
  c.threads = get_or<int>(j, "threads", 0);
  c.validate();
  return c;
}

json config_to_json(const PipelineConfig& c) {
  return {
      {"dataset_root", fs::absolute(c.dataset_root).lexically_normal().string()},
      {"method", to_string(c.method)},
      {"alpha", c.eq2.alpha},
      {"radius", c.eq2.radius},
      {"mapping", mapping_to_json(c.mapping)},
      {"shift",
       {{"enabled", c.shift_enabled},
        {"min_frac", c.shift.min_frac},
        {"max_frac", c.shift.max_frac},
        {"master_seed", c.shift.master_seed},
        {"share_per_image", c.share_shift_per_image}}},
      {"classes", c.classes},
      {"fused_dir", c.fused_dir},
      {"maps_dir", c.maps_dir},
      {"manifest", c.manifest_name},
      {"write_maps", c.write_maps},
      {"threads", c.threads},
  };
}

PipelineConfig load_config(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open config " + path.string());
  json j;
  try {
    j = json::parse(in);
  } catch (const json::parse_error& e) {
    throw ParameterError("config " + path.string() + " is not valid JSON: " + e.what());
  }
  return config_from_json(j, path.parent_path());
}

json build_manifest(const PipelineConfig& config) {
  config.validate();
  json images = json::array();
  json warnings = json::array();
  for (const auto& img : scan_dataset(config.dataset_root)) {
    const PngInfo info = probe_png(img.image.string());
    std::vector<AnnotationRecord> records;
    json entry_warnings = json::array();
    if (img.annotation) {
      records = load_annotations(img.annotation->string(), config.classes);
    } else {
      const std::string msg = "no annotation file for image '" + img.id + "'";
      entry_warnings.push_back(msg);
      warnings.push_back(msg);
    }

    json channels = json::array();
    json maps = json::array();
    for (const auto& cls : config.mapping.channel_order) {
      ShiftSpec shift;
      if (config.shift_enabled) {
        const std::string key = config.share_shift_per_image ? img.id : img.id + "/" + cls;
        shift = sample_shift(config.shift, key, info.width, info.height);
      }
      const auto polygons = std::count_if(records.begin(), records.end(),
                                          [&](const auto& r) { return r.class_name == cls; });
      json provenance = img.annotation
                            ? json{{"source", "annotations/" + img.id + ".txt"},
                                   {"class", cls},
                                   {"polygons", polygons}}
                            : json{{"source", nullptr}, {"class", cls}, {"polygons", 0}};
      channels.push_back({{"class", cls},
                          {"mask", provenance},
                          {"shift", {{"dx", shift.dx}, {"dy", shift.dy}}}});
      if (config.write_maps) maps.push_back(config.maps_dir + "/" + map_file_name(img.id, cls));
    }
    json map_method = {{"method", to_string(config.method)}};
    if (config.method == MapMethod::Eq2) {
      map_method["alpha"] = config.eq2.alpha;
      map_method["radius"] = config.eq2.radius;
    }
    images.push_back({
        {"id", img.id},
        {"image", "images/" + img.image.filename().string()},
        {"annotation", img.annotation ? json("annotations/" + img.id + ".txt") : json(nullptr)},
        {"width", info.width},
        {"height", info.height},
        {"map", map_method},
        {"channels", channels},
        {"channel_names", [&] {
           std::vector<std::string> names = {"R", "G", "B"};
           names.insert(names.end(), config.mapping.channel_order.begin(),
                        config.mapping.channel_order.end());
           return names;
         }()},
        {"fused", config.fused_dir + "/" + img.id + ".fus"},
        {"maps", maps},
        {"warnings", entry_warnings},
    });
  }
  return {
      {"format", "probfuse-manifest"},
      {"schema_version", kManifestSchemaVersion},
      {"config", config_to_json(config)},
      {"class_list", config.classes},
      {"mapping_mode", to_string(config.mapping.mode)},
      {"rgb_scale", 1.0 / 255.0},
      {"fused_format_version", kFusedFormatVersion},
      {"images", images},
      {"warnings", warnings},
  };
}

namespace {

json execute(json manifest, const PipelineConfig& config, const RunOptions& options,
             bool write_manifest) {
  const fs::path out_root = options.output_root.value_or(config.dataset_root);
  auto& images = manifest.at("images");
  const std::size_t n = images.size();

  fs::create_directories(out_root / config.fused_dir);
  if (config.write_maps) fs::create_directories(out_root / config.maps_dir);

  StagedOutputs staged;
  std::mutex progress_mutex;
  std::atomic<std::size_t> done{0};
  std::vector<json> channel_updates(n);
  std::vector<std::uint32_t> crcs(n);

  const int threads = resolve_thread_count(options.threads > 0 ? options.threads : config.threads);
  parallel_for(n, threads, [&](std::size_t i) {
    const json& entry = images[i];
    ImageResult result = process_entry(entry, config);
    const auto bytes = encode_fused(result.tensor);
    crcs[i] = crc32_ieee(std::span(bytes).first(bytes.size() - 4));
    {
      const fs::path tmp = staged.stage(out_root / entry.at("fused").get<std::string>());
      std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
      if (!out) throw IoError("cannot open " + tmp.string() + " for writing");
      out.write(reinterpret_cast<const char*>(bytes.data()), std::streamsize(bytes.size()));
      if (!out) throw IoError("write failed for " + tmp.string());
    }
    if (config.write_maps) {
      const auto& map_paths = entry.at("maps");
      for (std::size_t k = 0; k < result.maps.size(); ++k) {
        const fs::path tmp = staged.stage(out_root / map_paths[k].get<std::string>());
        write_probability_png(result.maps[k].second, tmp.string());
      }
    }
    channel_updates[i] = json::array();
    for (bool e : result.empty) channel_updates[i].push_back(e);
    if (!options.quiet) {
      std::lock_guard lock(progress_mutex);
      std::cerr << "[" << ++done << "/" << n << "] " << entry.at("id").get<std::string>() << "\n";
    }
  });

  for (std::size_t i = 0; i < n; ++i) {
    auto& channels = images[i].at("channels");
    for (std::size_t k = 0; k < channels.size(); ++k) {
      channels[k]["empty_after_shift"] = channel_updates[i][k];
    }
    images[i]["fused_crc32"] = crcs[i];
  }
  if (write_manifest) {
    const fs::path mpath = staged.stage(out_root / config.manifest_name);
    write_text_file(mpath, manifest.dump(2) + "\n");
  }
  staged.commit();
  return manifest;
}

}  // namespace

json run_pipeline(const PipelineConfig& config, const RunOptions& options) {
  json manifest = build_manifest(config);
  if (options.dry_run) return manifest;
  return execute(std::move(manifest), config, options, true);
}

std::vector<fs::path> regenerate_from_manifest(const json& manifest, const RunOptions& options) {
  if (manifest.value("format", "") != "probfuse-manifest") {
    throw InputError("not a probfuse manifest");
  }
  if (manifest.value("schema_version", 0) != kManifestSchemaVersion) {
    throw InputError("unsupported manifest schema version");
  }
  const PipelineConfig config = config_from_json(manifest.at("config"));
  RunOptions opts = options;
  if (opts.dry_run) opts.dry_run = false;
  execute(manifest, config, opts, false);

  const fs::path out_root = opts.output_root.value_or(config.dataset_root);
  std::vector<fs::path> written;
  for (const auto& e : manifest.at("images")) {
    written.push_back(out_root / e.at("fused").get<std::string>());
  }
  return written;
}

}  // namespace probfuse
