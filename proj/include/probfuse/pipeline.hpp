#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "probfuse/context_mapping.hpp"
#include "probfuse/misalignment.hpp"
#include "probfuse/probability_map.hpp"

namespace probfuse {

inline constexpr int kManifestSchemaVersion = 1;

/// Everything needed to turn a dataset root into fused tensors.
struct PipelineConfig {
  std::filesystem::path dataset_root;
  MapMethod method = MapMethod::Eq2;
  Eq2Params eq2;
  ContextMapping mapping;
  ShiftPolicy shift;
  bool shift_enabled = true;
  bool share_shift_per_image = false;  // one draw per image instead of per (image, class)
  std::vector<std::string> classes;
  std::string fused_dir = "fused";
  std::string maps_dir = "maps";
  std::string manifest_name = "manifest.json";
  bool write_maps = true;
  int threads = 0;  // 0: hardware concurrency

  /// Throws ParameterError / InputError when any downstream invariant would be violated.
  void validate() const;
};

/// Parses and validates a JSON config. Unknown keys are rejected. Relative dataset roots are
/// resolved against `base_dir`.
PipelineConfig config_from_json(const nlohmann::json& j,
                                const std::filesystem::path& base_dir = {});
nlohmann::json config_to_json(const PipelineConfig& config);
PipelineConfig load_config(const std::filesystem::path& path);

/// Scans `root/images/*.png` and `root/annotations/*.txt` and returns the manifest that a run
/// would produce, without writing anything. Every per-image shift is drawn here.
/// Images without an annotation file get a warning entry and all-zero channels.
nlohmann::json build_manifest(const PipelineConfig& config);

struct RunOptions {
  bool dry_run = false;
  int threads = 0;                          // overrides config when > 0
  std::optional<std::filesystem::path> output_root;  // defaults to the dataset root
  bool quiet = false;                       // suppress per-image progress on stderr
};

/// Plans, then builds every fused tensor (and map PNG when enabled), then writes the manifest.
/// Outputs land in temporary files and are renamed only after every image succeeded.
/// Returns the final manifest.
nlohmann::json run_pipeline(const PipelineConfig& config, const RunOptions& options = {});

/// Rebuilds every fused tensor listed in `manifest` using its recorded config and shifts.
/// Returns the written paths, in manifest order.
std::vector<std::filesystem::path> regenerate_from_manifest(const nlohmann::json& manifest,
                                                            const RunOptions& options = {});

/// Pool size: PROBFUSE_THREADS if set, else `requested` if > 0, else hardware concurrency.
int resolve_thread_count(int requested);

}  // namespace probfuse
