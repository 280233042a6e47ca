#pragma once

#include <cstdint>
#include <filesystem>

namespace probfuse {

struct SyntheticOptions {
  int count = 10;
  int width = 128;
  int height = 96;
  std::uint64_t seed = 7;
  bool drop_last_annotation = true;  // leave one image unannotated
};

/// Writes a small deterministic DOTA-layout dataset: root/images/*.png and
/// root/annotations/*.txt with random rotated rectangles drawn from the DOTA classes.
void generate_synthetic_dataset(const std::filesystem::path& root,
                                const SyntheticOptions& options = {});

/// Writes reference .fus files covering edge shapes (1x1, non-square, RGB-only) for reader
/// parity checks.
void write_golden_corpus(const std::filesystem::path& dir);

}  // namespace probfuse
