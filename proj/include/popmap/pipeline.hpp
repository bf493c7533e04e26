#pragma once

#include <filesystem>

#include "popmap/config.hpp"
#include "popmap/nn/feedback.hpp"
#include "popmap/nn/segnet.hpp"
#include "popmap/patches.hpp"
#include "popmap/synth.hpp"

namespace popmap {

// Detection engine. One output cell corresponds to one 64x64 px classifier
// window (mirroring the production geometry where a patch covers roughly
// one arcsecond cell); footprints come from 256 px segmentation windows
// run only where the classifier fired, then cascaded with the scores.
struct DetectParams {
  int smooth_radius = 1;
  float edge_low = 0.06f;
  float edge_high = 0.14f;
  int hough_min_support = 25;
  int feedback_passes = 2;
  double footprint_threshold = 0.5;
  double cascade_tau = 0.5;
  int threads = 1;
};

struct DetectResult {
  RasterU8 built;            // Method I: score >= tau
  Raster<double> fraction;   // Method II: cascaded footprint fraction
  Raster<double> scores;     // raw per-cell classifier scores
  std::size_t windows_total = 0;
  std::size_t windows_candidate = 0;
  std::size_t cells_built = 0;
};

DetectResult detect_tile(const ImageTile& tile, const nn::SegNetModel& classifier,
                         const nn::FeedbackModel& segmenter,
                         const DetectParams& params);

// File-level stages behind the CLI; they read/write the formats described
// in the README and drop a ".meta" sidecar next to every artifact.
void stage_synth(const KeyValues& cfg, std::uint64_t seed_override, bool has_seed);
void stage_train(const KeyValues& cfg, std::uint64_t seed_override, bool has_seed);
void stage_detect(const KeyValues& cfg, int threads);
void stage_allocate(const KeyValues& cfg);
void stage_clusters(const KeyValues& cfg, int threads);
void stage_validate(const KeyValues& cfg, int threads);

void write_meta(const std::filesystem::path& artifact, const std::string& stage,
                const KeyValues& cfg);

}  // namespace popmap
