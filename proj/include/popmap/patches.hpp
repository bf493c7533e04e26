#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "popmap/hough.hpp"
#include "popmap/image.hpp"

namespace popmap {

inline constexpr std::size_t kClassifyPatchPx = 64;
inline constexpr std::size_t kSegmentPatchPx = 256;

enum class PatchLabel : int { kNoBuilding = 0, kBuilding = 1 };

struct Patch {
  std::string id;
  std::size_t size_px = kClassifyPatchPx;
  std::vector<float> pixels;        // size_px * size_px, row-major
  GeoPoint geo_anchor;              // NW corner of the top-left pixel
  std::optional<PatchLabel> label;
  std::size_t window_row = 0, window_col = 0;  // grid-aligned window indices
};

struct PatchSet {
  std::size_t patch_px = kClassifyPatchPx;
  std::size_t windows_total = 0;  // window count of the source tile
  std::vector<Patch> patches;
};

// Cuts the grid-aligned non-overlapping window of the given size at
// (wrow, wcol) out of a tile.
Patch cut_window(const ImageTile& tile, std::size_t wrow, std::size_t wcol,
                 std::size_t patch_px);

// One patch per grid-aligned 64x64 window that contains at least one
// segment midpoint; deduplicated, row-major order.
PatchSet candidate_patches(const ImageTile& tile,
                           const std::vector<LineSegment>& segments);

// Corpus directory: one PGM per patch plus manifest.csv with
// patch_id,lat,lon,label (label empty when absent).
void write_corpus(const PatchSet& set, const std::filesystem::path& dir);
PatchSet read_corpus(const std::filesystem::path& dir);

}  // namespace popmap
