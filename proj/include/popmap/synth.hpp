#pragma once

#include <cstdint>
#include <filesystem>
#include <vector>

#include "popmap/census.hpp"
#include "popmap/image.hpp"
#include "popmap/patches.hpp"
#include "popmap/raster.hpp"

namespace popmap {

// Synthetic ground truth: bright shadowed rectangles on a textured noisy
// background, a two-level census hierarchy proportional to building area,
// and jittered household samples. Everything is a pure function of seed.
struct WorldSpec {
  std::uint64_t seed = 1;
  GeoGrid cell_grid{0.0, 30.0, 1.0, 16, 16};  // output raster lattice
  std::size_t pixels_per_cell = 64;           // classifier window size

  double building_density = 0.02;  // fraction of cells containing a building
  int building_min_px = 10;
  int building_max_px = 40;

  double texture_amp = 0.08;   // low-frequency background texture
  double noise_sigma = 0.02;   // per-pixel Gaussian noise
  double base_intensity = 0.30;

  std::size_t coarse_units = 4;
  std::size_t fine_per_coarse = 4;
  double region_density_spread = 0.5;  // per-coarse multiplier 2^U(-s,s)

  double people_per_built_cell = 250.0;
  double census_jitter_sigma = 0.3;  // log-normal spread of fine populations
  std::size_t household_samples = 200;
};

struct World {
  WorldSpec spec;
  ImageTile imagery;
  RasterU8 truth_built;          // cell grid
  Raster<double> truth_fraction; // built pixel share per cell
  RasterI32 admin_coarse;
  RasterI32 admin_fine;
  CensusTable census_coarse;
  CensusTable census_fine;
  std::vector<std::pair<std::int32_t, std::int32_t>> nesting;  // fine -> coarse
  std::vector<GeoPoint> households;
};

World generate(const WorldSpec& spec);

// Labeled training corpora cut from a world's imagery: every positive
// window plus negatives_per_positive sampled negatives (seeded).
PatchSet make_corpus(const World& world, std::size_t patch_px,
                     double negatives_per_positive, std::uint64_t seed);

// Flat key-value worldspec file (documented in the README).
WorldSpec read_worldspec(const std::filesystem::path& path);
void write_worldspec(const WorldSpec& spec, const std::filesystem::path& path);

}  // namespace popmap
