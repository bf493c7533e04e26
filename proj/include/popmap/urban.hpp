#pragma once

#include <vector>

#include "popmap/raster.hpp"

namespace popmap {

struct ClusterInfo {
  std::int32_t id = 0;
  double population = 0.0;
  std::size_t cells = 0;
};

struct ClusterMap {
  GeoGrid km_grid;
  RasterI32 labels;        // 0 = rural
  Raster<double> pop_km;   // population aggregated to the km grid
  std::vector<ClusterInfo> clusters;  // sorted by id

  bool empty() const { return clusters.empty(); }
};

// Aggregates population by `factor` (1 = already at the km grid), marks
// cells whose density (per true cell area) reaches density_min, joins them
// by connectivity and keeps components totalling at least pop_min people.
ClusterMap find_urban_clusters(const Raster<double>& pop, std::size_t factor,
                               double density_min = 300.0, double pop_min = 5000.0,
                               int connectivity = 4);

struct DistanceCdf {
  std::vector<double> edges_km;      // 0, w, 2w, ...
  std::vector<double> cum_fraction;  // non-decreasing, last ~ 1
  double total_population = 0.0;
};

struct CdfPercentiles {
  double d90 = 0.0, d95 = 0.0, d99 = 0.0;
};

struct DistanceCdfResult {
  Raster<double> distance_km;   // per km-cell distance to nearest cluster cell
  DistanceCdf all_pop;          // everyone, cluster interiors at distance 0
  DistanceCdf rural_only;       // population outside clusters (empty if none)
  CdfPercentiles pct_all;
  CdfPercentiles pct_rural;
};

// Population-weighted distance distribution at the cluster map's grid.
// pop_km must live on that grid and clusters must be non-empty.
DistanceCdfResult distance_cdf(const Raster<double>& pop_km, const ClusterMap& clusters,
                               double bin_km, int threads = 1);

}  // namespace popmap
