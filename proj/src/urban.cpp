#include "popmap/urban.hpp"

#include <cmath>
#include <unordered_map>

#include "popmap/errors.hpp"

namespace popmap {

ClusterMap find_urban_clusters(const Raster<double>& pop, std::size_t factor,
                               double density_min, double pop_min,
                               int connectivity) {
  if (factor == 0)
    throw std::invalid_argument("find_urban_clusters: factor must be >= 1");
  for (const double v : pop.values)
    if (v != pop.nodata && v < 0.0)
      throw std::invalid_argument("find_urban_clusters: negative population");

  ClusterMap cm;
  cm.pop_km = factor == 1 ? pop : aggregate(pop, factor, AggMode::kSum);
  cm.km_grid = cm.pop_km.grid;

  RasterU8 dense(cm.km_grid, 0, kNoDataU8);
  for (std::size_t row = 0; row < cm.km_grid.rows; ++row) {
    const double area = cell_area_km2(cm.km_grid, row);
    for (std::size_t col = 0; col < cm.km_grid.cols; ++col) {
      const double v = cm.pop_km.at(row, col);
      if (v == cm.pop_km.nodata) continue;
      if (v / area >= density_min) dense.at(row, col) = 1;
    }
  }

  Components comps = connected_components(dense, connectivity);
  std::unordered_map<std::int32_t, ClusterInfo> info;
  for (std::size_t i = 0; i < comps.labels.values.size(); ++i) {
    const std::int32_t lab = comps.labels.values[i];
    if (lab == 0) continue;
    ClusterInfo& ci = info[lab];
    const double v = cm.pop_km.values[i];
    ci.population += v == cm.pop_km.nodata ? 0.0 : v;
    ++ci.cells;
  }

  // Keep clusters reaching pop_min; relabel densely in first-cell order.
  std::unordered_map<std::int32_t, std::int32_t> relabel;
  cm.labels = RasterI32(cm.km_grid, 0, kNoDataI32);
  std::int32_t next = 0;
  for (std::size_t i = 0; i < comps.labels.values.size(); ++i) {
    const std::int32_t lab = comps.labels.values[i];
    if (lab == 0) continue;
    const ClusterInfo& ci = info.at(lab);
    if (ci.population < pop_min) continue;
    auto [it, inserted] = relabel.emplace(lab, next + 1);
    if (inserted) {
      ++next;
      ClusterInfo kept = ci;
      kept.id = it->second;
      cm.clusters.push_back(kept);
    }
    cm.labels.values[i] = it->second;
  }
  return cm;
}

namespace {

DistanceCdf build_cdf(const Raster<double>& pop_km, const Raster<double>& dist,
                      const RasterI32& labels, double bin_km, bool rural_only,
                      std::size_t nbins) {
  DistanceCdf cdf;
  std::vector<double> mass(nbins + 1, 0.0);
  double total = 0.0;
  for (std::size_t i = 0; i < pop_km.values.size(); ++i) {
    const double p = pop_km.values[i];
    if (p == pop_km.nodata || p <= 0.0) continue;
    if (rural_only && labels.values[i] != 0) continue;
    const double d = dist.values[i];
    const std::size_t bin =
        d <= 0.0 ? 0
                 : std::min(nbins, static_cast<std::size_t>(std::ceil(d / bin_km)));
    mass[bin] += p;
    total += p;
  }
  cdf.total_population = total;
  if (total <= 0.0) return cdf;  // empty CDF, caller decides
  double cum = 0.0;
  for (std::size_t k = 0; k <= nbins; ++k) {
    cum += mass[k];
    cdf.edges_km.push_back(static_cast<double>(k) * bin_km);
    cdf.cum_fraction.push_back(cum / total);
  }
  return cdf;
}

// Smallest edge whose cumulative fraction strictly exceeds p. With a mass
// of exactly p at distance zero the percentile must move to the next
// populated bin, hence strict comparison.
double percentile(const DistanceCdf& cdf, double p) {
  for (std::size_t i = 0; i < cdf.edges_km.size(); ++i)
    if (cdf.cum_fraction[i] > p) return cdf.edges_km[i];
  return cdf.edges_km.empty() ? 0.0 : cdf.edges_km.back();
}

}  // namespace

DistanceCdfResult distance_cdf(const Raster<double>& pop_km,
                               const ClusterMap& clusters, double bin_km,
                               int threads) {
  if (!(bin_km > 0.0))
    throw std::invalid_argument("distance_cdf: bin width must be positive");
  if (!same_grid(pop_km.grid, clusters.km_grid))
    throw ValidationError("distance_cdf: population not on the cluster grid");
  if (clusters.empty())
    throw ValidationError("distance_cdf: empty cluster set, no urban cluster exists");

  RasterU8 mask(clusters.km_grid, 0, kNoDataU8);
  for (std::size_t i = 0; i < clusters.labels.values.size(); ++i)
    if (clusters.labels.values[i] > 0) mask.values[i] = 1;

  DistanceCdfResult res;
  res.distance_km = distance_to_mask_km(pop_km, mask, threads);

  double max_d = 0.0;
  for (const double d : res.distance_km.values) max_d = std::max(max_d, d);
  const std::size_t nbins =
      std::max<std::size_t>(1, static_cast<std::size_t>(std::ceil(max_d / bin_km)));

  res.all_pop =
      build_cdf(pop_km, res.distance_km, clusters.labels, bin_km, false, nbins);
  if (res.all_pop.total_population <= 0.0)
    throw ValidationError("distance_cdf: no population on the grid");
  res.rural_only =
      build_cdf(pop_km, res.distance_km, clusters.labels, bin_km, true, nbins);

  res.pct_all = {percentile(res.all_pop, 0.90), percentile(res.all_pop, 0.95),
                 percentile(res.all_pop, 0.99)};
  if (res.rural_only.total_population > 0.0)
    res.pct_rural = {percentile(res.rural_only, 0.90),
                     percentile(res.rural_only, 0.95),
                     percentile(res.rural_only, 0.99)};
  return res;
}

}  // namespace popmap
