#include "popmap/validate.hpp"

#include <algorithm>
#include <limits>
#include <stdexcept>
#include <thread>

#include "popmap/errors.hpp"
#include "popmap/kernels.hpp"

namespace popmap {

PrecisionRecall precision_recall(std::span<const std::uint8_t> pred,
                                 std::span<const std::uint8_t> truth) {
  if (pred.size() != truth.size())
    throw std::invalid_argument("precision_recall: length mismatch");
  ConfusionCounts c;
  for (std::size_t i = 0; i < pred.size(); ++i) {
    const bool p = pred[i] != 0, t = truth[i] != 0;
    if (p && t) ++c.tp;
    else if (p && !t) ++c.fp;
    else if (!p && t) ++c.fn;
    else ++c.tn;
  }
  return precision_recall(c);
}

PrecisionRecall precision_recall(const ConfusionCounts& counts) {
  PrecisionRecall pr;
  pr.counts = counts;
  if (counts.tp + counts.fp > 0)
    pr.precision = static_cast<double>(counts.tp) /
                   static_cast<double>(counts.tp + counts.fp);
  if (counts.tp + counts.fn > 0)
    pr.recall = static_cast<double>(counts.tp) /
                static_cast<double>(counts.tp + counts.fn);
  return pr;
}

std::size_t AgreementTable::total() const {
  std::size_t t = 0;
  for (const std::size_t c : counts) t += c;
  return t;
}

CrossCompareResult cross_compare(const RasterU8& a, const RasterU8& b,
                                 const RasterU8& c) {
  if (!same_grid(a.grid, b.grid) || !same_grid(a.grid, c.grid))
    throw ValidationError("cross_compare: grid mismatch");

  CrossCompareResult res;
  RasterU8 disagree(a.grid, 0, kNoDataU8);
  for (std::size_t i = 0; i < a.values.size(); ++i) {
    // Nodata counts as absence so the histogram covers every cell.
    const int av = a.values[i] == 1 ? 1 : 0;
    const int bv = b.values[i] == 1 ? 1 : 0;
    const int cv = c.values[i] == 1 ? 1 : 0;
    ++res.table.counts[static_cast<std::size_t>((av << 2) | (bv << 1) | cv)];
    if (av != bv && av != cv) disagree.values[i] = 1;
  }

  // Visual-blob convention for review queues: 8-connectivity.
  Components comps = connected_components(disagree, 8);
  res.disagree_labels = std::move(comps.labels);
  std::vector<std::size_t> sizes(static_cast<std::size_t>(comps.count) + 1, 0);
  for (const std::int32_t lab : res.disagree_labels.values)
    if (lab > 0) ++sizes[static_cast<std::size_t>(lab)];
  for (std::int32_t lab = 1; lab <= comps.count; ++lab)
    res.components.push_back({lab, sizes[static_cast<std::size_t>(lab)]});
  std::stable_sort(res.components.begin(), res.components.end(),
                   [](const DisagreementComponent& x, const DisagreementComponent& y) {
                     return x.cells > y.cells;
                   });
  return res;
}

CoincidenceResult household_coincidence(const std::vector<GeoPoint>& points,
                                        const RasterU8& built, double radius_m,
                                        int threads) {
  if (points.empty())
    throw std::invalid_argument("household_coincidence: empty point list");
  if (radius_m < 0.0)
    throw std::invalid_argument("household_coincidence: negative radius");

  const MaskPoints pts = collect_mask_points(built);
  CoincidenceResult res;
  res.distance_km.assign(points.size(), std::numeric_limits<double>::infinity());
  res.matched.assign(points.size(), 0);
  if (pts.empty()) return res;  // nothing settled: nothing matches

  const double radius_km = radius_m / 1000.0;
  auto run = [&](std::size_t begin, std::size_t end) {
    for (std::size_t i = begin; i < end; ++i) {
      double tx, ty, tz;
      unit_vector(points[i], tx, ty, tz);
      const kern::ArgMax best = kern::max_dot3(
          pts.x.data(), pts.y.data(), pts.z.data(), tx, ty, tz, pts.x.size());
      const std::size_t mi = pts.cell[best.index];
      const GeoPoint center =
          built.grid.cell_center(mi / built.grid.cols, mi % built.grid.cols);
      const double d = geodesic_distance_km(points[i], center);
      res.distance_km[i] = d;
      res.matched[i] = d <= radius_km ? 1 : 0;
    }
  };
  const int nthreads = std::max(1, threads);
  if (nthreads == 1 || points.size() < 2) {
    run(0, points.size());
  } else {
    std::vector<std::thread> pool;
    const std::size_t chunk = (points.size() + nthreads - 1) / nthreads;
    for (int t = 0; t < nthreads; ++t) {
      const std::size_t b = std::min(points.size(), static_cast<std::size_t>(t) * chunk);
      const std::size_t e = std::min(points.size(), b + chunk);
      if (b < e) pool.emplace_back(run, b, e);
    }
    for (auto& th : pool) th.join();
  }

  std::size_t hit = 0;
  for (const std::uint8_t m : res.matched) hit += m;
  res.fraction = static_cast<double>(hit) / static_cast<double>(points.size());
  return res;
}

std::optional<double> region_recall(const RasterU8& pred, const RasterU8& truth,
                                    std::size_t factor) {
  if (!same_grid(pred.grid, truth.grid))
    throw ValidationError("region_recall: grid mismatch");
  if (factor == 0)
    throw std::invalid_argument("region_recall: factor must be >= 1");
  const Raster<double> cp = aggregate(pred, factor, AggMode::kMax);
  const Raster<double> ct = aggregate(truth, factor, AggMode::kMax);
  std::size_t tp = 0, fn = 0;
  for (std::size_t i = 0; i < ct.values.size(); ++i) {
    if (ct.values[i] == ct.nodata || ct.values[i] == 0.0) continue;
    const bool p = cp.values[i] != cp.nodata && cp.values[i] != 0.0;
    if (p) ++tp;
    else ++fn;
  }
  if (tp + fn == 0) return std::nullopt;
  return static_cast<double>(tp) / static_cast<double>(tp + fn);
}

}  // namespace popmap
