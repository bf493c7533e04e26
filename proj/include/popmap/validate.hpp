#pragma once

#include <array>
#include <optional>
#include <span>
#include <vector>

#include "popmap/raster.hpp"

namespace popmap {

struct ConfusionCounts {
  std::size_t tp = 0, fp = 0, fn = 0, tn = 0;
};

struct PrecisionRecall {
  std::optional<double> precision;  // absent when TP+FP = 0
  std::optional<double> recall;     // absent when TP+FN = 0
  ConfusionCounts counts;
};

PrecisionRecall precision_recall(std::span<const std::uint8_t> pred,
                                 std::span<const std::uint8_t> truth);
PrecisionRecall precision_recall(const ConfusionCounts& counts);

// Histogram over the 8 presence/absence combinations of three settlement
// layers; index is (A<<2 | B<<1 | C).
struct AgreementTable {
  std::array<std::size_t, 8> counts{};
  std::size_t total() const;
};

struct DisagreementComponent {
  std::int32_t label = 0;
  std::size_t cells = 0;
};

struct CrossCompareResult {
  AgreementTable table;
  RasterI32 disagree_labels;  // components where A differs from both B and C
  std::vector<DisagreementComponent> components;  // largest first
};

CrossCompareResult cross_compare(const RasterU8& a, const RasterU8& b,
                                 const RasterU8& c);

struct CoincidenceResult {
  double fraction = 0.0;                // matched / total
  std::vector<double> distance_km;      // per point, to nearest true cell center
  std::vector<std::uint8_t> matched;    // per point
};

// A point matches when some true cell center lies within radius_m
// (geodesic). Throws std::invalid_argument on an empty point list.
CoincidenceResult household_coincidence(const std::vector<GeoPoint>& points,
                                        const RasterU8& built, double radius_m,
                                        int threads = 1);

// Recall after max-aggregating both rasters by `factor`; absent when the
// coarsened truth has no positives.
std::optional<double> region_recall(const RasterU8& pred, const RasterU8& truth,
                                    std::size_t factor);

}  // namespace popmap
