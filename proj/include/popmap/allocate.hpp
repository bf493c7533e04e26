#pragma once

#include <filesystem>
#include <optional>

#include "popmap/census.hpp"

namespace popmap {

struct UnallocatedEntry {
  std::int32_t unit_id = 0;
  double population = 0.0;
  std::size_t settled_cells = 0;
};

struct AllocationResult {
  Raster<double> population;
  // Units with population but no settled cells, sorted by unit_id; their
  // population is reported, never smeared.
  std::vector<UnallocatedEntry> unallocated;
};

// Method I: each settled cell of a unit receives population / settled
// count; everything else is zero.
AllocationResult allocate_uniform(const CensusTable& census, const RasterI32& admin,
                                  const RasterU8& built);

// Method II: cell receives population x fraction / unit fraction sum.
AllocationResult allocate_fractional(const CensusTable& census,
                                     const RasterI32& admin,
                                     const Raster<double>& built_frac);

void write_unallocated_csv(const std::vector<UnallocatedEntry>& entries,
                           const std::filesystem::path& path);

enum class AllocMethod { kUniform, kFractional };

struct FineUnitRatio {
  std::int32_t fine_id = 0;
  double truth = 0.0;
  double estimate = 0.0;
  double log_ratio = 0.0;
};

struct UncertaintyReport {
  std::vector<FineUnitRatio> ratios;  // fine units with truth > 0, by unit_id
  std::size_t skipped_zero_estimate = 0;
  double log_std = 0.0;          // unweighted population std-dev of log ratios
  double error_factor = 1.0;     // exp(log_std)
  double log_std_weighted = 0.0; // truth-population weighted variant
  double error_factor_weighted = 1.0;
  std::optional<double> error_factor_urban;  // with a cluster mask
  std::optional<double> error_factor_rural;
  std::vector<UnallocatedEntry> unallocated;  // from the coarse allocation
};

// Allocates at the coarse level, sums estimates over each fine unit and
// compares against the fine census. Fine units must nest inside coarse
// units cell-wise. An optional urban mask (same grid) splits the factor by
// majority cell class of each fine unit.
UncertaintyReport estimate_uncertainty(const CensusTable& coarse_census,
                                       const RasterI32& coarse_admin,
                                       const CensusTable& fine_census,
                                       const RasterI32& fine_admin,
                                       const RasterU8& built,
                                       const Raster<double>& built_frac,
                                       AllocMethod method,
                                       const RasterU8* urban_mask = nullptr);

}  // namespace popmap
