#pragma once

#include <cstdint>
#include <filesystem>
#include <unordered_map>
#include <vector>

#include "popmap/raster.hpp"

namespace popmap {

struct CensusRecord {
  std::int32_t unit_id = 0;
  double population = 0.0;
};

// Admin-unit populations; ids unique, populations non-negative.
struct CensusTable {
  std::vector<CensusRecord> records;  // sorted by unit_id
  std::unordered_map<std::int32_t, double> by_id;

  static CensusTable from_records(std::vector<CensusRecord> recs);
  bool contains(std::int32_t id) const { return by_id.count(id) != 0; }
  double population(std::int32_t id) const { return by_id.at(id); }
  double total() const;
};

// CSV with "unit_id,population" header.
CensusTable read_census_csv(const std::filesystem::path& path);
void write_census_csv(const CensusTable& t, const std::filesystem::path& path);

// Nesting map CSV with "fine_id,coarse_id" header.
std::vector<std::pair<std::int32_t, std::int32_t>> read_nesting_csv(
    const std::filesystem::path& path);
void write_nesting_csv(
    const std::vector<std::pair<std::int32_t, std::int32_t>>& pairs,
    const std::filesystem::path& path);

// Unit ids present in the admin raster but missing from the census,
// sorted; non-empty means the pair is unusable for allocation.
std::vector<std::int32_t> missing_census_units(const RasterI32& admin,
                                               const CensusTable& census);

}  // namespace popmap
