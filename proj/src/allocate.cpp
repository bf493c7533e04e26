#include "popmap/allocate.hpp"

#include <cmath>
#include <sstream>
#include <unordered_map>

#include "popmap/errors.hpp"
#include "popmap/textio.hpp"

namespace popmap {

namespace {

void require_known_units(const RasterI32& admin, const CensusTable& census,
                         const char* who) {
  const std::vector<std::int32_t> missing = missing_census_units(admin, census);
  if (missing.empty()) return;
  std::ostringstream ss;
  ss << who << ": admin raster references units missing from the census:";
  for (std::size_t i = 0; i < missing.size() && i < 20; ++i) ss << ' ' << missing[i];
  if (missing.size() > 20) ss << " ... (" << missing.size() << " total)";
  throw ValidationError(ss.str());
}

std::vector<UnallocatedEntry> collect_unallocated(
    const CensusTable& census,
    const std::unordered_map<std::int32_t, std::size_t>& settled) {
  std::vector<UnallocatedEntry> out;
  for (const CensusRecord& r : census.records) {  // already sorted by id
    auto it = settled.find(r.unit_id);
    const std::size_t n = it == settled.end() ? 0 : it->second;
    if (r.population > 0.0 && n == 0) out.push_back({r.unit_id, r.population, 0});
  }
  return out;
}

}  // namespace

AllocationResult allocate_uniform(const CensusTable& census, const RasterI32& admin,
                                  const RasterU8& built) {
  if (!same_grid(admin.grid, built.grid))
    throw ValidationError("allocate_uniform: grid mismatch");
  require_known_units(admin, census, "allocate_uniform");

  std::unordered_map<std::int32_t, std::size_t> settled;
  for (std::size_t i = 0; i < admin.values.size(); ++i) {
    const std::int32_t id = admin.values[i];
    if (id == admin.nodata) continue;
    if (built.values[i] == 1) ++settled[id];
  }

  AllocationResult res;
  res.population = Raster<double>(admin.grid, 0.0, kDefaultNoData);
  for (std::size_t i = 0; i < admin.values.size(); ++i) {
    const std::int32_t id = admin.values[i];
    if (id == admin.nodata || built.values[i] != 1) continue;
    const double pop = census.population(id);
    if (pop <= 0.0) continue;
    res.population.values[i] = pop / static_cast<double>(settled.at(id));
  }
  res.unallocated = collect_unallocated(census, settled);
  return res;
}

AllocationResult allocate_fractional(const CensusTable& census,
                                     const RasterI32& admin,
                                     const Raster<double>& built_frac) {
  if (!same_grid(admin.grid, built_frac.grid))
    throw ValidationError("allocate_fractional: grid mismatch");
  require_known_units(admin, census, "allocate_fractional");
  for (const double f : built_frac.values)
    if (f != built_frac.nodata && !(f >= 0.0 && f <= 1.0))
      throw std::invalid_argument("allocate_fractional: fractions must be in [0,1]");

  // Row-major accumulation keeps the per-unit sums reproducible.
  std::unordered_map<std::int32_t, double> frac_sum;
  std::unordered_map<std::int32_t, std::size_t> settled;
  for (std::size_t i = 0; i < admin.values.size(); ++i) {
    const std::int32_t id = admin.values[i];
    if (id == admin.nodata) continue;
    const double f = built_frac.values[i];
    if (f == built_frac.nodata || f <= 0.0) continue;
    frac_sum[id] += f;
    ++settled[id];
  }

  AllocationResult res;
  res.population = Raster<double>(admin.grid, 0.0, kDefaultNoData);
  for (std::size_t i = 0; i < admin.values.size(); ++i) {
    const std::int32_t id = admin.values[i];
    if (id == admin.nodata) continue;
    const double f = built_frac.values[i];
    if (f == built_frac.nodata || f <= 0.0) continue;
    const double pop = census.population(id);
    if (pop <= 0.0) continue;
    res.population.values[i] = pop * (f / frac_sum.at(id));
  }
  res.unallocated = collect_unallocated(census, settled);
  return res;
}

void write_unallocated_csv(const std::vector<UnallocatedEntry>& entries,
                           const std::filesystem::path& path) {
  std::ostringstream out;
  out << "unit_id,population,settled_cells\n";
  for (const UnallocatedEntry& e : entries)
    out << e.unit_id << ',' << fmt_double(e.population) << ',' << e.settled_cells
        << '\n';
  write_text_file(path, out.str());
}

UncertaintyReport estimate_uncertainty(const CensusTable& coarse_census,
                                       const RasterI32& coarse_admin,
                                       const CensusTable& fine_census,
                                       const RasterI32& fine_admin,
                                       const RasterU8& built,
                                       const Raster<double>& built_frac,
                                       AllocMethod method,
                                       const RasterU8* urban_mask) {
  if (!same_grid(coarse_admin.grid, fine_admin.grid))
    throw ValidationError("estimate_uncertainty: admin grid mismatch");

  // Cell-wise nesting check: every fine unit must live inside exactly one
  // coarse unit, and coverage must agree.
  std::unordered_map<std::int32_t, std::int32_t> fine_to_coarse;
  std::ostringstream bad;
  std::size_t bad_count = 0;
  for (std::size_t i = 0; i < fine_admin.values.size(); ++i) {
    const std::int32_t f = fine_admin.values[i];
    const std::int32_t c = coarse_admin.values[i];
    const bool fv = f != fine_admin.nodata, cv = c != coarse_admin.nodata;
    bool offending = false;
    if (fv != cv) {
      offending = true;
    } else if (fv) {
      auto [it, inserted] = fine_to_coarse.emplace(f, c);
      offending = !inserted && it->second != c;
    }
    if (offending) {
      if (bad_count < 20)
        bad << " (" << i / fine_admin.grid.cols << ',' << i % fine_admin.grid.cols
            << ')';
      ++bad_count;
    }
  }
  if (bad_count > 0)
    throw ValidationError("estimate_uncertainty: hierarchy not nested at " +
                          std::to_string(bad_count) + " cells:" + bad.str());

  AllocationResult coarse_alloc =
      method == AllocMethod::kUniform
          ? allocate_uniform(coarse_census, coarse_admin, built)
          : allocate_fractional(coarse_census, coarse_admin, built_frac);

  std::unordered_map<std::int32_t, double> estimate;
  std::unordered_map<std::int32_t, std::size_t> unit_cells, unit_urban_cells;
  for (std::size_t i = 0; i < fine_admin.values.size(); ++i) {
    const std::int32_t f = fine_admin.values[i];
    if (f == fine_admin.nodata) continue;
    estimate[f] += coarse_alloc.population.values[i];
    ++unit_cells[f];
    if (urban_mask != nullptr && urban_mask->values[i] == 1) ++unit_urban_cells[f];
  }

  UncertaintyReport rep;
  rep.unallocated = std::move(coarse_alloc.unallocated);
  std::vector<bool> is_urban;
  for (const CensusRecord& r : fine_census.records) {
    if (r.population <= 0.0) continue;
    auto it = estimate.find(r.unit_id);
    const double est = it == estimate.end() ? 0.0 : it->second;
    if (est <= 0.0) {
      ++rep.skipped_zero_estimate;
      continue;
    }
    rep.ratios.push_back({r.unit_id, r.population, est, std::log(est / r.population)});
    if (urban_mask != nullptr) {
      const std::size_t total = unit_cells[r.unit_id];
      const std::size_t urb = unit_urban_cells[r.unit_id];
      is_urban.push_back(total > 0 && 2 * urb > total);
    }
  }
  if (rep.ratios.empty())
    throw ValidationError(
        "estimate_uncertainty: no fine units with positive truth and estimate");

  // Population (1/N) standard deviation: the two-unit reference case with
  // log ratios {ln 2, -ln 2} must give a factor of exactly 2.
  auto factor_of = [](const std::vector<double>& lrs, const std::vector<double>& ws) {
    double wsum = 0.0, mean = 0.0;
    for (std::size_t i = 0; i < lrs.size(); ++i) {
      wsum += ws[i];
      mean += ws[i] * lrs[i];
    }
    mean /= wsum;
    double var = 0.0;
    for (std::size_t i = 0; i < lrs.size(); ++i)
      var += ws[i] * (lrs[i] - mean) * (lrs[i] - mean);
    return std::sqrt(var / wsum);
  };

  std::vector<double> lrs, unit_w, pop_w;
  for (const FineUnitRatio& r : rep.ratios) {
    lrs.push_back(r.log_ratio);
    unit_w.push_back(1.0);
    pop_w.push_back(r.truth);
  }
  rep.log_std = factor_of(lrs, unit_w);
  rep.error_factor = std::exp(rep.log_std);
  rep.log_std_weighted = factor_of(lrs, pop_w);
  rep.error_factor_weighted = std::exp(rep.log_std_weighted);

  if (urban_mask != nullptr) {
    std::vector<double> lr_u, lr_r, w_u, w_r;
    for (std::size_t i = 0; i < lrs.size(); ++i) {
      (is_urban[i] ? lr_u : lr_r).push_back(lrs[i]);
      (is_urban[i] ? w_u : w_r).push_back(1.0);
    }
    if (!lr_u.empty()) rep.error_factor_urban = std::exp(factor_of(lr_u, w_u));
    if (!lr_r.empty()) rep.error_factor_rural = std::exp(factor_of(lr_r, w_r));
  }
  return rep;
}

}  // namespace popmap
