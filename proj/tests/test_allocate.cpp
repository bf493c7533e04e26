#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <unordered_map>

#include "popmap/allocate.hpp"
#include "popmap/errors.hpp"
#include "popmap/rng.hpp"

using namespace popmap;

namespace {

GeoGrid grid(std::size_t rows, std::size_t cols) {
  return GeoGrid(1.0, 10.0, 30.0, rows, cols);
}

CensusTable census_of(std::initializer_list<CensusRecord> recs) {
  return CensusTable::from_records(recs);
}

}  // namespace

TEST_CASE("uniform allocation splits evenly over settled cells") {
  RasterI32 admin(grid(2, 2), 1, kNoDataI32);
  RasterU8 built(grid(2, 2), 1, kNoDataU8);
  const AllocationResult res =
      allocate_uniform(census_of({{1, 100.0}}), admin, built);
  for (const double v : res.population.values) CHECK(v == 25.0);
  CHECK(res.unallocated.empty());
}

TEST_CASE("zero population allocates zeros") {
  RasterI32 admin(grid(2, 2), 1, kNoDataI32);
  RasterU8 built(grid(2, 2), 1, kNoDataU8);
  const AllocationResult res = allocate_uniform(census_of({{1, 0.0}}), admin, built);
  for (const double v : res.population.values) CHECK(v == 0.0);
}

TEST_CASE("unsettled cells stay zero and populated-but-unsettled units are reported") {
  RasterI32 admin(grid(2, 2), 0, kNoDataI32);
  admin.values = {1, 1, 2, 2};
  RasterU8 built(grid(2, 2), 0, kNoDataU8);
  built.values = {1, 0, 0, 0};  // unit 2 has no settled cell
  const AllocationResult res =
      allocate_uniform(census_of({{1, 10.0}, {2, 50.0}}), admin, built);
  CHECK(res.population.values[0] == 10.0);
  CHECK(res.population.values[1] == 0.0);
  CHECK(res.population.values[2] == 0.0);
  CHECK(res.population.values[3] == 0.0);
  REQUIRE(res.unallocated.size() == 1);
  CHECK(res.unallocated[0].unit_id == 2);
  CHECK(res.unallocated[0].population == 50.0);
  CHECK(res.unallocated[0].settled_cells == 0);
}

TEST_CASE("per-unit conservation over irregular units") {
  Rng rng(51);
  for (int rep = 0; rep < 20; ++rep) {
    const std::size_t rows = 6 + rng.bounded(10), cols = 6 + rng.bounded(10);
    RasterI32 admin(grid(rows, cols), 0, kNoDataI32);
    RasterU8 built(grid(rows, cols), 0, kNoDataU8);
    Raster<double> frac(grid(rows, cols), 0.0, kDefaultNoData);
    for (std::size_t i = 0; i < admin.values.size(); ++i) {
      admin.values[i] = 1 + static_cast<std::int32_t>(rng.bounded(3));
      built.values[i] = rng.uniform() < 0.5 ? 1 : 0;
      frac.values[i] = built.values[i] == 1 ? rng.uniform(0.05, 1.0) : 0.0;
    }
    const CensusTable census =
        census_of({{1, rng.uniform(0, 5000)}, {2, rng.uniform(0, 5000)},
                   {3, rng.uniform(0, 5000)}});

    for (const bool fractional : {false, true}) {
      const AllocationResult res =
          fractional ? allocate_fractional(census, admin, frac)
                     : allocate_uniform(census, admin, built);
      std::unordered_map<std::int32_t, double> sums;
      for (std::size_t i = 0; i < admin.values.size(); ++i)
        sums[admin.values[i]] += res.population.values[i];
      std::unordered_map<std::int32_t, bool> skipped;
      for (const auto& u : res.unallocated) skipped[u.unit_id] = true;
      for (const CensusRecord& r : census.records) {
        if (skipped.count(r.unit_id) != 0 || r.population == 0.0) continue;
        CHECK(std::fabs(sums[r.unit_id] - r.population) <=
              1e-9 * std::max(1.0, r.population));
      }
      // Non-negative everywhere, zero where unsettled.
      for (std::size_t i = 0; i < res.population.values.size(); ++i) {
        CHECK(res.population.values[i] >= 0.0);
        if (built.values[i] == 0) CHECK(res.population.values[i] == 0.0);
      }
    }
  }
}

TEST_CASE("fractional allocation follows the fractions") {
  RasterI32 admin(grid(1, 3), 1, kNoDataI32);
  Raster<double> frac(grid(1, 3), 0.0, kDefaultNoData);
  frac.values = {0.5, 0.25, 0.25};
  const AllocationResult res =
      allocate_fractional(census_of({{1, 80.0}}), admin, frac);
  CHECK(res.population.values[0] == doctest::Approx(40.0).epsilon(1e-12));
  CHECK(res.population.values[1] == doctest::Approx(20.0).epsilon(1e-12));
  CHECK(res.population.values[2] == doctest::Approx(20.0).epsilon(1e-12));
}

TEST_CASE("constant fractions reduce to the uniform method") {
  Rng rng(52);
  RasterI32 admin(grid(4, 5), 0, kNoDataI32);
  RasterU8 built(grid(4, 5), 0, kNoDataU8);
  Raster<double> frac(grid(4, 5), 0.0, kDefaultNoData);
  for (std::size_t i = 0; i < admin.values.size(); ++i) {
    admin.values[i] = 1 + static_cast<std::int32_t>(rng.bounded(2));
    built.values[i] = rng.uniform() < 0.6 ? 1 : 0;
    frac.values[i] = built.values[i] == 1 ? 0.37 : 0.0;
  }
  const CensusTable census = census_of({{1, 123.0}, {2, 456.0}});
  const AllocationResult uni = allocate_uniform(census, admin, built);
  const AllocationResult fra = allocate_fractional(census, admin, frac);
  for (std::size_t i = 0; i < uni.population.values.size(); ++i)
    CHECK(std::fabs(uni.population.values[i] - fra.population.values[i]) <= 1e-12);
}

TEST_CASE("scale equivariance is exact for powers of two") {
  Rng rng(53);
  RasterI32 admin(grid(3, 3), 1, kNoDataI32);
  RasterU8 built(grid(3, 3), 0, kNoDataU8);
  for (auto& v : built.values) v = rng.uniform() < 0.7 ? 1 : 0;
  built.values[0] = 1;
  const CensusTable c1 = census_of({{1, 37.5}});
  const CensusTable c8 = census_of({{1, 300.0}});  // 37.5 * 8
  const AllocationResult a = allocate_uniform(c1, admin, built);
  const AllocationResult b = allocate_uniform(c8, admin, built);
  for (std::size_t i = 0; i < a.population.values.size(); ++i)
    CHECK(b.population.values[i] == 8.0 * a.population.values[i]);
}

TEST_CASE("fractions outside [0,1] and unknown units are rejected") {
  RasterI32 admin(grid(1, 2), 1, kNoDataI32);
  Raster<double> frac(grid(1, 2), 0.0, kDefaultNoData);
  frac.values = {0.5, 1.5};
  CHECK_THROWS_AS(allocate_fractional(census_of({{1, 10.0}}), admin, frac),
                  std::invalid_argument);

  RasterU8 built(grid(1, 2), 1, kNoDataU8);
  admin.values = {1, 9};
  CHECK_THROWS_WITH_AS(allocate_uniform(census_of({{1, 10.0}}), admin, built),
                       doctest::Contains("9"), ValidationError);
}

TEST_CASE("uncertainty: reference two-unit case gives a factor of exactly two") {
  // Coarse unit 300 over three settled cells; fine units split them 2:1 with
  // truths 100 and 200, so the log ratios are {ln 2, -ln 2}.
  RasterI32 coarse(grid(1, 3), 1, kNoDataI32);
  RasterI32 fine(grid(1, 3), 0, kNoDataI32);
  fine.values = {11, 11, 12};
  RasterU8 built(grid(1, 3), 1, kNoDataU8);
  Raster<double> frac(grid(1, 3), 1.0, kDefaultNoData);

  const UncertaintyReport rep = estimate_uncertainty(
      census_of({{1, 300.0}}), coarse, census_of({{11, 100.0}, {12, 200.0}}), fine,
      built, frac, AllocMethod::kUniform);
  REQUIRE(rep.ratios.size() == 2);
  CHECK(rep.ratios[0].estimate == doctest::Approx(200.0).epsilon(1e-12));
  CHECK(rep.ratios[1].estimate == doctest::Approx(100.0).epsilon(1e-12));
  CHECK(std::fabs(rep.ratios[0].log_ratio - std::log(2.0)) < 1e-12);
  CHECK(std::fabs(rep.ratios[1].log_ratio + std::log(2.0)) < 1e-12);
  CHECK(std::fabs(rep.error_factor - 2.0) < 1e-9);
}

TEST_CASE("uncertainty: identity hierarchy gives factor one") {
  RasterI32 admin(grid(2, 2), 0, kNoDataI32);
  admin.values = {1, 1, 2, 2};
  RasterU8 built(grid(2, 2), 1, kNoDataU8);
  Raster<double> frac(grid(2, 2), 1.0, kDefaultNoData);
  const CensusTable census = census_of({{1, 40.0}, {2, 60.0}});
  const UncertaintyReport rep =
      estimate_uncertainty(census, admin, census, admin, built, frac,
                           AllocMethod::kUniform);
  for (const FineUnitRatio& r : rep.ratios) CHECK(std::fabs(r.log_ratio) < 1e-12);
  CHECK(std::fabs(rep.error_factor - 1.0) < 1e-12);
  CHECK(std::fabs(rep.error_factor_weighted - 1.0) < 1e-12);
}

TEST_CASE("uncertainty: non-nested hierarchies are rejected with cells") {
  RasterI32 coarse(grid(1, 4), 0, kNoDataI32);
  coarse.values = {1, 1, 2, 2};
  RasterI32 fine(grid(1, 4), 0, kNoDataI32);
  fine.values = {11, 11, 11, 12};  // unit 11 straddles coarse 1 and 2
  RasterU8 built(grid(1, 4), 1, kNoDataU8);
  Raster<double> frac(grid(1, 4), 1.0, kDefaultNoData);
  CHECK_THROWS_WITH_AS(
      estimate_uncertainty(census_of({{1, 10.0}, {2, 10.0}}), coarse,
                           census_of({{11, 10.0}, {12, 10.0}}), fine, built, frac,
                           AllocMethod::kUniform),
      doctest::Contains("not nested"), ValidationError);
}

TEST_CASE("uncertainty: urban/rural split reports both factors") {
  RasterI32 coarse(grid(1, 4), 1, kNoDataI32);
  RasterI32 fine(grid(1, 4), 0, kNoDataI32);
  fine.values = {11, 11, 12, 12};
  RasterU8 built(grid(1, 4), 1, kNoDataU8);
  Raster<double> frac(grid(1, 4), 1.0, kDefaultNoData);
  RasterU8 mask(grid(1, 4), 0, kNoDataU8);
  mask.values = {1, 1, 0, 0};  // unit 11 urban, unit 12 rural
  const UncertaintyReport rep = estimate_uncertainty(
      census_of({{1, 100.0}}), coarse, census_of({{11, 40.0}, {12, 60.0}}), fine,
      built, frac, AllocMethod::kUniform, &mask);
  CHECK(rep.error_factor_urban.has_value());
  CHECK(rep.error_factor_rural.has_value());
}
