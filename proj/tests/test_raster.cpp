#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <fstream>

#include "oracles.hpp"
#include "popmap/errors.hpp"
#include "popmap/raster.hpp"
#include "popmap/rng.hpp"
#include "popmap/textio.hpp"

using namespace popmap;

namespace {

GeoGrid small_grid(std::size_t rows, std::size_t cols, double res = 30.0) {
  return GeoGrid(1.0, 10.0, res, rows, cols);
}

RasterU8 random_binary(Rng& rng, std::size_t rows, std::size_t cols, double p) {
  RasterU8 r(small_grid(rows, cols), 0, kNoDataU8);
  for (auto& v : r.values) v = rng.uniform() < p ? 1 : 0;
  return r;
}

std::filesystem::path temp_file(const char* name) {
  auto dir = std::filesystem::temp_directory_path() / "popmap_test_raster";
  std::filesystem::create_directories(dir);
  return dir / name;
}

}  // namespace

TEST_CASE("aggregate mean of a 2x2 block") {
  Raster<double> r(small_grid(2, 2), 0.0, kDefaultNoData);
  r.values = {0.0, 1.0, 1.0, 1.0};
  const Raster<double> out = aggregate(r, 2, AggMode::kMean);
  CHECK(out.grid.rows == 1);
  CHECK(out.values[0] == 0.75);
}

TEST_CASE("aggregate with factor 1 is the identity") {
  Rng rng(3);
  Raster<double> r(small_grid(5, 7), 0.0, kDefaultNoData);
  for (auto& v : r.values) v = rng.uniform(0.0, 9.0);
  for (const AggMode mode : {AggMode::kSum, AggMode::kMean, AggMode::kMax}) {
    const Raster<double> out = aggregate(r, 1, mode);
    for (std::size_t i = 0; i < r.values.size(); ++i)
      CHECK(out.values[i] == doctest::Approx(r.values[i]).epsilon(1e-15));
  }
}

TEST_CASE("aggregate sum equals brute-force block sums") {
  Rng rng(17);
  for (int rep = 0; rep < 20; ++rep) {
    Raster<double> r(small_grid(4 + rng.bounded(9), 4 + rng.bounded(9)), 0.0,
                     kDefaultNoData);
    for (auto& v : r.values) v = rng.uniform() < 0.5 ? 1.0 : 0.0;
    if (rep % 3 == 0) r.values[rng.bounded(r.values.size())] = r.nodata;
    const std::size_t factor = 2 + rng.bounded(3);
    const Raster<double> got = aggregate(r, factor, AggMode::kSum);
    const Raster<double> want = oracle::block_sum(r, factor);
    REQUIRE(got.values.size() == want.values.size());
    for (std::size_t i = 0; i < got.values.size(); ++i)
      CHECK(got.values[i] == want.values[i]);
  }
}

TEST_CASE("aggregate conserves totals") {
  Rng rng(23);
  for (int rep = 0; rep < 10; ++rep) {
    Raster<double> r(small_grid(10 + rng.bounded(20), 10 + rng.bounded(20)), 0.0,
                     kDefaultNoData);
    for (auto& v : r.values) v = rng.uniform(0.0, 100.0);
    const std::size_t factor = 1 + rng.bounded(6);
    const Raster<double> out = aggregate(r, factor, AggMode::kSum);
    double in_total = 0.0, out_total = 0.0;
    for (const double v : r.values) in_total += v;
    for (const double v : out.values)
      if (v != out.nodata) out_total += v;
    CHECK(std::fabs(in_total - out_total) <= 1e-9 * std::fabs(in_total));
  }
}

TEST_CASE("aggregate pads ragged edges with nodata semantics") {
  Raster<double> r(small_grid(3, 3), 1.0, kDefaultNoData);
  const Raster<double> out = aggregate(r, 2, AggMode::kSum);
  CHECK(out.grid.rows == 2);
  CHECK(out.grid.cols == 2);
  CHECK(out.at(0, 0) == 4.0);  // full block
  CHECK(out.at(0, 1) == 2.0);  // half block
  CHECK(out.at(1, 1) == 1.0);  // corner
}

TEST_CASE("aggregate fraction_true and max") {
  Raster<double> r(small_grid(2, 2), 0.0, kDefaultNoData);
  r.values = {0.0, 2.0, 0.0, 5.0};
  CHECK(aggregate(r, 2, AggMode::kFractionTrue).values[0] == 0.5);
  CHECK(aggregate(r, 2, AggMode::kMax).values[0] == 5.0);
  CHECK_THROWS_AS(aggregate(r, 0, AggMode::kSum), std::invalid_argument);
}

TEST_CASE("connected components: plus sign is one component") {
  RasterU8 r(small_grid(3, 3), 0, kNoDataU8);
  r.values = {0, 1, 0, 1, 1, 1, 0, 1, 0};
  const Components c = connected_components(r, 4);
  CHECK(c.count == 1);
}

TEST_CASE("connected components: diagonal pair") {
  RasterU8 r(small_grid(2, 2), 0, kNoDataU8);
  r.values = {1, 0, 0, 1};
  CHECK(connected_components(r, 4).count == 2);
  CHECK(connected_components(r, 8).count == 1);
  CHECK_THROWS_AS(connected_components(r, 6), std::invalid_argument);
}

TEST_CASE("connected components agree with the flood-fill oracle") {
  Rng rng(31);
  for (int rep = 0; rep < 200; ++rep) {
    const RasterU8 r = random_binary(rng, 32, 32, 0.4);
    for (const int conn : {4, 8}) {
      const Components got = connected_components(r, conn);
      const RasterI32 want = oracle::flood_fill_labels(r, conn);
      CHECK(oracle::same_partition(got.labels, want));
      // Partition property: every true cell labeled, no false cell labeled.
      for (std::size_t i = 0; i < r.values.size(); ++i)
        CHECK((r.values[i] == 1) == (got.labels.values[i] > 0));
    }
  }
}

TEST_CASE("distance_to_mask: interior cells are zero") {
  RasterU8 mask(small_grid(4, 4), 0, kNoDataU8);
  mask.at(1, 2) = 1;
  Raster<double> pop(mask.grid, 1.0, kDefaultNoData);
  const Raster<double> d = distance_to_mask_km(pop, mask);
  CHECK(d.at(1, 2) == 0.0);
  CHECK(d.at(0, 0) > 0.0);
}

TEST_CASE("distance_to_mask matches exhaustive nearest neighbor") {
  Rng rng(47);
  SUBCASE("single mask cell on an 8x8 grid") {
    RasterU8 mask(small_grid(8, 8), 0, kNoDataU8);
    mask.at(5, 2) = 1;
    Raster<double> pop(mask.grid, 1.0, kDefaultNoData);
    const Raster<double> d = distance_to_mask_km(pop, mask);
    for (std::size_t r = 0; r < 8; ++r)
      for (std::size_t c = 0; c < 8; ++c)
        CHECK(std::fabs(d.at(r, c) -
                        oracle::nearest_mask_km(mask.grid, mask, r, c)) < 1e-9);
  }
  SUBCASE("random grids up to 64x64") {
    for (int rep = 0; rep < 5; ++rep) {
      const std::size_t rows = 16 + rng.bounded(49), cols = 16 + rng.bounded(49);
      RasterU8 mask = random_binary(rng, rows, cols, 0.02);
      bool any = false;
      for (const auto v : mask.values) any = any || v == 1;
      if (!any) mask.at(0, 0) = 1;
      Raster<double> pop(mask.grid, 1.0, kDefaultNoData);
      const Raster<double> d = distance_to_mask_km(pop, mask);
      for (int probe = 0; probe < 50; ++probe) {
        const std::size_t r = rng.bounded(rows), c = rng.bounded(cols);
        CHECK(std::fabs(d.at(r, c) -
                        oracle::nearest_mask_km(mask.grid, mask, r, c)) < 1e-9);
      }
    }
  }
}

TEST_CASE("distance_to_mask: empty mask is an error") {
  RasterU8 mask(small_grid(4, 4), 0, kNoDataU8);
  Raster<double> pop(mask.grid, 1.0, kDefaultNoData);
  CHECK_THROWS_WITH_AS(distance_to_mask_km(pop, mask),
                       doctest::Contains("no urban cluster"), ValidationError);
}

TEST_CASE("distance_to_mask is identical across thread counts") {
  Rng rng(53);
  RasterU8 mask = random_binary(rng, 40, 40, 0.05);
  mask.at(3, 3) = 1;
  Raster<double> pop(mask.grid, 1.0, kDefaultNoData);
  const Raster<double> d1 = distance_to_mask_km(pop, mask, 1);
  const Raster<double> d4 = distance_to_mask_km(pop, mask, 4);
  const Raster<double> d8 = distance_to_mask_km(pop, mask, 8);
  CHECK(d1.values == d4.values);
  CHECK(d1.values == d8.values);
}

TEST_CASE("ascii grid round trip is bit exact") {
  Raster<double> r(small_grid(3, 3), 0.0, kDefaultNoData);
  Rng rng(5);
  for (auto& v : r.values) v = rng.uniform(-1e6, 1e6);
  r.values[4] = r.nodata;
  r.values[7] = 1.0 / 3.0;
  const auto path = temp_file("roundtrip.asc");
  write_grid_ascii(r, path);
  const Raster<double> back = read_grid_ascii(path);
  CHECK(back.values == r.values);
  CHECK(back.nodata == r.nodata);
  CHECK(same_grid(back.grid, r.grid));
}

TEST_CASE("ascii grid dimension mismatch raises a parse error with a line") {
  const auto path = temp_file("bad_dims.asc");
  write_text_file(path,
                  "ncols 3\nnrows 2\nxllcorner 0\nyllcorner 0\ncellsize 0.01\n"
                  "NODATA_value -9999\n1 2 3\n4 5\n");
  CHECK_THROWS_AS(read_grid_ascii(path), ParseError);
  try {
    read_grid_ascii(path);
  } catch (const ParseError& e) {
    CHECK(std::string(e.what()).find(":8") != std::string::npos);
  }
}

TEST_CASE("ascii grid malformed header") {
  const auto path = temp_file("bad_header.asc");
  write_text_file(path, "ncols 3\nnrows 2\nwrongkey 0\n");
  CHECK_THROWS_AS(read_grid_ascii(path), ParseError);
}

TEST_CASE("ascii grid trailing data is rejected") {
  const auto path = temp_file("trailing.asc");
  write_text_file(path,
                  "ncols 1\nnrows 1\nxllcorner 0\nyllcorner 0\ncellsize 0.01\n"
                  "NODATA_value -9999\n1 2\n");
  CHECK_THROWS_AS(read_grid_ascii(path), ParseError);
}

TEST_CASE("integer and binary raster round trips") {
  RasterI32 ids(small_grid(2, 3), 0, kNoDataI32);
  ids.values = {1, 2, 3, -1, 1000000, 7};
  const auto ipath = temp_file("ids.asc");
  write_grid_ascii(ids, ipath);
  CHECK(read_grid_ascii_i32(ipath).values == ids.values);

  RasterU8 bin(small_grid(2, 2), 0, kNoDataU8);
  bin.values = {1, 0, kNoDataU8, 1};
  const auto bpath = temp_file("bin.asc");
  write_grid_ascii(bin, bpath);
  CHECK(read_grid_ascii_u8(bpath).values == bin.values);

  const auto badbin = temp_file("badbin.asc");
  write_text_file(badbin,
                  "ncols 1\nnrows 1\nxllcorner 0\nyllcorner 0\ncellsize 0.01\n"
                  "NODATA_value 255\n7\n");
  CHECK_THROWS_AS(read_grid_ascii_u8(badbin), ParseError);
}

TEST_CASE("points csv round trip and validation") {
  const std::vector<GeoPoint> pts = {{-1.5, 33.25}, {0.125, -179.5}};
  const auto path = temp_file("points.csv");
  write_points_csv(pts, path);
  const std::vector<GeoPoint> back = read_points_csv(path);
  REQUIRE(back.size() == 2);
  CHECK(back[0].lat == pts[0].lat);
  CHECK(back[1].lon == pts[1].lon);

  const auto bad = temp_file("bad_points.csv");
  write_text_file(bad, "lat,lon\n95.0,10.0\n");
  CHECK_THROWS_AS(read_points_csv(bad), ParseError);
}
