#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <stdexcept>

#include "popmap/geo.hpp"
#include "popmap/rng.hpp"

using namespace popmap;

TEST_CASE("grid invariants enforced at construction") {
  CHECK_THROWS_AS(GeoGrid(0.0, 0.0, 0.0, 4, 4), std::invalid_argument);
  CHECK_THROWS_AS(GeoGrid(0.0, 0.0, -1.0, 4, 4), std::invalid_argument);
  CHECK_THROWS_AS(GeoGrid(0.0, 0.0, 1.0, 0, 4), std::invalid_argument);
  CHECK_THROWS_AS(GeoGrid(91.0, 0.0, 1.0, 4, 4), std::invalid_argument);
  // South edge past the pole.
  CHECK_THROWS_AS(GeoGrid(-89.9999, 0.0, 3600.0, 4, 4), std::invalid_argument);
  // Cell centers crossing the antimeridian.
  CHECK_THROWS_AS(GeoGrid(0.0, 179.9999, 3600.0, 2, 2), std::invalid_argument);
  CHECK_NOTHROW(GeoGrid(1.0, -1.0, 1.0, 3600, 3600));
}

TEST_CASE("one arcsecond cell area at the equator") {
  // Spherical formula (R*delta)^2 cos(phi) evaluated by hand:
  // delta = pi/648000, R = 6371 -> 9.5404e-4 km^2.
  GeoGrid grid(0.5 / 3600.0, 10.0, 1.0, 1, 1);  // center exactly on the equator
  const double area = cell_area_km2(grid, 0);
  CHECK(std::fabs(area - 9.539e-4) < 1e-6);
  CHECK(area > 0.0);
}

TEST_CASE("cell at 60N has half the equator area") {
  GeoGrid eq(0.5 / 3600.0, 10.0, 1.0, 1, 1);
  GeoGrid north(60.0 + 0.5 / 3600.0, 10.0, 1.0, 1, 1);
  const double ratio = cell_area_km2(north, 0) / cell_area_km2(eq, 0);
  CHECK(ratio == doctest::Approx(0.5).epsilon(1e-12));
}

TEST_CASE("rows at different latitudes get different areas") {
  GeoGrid grid(45.0, 0.0, 30.0, 10, 10);
  CHECK(cell_area_km2(grid, 0) > cell_area_km2(grid, 9));
  CHECK_THROWS_AS(cell_area_km2(grid, 10), std::out_of_range);
}

TEST_CASE("haversine basics") {
  CHECK(geodesic_distance_km({12.5, 7.25}, {12.5, 7.25}) == 0.0);
  // One degree of longitude along the equator, hand evaluated.
  CHECK(std::fabs(geodesic_distance_km({0.0, 0.0}, {0.0, 1.0}) - 111.19) < 0.01);
}

TEST_CASE("haversine symmetry, positivity and triangle inequality") {
  Rng rng(99);
  for (int rep = 0; rep < 200; ++rep) {
    const GeoPoint a{rng.uniform(-80.0, 80.0), rng.uniform(-179.0, 179.0)};
    const GeoPoint b{rng.uniform(-80.0, 80.0), rng.uniform(-179.0, 179.0)};
    const GeoPoint c{rng.uniform(-80.0, 80.0), rng.uniform(-179.0, 179.0)};
    const double ab = geodesic_distance_km(a, b);
    const double ba = geodesic_distance_km(b, a);
    const double ac = geodesic_distance_km(a, c);
    const double cb = geodesic_distance_km(c, b);
    CHECK(ab == ba);
    CHECK(ab >= 0.0);
    CHECK(ab <= ac + cb + 1e-9);
  }
}

TEST_CASE("unit vectors order candidates like geodesic distance") {
  Rng rng(123);
  for (int rep = 0; rep < 50; ++rep) {
    const GeoPoint target{rng.uniform(-60.0, 60.0), rng.uniform(-120.0, 120.0)};
    double tx, ty, tz;
    unit_vector(target, tx, ty, tz);
    GeoPoint prev{rng.uniform(-60.0, 60.0), rng.uniform(-120.0, 120.0)};
    for (int k = 0; k < 20; ++k) {
      const GeoPoint cur{rng.uniform(-60.0, 60.0), rng.uniform(-120.0, 120.0)};
      double ax, ay, az, bx, by, bz;
      unit_vector(prev, ax, ay, az);
      unit_vector(cur, bx, by, bz);
      const double dot_prev = tx * ax + ty * ay + tz * az;
      const double dot_cur = tx * bx + ty * by + tz * bz;
      const double d_prev = geodesic_distance_km(target, prev);
      const double d_cur = geodesic_distance_km(target, cur);
      if (std::fabs(d_prev - d_cur) > 1e-6)
        CHECK((dot_prev > dot_cur) == (d_prev < d_cur));
      prev = cur;
    }
  }
}

TEST_CASE("coarsened grid covers the original") {
  GeoGrid g(10.0, 20.0, 1.0, 10, 7);
  GeoGrid c = g.coarsened(3);
  CHECK(c.rows == 4);
  CHECK(c.cols == 3);
  CHECK(c.res_arcsec == 3.0);
  CHECK(c.origin_lat == g.origin_lat);
  CHECK(c.origin_lon == g.origin_lon);
}

TEST_CASE("same_grid tolerates header re-association only") {
  GeoGrid a(10.0, 20.0, 1.0, 4, 4);
  GeoGrid b(10.0 + 1e-12, 20.0, 1.0, 4, 4);
  GeoGrid c(10.1, 20.0, 1.0, 4, 4);
  CHECK(same_grid(a, b));
  CHECK(!same_grid(a, c));
  CHECK(!same_grid(a, GeoGrid(10.0, 20.0, 1.0, 4, 5)));
}
