#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "popmap/hough.hpp"
#include "popmap/rng.hpp"

using namespace popmap;

namespace {

RasterU8 empty_map(std::size_t side) {
  return RasterU8(GeoGrid(1.0, 10.0, 1.0, side, side), 0, kNoDataU8);
}

}  // namespace

TEST_CASE("empty edge map yields no segments") {
  CHECK(extract_lines(empty_map(64), 10).empty());
  CHECK_THROWS_AS(extract_lines(empty_map(64), 0), std::invalid_argument);
}

TEST_CASE("a 40-pixel horizontal run is recovered near zero degrees") {
  RasterU8 e = empty_map(64);
  for (int x = 10; x < 50; ++x) e.at(20, static_cast<std::size_t>(x)) = 1;
  const std::vector<LineSegment> segs = extract_lines(e, 20);
  REQUIRE(!segs.empty());
  bool found = false;
  for (const LineSegment& s : segs) {
    const double deg = s.orientation_deg();
    const double from_horizontal = std::min(deg, 180.0 - deg);
    if (s.strength >= 20 && from_horizontal <= 2.0) found = true;
  }
  CHECK(found);
}

TEST_CASE("a diagonal run is recovered near 45 degrees") {
  RasterU8 e = empty_map(64);
  for (int i = 5; i < 45; ++i)
    e.at(static_cast<std::size_t>(i), static_cast<std::size_t>(i)) = 1;
  const std::vector<LineSegment> segs = extract_lines(e, 20);
  REQUIRE(!segs.empty());
  bool found = false;
  for (const LineSegment& s : segs)
    if (s.strength >= 20 && std::fabs(s.orientation_deg() - 45.0) <= 3.0)
      found = true;
  CHECK(found);
}

TEST_CASE("every segment is supported by at least min_support pixels") {
  Rng rng(10);
  RasterU8 e = empty_map(96);
  // A few structured runs plus clutter.
  for (int x = 4; x < 60; ++x) e.at(30, static_cast<std::size_t>(x)) = 1;
  for (int y = 10; y < 80; ++y) e.at(static_cast<std::size_t>(y), 70) = 1;
  for (int k = 0; k < 150; ++k)
    e.values[rng.bounded(e.values.size())] = 1;
  for (const int min_support : {10, 25, 40}) {
    for (const LineSegment& s : extract_lines(e, min_support)) {
      CHECK(s.strength >= min_support);
      CHECK(s.strength > 0);
    }
  }
}

TEST_CASE("salt-and-pepper noise stays below the support floor") {
  // 1% density, 100 seeds: no spurious segment should gather 20 pixels.
  for (std::uint64_t seed = 1; seed <= 100; ++seed) {
    Rng rng(seed);
    RasterU8 e = empty_map(256);
    for (auto& v : e.values) v = rng.uniform() < 0.01 ? 1 : 0;
    const std::vector<LineSegment> segs = extract_lines(e, 20);
    for (const LineSegment& s : segs) CHECK(s.strength < 20);
    CHECK(segs.empty());
  }
}

TEST_CASE("identical inputs give identical segment lists") {
  Rng rng(12);
  RasterU8 e = empty_map(128);
  for (auto& v : e.values) v = rng.uniform() < 0.03 ? 1 : 0;
  for (int x = 30; x < 90; ++x) e.at(64, static_cast<std::size_t>(x)) = 1;
  const auto a = extract_lines(e, 15);
  const auto b = extract_lines(e, 15);
  REQUIRE(a.size() == b.size());
  for (std::size_t i = 0; i < a.size(); ++i) {
    CHECK(a[i].p0.x == b[i].p0.x);
    CHECK(a[i].p0.y == b[i].p0.y);
    CHECK(a[i].p1.x == b[i].p1.x);
    CHECK(a[i].p1.y == b[i].p1.y);
    CHECK(a[i].strength == b[i].strength);
  }
}
