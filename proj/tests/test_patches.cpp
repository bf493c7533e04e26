#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <filesystem>
#include <set>

#include "popmap/errors.hpp"
#include "popmap/image.hpp"
#include "popmap/patches.hpp"
#include "popmap/synth.hpp"

using namespace popmap;

namespace {

ImageTile blank_tile(std::size_t side) {
  return ImageTile(GeoGrid(1.0, 10.0, 1.0 / 64.0, side, side), 0.3f);
}

LineSegment seg(int x0, int y0, int x1, int y1) {
  LineSegment s;
  s.p0 = {x0, y0};
  s.p1 = {x1, y1};
  s.strength = 30;
  return s;
}

}  // namespace

TEST_CASE("no segments, no candidates") {
  const PatchSet set = candidate_patches(blank_tile(256), {});
  CHECK(set.patches.empty());
  CHECK(set.windows_total == 16);
}

TEST_CASE("tile smaller than a patch is rejected") {
  CHECK_THROWS_AS(candidate_patches(blank_tile(48), {}), std::invalid_argument);
}

TEST_CASE("one segment selects exactly the window holding its midpoint") {
  const ImageTile tile = blank_tile(256);
  // Midpoint (96, 160) lies in window row 2, col 1.
  const PatchSet set = candidate_patches(tile, {seg(64, 144, 128, 176)});
  REQUIRE(set.patches.size() == 1);
  CHECK(set.patches[0].window_row == 2);
  CHECK(set.patches[0].window_col == 1);
  CHECK(set.patches[0].size_px == 64);
  CHECK(set.patches[0].id == "w2_1");
}

TEST_CASE("duplicates collapse and order is row-major") {
  const ImageTile tile = blank_tile(256);
  const std::vector<LineSegment> segs = {
      seg(200, 200, 220, 220),  // window (3,3)
      seg(10, 10, 20, 20),      // window (0,0)
      seg(202, 198, 224, 222),  // window (3,3) again
      seg(70, 10, 90, 20),      // window (0,1)
  };
  const PatchSet set = candidate_patches(tile, segs);
  REQUIRE(set.patches.size() == 3);
  CHECK(set.patches[0].window_row == 0);
  CHECK(set.patches[0].window_col == 0);
  CHECK(set.patches[1].window_row == 0);
  CHECK(set.patches[1].window_col == 1);
  CHECK(set.patches[2].window_row == 3);
  CHECK(set.patches[2].window_col == 3);
}

TEST_CASE("patch geo anchor is the window's NW corner") {
  const ImageTile tile = blank_tile(256);
  const PatchSet set = candidate_patches(tile, {seg(70, 140, 90, 150)});
  REQUIRE(set.patches.size() == 1);
  const Patch& p = set.patches[0];  // window (2,1): rows 128.., cols 64..
  CHECK(p.geo_anchor.lat ==
        doctest::Approx(tile.grid.origin_lat - 128 * tile.grid.res_deg())
            .epsilon(1e-12));
  CHECK(p.geo_anchor.lon ==
        doctest::Approx(tile.grid.origin_lon + 64 * tile.grid.res_deg())
            .epsilon(1e-12));
}

TEST_CASE("synthetic scene: full candidate recall at bounded retention") {
  // 1024x1024 scene with a handful of buildings on a textured background,
  // run through the real prefilter chain.
  WorldSpec spec;
  spec.seed = 77;
  spec.cell_grid = GeoGrid(1.0, 10.0, 1.0, 16, 16);
  spec.building_density = 5.0 / 256.0;
  const World world = generate(spec);

  const ImageTile smoothed = smooth(world.imagery, 1);
  const RasterU8 edges = detect_edges(smoothed, 0.06f, 0.14f);
  const std::vector<LineSegment> segs = extract_lines(edges, 25);
  const PatchSet cands = candidate_patches(world.imagery, segs);

  std::set<std::pair<std::size_t, std::size_t>> hit;
  for (const Patch& p : cands.patches) hit.insert({p.window_row, p.window_col});

  std::size_t buildings = 0, covered = 0;
  for (std::size_t r = 0; r < 16; ++r)
    for (std::size_t c = 0; c < 16; ++c)
      if (world.truth_built.at(r, c) == 1) {
        ++buildings;
        if (hit.count({r, c}) != 0) ++covered;
      }
  REQUIRE(buildings >= 4);
  CHECK(covered == buildings);  // every building window retained
  CHECK(cands.patches.size() <=
        static_cast<std::size_t>(0.35 * static_cast<double>(cands.windows_total)));
}

TEST_CASE("corpus round trip preserves labels and anchors") {
  WorldSpec spec;
  spec.seed = 9;
  spec.cell_grid = GeoGrid(1.0, 10.0, 1.0, 8, 8);
  spec.building_density = 0.1;
  const World world = generate(spec);
  const PatchSet corpus = make_corpus(world, kClassifyPatchPx, 1.0, 13);
  REQUIRE(!corpus.patches.empty());

  const auto dir =
      std::filesystem::temp_directory_path() / "popmap_test_patches" / "corpus";
  std::filesystem::remove_all(dir);
  write_corpus(corpus, dir);
  const PatchSet back = read_corpus(dir);
  REQUIRE(back.patches.size() == corpus.patches.size());
  for (std::size_t i = 0; i < corpus.patches.size(); ++i) {
    CHECK(back.patches[i].id == corpus.patches[i].id);
    CHECK(back.patches[i].label == corpus.patches[i].label);
    CHECK(back.patches[i].size_px == corpus.patches[i].size_px);
    CHECK(back.patches[i].geo_anchor.lat ==
          doctest::Approx(corpus.patches[i].geo_anchor.lat).epsilon(1e-12));
  }
  bool has_pos = false, has_neg = false;
  for (const Patch& p : back.patches) {
    if (p.label == PatchLabel::kBuilding) has_pos = true;
    if (p.label == PatchLabel::kNoBuilding) has_neg = true;
  }
  CHECK(has_pos);
  CHECK(has_neg);
}
