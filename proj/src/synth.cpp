#include "popmap/synth.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <stdexcept>

#include "popmap/config.hpp"
#include "popmap/rng.hpp"
#include "popmap/textio.hpp"

namespace popmap {

namespace {

void validate_spec(const WorldSpec& s) {
  if (!(s.building_density >= 0.0 && s.building_density <= 1.0))
    throw std::invalid_argument("worldspec: building_density must be in [0,1]");
  if (s.fine_per_coarse < 1 || s.coarse_units < 1)
    throw std::invalid_argument("worldspec: admin hierarchy counts must be >= 1");
  if (s.pixels_per_cell < 16)
    throw std::invalid_argument("worldspec: pixels_per_cell must be >= 16");
  if (s.building_min_px < 4 || s.building_max_px < s.building_min_px)
    throw std::invalid_argument("worldspec: bad building size range");
  if (static_cast<std::size_t>(s.building_max_px) + 6 > s.pixels_per_cell)
    throw std::invalid_argument(
        "worldspec: building_max_px must leave a 3 px margin inside a cell");
  if (s.coarse_units > s.cell_grid.cols)
    throw std::invalid_argument("worldspec: more coarse units than columns");
  if (s.fine_per_coarse > s.cell_grid.rows)
    throw std::invalid_argument("worldspec: more fine bands than rows");
  if (!(s.census_jitter_sigma >= 0.0) || !(s.people_per_built_cell >= 0.0))
    throw std::invalid_argument("worldspec: negative census parameters");
}

// Bilinearly interpolated lattice noise; cheap stand-in for terrain
// texture so the edge detector sees a non-trivial background.
struct ValueNoise {
  std::size_t lw = 0, lh = 0, step = 16;
  std::vector<float> lattice;

  ValueNoise(std::size_t width, std::size_t height, Rng& rng) {
    lw = width / step + 2;
    lh = height / step + 2;
    lattice.resize(lw * lh);
    for (float& v : lattice)
      v = static_cast<float>(rng.uniform(-1.0, 1.0));
  }
  float at(std::size_t x, std::size_t y) const {
    const std::size_t lx = x / step, ly = y / step;
    const float fx = static_cast<float>(x % step) / static_cast<float>(step);
    const float fy = static_cast<float>(y % step) / static_cast<float>(step);
    const float v00 = lattice[ly * lw + lx], v01 = lattice[ly * lw + lx + 1];
    const float v10 = lattice[(ly + 1) * lw + lx], v11 = lattice[(ly + 1) * lw + lx + 1];
    const float top = v00 + (v01 - v00) * fx;
    const float bot = v10 + (v11 - v10) * fx;
    return top + (bot - top) * fy;
  }
};

}  // namespace

World generate(const WorldSpec& spec) {
  validate_spec(spec);
  const std::size_t rows = spec.cell_grid.rows, cols = spec.cell_grid.cols;
  const std::size_t ppc = spec.pixels_per_cell;
  const std::size_t total_cells = rows * cols;

  World w;
  w.spec = spec;
  Rng rng(spec.seed);

  // Admin partition: coarse vertical stripes, fine horizontal bands.
  w.admin_coarse = RasterI32(spec.cell_grid, 0, kNoDataI32);
  w.admin_fine = RasterI32(spec.cell_grid, 0, kNoDataI32);
  std::vector<std::size_t> stripe_of_col(cols), band_of_row(rows);
  for (std::size_t c = 0; c < cols; ++c)
    stripe_of_col[c] = c * spec.coarse_units / cols;
  for (std::size_t r = 0; r < rows; ++r)
    band_of_row[r] = r * spec.fine_per_coarse / rows;
  auto coarse_id = [](std::size_t stripe) { return static_cast<std::int32_t>(stripe + 1); };
  auto fine_id = [&](std::size_t stripe, std::size_t band) {
    return static_cast<std::int32_t>(1000 + stripe * spec.fine_per_coarse + band + 1);
  };
  for (std::size_t r = 0; r < rows; ++r)
    for (std::size_t c = 0; c < cols; ++c) {
      w.admin_coarse.at(r, c) = coarse_id(stripe_of_col[c]);
      w.admin_fine.at(r, c) = fine_id(stripe_of_col[c], band_of_row[r]);
    }
  for (std::size_t s = 0; s < spec.coarse_units; ++s)
    for (std::size_t b = 0; b < spec.fine_per_coarse; ++b)
      w.nesting.emplace_back(fine_id(s, b), coarse_id(s));

  // Pick built cells: a fixed total, spread over coarse units by jittered
  // weights, so the built-cell fraction tracks building_density closely.
  std::vector<std::vector<std::size_t>> unit_cells(spec.coarse_units);
  for (std::size_t r = 0; r < rows; ++r)
    for (std::size_t c = 0; c < cols; ++c)
      unit_cells[stripe_of_col[c]].push_back(r * cols + c);

  const std::size_t total_built = static_cast<std::size_t>(
      std::lround(spec.building_density * static_cast<double>(total_cells)));
  std::vector<double> weight(spec.coarse_units);
  double weight_sum = 0.0;
  for (std::size_t u = 0; u < spec.coarse_units; ++u) {
    weight[u] = std::exp2(rng.uniform(-spec.region_density_spread,
                                      spec.region_density_spread)) *
                static_cast<double>(unit_cells[u].size());
    weight_sum += weight[u];
  }
  std::vector<std::size_t> quota(spec.coarse_units, 0);
  std::size_t assigned = 0;
  for (std::size_t u = 0; u < spec.coarse_units; ++u) {
    quota[u] = std::min(unit_cells[u].size(),
                        static_cast<std::size_t>(std::floor(
                            static_cast<double>(total_built) * weight[u] / weight_sum)));
    assigned += quota[u];
  }
  for (std::size_t u = 0; assigned < total_built && u < spec.coarse_units;
       u = (u + 1) % spec.coarse_units) {
    if (quota[u] < unit_cells[u].size()) {
      ++quota[u];
      ++assigned;
    }
    bool room = false;
    for (std::size_t v = 0; v < spec.coarse_units; ++v)
      room = room || quota[v] < unit_cells[v].size();
    if (!room) break;
  }

  w.truth_built = RasterU8(spec.cell_grid, 0, kNoDataU8);
  for (std::size_t u = 0; u < spec.coarse_units; ++u) {
    std::vector<std::size_t>& cells = unit_cells[u];
    for (std::size_t k = 0; k < quota[u]; ++k) {
      const std::size_t j = k + rng.bounded(cells.size() - k);
      std::swap(cells[k], cells[j]);
      w.truth_built.values[cells[k]] = 1;
    }
  }

  // Background imagery.
  const std::size_t iw = cols * ppc, ih = rows * ppc;
  GeoGrid pixel_grid(spec.cell_grid.origin_lat, spec.cell_grid.origin_lon,
                     spec.cell_grid.res_arcsec / static_cast<double>(ppc), ih, iw);
  w.imagery = ImageTile(pixel_grid);
  ValueNoise tex(iw, ih, rng);
  for (std::size_t y = 0; y < ih; ++y)
    for (std::size_t x = 0; x < iw; ++x) {
      const double v = spec.base_intensity +
                       spec.texture_amp * tex.at(x, y) +
                       spec.noise_sigma * rng.normal();
      w.imagery.pixels[y * iw + x] =
          static_cast<float>(std::clamp(v, 0.0, 1.0));
    }

  // Buildings: one bright rectangle per built cell, fully inside the cell
  // (keeps the built-cell fraction calibrated), with a dark 2 px shadow
  // along the south and east sides.
  w.truth_fraction = Raster<double>(spec.cell_grid, 0.0, kDefaultNoData);
  std::unordered_map<std::int32_t, double> fine_area_px;
  const int margin = 3;
  for (std::size_t cell = 0; cell < total_cells; ++cell) {
    if (w.truth_built.values[cell] != 1) continue;
    const std::size_t cr = cell / cols, cc = cell % cols;
    const int maxside = static_cast<int>(ppc) - 2 * margin;
    const int bw = rng.uniform_int(spec.building_min_px,
                                   std::min(spec.building_max_px, maxside));
    const int bh = rng.uniform_int(spec.building_min_px,
                                   std::min(spec.building_max_px, maxside));
    const int x0 = rng.uniform_int(margin, static_cast<int>(ppc) - bw - margin);
    const int y0 = rng.uniform_int(margin, static_cast<int>(ppc) - bh - margin);
    const float roof = static_cast<float>(rng.uniform(0.72, 0.95));
    const float shade = static_cast<float>(rng.uniform(0.02, 0.10));
    const std::size_t px0 = cc * ppc + static_cast<std::size_t>(x0);
    const std::size_t py0 = cr * ppc + static_cast<std::size_t>(y0);
    for (int dy = 0; dy < bh; ++dy)
      for (int dx = 0; dx < bw; ++dx)
        w.imagery.pixels[(py0 + dy) * iw + px0 + dx] = roof;
    for (int dy = 0; dy < 2; ++dy)  // south shadow band
      for (int dx = 0; dx < bw + 2; ++dx)
        w.imagery.pixels[(py0 + bh + dy) * iw + px0 + dx] = shade;
    for (int dy = 0; dy < bh; ++dy)  // east shadow band
      for (int dx = 0; dx < 2; ++dx)
        w.imagery.pixels[(py0 + dy) * iw + px0 + bw + dx] = shade;

    w.truth_fraction.values[cell] =
        static_cast<double>(bw) * bh / (static_cast<double>(ppc) * ppc);
    fine_area_px[w.admin_fine.values[cell]] += static_cast<double>(bw) * bh;
  }

  // Census: fine populations proportional to building area with log-normal
  // jitter; coarse totals are exact sums of their children.
  std::vector<CensusRecord> fine_recs, coarse_recs;
  std::vector<double> coarse_pop(spec.coarse_units, 0.0);
  for (std::size_t s = 0; s < spec.coarse_units; ++s) {
    for (std::size_t b = 0; b < spec.fine_per_coarse; ++b) {
      const std::int32_t fid = fine_id(s, b);
      const double jitter = std::exp(spec.census_jitter_sigma * rng.normal());
      auto it = fine_area_px.find(fid);
      double pop = 0.0;
      if (it != fine_area_px.end() && it->second > 0.0)
        pop = spec.people_per_built_cell *
              (it->second / (static_cast<double>(ppc) * ppc)) * jitter;
      fine_recs.push_back({fid, pop});
      coarse_pop[s] += pop;
    }
    coarse_recs.push_back({coarse_id(s), coarse_pop[s]});
  }
  w.census_fine = CensusTable::from_records(std::move(fine_recs));
  w.census_coarse = CensusTable::from_records(std::move(coarse_recs));

  // Households: cells weighted by their population share, positions
  // jittered by at most 30 m around the cell center.
  std::vector<double> cellw(total_cells, 0.0);
  double wsum = 0.0;
  for (std::size_t cell = 0; cell < total_cells; ++cell) {
    if (w.truth_built.values[cell] != 1) continue;
    const std::int32_t fid = w.admin_fine.values[cell];
    const double area = fine_area_px[fid];
    if (area <= 0.0) continue;
    const double unit_pop = w.census_fine.population(fid);
    cellw[cell] = unit_pop * (w.truth_fraction.values[cell] *
                              static_cast<double>(ppc) * ppc / area);
    wsum += cellw[cell];
  }
  if (wsum > 0.0 && spec.household_samples > 0) {
    std::vector<double> cum(total_cells);
    double acc = 0.0;
    for (std::size_t i = 0; i < total_cells; ++i) {
      acc += cellw[i];
      cum[i] = acc;
    }
    for (std::size_t s = 0; s < spec.household_samples; ++s) {
      const double u = rng.uniform() * wsum;
      const std::size_t cell = static_cast<std::size_t>(
          std::lower_bound(cum.begin(), cum.end(), u) - cum.begin());
      const std::size_t cr = cell / cols, cc = cell % cols;
      const GeoPoint center = spec.cell_grid.cell_center(cr, cc);
      const double radius_km = rng.uniform() * 0.030;
      const double angle = rng.uniform() * 2.0 * std::numbers::pi;
      const double dlat = (radius_km / kEarthRadiusKm) * std::cos(angle) * 180.0 /
                          std::numbers::pi;
      const double dlon = (radius_km / kEarthRadiusKm) * std::sin(angle) * 180.0 /
                          (std::numbers::pi *
                           std::cos(deg_to_rad(center.lat)));
      w.households.push_back({center.lat + dlat, center.lon + dlon});
    }
  }
  return w;
}

PatchSet make_corpus(const World& world, std::size_t patch_px,
                     double negatives_per_positive, std::uint64_t seed) {
  const WorldSpec& spec = world.spec;
  if (patch_px % spec.pixels_per_cell != 0)
    throw std::invalid_argument("make_corpus: patch size not a multiple of the cell");
  const std::size_t span = patch_px / spec.pixels_per_cell;  // cells per window
  const std::size_t wrows = spec.cell_grid.rows / span;
  const std::size_t wcols = spec.cell_grid.cols / span;
  if (wrows == 0 || wcols == 0)
    throw std::invalid_argument("make_corpus: world smaller than one patch");

  std::vector<std::size_t> positives, negatives;
  for (std::size_t wr = 0; wr < wrows; ++wr)
    for (std::size_t wc = 0; wc < wcols; ++wc) {
      bool built = false;
      for (std::size_t r = wr * span; r < (wr + 1) * span && !built; ++r)
        for (std::size_t c = wc * span; c < (wc + 1) * span && !built; ++c)
          built = world.truth_built.at(r, c) == 1;
      (built ? positives : negatives).push_back(wr * wcols + wc);
    }

  Rng rng(seed);
  const std::size_t want_neg = std::min(
      negatives.size(), static_cast<std::size_t>(std::lround(
                            negatives_per_positive *
                            static_cast<double>(std::max<std::size_t>(
                                1, positives.size())))));
  for (std::size_t k = 0; k < want_neg; ++k) {
    const std::size_t j = k + rng.bounded(negatives.size() - k);
    std::swap(negatives[k], negatives[j]);
  }
  negatives.resize(want_neg);

  std::vector<std::pair<std::size_t, PatchLabel>> chosen;
  for (const std::size_t idx : positives) chosen.
      emplace_back(idx, PatchLabel::kBuilding);
  for (const std::size_t idx : negatives)
    chosen.emplace_back(idx, PatchLabel::kNoBuilding);
  std::sort(chosen.begin(), chosen.end());

  PatchSet set;
  set.patch_px = patch_px;
  set.windows_total = wrows * wcols;
  for (const auto& [idx, label] : chosen) {
    Patch p = cut_window(world.imagery, idx / wcols, idx % wcols, patch_px);
    p.label = label;
    set.patches.push_back(std::move(p));
  }
  return set;
}

WorldSpec read_worldspec(const std::filesystem::path& path) {
  const KeyValues kv = KeyValues::load(path);
  WorldSpec s;
  s.seed = kv.get_u64("seed", s.seed);
  const double olat = kv.get_double("origin_lat", s.cell_grid.origin_lat);
  const double olon = kv.get_double("origin_lon", s.cell_grid.origin_lon);
  const double res = kv.get_double("res_arcsec", s.cell_grid.res_arcsec);
  const auto rows = static_cast<std::size_t>(kv.get_int("rows", 16));
  const auto cols = static_cast<std::size_t>(kv.get_int("cols", 16));
  s.cell_grid = GeoGrid(olat, olon, res, rows, cols);
  s.pixels_per_cell = static_cast<std::size_t>(kv.get_int("pixels_per_cell", 64));
  s.building_density = kv.get_double("building_density", s.building_density);
  s.building_min_px = static_cast<int>(kv.get_int("building_min_px", s.building_min_px));
  s.building_max_px = static_cast<int>(kv.get_int("building_max_px", s.building_max_px));
  s.texture_amp = kv.get_double("texture_amp", s.texture_amp);
  s.noise_sigma = kv.get_double("noise_sigma", s.noise_sigma);
  s.base_intensity = kv.get_double("base_intensity", s.base_intensity);
  s.coarse_units = static_cast<std::size_t>(kv.get_int("coarse_units", 4));
  s.fine_per_coarse = static_cast<std::size_t>(kv.get_int("fine_per_coarse", 4));
  s.region_density_spread =
      kv.get_double("region_density_spread", s.region_density_spread);
  s.people_per_built_cell =
      kv.get_double("people_per_built_cell", s.people_per_built_cell);
  s.census_jitter_sigma = kv.get_double("census_jitter_sigma", s.census_jitter_sigma);
  s.household_samples =
      static_cast<std::size_t>(kv.get_int("household_samples", 200));
  return s;
}

void write_worldspec(const WorldSpec& s, const std::filesystem::path& path) {
  KeyValues kv;
  kv.set("seed", std::to_string(s.seed));
  kv.set("origin_lat", fmt_double(s.cell_grid.origin_lat));
  kv.set("origin_lon", fmt_double(s.cell_grid.origin_lon));
  kv.set("res_arcsec", fmt_double(s.cell_grid.res_arcsec));
  kv.set("rows", std::to_string(s.cell_grid.rows));
  kv.set("cols", std::to_string(s.cell_grid.cols));
  kv.set("pixels_per_cell", std::to_string(s.pixels_per_cell));
  kv.set("building_density", fmt_double(s.building_density));
  kv.set("building_min_px", std::to_string(s.building_min_px));
  kv.set("building_max_px", std::to_string(s.building_max_px));
  kv.set("texture_amp", fmt_double(s.texture_amp));
  kv.set("noise_sigma", fmt_double(s.noise_sigma));
  kv.set("base_intensity", fmt_double(s.base_intensity));
  kv.set("coarse_units", std::to_string(s.coarse_units));
  kv.set("fine_per_coarse", std::to_string(s.fine_per_coarse));
  kv.set("region_density_spread", fmt_double(s.region_density_spread));
  kv.set("people_per_built_cell", fmt_double(s.people_per_built_cell));
  kv.set("census_jitter_sigma", fmt_double(s.census_jitter_sigma));
  kv.set("household_samples", std::to_string(s.household_samples));
  kv.save(path);
}

}  // namespace popmap
