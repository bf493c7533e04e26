#include "popmap/patches.hpp"

#include <fstream>
#include <set>
#include <sstream>
#include <stdexcept>

#include "popmap/errors.hpp"
#include "popmap/textio.hpp"

namespace popmap {

Patch cut_window(const ImageTile& tile, std::size_t wrow, std::size_t wcol,
                 std::size_t patch_px) {
  const std::size_t r0 = wrow * patch_px, c0 = wcol * patch_px;
  if (r0 + patch_px > tile.height() || c0 + patch_px > tile.width())
    throw std::invalid_argument("cut_window: window outside tile");
  Patch p;
  p.size_px = patch_px;
  p.window_row = wrow;
  p.window_col = wcol;
  p.id = "w" + std::to_string(wrow) + "_" + std::to_string(wcol);
  p.pixels.resize(patch_px * patch_px);
  for (std::size_t r = 0; r < patch_px; ++r)
    for (std::size_t c = 0; c < patch_px; ++c)
      p.pixels[r * patch_px + c] = tile.at(r0 + r, c0 + c);
  const double res = tile.grid.res_deg();
  p.geo_anchor = {tile.grid.origin_lat - static_cast<double>(r0) * res,
                  tile.grid.origin_lon + static_cast<double>(c0) * res};
  return p;
}

PatchSet candidate_patches(const ImageTile& tile,
                           const std::vector<LineSegment>& segments) {
  const std::size_t px = kClassifyPatchPx;
  if (tile.width() < px || tile.height() < px)
    throw std::invalid_argument("candidate_patches: tile smaller than a patch");
  const std::size_t wrows = tile.height() / px, wcols = tile.width() / px;

  std::set<std::size_t> hit;  // flat window index; set keeps row-major order
  for (const LineSegment& s : segments) {
    const long mx = (s.p0.x + s.p1.x) / 2, my = (s.p0.y + s.p1.y) / 2;
    if (mx < 0 || my < 0) continue;
    const std::size_t wc = static_cast<std::size_t>(mx) / px;
    const std::size_t wr = static_cast<std::size_t>(my) / px;
    if (wr < wrows && wc < wcols) hit.insert(wr * wcols + wc);
  }

  PatchSet set;
  set.patch_px = px;
  set.windows_total = wrows * wcols;
  set.patches.reserve(hit.size());
  for (std::size_t idx : hit)
    set.patches.push_back(cut_window(tile, idx / wcols, idx % wcols, px));
  return set;
}

void write_corpus(const PatchSet& set, const std::filesystem::path& dir) {
  std::filesystem::create_directories(dir);
  std::ostringstream manifest;
  manifest << "patch_id,lat,lon,label\n";
  for (const Patch& p : set.patches) {
    write_pgm(p.pixels, p.size_px, p.size_px, dir / (p.id + ".pgm"), 65535);
    manifest << p.id << ',' << fmt_double(p.geo_anchor.lat) << ','
             << fmt_double(p.geo_anchor.lon) << ',';
    if (p.label)
      manifest << (*p.label == PatchLabel::kBuilding ? "building" : "no_building");
    manifest << '\n';
  }
  write_text_file(dir / "manifest.csv", manifest.str());
}

PatchSet read_corpus(const std::filesystem::path& dir) {
  const std::filesystem::path manifest_path = dir / "manifest.csv";
  std::ifstream in(manifest_path);
  if (!in) throw IoError("cannot open " + manifest_path.string());

  PatchSet set;
  std::string line;
  int lineno = 0;
  if (!std::getline(in, line))
    throw ParseError(manifest_path.string(), 1, "empty manifest");
  ++lineno;
  if (chomp(line) != "patch_id,lat,lon,label")
    throw ParseError(manifest_path.string(), 1,
                     "expected header 'patch_id,lat,lon,label'");
  while (std::getline(in, line)) {
    ++lineno;
    std::string_view sv = chomp(line);
    if (sv.empty()) continue;
    auto fields = split_csv(sv);
    if (fields.size() != 4)
      throw ParseError(manifest_path.string(), lineno, "expected 4 fields");
    Patch p;
    p.id = std::string(fields[0]);
    if (!parse_double(fields[1], p.geo_anchor.lat) ||
        !parse_double(fields[2], p.geo_anchor.lon))
      throw ParseError(manifest_path.string(), lineno, "malformed coordinates");
    if (fields[3] == "building")
      p.label = PatchLabel::kBuilding;
    else if (fields[3] == "no_building")
      p.label = PatchLabel::kNoBuilding;
    else if (!fields[3].empty())
      throw ParseError(manifest_path.string(), lineno,
                       "unknown label '" + std::string(fields[3]) + "'");
    PgmImage img = read_pgm(dir / (p.id + ".pgm"));
    if (img.width != img.height)
      throw ParseError(manifest_path.string(), lineno,
                       "patch " + p.id + " is not square");
    p.size_px = img.width;
    p.pixels = std::move(img.pixels);
    if (set.patches.empty())
      set.patch_px = p.size_px;
    else if (p.size_px != set.patch_px)
      throw ParseError(manifest_path.string(), lineno,
                       "mixed patch sizes in corpus");
    set.patches.push_back(std::move(p));
  }
  set.windows_total = set.patches.size();
  return set;
}

}  // namespace popmap
