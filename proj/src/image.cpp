#include "popmap/image.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>
#include <vector>

#include "popmap/errors.hpp"
#include "popmap/kernels.hpp"
#include "popmap/textio.hpp"

namespace popmap {

namespace {

int pgm_next_int(std::istream& in, const std::string& path) {
  // Skips whitespace and '#' comments per the netpbm grammar.
  while (true) {
    int c = in.peek();
    if (c == EOF) throw ParseError(path, 0, "unexpected end of PGM header");
    if (c == '#') {
      std::string line;
      std::getline(in, line);
      continue;
    }
    if (std::isspace(c)) {
      in.get();
      continue;
    }
    break;
  }
  int v = 0;
  if (!(in >> v)) throw ParseError(path, 0, "malformed PGM header");
  return v;
}

}  // namespace

PgmImage read_pgm(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path.string());
  char m0 = 0, m1 = 0;
  in.get(m0);
  in.get(m1);
  if (m0 != 'P' || m1 != '5')
    throw ParseError(path.string(), 1, "not a binary PGM (expected magic P5)");
  PgmImage img;
  img.width = static_cast<std::size_t>(pgm_next_int(in, path.string()));
  img.height = static_cast<std::size_t>(pgm_next_int(in, path.string()));
  img.maxval = pgm_next_int(in, path.string());
  if (img.width == 0 || img.height == 0)
    throw ParseError(path.string(), 1, "PGM dimensions must be positive");
  if (img.maxval != 255 && img.maxval != 65535)
    throw ParseError(path.string(), 1,
                     "unsupported PGM maxval " + std::to_string(img.maxval));
  in.get();  // single whitespace byte after maxval

  const std::size_t n = img.width * img.height;
  img.pixels.resize(n);
  const double scale = 1.0 / img.maxval;
  if (img.maxval == 255) {
    std::vector<unsigned char> raw(n);
    in.read(reinterpret_cast<char*>(raw.data()), static_cast<std::streamsize>(n));
    if (static_cast<std::size_t>(in.gcount()) != n)
      throw ParseError(path.string(), 0, "truncated PGM pixel data");
    for (std::size_t i = 0; i < n; ++i)
      img.pixels[i] = static_cast<float>(raw[i] * scale);
  } else {
    std::vector<unsigned char> raw(n * 2);
    in.read(reinterpret_cast<char*>(raw.data()), static_cast<std::streamsize>(n * 2));
    if (static_cast<std::size_t>(in.gcount()) != n * 2)
      throw ParseError(path.string(), 0, "truncated PGM pixel data");
    for (std::size_t i = 0; i < n; ++i) {
      const unsigned v = (static_cast<unsigned>(raw[2 * i]) << 8) | raw[2 * i + 1];
      img.pixels[i] = static_cast<float>(v * scale);
    }
  }
  return img;
}

void write_pgm(const std::vector<float>& pixels, std::size_t width,
               std::size_t height, const std::filesystem::path& path, int maxval) {
  if (pixels.size() != width * height)
    throw std::invalid_argument("write_pgm: pixel count does not match dimensions");
  if (maxval != 255 && maxval != 65535)
    throw std::invalid_argument("write_pgm: maxval must be 255 or 65535");
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write " + path.string());
  out << "P5\n" << width << " " << height << "\n" << maxval << "\n";
  auto quantize = [maxval](float v) {
    const float c = std::clamp(v, 0.0f, 1.0f);
    return static_cast<unsigned>(std::lround(static_cast<double>(c) * maxval));
  };
  if (maxval == 255) {
    std::vector<unsigned char> raw(pixels.size());
    for (std::size_t i = 0; i < pixels.size(); ++i)
      raw[i] = static_cast<unsigned char>(quantize(pixels[i]));
    out.write(reinterpret_cast<const char*>(raw.data()),
              static_cast<std::streamsize>(raw.size()));
  } else {
    std::vector<unsigned char> raw(pixels.size() * 2);
    for (std::size_t i = 0; i < pixels.size(); ++i) {
      const unsigned v = quantize(pixels[i]);
      raw[2 * i] = static_cast<unsigned char>(v >> 8);
      raw[2 * i + 1] = static_cast<unsigned char>(v & 0xff);
    }
    out.write(reinterpret_cast<const char*>(raw.data()),
              static_cast<std::streamsize>(raw.size()));
  }
  if (!out) throw IoError("write failed for " + path.string());
}

void write_grid_sidecar(const GeoGrid& grid, const std::filesystem::path& path) {
  std::ostringstream ss;
  ss << "origin_lat = " << fmt_double(grid.origin_lat) << "\n";
  ss << "origin_lon = " << fmt_double(grid.origin_lon) << "\n";
  ss << "res_arcsec = " << fmt_double(grid.res_arcsec) << "\n";
  write_text_file(path, ss.str());
}

GeoGrid read_grid_sidecar(const std::filesystem::path& path, std::size_t rows,
                          std::size_t cols) {
  const std::string text = read_text_file(path);
  double origin_lat = 0, origin_lon = 0, res_arcsec = 0;
  bool got_lat = false, got_lon = false, got_res = false;
  std::istringstream in(text);
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    std::string_view sv = chomp(line);
    if (sv.empty() || sv.front() == '#') continue;
    const std::size_t eq = sv.find('=');
    if (eq == std::string_view::npos)
      throw ParseError(path.string(), lineno, "expected 'key = value'");
    auto trim = [](std::string_view s) {
      while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
      while (!s.empty() && (s.back() == ' ' || s.back() == '\t')) s.remove_suffix(1);
      return s;
    };
    std::string_view key = trim(sv.substr(0, eq));
    std::string_view val = trim(sv.substr(eq + 1));
    double v = 0;
    if (!parse_double(val, v))
      throw ParseError(path.string(), lineno, "malformed value '" + std::string(val) + "'");
    if (key == "origin_lat") origin_lat = v, got_lat = true;
    else if (key == "origin_lon") origin_lon = v, got_lon = true;
    else if (key == "res_arcsec") res_arcsec = v, got_res = true;
    else throw ParseError(path.string(), lineno, "unknown key '" + std::string(key) + "'");
  }
  if (!got_lat || !got_lon || !got_res)
    throw ParseError(path.string(), lineno, "missing origin_lat/origin_lon/res_arcsec");
  return GeoGrid(origin_lat, origin_lon, res_arcsec, rows, cols);
}

ImageTile read_tile(const std::filesystem::path& path) {
  if (path.extension() == ".pgm") {
    PgmImage img = read_pgm(path);
    std::filesystem::path sidecar = path;
    sidecar += ".grid";
    ImageTile tile(read_grid_sidecar(sidecar, img.height, img.width));
    tile.pixels = std::move(img.pixels);
    return tile;
  }
  Raster<double> r = read_grid_ascii(path);
  ImageTile tile(r.grid);
  for (std::size_t i = 0; i < r.values.size(); ++i) {
    const double v = r.values[i] == r.nodata ? 0.0 : r.values[i];
    tile.pixels[i] = static_cast<float>(std::clamp(v, 0.0, 1.0));
  }
  return tile;
}

void write_tile_pgm(const ImageTile& tile, const std::filesystem::path& path,
                    int maxval) {
  write_pgm(tile.pixels, tile.width(), tile.height(), path, maxval);
  std::filesystem::path sidecar = path;
  sidecar += ".grid";
  write_grid_sidecar(tile.grid, sidecar);
}

ImageTile smooth(const ImageTile& tile, int radius) {
  if (radius < 0) throw std::invalid_argument("smooth: radius must be >= 0");
  if (radius == 0) return tile;
  const std::size_t h = tile.height(), w = tile.width();
  ImageTile out(tile.grid);
  const auto& k = kern::active();

  if (radius == 1 && w >= 3) {
    for (std::size_t r = 0; r < h; ++r) {
      const float* rm = &tile.pixels[(r == 0 ? 0 : r - 1) * w];
      const float* rc = &tile.pixels[r * w];
      const float* rp = &tile.pixels[(r + 1 >= h ? h - 1 : r + 1) * w];
      const float* p[9] = {rm, rm + 1, rm + 2, rc, rc + 1, rc + 2, rp, rp + 1, rp + 2};
      k.median9_f32(&out.at(r, 1), p, w - 2);
      // Border columns with clamped sampling.
      for (std::size_t c : {std::size_t{0}, w - 1}) {
        float win[9];
        int n = 0;
        for (int dr = -1; dr <= 1; ++dr)
          for (int dc = -1; dc <= 1; ++dc) {
            const std::size_t rr = std::clamp<long>(static_cast<long>(r) + dr, 0,
                                                    static_cast<long>(h) - 1);
            const std::size_t cc = std::clamp<long>(static_cast<long>(c) + dc, 0,
                                                    static_cast<long>(w) - 1);
            win[n++] = tile.at(rr, cc);
          }
        std::nth_element(win, win + 4, win + 9);
        out.at(r, c) = win[4];
      }
    }
    return out;
  }

  const int side = 2 * radius + 1;
  std::vector<float> win(static_cast<std::size_t>(side) * side);
  for (std::size_t r = 0; r < h; ++r) {
    for (std::size_t c = 0; c < w; ++c) {
      int n = 0;
      for (int dr = -radius; dr <= radius; ++dr)
        for (int dc = -radius; dc <= radius; ++dc) {
          const std::size_t rr = std::clamp<long>(static_cast<long>(r) + dr, 0,
                                                  static_cast<long>(h) - 1);
          const std::size_t cc = std::clamp<long>(static_cast<long>(c) + dc, 0,
                                                  static_cast<long>(w) - 1);
          win[n++] = tile.at(rr, cc);
        }
      auto mid = win.begin() + n / 2;
      std::nth_element(win.begin(), mid, win.begin() + n);
      out.at(r, c) = *mid;
    }
  }
  return out;
}

RasterU8 detect_edges(const ImageTile& tile, float low, float high) {
  if (!(low >= 0.0f) || low > high)
    throw std::invalid_argument("detect_edges: need 0 <= low <= high");
  const std::size_t h = tile.height(), w = tile.width();
  const auto& k = kern::active();

  // Sobel via separable passes; borders replicate so a constant frame
  // produces no gradient.
  std::vector<float> hd(h * w), vd(h * w), gx(h * w), gy(h * w), mag(h * w);
  for (std::size_t r = 0; r < h; ++r) {
    const float* row = &tile.pixels[r * w];
    float* out = &hd[r * w];
    if (w >= 3) k.row_diff_f32(out + 1, row + 2, row, w - 2);
    out[0] = row[std::min<std::size_t>(1, w - 1)] - row[0];
    out[w - 1] = row[w - 1] - row[w >= 2 ? w - 2 : 0];
  }
  for (std::size_t r = 0; r < h; ++r) {
    const float* above = &tile.pixels[(r == 0 ? 0 : r - 1) * w];
    const float* below = &tile.pixels[(r + 1 >= h ? h - 1 : r + 1) * w];
    k.row_diff_f32(&vd[r * w], below, above, w);
  }
  for (std::size_t r = 0; r < h; ++r) {
    const float* above = &hd[(r == 0 ? 0 : r - 1) * w];
    const float* cur = &hd[r * w];
    const float* below = &hd[(r + 1 >= h ? h - 1 : r + 1) * w];
    k.row_121_f32(&gx[r * w], above, cur, below, w);
  }
  for (std::size_t r = 0; r < h; ++r) {
    const float* row = &vd[r * w];
    float* out = &gy[r * w];
    if (w >= 3) k.row_121_f32(out + 1, row, row + 1, row + 2, w - 2);
    out[0] = row[0] + 2.0f * row[0] + row[std::min<std::size_t>(1, w - 1)];
    out[w - 1] = row[w >= 2 ? w - 2 : 0] + 2.0f * row[w - 1] + row[w - 1];
  }
  k.grad_mag_f32(mag.data(), gx.data(), gy.data(), h * w);
  for (float& m : mag) m *= 0.25f;  // normalize to the unit intensity range

  // Non-maximum suppression along the quantized gradient direction.
  constexpr float kTan22 = 0.41421356f;
  std::vector<std::uint8_t> thin(h * w, 0);
  auto mag_at = [&](long r, long c) {
    r = std::clamp<long>(r, 0, static_cast<long>(h) - 1);
    c = std::clamp<long>(c, 0, static_cast<long>(w) - 1);
    return mag[static_cast<std::size_t>(r) * w + static_cast<std::size_t>(c)];
  };
  for (std::size_t r = 0; r < h; ++r) {
    for (std::size_t c = 0; c < w; ++c) {
      const float m = mag[r * w + c];
      if (m <= 0.0f || m < low) continue;
      const float ax = std::fabs(gx[r * w + c]), ay = std::fabs(gy[r * w + c]);
      float n1, n2;
      const long ri = static_cast<long>(r), ci = static_cast<long>(c);
      if (ay <= kTan22 * ax) {
        n1 = mag_at(ri, ci - 1);
        n2 = mag_at(ri, ci + 1);
      } else if (ax <= kTan22 * ay) {
        n1 = mag_at(ri - 1, ci);
        n2 = mag_at(ri + 1, ci);
      } else if (gx[r * w + c] * gy[r * w + c] > 0.0f) {
        n1 = mag_at(ri - 1, ci - 1);
        n2 = mag_at(ri + 1, ci + 1);
      } else {
        n1 = mag_at(ri - 1, ci + 1);
        n2 = mag_at(ri + 1, ci - 1);
      }
      if (m >= n1 && m >= n2) thin[r * w + c] = 1;
    }
  }

  // Hysteresis: grow from strong pixels through weak ones (8-adjacent).
  RasterU8 edges(tile.grid, 0, kNoDataU8);
  std::vector<std::size_t> stack;
  for (std::size_t i = 0; i < h * w; ++i) {
    if (thin[i] && mag[i] >= high && edges.values[i] == 0) {
      edges.values[i] = 1;
      stack.push_back(i);
      while (!stack.empty()) {
        const std::size_t cur = stack.back();
        stack.pop_back();
        const long cr = static_cast<long>(cur / w), cc = static_cast<long>(cur % w);
        for (long dr = -1; dr <= 1; ++dr)
          for (long dc = -1; dc <= 1; ++dc) {
            if (dr == 0 && dc == 0) continue;
            const long nr = cr + dr, nc = cc + dc;
            if (nr < 0 || nc < 0 || nr >= static_cast<long>(h) ||
                nc >= static_cast<long>(w))
              continue;
            const std::size_t ni =
                static_cast<std::size_t>(nr) * w + static_cast<std::size_t>(nc);
            if (thin[ni] && mag[ni] >= low && edges.values[ni] == 0) {
              edges.values[ni] = 1;
              stack.push_back(ni);
            }
          }
      }
    }
  }
  return edges;
}

}  // namespace popmap
