#include "popmap/raster.hpp"

#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <string>
#include <string_view>
#include <thread>
#include <vector>

#include "popmap/errors.hpp"
#include "popmap/kernels.hpp"

namespace popmap {

namespace {

std::string fmt(double v) {
  char buf[40];
  auto res = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, res.ptr);
}

std::string fmt(std::int32_t v) { return std::to_string(v); }
std::string fmt(std::uint8_t v) { return std::to_string(static_cast<int>(v)); }

// Reads a whole file and walks whitespace-separated tokens while tracking
// the 1-based line number for error reporting.
class TokenReader {
 public:
  TokenReader(const std::filesystem::path& path) : path_(path.string()) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open " + path_);
    std::ostringstream ss;
    ss << in.rdbuf();
    text_ = ss.str();
  }

  bool next(std::string_view& tok) {
    while (pos_ < text_.size() && is_space(text_[pos_])) {
      if (text_[pos_] == '\n') ++line_;
      ++pos_;
    }
    if (pos_ >= text_.size()) return false;
    std::size_t start = pos_;
    while (pos_ < text_.size() && !is_space(text_[pos_])) ++pos_;
    tok = std::string_view(text_).substr(start, pos_ - start);
    return true;
  }

  std::string_view require(const char* what) {
    std::string_view tok;
    if (!next(tok)) fail(std::string("expected ") + what + ", got end of file");
    return tok;
  }

  double require_double(const char* what) {
    std::string_view tok = require(what);
    double v = 0.0;
    auto res = std::from_chars(tok.data(), tok.data() + tok.size(), v);
    if (res.ec != std::errc{} || res.ptr != tok.data() + tok.size())
      fail(std::string("malformed ") + what + " '" + std::string(tok) + "'");
    return v;
  }

  long long require_int(const char* what) {
    std::string_view tok = require(what);
    long long v = 0;
    auto res = std::from_chars(tok.data(), tok.data() + tok.size(), v);
    if (res.ec != std::errc{} || res.ptr != tok.data() + tok.size())
      fail(std::string("malformed ") + what + " '" + std::string(tok) + "'");
    return v;
  }

  [[noreturn]] void fail(const std::string& msg) { throw ParseError(path_, line_, msg); }

  int line() const { return line_; }

 private:
  static bool is_space(char c) {
    return c == ' ' || c == '\t' || c == '\r' || c == '\n';
  }
  std::string path_;
  std::string text_;
  std::size_t pos_ = 0;
  int line_ = 1;
};

struct AsciiHeader {
  std::size_t ncols = 0, nrows = 0;
  double xll = 0.0, yll = 0.0, cellsize = 0.0, nodata = kDefaultNoData;
};

bool ieq(std::string_view a, std::string_view b) {
  if (a.size() != b.size()) return false;
  for (std::size_t i = 0; i < a.size(); ++i)
    if (std::tolower(static_cast<unsigned char>(a[i])) !=
        std::tolower(static_cast<unsigned char>(b[i])))
      return false;
  return true;
}

AsciiHeader read_header(TokenReader& tr) {
  AsciiHeader h;
  const char* keys[6] = {"ncols", "nrows", "xllcorner",
                         "yllcorner", "cellsize", "NODATA_value"};
  for (const char* key : keys) {
    std::string_view tok = tr.require("header key");
    if (!ieq(tok, key))
      tr.fail(std::string("expected header key '") + key + "', got '" +
              std::string(tok) + "'");
    if (ieq(key, "ncols")) {
      long long v = tr.require_int(key);
      if (v <= 0) tr.fail("ncols must be positive");
      h.ncols = static_cast<std::size_t>(v);
    } else if (ieq(key, "nrows")) {
      long long v = tr.require_int(key);
      if (v <= 0) tr.fail("nrows must be positive");
      h.nrows = static_cast<std::size_t>(v);
    } else if (ieq(key, "xllcorner")) {
      h.xll = tr.require_double(key);
    } else if (ieq(key, "yllcorner")) {
      h.yll = tr.require_double(key);
    } else if (ieq(key, "cellsize")) {
      h.cellsize = tr.require_double(key);
      if (!(h.cellsize > 0.0)) tr.fail("cellsize must be positive");
    } else {
      h.nodata = tr.require_double(key);
    }
  }
  return h;
}

GeoGrid grid_from_header(const AsciiHeader& h, TokenReader& tr) {
  try {
    return GeoGrid(h.yll + static_cast<double>(h.nrows) * h.cellsize, h.xll,
                   h.cellsize * 3600.0, h.nrows, h.ncols);
  } catch (const std::invalid_argument& e) {
    tr.fail(e.what());
  }
}

template <typename T>
void write_grid(const Raster<T>& r, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write " + path.string());
  out << "ncols " << r.grid.cols << "\n";
  out << "nrows " << r.grid.rows << "\n";
  out << "xllcorner " << fmt(r.grid.origin_lon) << "\n";
  out << "yllcorner " << fmt(r.grid.south_lat()) << "\n";
  out << "cellsize " << fmt(r.grid.res_deg()) << "\n";
  out << "NODATA_value " << fmt(r.nodata) << "\n";
  for (std::size_t row = 0; row < r.grid.rows; ++row) {
    for (std::size_t col = 0; col < r.grid.cols; ++col) {
      if (col != 0) out << ' ';
      out << fmt(r.at(row, col));
    }
    out << '\n';
  }
  if (!out) throw IoError("write failed for " + path.string());
}

}  // namespace

Components connected_components(const RasterU8& r, int connectivity) {
  if (connectivity != 4 && connectivity != 8)
    throw std::invalid_argument("connected_components: connectivity must be 4 or 8");
  const std::size_t rows = r.grid.rows, cols = r.grid.cols;
  Components out;
  out.labels = RasterI32(r.grid, 0, kNoDataI32);

  static constexpr int kDr8[8] = {-1, -1, -1, 0, 0, 1, 1, 1};
  static constexpr int kDc8[8] = {-1, 0, 1, -1, 1, -1, 0, 1};
  static constexpr int kDr4[4] = {-1, 0, 0, 1};
  static constexpr int kDc4[4] = {0, -1, 1, 0};
  const int* dr = connectivity == 4 ? kDr4 : kDr8;
  const int* dc = connectivity == 4 ? kDc4 : kDc8;
  const int ndir = connectivity;

  std::vector<std::size_t> stack;
  std::int32_t next_label = 0;
  for (std::size_t seed = 0; seed < r.values.size(); ++seed) {
    if (r.values[seed] == 0 || r.values[seed] == r.nodata) continue;
    if (out.labels.values[seed] != 0) continue;
    ++next_label;
    out.labels.values[seed] = next_label;
    stack.push_back(seed);
    while (!stack.empty()) {
      std::size_t cur = stack.back();
      stack.pop_back();
      const std::size_t row = cur / cols, col = cur % cols;
      for (int k = 0; k < ndir; ++k) {
        const std::size_t nr = row + static_cast<std::size_t>(dr[k]);
        const std::size_t nc = col + static_cast<std::size_t>(dc[k]);
        if (nr >= rows || nc >= cols) continue;  // wraps on underflow
        const std::size_t ni = nr * cols + nc;
        if (r.values[ni] == 0 || r.values[ni] == r.nodata) continue;
        if (out.labels.values[ni] != 0) continue;
        out.labels.values[ni] = next_label;
        stack.push_back(ni);
      }
    }
  }
  out.count = next_label;
  return out;
}

MaskPoints collect_mask_points(const RasterU8& mask) {
  MaskPoints pts;
  for (std::size_t row = 0; row < mask.grid.rows; ++row) {
    for (std::size_t col = 0; col < mask.grid.cols; ++col) {
      const std::uint8_t v = mask.at(row, col);
      if (v == 0 || v == mask.nodata) continue;
      double x, y, z;
      unit_vector(mask.grid.cell_center(row, col), x, y, z);
      pts.x.push_back(x);
      pts.y.push_back(y);
      pts.z.push_back(z);
      pts.cell.push_back(mask.index(row, col));
    }
  }
  return pts;
}

Raster<double> distance_to_mask_km(const Raster<double>& pop, const RasterU8& mask,
                                   int threads) {
  if (!same_grid(pop.grid, mask.grid))
    throw ValidationError("distance_to_mask_km: grid mismatch");
  MaskPoints pts = collect_mask_points(mask);
  if (pts.empty())
    throw ValidationError("distance_to_mask_km: empty mask, no urban cluster exists");

  const GeoGrid& grid = pop.grid;
  Raster<double> out(grid, 0.0, kDefaultNoData);

  auto run_rows = [&](std::size_t row_begin, std::size_t row_end) {
    for (std::size_t row = row_begin; row < row_end; ++row) {
      for (std::size_t col = 0; col < grid.cols; ++col) {
        if (mask.at(row, col) != 0 && mask.at(row, col) != mask.nodata) continue;
        const GeoPoint center = grid.cell_center(row, col);
        double tx, ty, tz;
        unit_vector(center, tx, ty, tz);
        kern::ArgMax best = kern::max_dot3(pts.x.data(), pts.y.data(), pts.z.data(),
                                           tx, ty, tz, pts.x.size());
        const std::size_t mi = pts.cell[best.index];
        const GeoPoint nearest =
            grid.cell_center(mi / grid.cols, mi % grid.cols);
        out.at(row, col) = geodesic_distance_km(center, nearest);
      }
    }
  };

  const int nthreads = std::max(1, threads);
  if (nthreads == 1 || grid.rows < 2) {
    run_rows(0, grid.rows);
  } else {
    std::vector<std::thread> pool;
    const std::size_t chunk = (grid.rows + nthreads - 1) / nthreads;
    for (int t = 0; t < nthreads; ++t) {
      const std::size_t b = std::min(grid.rows, static_cast<std::size_t>(t) * chunk);
      const std::size_t e = std::min(grid.rows, b + chunk);
      if (b < e) pool.emplace_back(run_rows, b, e);
    }
    for (auto& th : pool) th.join();
  }
  return out;
}

Raster<double> read_grid_ascii(const std::filesystem::path& path) {
  TokenReader tr(path);
  AsciiHeader h = read_header(tr);
  Raster<double> r(grid_from_header(h, tr), 0.0, h.nodata);
  for (std::size_t i = 0; i < r.values.size(); ++i)
    r.values[i] = tr.require_double("cell value");
  std::string_view extra;
  if (tr.next(extra))
    tr.fail("unexpected trailing data '" + std::string(extra) +
            "' (dimension mismatch?)");
  return r;
}

Raster<std::int32_t> read_grid_ascii_i32(const std::filesystem::path& path) {
  TokenReader tr(path);
  AsciiHeader h = read_header(tr);
  Raster<std::int32_t> r(grid_from_header(h, tr), 0,
                         static_cast<std::int32_t>(h.nodata));
  for (std::size_t i = 0; i < r.values.size(); ++i) {
    long long v = tr.require_int("cell value");
    if (v < INT32_MIN || v > INT32_MAX) tr.fail("cell value out of int32 range");
    r.values[i] = static_cast<std::int32_t>(v);
  }
  std::string_view extra;
  if (tr.next(extra))
    tr.fail("unexpected trailing data '" + std::string(extra) +
            "' (dimension mismatch?)");
  return r;
}

Raster<std::uint8_t> read_grid_ascii_u8(const std::filesystem::path& path) {
  TokenReader tr(path);
  AsciiHeader h = read_header(tr);
  Raster<std::uint8_t> r(grid_from_header(h, tr), 0,
                         static_cast<std::uint8_t>(h.nodata));
  for (std::size_t i = 0; i < r.values.size(); ++i) {
    long long v = tr.require_int("cell value");
    if (v != 0 && v != 1 && v != static_cast<long long>(r.nodata))
      tr.fail("binary raster cell must be 0, 1 or nodata, got " + std::to_string(v));
    r.values[i] = static_cast<std::uint8_t>(v);
  }
  std::string_view extra;
  if (tr.next(extra))
    tr.fail("unexpected trailing data '" + std::string(extra) +
            "' (dimension mismatch?)");
  return r;
}

void write_grid_ascii(const Raster<double>& r, const std::filesystem::path& path) {
  write_grid(r, path);
}
void write_grid_ascii(const Raster<std::int32_t>& r,
                      const std::filesystem::path& path) {
  write_grid(r, path);
}
void write_grid_ascii(const Raster<std::uint8_t>& r,
                      const std::filesystem::path& path) {
  write_grid(r, path);
}

std::vector<GeoPoint> read_points_csv(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open " + path.string());
  std::string line;
  int lineno = 0;
  if (!std::getline(in, line)) throw ParseError(path.string(), 1, "empty file");
  ++lineno;
  if (!line.empty() && line.back() == '\r') line.pop_back();
  if (line != "lat,lon")
    throw ParseError(path.string(), 1, "expected header 'lat,lon', got '" + line + "'");
  std::vector<GeoPoint> pts;
  while (std::getline(in, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    const std::size_t comma = line.find(',');
    if (comma == std::string::npos)
      throw ParseError(path.string(), lineno, "expected 'lat,lon' row");
    GeoPoint p;
    auto r1 = std::from_chars(line.data(), line.data() + comma, p.lat);
    auto r2 = std::from_chars(line.data() + comma + 1, line.data() + line.size(), p.lon);
    if (r1.ec != std::errc{} || r2.ec != std::errc{} ||
        r2.ptr != line.data() + line.size())
      throw ParseError(path.string(), lineno, "malformed coordinates '" + line + "'");
    if (!valid_point(p))
      throw ParseError(path.string(), lineno, "coordinates out of range '" + line + "'");
    pts.push_back(p);
  }
  return pts;
}

void write_points_csv(const std::vector<GeoPoint>& pts,
                      const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write " + path.string());
  out << "lat,lon\n";
  for (const GeoPoint& p : pts) out << fmt(p.lat) << ',' << fmt(p.lon) << '\n';
  if (!out) throw IoError("write failed for " + path.string());
}

}  // namespace popmap
