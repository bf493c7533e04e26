#pragma once

#include <cstdint>
#include <filesystem>
#include <limits>
#include <stdexcept>
#include <vector>

#include "popmap/geo.hpp"

namespace popmap {

// Dense row-major grid of cell values, north row first.
template <typename T>
struct Raster {
  GeoGrid grid;
  T nodata{};
  std::vector<T> values;

  Raster() = default;
  Raster(GeoGrid g, T fill, T nodata_value)
      : grid(g), nodata(nodata_value), values(g.size(), fill) {}

  std::size_t index(std::size_t row, std::size_t col) const {
    return row * grid.cols + col;
  }
  T& at(std::size_t row, std::size_t col) { return values[index(row, col)]; }
  const T& at(std::size_t row, std::size_t col) const {
    return values[index(row, col)];
  }
  bool is_nodata(std::size_t row, std::size_t col) const {
    return at(row, col) == nodata;
  }
};

using RasterF64 = Raster<double>;
using RasterU8 = Raster<std::uint8_t>;
using RasterI32 = Raster<std::int32_t>;

inline constexpr double kDefaultNoData = -9999.0;
inline constexpr std::uint8_t kNoDataU8 = 255;
inline constexpr std::int32_t kNoDataI32 = -1;

enum class AggMode { kSum, kMean, kMax, kFractionTrue };

// Coarsen by factor x factor blocks. Ragged edges are padded with nodata;
// nodata cells never enter sums or mean/fraction denominators. A block of
// pure nodata yields nodata.
template <typename T>
Raster<double> aggregate(const Raster<T>& r, std::size_t factor, AggMode mode) {
  if (factor == 0) throw std::invalid_argument("aggregate: factor must be >= 1");
  Raster<double> out(r.grid.coarsened(factor), 0.0, kDefaultNoData);
  for (std::size_t br = 0; br < out.grid.rows; ++br) {
    for (std::size_t bc = 0; bc < out.grid.cols; ++bc) {
      double sum = 0.0, maxv = -std::numeric_limits<double>::infinity();
      std::size_t count = 0, true_count = 0;
      const std::size_t r0 = br * factor, c0 = bc * factor;
      const std::size_t r1 = std::min(r0 + factor, r.grid.rows);
      const std::size_t c1 = std::min(c0 + factor, r.grid.cols);
      for (std::size_t row = r0; row < r1; ++row) {
        for (std::size_t col = c0; col < c1; ++col) {
          const T v = r.at(row, col);
          if (v == r.nodata) continue;
          const double d = static_cast<double>(v);
          sum += d;
          maxv = std::max(maxv, d);
          ++count;
          if (d != 0.0) ++true_count;
        }
      }
      double& dst = out.at(br, bc);
      if (count == 0) {
        dst = out.nodata;
        continue;
      }
      switch (mode) {
        case AggMode::kSum: dst = sum; break;
        case AggMode::kMean: dst = sum / static_cast<double>(count); break;
        case AggMode::kMax: dst = maxv; break;
        case AggMode::kFractionTrue:
          dst = static_cast<double>(true_count) / static_cast<double>(count);
          break;
      }
    }
  }
  return out;
}

struct Components {
  RasterI32 labels;  // 0 = background, clusters dense from 1 in scan order
  std::int32_t count = 0;
};

// Binary connected components under 4- or 8-adjacency.
Components connected_components(const RasterU8& r, int connectivity);

// Geodesic distance from every cell center to the nearest true mask cell
// center; 0 inside the mask. pop supplies the grid and must match mask.
// Throws ValidationError when the mask is empty.
Raster<double> distance_to_mask_km(const Raster<double>& pop, const RasterU8& mask,
                                   int threads = 1);

// Mask cell centers as unit vectors, reusable across many queries.
struct MaskPoints {
  std::vector<double> x, y, z;
  std::vector<std::size_t> cell;  // flat index into the source raster
  bool empty() const { return x.empty(); }
};
MaskPoints collect_mask_points(const RasterU8& mask);

// ASCII grid (ESRI convention): ncols/nrows/xllcorner/yllcorner/cellsize/
// NODATA_value header, then rows north first. Values are written with
// shortest round-trip formatting, so finite values survive exactly.
Raster<double> read_grid_ascii(const std::filesystem::path& path);
void write_grid_ascii(const Raster<double>& r, const std::filesystem::path& path);
Raster<std::int32_t> read_grid_ascii_i32(const std::filesystem::path& path);
void write_grid_ascii(const Raster<std::int32_t>& r, const std::filesystem::path& path);
Raster<std::uint8_t> read_grid_ascii_u8(const std::filesystem::path& path);
void write_grid_ascii(const Raster<std::uint8_t>& r, const std::filesystem::path& path);

// Points CSV with a "lat,lon" header.
std::vector<GeoPoint> read_points_csv(const std::filesystem::path& path);
void write_points_csv(const std::vector<GeoPoint>& pts,
                      const std::filesystem::path& path);

}  // namespace popmap
