#pragma once

#include <cstdint>
#include <filesystem>
#include <vector>

#include "popmap/geo.hpp"
#include "popmap/raster.hpp"

namespace popmap {

// Grayscale tile with a pixel-level grid; intensities in [0,1].
struct ImageTile {
  GeoGrid grid;
  std::vector<float> pixels;  // row-major

  ImageTile() = default;
  ImageTile(GeoGrid g, float fill = 0.0f)
      : grid(g), pixels(g.size(), fill) {}

  std::size_t width() const { return grid.cols; }
  std::size_t height() const { return grid.rows; }
  float& at(std::size_t row, std::size_t col) { return pixels[row * grid.cols + col]; }
  float at(std::size_t row, std::size_t col) const {
    return pixels[row * grid.cols + col];
  }
};

struct PgmImage {
  std::size_t width = 0, height = 0;
  int maxval = 255;
  std::vector<float> pixels;  // normalized to [0,1]
};

// Binary PGM (P5), maxval 255 or 65535 (16-bit samples big-endian).
PgmImage read_pgm(const std::filesystem::path& path);
void write_pgm(const std::vector<float>& pixels, std::size_t width,
               std::size_t height, const std::filesystem::path& path,
               int maxval = 255);

// Pixel-grid sidecar so PGM tiles stay georeferenced
// (origin_lat/origin_lon/res_arcsec key-value lines).
void write_grid_sidecar(const GeoGrid& grid, const std::filesystem::path& path);
GeoGrid read_grid_sidecar(const std::filesystem::path& path, std::size_t rows,
                          std::size_t cols);

// Loads a tile from PGM (+ .grid sidecar) or from an ASCII raster.
ImageTile read_tile(const std::filesystem::path& path);
void write_tile_pgm(const ImageTile& tile, const std::filesystem::path& path,
                    int maxval = 65535);

// Median filter; radius 0 is the identity. Borders replicate.
ImageTile smooth(const ImageTile& tile, int radius);

// Sobel gradients, non-maximum suppression, hysteresis thresholding.
// low == high degenerates to plain thresholding.
RasterU8 detect_edges(const ImageTile& tile, float low, float high);

}  // namespace popmap
