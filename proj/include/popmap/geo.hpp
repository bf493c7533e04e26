#pragma once

#include <cstddef>
#include <numbers>

namespace popmap {

inline constexpr double kEarthRadiusKm = 6371.0;

inline constexpr double deg_to_rad(double deg) {
  return deg * (std::numbers::pi / 180.0);
}

struct GeoPoint {
  double lat = 0.0;  // degrees
  double lon = 0.0;  // degrees
};

bool valid_point(const GeoPoint& p);

// Arcsecond lattice anchoring every raster. origin is the north-west
// corner; rows run north to south, columns west to east.
struct GeoGrid {
  double origin_lat = 0.0;   // north edge, degrees
  double origin_lon = 0.0;   // west edge, degrees
  double res_arcsec = 1.0;   // cell size, arcseconds
  std::size_t rows = 1;
  std::size_t cols = 1;

  GeoGrid() = default;
  // Throws std::invalid_argument when rows/cols are zero, the resolution is
  // not positive, or any cell center falls outside [-90,90] x [-180,180).
  GeoGrid(double origin_lat, double origin_lon, double res_arcsec,
          std::size_t rows, std::size_t cols);

  double res_deg() const { return res_arcsec / 3600.0; }
  double south_lat() const { return origin_lat - static_cast<double>(rows) * res_deg(); }
  double east_lon() const { return origin_lon + static_cast<double>(cols) * res_deg(); }

  double cell_center_lat(std::size_t row) const {
    return origin_lat - (static_cast<double>(row) + 0.5) * res_deg();
  }
  double cell_center_lon(std::size_t col) const {
    return origin_lon + (static_cast<double>(col) + 0.5) * res_deg();
  }
  GeoPoint cell_center(std::size_t row, std::size_t col) const {
    return {cell_center_lat(row), cell_center_lon(col)};
  }

  std::size_t size() const { return rows * cols; }

  // Grid covering the same origin with factor x factor blocks merged
  // (ragged edges round up).
  GeoGrid coarsened(std::size_t factor) const;
};

// Exact on shape and resolution; origins compared with a small tolerance
// because corners reconstructed from ASCII headers re-associate the
// origin arithmetic.
bool same_grid(const GeoGrid& a, const GeoGrid& b);

// Spherical cell area using the cell-center latitude:
// (R*delta) * (R*delta*cos(lat)), delta in radians.
double cell_area_km2(const GeoGrid& grid, std::size_t row);

// Haversine distance on a sphere of radius 6371 km.
double geodesic_distance_km(const GeoPoint& a, const GeoPoint& b);

// Cartesian unit vector of a point; dot products of these order candidates
// identically to geodesic distance (chord length is monotone in arc).
void unit_vector(const GeoPoint& p, double& x, double& y, double& z);

}  // namespace popmap
