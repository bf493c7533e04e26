#include "popmap/geo.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

namespace popmap {

bool valid_point(const GeoPoint& p) {
  return p.lat >= -90.0 && p.lat <= 90.0 && p.lon >= -180.0 && p.lon < 180.0;
}

GeoGrid::GeoGrid(double origin_lat_, double origin_lon_, double res_arcsec_,
                 std::size_t rows_, std::size_t cols_)
    : origin_lat(origin_lat_),
      origin_lon(origin_lon_),
      res_arcsec(res_arcsec_),
      rows(rows_),
      cols(cols_) {
  if (rows == 0 || cols == 0)
    throw std::invalid_argument("GeoGrid: rows and cols must be >= 1");
  if (!(res_arcsec > 0.0))
    throw std::invalid_argument("GeoGrid: resolution must be positive");
  const double north = cell_center_lat(0);
  const double south = cell_center_lat(rows - 1);
  const double west = cell_center_lon(0);
  const double east = cell_center_lon(cols - 1);
  if (north > 90.0 || south < -90.0 || west < -180.0 || east >= 180.0)
    throw std::invalid_argument(
        "GeoGrid: cell centers outside [-90,90] x [-180,180): lat [" +
        std::to_string(south) + "," + std::to_string(north) + "] lon [" +
        std::to_string(west) + "," + std::to_string(east) + "]");
}

GeoGrid GeoGrid::coarsened(std::size_t factor) const {
  if (factor == 0) throw std::invalid_argument("coarsened: factor must be >= 1");
  return GeoGrid(origin_lat, origin_lon, res_arcsec * static_cast<double>(factor),
                 (rows + factor - 1) / factor, (cols + factor - 1) / factor);
}

bool same_grid(const GeoGrid& a, const GeoGrid& b) {
  constexpr double kOriginTolDeg = 1e-9;
  return a.rows == b.rows && a.cols == b.cols && a.res_arcsec == b.res_arcsec &&
         std::fabs(a.origin_lat - b.origin_lat) <= kOriginTolDeg &&
         std::fabs(a.origin_lon - b.origin_lon) <= kOriginTolDeg;
}

double cell_area_km2(const GeoGrid& grid, std::size_t row) {
  if (row >= grid.rows)
    throw std::out_of_range("cell_area_km2: row " + std::to_string(row) +
                            " out of range (rows=" + std::to_string(grid.rows) + ")");
  const double delta = deg_to_rad(grid.res_deg());
  const double phi = deg_to_rad(grid.cell_center_lat(row));
  return (kEarthRadiusKm * delta) * (kEarthRadiusKm * delta * std::cos(phi));
}

double geodesic_distance_km(const GeoPoint& a, const GeoPoint& b) {
  const double lat1 = deg_to_rad(a.lat), lat2 = deg_to_rad(b.lat);
  const double dlat = lat2 - lat1;
  const double dlon = deg_to_rad(b.lon - a.lon);
  const double sh = std::sin(dlat * 0.5);
  const double sl = std::sin(dlon * 0.5);
  const double h = sh * sh + std::cos(lat1) * std::cos(lat2) * sl * sl;
  return 2.0 * kEarthRadiusKm * std::asin(std::min(1.0, std::sqrt(h)));
}

void unit_vector(const GeoPoint& p, double& x, double& y, double& z) {
  const double lat = deg_to_rad(p.lat), lon = deg_to_rad(p.lon);
  const double c = std::cos(lat);
  x = c * std::cos(lon);
  y = c * std::sin(lon);
  z = std::sin(lat);
}

}  // namespace popmap
