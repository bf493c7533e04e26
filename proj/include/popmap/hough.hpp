#pragma once

#include <cstdint>
#include <vector>

#include "popmap/raster.hpp"

namespace popmap {

struct PixelCoord {
  int x = 0;  // column
  int y = 0;  // row
};

struct LineSegment {
  PixelCoord p0, p1;
  double strength = 0.0;  // count of supporting edge pixels

  double length_px() const;
  // Orientation in degrees, folded into [0, 180).
  double orientation_deg() const;
};

struct HoughParams {
  int min_support = 20;     // minimum collinear edge pixels per segment
  int max_gap = 2;          // walk tolerance, pixels
  int theta_bins = 180;     // 1 degree resolution
  std::uint64_t seed = 0x9e3779b97f4a7c15ULL;  // sampling order (fixed: determinism)
};

// Progressive probabilistic Hough transform over a binary edge map.
// Every returned segment is supported by >= min_support edge pixels.
std::vector<LineSegment> extract_lines(const RasterU8& edges, int min_support);
std::vector<LineSegment> extract_lines(const RasterU8& edges, const HoughParams& params);

}  // namespace popmap
