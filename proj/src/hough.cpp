#include "popmap/hough.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <stdexcept>
#include <vector>

#include "popmap/rng.hpp"

namespace popmap {

double LineSegment::length_px() const {
  const double dx = p1.x - p0.x, dy = p1.y - p0.y;
  return std::sqrt(dx * dx + dy * dy);
}

double LineSegment::orientation_deg() const {
  double deg = std::atan2(static_cast<double>(p1.y - p0.y),
                          static_cast<double>(p1.x - p0.x)) *
               180.0 / std::numbers::pi;
  if (deg < 0.0) deg += 180.0;
  if (deg >= 180.0) deg -= 180.0;
  return deg;
}

std::vector<LineSegment> extract_lines(const RasterU8& edges, int min_support) {
  HoughParams p;
  p.min_support = min_support;
  return extract_lines(edges, p);
}

std::vector<LineSegment> extract_lines(const RasterU8& edges,
                                       const HoughParams& params) {
  if (params.min_support < 1)
    throw std::invalid_argument("extract_lines: min_support must be >= 1");
  const long h = static_cast<long>(edges.grid.rows);
  const long w = static_cast<long>(edges.grid.cols);

  std::vector<PixelCoord> seeds;
  std::vector<std::uint8_t> present(static_cast<std::size_t>(h) * w, 0);
  for (long y = 0; y < h; ++y)
    for (long x = 0; x < w; ++x)
      if (edges.values[y * w + x] == 1) {
        seeds.push_back({static_cast<int>(x), static_cast<int>(y)});
        present[y * w + x] = 1;
      }
  std::vector<LineSegment> out;
  if (seeds.empty()) return out;

  const int ntheta = params.theta_bins;
  std::vector<double> sin_t(ntheta), cos_t(ntheta);
  for (int t = 0; t < ntheta; ++t) {
    const double th = std::numbers::pi * t / ntheta;
    sin_t[t] = std::sin(th);
    cos_t[t] = std::cos(th);
  }
  const long rho_span = static_cast<long>(std::ceil(std::sqrt(
                            static_cast<double>(h) * h + static_cast<double>(w) * w))) +
                        1;
  const long nrho = 2 * rho_span + 1;
  std::vector<int> acc(static_cast<std::size_t>(ntheta) * nrho, 0);
  std::vector<std::uint8_t> voted(static_cast<std::size_t>(h) * w, 0);

  auto vote = [&](const PixelCoord& p, int delta, int& best_theta, int& best_count) {
    best_theta = 0;
    best_count = 0;
    for (int t = 0; t < ntheta; ++t) {
      const long rho = std::lround(p.x * cos_t[t] + p.y * sin_t[t]) + rho_span;
      int& cell = acc[static_cast<std::size_t>(t) * nrho + rho];
      cell += delta;
      if (cell > best_count) {
        best_count = cell;
        best_theta = t;
      }
    }
  };

  Rng rng(params.seed);
  std::vector<PixelCoord> line_pixels;
  while (!seeds.empty()) {
    const std::size_t pick = rng.bounded(seeds.size());
    const PixelCoord p = seeds[pick];
    seeds[pick] = seeds.back();
    seeds.pop_back();
    if (!present[static_cast<std::size_t>(p.y) * w + p.x]) continue;

    int best_theta = 0, best_count = 0;
    vote(p, +1, best_theta, best_count);
    voted[static_cast<std::size_t>(p.y) * w + p.x] = 1;
    if (best_count < params.min_support) continue;

    // Walk the corridor of the best line through p in both directions,
    // tolerating max_gap missing pixels; the corridor is one pixel wide
    // on each side, perpendicular to the line.
    const double dx = -sin_t[best_theta], dy = cos_t[best_theta];
    const double px = std::fabs(dy) > std::fabs(dx) ? 1.0 : 0.0;  // perpendicular step
    const double py = px == 1.0 ? 0.0 : 1.0;
    line_pixels.clear();
    line_pixels.push_back(p);
    for (int dir = -1; dir <= 1; dir += 2) {
      int gap = 0;
      for (long step = 1;; ++step) {
        const double fx = p.x + dir * step * dx;
        const double fy = p.y + dir * step * dy;
        const long cx = std::lround(fx), cy = std::lround(fy);
        if (cx < 0 || cy < 0 || cx >= w || cy >= h) break;
        bool found = false;
        for (int side = -1; side <= 1 && !found; ++side) {
          const long sx = cx + static_cast<long>(side * px);
          const long sy = cy + static_cast<long>(side * py);
          if (sx < 0 || sy < 0 || sx >= w || sy >= h) continue;
          if (present[static_cast<std::size_t>(sy) * w + sx]) {
            line_pixels.push_back({static_cast<int>(sx), static_cast<int>(sy)});
            found = true;
          }
        }
        if (found) {
          gap = 0;
        } else if (++gap > params.max_gap) {
          break;
        }
      }
      if (dir == -1) std::reverse(line_pixels.begin(), line_pixels.end());
    }

    if (static_cast<int>(line_pixels.size()) < params.min_support) continue;

    LineSegment seg;
    seg.p0 = line_pixels.front();
    seg.p1 = line_pixels.back();
    seg.strength = static_cast<double>(line_pixels.size());
    out.push_back(seg);

    // Consume the supporting pixels: further lines must find their own
    // evidence, and their accumulated votes are retracted.
    for (const PixelCoord& q : line_pixels) {
      const std::size_t qi = static_cast<std::size_t>(q.y) * w + q.x;
      if (!present[qi]) continue;
      present[qi] = 0;
      if (voted[qi]) {
        int t0, c0;
        vote(q, -1, t0, c0);
        voted[qi] = 0;
      }
    }
  }
  return out;
}

}  // namespace popmap
