#include "popmap/render.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>

#include "popmap/errors.hpp"
#include "popmap/textio.hpp"

namespace popmap {

namespace {

struct Rgb {
  unsigned char r, g, b;
};

constexpr Rgb kNoDataColor{255, 0, 255};
constexpr Rgb kBackground{24, 24, 24};
constexpr Rgb kForeground{235, 235, 235};
constexpr Rgb kFracLow{12, 18, 52};
constexpr Rgb kFracHigh{252, 221, 94};
constexpr Rgb kPopLow{8, 8, 24};
constexpr Rgb kPopHigh{255, 240, 160};

constexpr Rgb kPalette[12] = {
    {230, 25, 75},  {60, 180, 75},   {255, 225, 25}, {0, 130, 200},
    {245, 130, 48}, {145, 30, 180},  {70, 240, 240}, {240, 50, 230},
    {210, 245, 60}, {250, 190, 190}, {0, 128, 128},  {170, 110, 40}};

Rgb lerp(const Rgb& a, const Rgb& b, double t) {
  auto mix = [t](unsigned char x, unsigned char y) {
    return static_cast<unsigned char>(std::lround(x + t * (y - x)));
  };
  return {mix(a.r, b.r), mix(a.g, b.g), mix(a.b, b.b)};
}

void write_ppm(const std::vector<Rgb>& px, std::size_t w, std::size_t h,
               const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write " + path.string());
  out << "P6\n" << w << " " << h << "\n255\n";
  out.write(reinterpret_cast<const char*>(px.data()),
            static_cast<std::streamsize>(px.size() * 3));
  if (!out) throw IoError("write failed for " + path.string());
}

void write_legend(const std::filesystem::path& ppm_path, const std::string& text) {
  std::filesystem::path legend = ppm_path;
  legend += ".legend.txt";
  write_text_file(legend, text);
}

std::string rgb_str(const Rgb& c) {
  std::ostringstream ss;
  ss << "(" << int(c.r) << "," << int(c.g) << "," << int(c.b) << ")";
  return ss.str();
}

}  // namespace

RenderStyle parse_render_style(const std::string& name) {
  if (name == "binary") return RenderStyle::kBinary;
  if (name == "fraction") return RenderStyle::kFraction;
  if (name == "population-log") return RenderStyle::kPopulationLog;
  if (name == "clusters") return RenderStyle::kClusters;
  throw ConfigError("unknown render style '" + name +
                    "' (binary|fraction|population-log|clusters)");
}

void render(const Raster<double>& r, RenderStyle style,
            const std::filesystem::path& path) {
  for (const double v : r.values)
    if (v != r.nodata && !std::isfinite(v))
      throw std::invalid_argument("render: non-finite cell value");

  const std::size_t n = r.values.size();
  std::vector<Rgb> px(n);
  std::ostringstream legend;
  switch (style) {
    case RenderStyle::kBinary: {
      for (std::size_t i = 0; i < n; ++i) {
        const double v = r.values[i];
        px[i] = v == r.nodata ? kNoDataColor : (v != 0.0 ? kForeground : kBackground);
      }
      legend << "style binary\n0 -> " << rgb_str(kBackground) << "\nnonzero -> "
             << rgb_str(kForeground) << "\nnodata -> " << rgb_str(kNoDataColor)
             << "\n";
      break;
    }
    case RenderStyle::kFraction: {
      for (std::size_t i = 0; i < n; ++i) {
        const double v = r.values[i];
        px[i] = v == r.nodata
                    ? kNoDataColor
                    : lerp(kFracLow, kFracHigh, std::clamp(v, 0.0, 1.0));
      }
      legend << "style fraction\nlinear ramp " << rgb_str(kFracLow) << " at 0 -> "
             << rgb_str(kFracHigh) << " at 1\nnodata -> " << rgb_str(kNoDataColor)
             << "\n";
      break;
    }
    case RenderStyle::kPopulationLog: {
      double vmax = 0.0;
      for (const double v : r.values)
        if (v != r.nodata) vmax = std::max(vmax, v);
      const double denom = vmax > 0.0 ? std::log1p(vmax) : 1.0;
      for (std::size_t i = 0; i < n; ++i) {
        const double v = r.values[i];
        if (v == r.nodata) {
          px[i] = kNoDataColor;
        } else {
          const double t = v <= 0.0 ? 0.0 : std::log1p(v) / denom;
          px[i] = lerp(kPopLow, kPopHigh, t);
        }
      }
      legend << "style population-log\nlog1p ramp " << rgb_str(kPopLow)
             << " at 0 -> " << rgb_str(kPopHigh) << " at max=" << fmt_double(vmax)
             << "\nnodata -> " << rgb_str(kNoDataColor) << "\n";
      break;
    }
    case RenderStyle::kClusters:
      throw std::invalid_argument("render: clusters style needs the label raster");
  }
  write_ppm(px, r.grid.cols, r.grid.rows, path);
  write_legend(path, legend.str());
}

void render_clusters(const RasterI32& labels, const std::filesystem::path& path) {
  const std::size_t n = labels.values.size();
  std::vector<Rgb> px(n);
  for (std::size_t i = 0; i < n; ++i) {
    const std::int32_t lab = labels.values[i];
    if (lab == labels.nodata) px[i] = kNoDataColor;
    else if (lab <= 0) px[i] = kBackground;
    else px[i] = kPalette[static_cast<std::size_t>(lab - 1) % 12];
  }
  std::ostringstream legend;
  legend << "style clusters\n0 (rural) -> " << rgb_str(kBackground)
         << "\nlabel k -> palette[(k-1) mod 12]\nnodata -> "
         << rgb_str(kNoDataColor) << "\n";
  write_ppm(px, labels.grid.cols, labels.grid.rows, path);
  write_legend(path, legend.str());
}

}  // namespace popmap
