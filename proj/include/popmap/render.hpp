#pragma once

#include <filesystem>
#include <string>

#include "popmap/raster.hpp"

namespace popmap {

enum class RenderStyle { kBinary, kFraction, kPopulationLog, kClusters };

RenderStyle parse_render_style(const std::string& name);

// Writes a PPM (P6) plus a "<path>.legend.txt" sidecar describing the
// color mapping. Mappings are deterministic; population-log is monotone
// in the cell value.
void render(const Raster<double>& r, RenderStyle style,
            const std::filesystem::path& path);
// Cluster labels: 0 renders as background, labels cycle a fixed palette.
void render_clusters(const RasterI32& labels, const std::filesystem::path& path);

}  // namespace popmap
