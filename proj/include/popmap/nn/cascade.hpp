#pragma once

#include "popmap/raster.hpp"

namespace popmap::nn {

// Suppresses segmentation footprints wherever the patch-classifier score
// falls below tau: out = frac where score >= tau, else 0. Nodata in either
// input propagates.
Raster<double> cascade(const Raster<double>& score, const Raster<double>& frac,
                       double tau);

}  // namespace popmap::nn
