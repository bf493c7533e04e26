#include "popmap/nn/cascade.hpp"

#include <stdexcept>

#include "popmap/errors.hpp"
#include "popmap/kernels.hpp"

namespace popmap::nn {

Raster<double> cascade(const Raster<double>& score, const Raster<double>& frac,
                       double tau) {
  if (!same_grid(score.grid, frac.grid))
    throw ValidationError("cascade: grid mismatch");
  if (!(tau >= 0.0 && tau <= 1.0))
    throw std::invalid_argument("cascade: tau must be in [0,1]");
  Raster<double> out(frac.grid, 0.0, frac.nodata);
  kern::select_ge(out.values.data(), score.values.data(), frac.values.data(), tau,
                  out.values.size());
  for (std::size_t i = 0; i < out.values.size(); ++i)
    if (score.values[i] == score.nodata || frac.values[i] == frac.nodata)
      out.values[i] = out.nodata;
  return out;
}

}  // namespace popmap::nn
