#pragma once

#include <algorithm>
#include <cstddef>
#include <vector>

namespace popmap::nn {

// Dense CHW tensor, double precision (training and gradient checks run in
// double; inference reuses the same path at desk scale).
struct Tensor {
  int ch = 0, h = 0, w = 0;
  std::vector<double> v;

  Tensor() = default;
  Tensor(int ch_, int h_, int w_)
      : ch(ch_), h(h_), w(w_),
        v(static_cast<std::size_t>(ch_) * h_ * w_, 0.0) {}

  std::size_t plane_size() const { return static_cast<std::size_t>(h) * w; }
  std::size_t size() const { return v.size(); }
  double* plane(int c) { return v.data() + static_cast<std::size_t>(c) * plane_size(); }
  const double* plane(int c) const {
    return v.data() + static_cast<std::size_t>(c) * plane_size();
  }
  void zero() { std::fill(v.begin(), v.end(), 0.0); }
  bool same_shape(const Tensor& o) const {
    return ch == o.ch && h == o.h && w == o.w;
  }
};

}  // namespace popmap::nn
