#pragma once

#include <cmath>
#include <cstdint>
#include <vector>

#include "popmap/nn/tensor.hpp"
#include "popmap/rng.hpp"

namespace popmap::nn {

// All model parameters live in one flat store; layers hold offsets.
// Gradients mirror the weights index for index.
struct ParamStore {
  std::vector<double> w, g;

  std::size_t alloc(std::size_t n) {
    const std::size_t off = w.size();
    w.resize(off + n, 0.0);
    g.resize(off + n, 0.0);
    return off;
  }
  void zero_grad() { std::fill(g.begin(), g.end(), 0.0); }
  std::size_t size() const { return w.size(); }
};

// 3x3 convolution, stride 1, zero padding 1 (spatial size preserved).
struct Conv3x3 {
  int cin = 0, cout = 0;
  std::size_t w_off = 0, b_off = 0;

  static Conv3x3 make(ParamStore& ps, int cin, int cout, Rng& rng, double scale);
  void forward(const ParamStore& ps, const Tensor& in, Tensor& out) const;
  // Accumulates weight/bias grads into ps.g; fills din when non-null.
  void backward(ParamStore& ps, const Tensor& in, const Tensor& dout,
                Tensor* din) const;
  // Input gradient only; parameters untouched.
  void backward_data(const ParamStore& ps, const Tensor& dout, Tensor& din) const;
  std::size_t weight_count() const {
    return static_cast<std::size_t>(cout) * cin * 9;
  }
};

// 1x1 convolution (per-pixel dense map).
struct Conv1x1 {
  int cin = 0, cout = 0;
  std::size_t w_off = 0, b_off = 0;

  static Conv1x1 make(ParamStore& ps, int cin, int cout, Rng& rng, double scale);
  void forward(const ParamStore& ps, const Tensor& in, Tensor& out) const;
  void backward(ParamStore& ps, const Tensor& in, const Tensor& dout,
                Tensor* din) const;
};

// 2x2 max pooling, stride 2, with recorded argmax positions (flat index
// into the input tensor). Ties take the first cell in row-major order.
void maxpool2(const Tensor& in, Tensor& out, std::vector<std::int32_t>& idx);
void maxpool2_backward(const Tensor& dout, const std::vector<std::int32_t>& idx,
                       Tensor& din);
// Places values at the recorded positions, zeros elsewhere; exact inverse
// of maxpool2 on the max entries.
void unpool2(const Tensor& in, const std::vector<std::int32_t>& idx, Tensor& out);
void unpool2_backward(const Tensor& dout, const std::vector<std::int32_t>& idx,
                      Tensor& din);

void relu(const Tensor& in, Tensor& out);
void relu_backward(const Tensor& pre, const Tensor& dout, Tensor& din);

inline double sigmoid(double z) { return 1.0 / (1.0 + std::exp(-z)); }

}  // namespace popmap::nn
