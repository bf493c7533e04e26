#pragma once

#include <cstddef>

// Data-parallel inner loops shared by the image, neural-net and distance
// code. Every kernel exists as a scalar reference and (on x86-64) an AVX2
// variant; the active table is chosen once at startup.
//
// Contract: for identical inputs the scalar and AVX2 variants return
// bit-identical results. Reductions (dot, sum) are defined with a fixed
// 4-lane interleaved accumulation order, which the scalar reference
// emulates, so the contract holds for them too. Set POPMAP_KERNELS to
// "scalar", "avx2" or "auto" to override selection.

namespace popmap::kern {

struct ArgMax {
  double value;
  std::size_t index;
};

struct KernelTable {
  const char* name;

  // y[i] += a * x[i]
  void (*axpy_f64)(double* y, const double* x, double a, std::size_t n);
  // 4-lane interleaved dot product
  double (*dot_f64)(const double* x, const double* y, std::size_t n);
  // 4-lane interleaved sum
  double (*sum_f64)(const double* x, std::size_t n);
  // y[i] = max(x[i], 0)
  void (*relu_f64)(double* y, const double* x, std::size_t n);
  // dx[i] = x[i] > 0 ? dy[i] : 0
  void (*relu_bwd_f64)(double* dx, const double* x, const double* dy, std::size_t n);
  // out[i] = a[i] * b[i]
  void (*mul_f64)(double* out, const double* a, const double* b, std::size_t n);
  // out[i] = score[i] >= tau ? frac[i] : 0
  void (*select_ge_f64)(double* out, const double* score, const double* frac,
                        double tau, std::size_t n);
  // argmax over i of tx*x[i] + ty*y[i] + tz*z[i]; ties resolve to the
  // smallest index. n must be >= 1.
  ArgMax (*max_dot3_f64)(const double* x, const double* y, const double* z,
                         double tx, double ty, double tz, std::size_t n);

  // out[i] = a[i] - b[i]
  void (*row_diff_f32)(float* out, const float* a, const float* b, std::size_t n);
  // out[i] = a[i] + 2*b[i] + c[i]
  void (*row_121_f32)(float* out, const float* a, const float* b, const float* c,
                      std::size_t n);
  // out[i] = sqrt(gx[i]^2 + gy[i]^2)
  void (*grad_mag_f32)(float* out, const float* gx, const float* gy, std::size_t n);
  // out[i] = median of {p[0][i], ..., p[8][i]} via a fixed min/max network
  void (*median9_f32)(float* out, const float* const p[9], std::size_t n);
};

const KernelTable& scalar_table();
// nullptr when the binary lacks AVX2 code or the CPU lacks AVX2.
const KernelTable* avx2_table();
// Selected table (env override, then CPU detection).
const KernelTable& active();

inline void axpy(double* y, const double* x, double a, std::size_t n) {
  active().axpy_f64(y, x, a, n);
}
inline double dot(const double* x, const double* y, std::size_t n) {
  return active().dot_f64(x, y, n);
}
inline double sum(const double* x, std::size_t n) { return active().sum_f64(x, n); }
inline void relu(double* y, const double* x, std::size_t n) {
  active().relu_f64(y, x, n);
}
inline void relu_bwd(double* dx, const double* x, const double* dy, std::size_t n) {
  active().relu_bwd_f64(dx, x, dy, n);
}
inline void mul(double* out, const double* a, const double* b, std::size_t n) {
  active().mul_f64(out, a, b, n);
}
inline void select_ge(double* out, const double* score, const double* frac,
                      double tau, std::size_t n) {
  active().select_ge_f64(out, score, frac, tau, n);
}
inline ArgMax max_dot3(const double* x, const double* y, const double* z,
                       double tx, double ty, double tz, std::size_t n) {
  return active().max_dot3_f64(x, y, z, tx, ty, tz, n);
}

}  // namespace popmap::kern
