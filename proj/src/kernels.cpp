#include "popmap/kernels.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <stdexcept>
#include <string_view>

namespace popmap::kern {

namespace {

void axpy_scalar(double* y, const double* x, double a, std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) y[i] += a * x[i];
}

// The 4-lane interleaved order below matches the AVX2 accumulation exactly:
// lane k sums elements k, k+4, k+8, ...; lanes combine as (s0+s1)+(s2+s3);
// the tail is added sequentially afterwards.
double dot_scalar(const double* x, const double* y, std::size_t n) {
  double s[4] = {0.0, 0.0, 0.0, 0.0};
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    s[0] += x[i] * y[i];
    s[1] += x[i + 1] * y[i + 1];
    s[2] += x[i + 2] * y[i + 2];
    s[3] += x[i + 3] * y[i + 3];
  }
  double total = (s[0] + s[1]) + (s[2] + s[3]);
  for (; i < n; ++i) total += x[i] * y[i];
  return total;
}

double sum_scalar(const double* x, std::size_t n) {
  double s[4] = {0.0, 0.0, 0.0, 0.0};
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    s[0] += x[i];
    s[1] += x[i + 1];
    s[2] += x[i + 2];
    s[3] += x[i + 3];
  }
  double total = (s[0] + s[1]) + (s[2] + s[3]);
  for (; i < n; ++i) total += x[i];
  return total;
}

void relu_scalar(double* y, const double* x, std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) y[i] = x[i] > 0.0 ? x[i] : 0.0;
}

void relu_bwd_scalar(double* dx, const double* x, const double* dy, std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) dx[i] = x[i] > 0.0 ? dy[i] : 0.0;
}

void mul_scalar(double* out, const double* a, const double* b, std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) out[i] = a[i] * b[i];
}

void select_ge_scalar(double* out, const double* score, const double* frac,
                      double tau, std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) out[i] = score[i] >= tau ? frac[i] : 0.0;
}

ArgMax max_dot3_scalar(const double* x, const double* y, const double* z,
                       double tx, double ty, double tz, std::size_t n) {
  ArgMax best{(tx * x[0] + ty * y[0]) + tz * z[0], 0};
  for (std::size_t i = 1; i < n; ++i) {
    double d = (tx * x[i] + ty * y[i]) + tz * z[i];
    if (d > best.value) best = {d, i};
  }
  return best;
}

void row_diff_scalar(float* out, const float* a, const float* b, std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) out[i] = a[i] - b[i];
}

void row_121_scalar(float* out, const float* a, const float* b, const float* c,
                    std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) out[i] = a[i] + 2.0f * b[i] + c[i];
}

void grad_mag_scalar(float* out, const float* gx, const float* gy, std::size_t n) {
  for (std::size_t i = 0; i < n; ++i)
    out[i] = std::sqrt(gx[i] * gx[i] + gy[i] * gy[i]);
}

// Median-of-9 minimum/maximum exchange network; 19 exchanges, the median
// lands in slot 4. Same network runs elementwise in the AVX2 variant.
void median9_scalar(float* out, const float* const p[9], std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) {
    float v0 = p[0][i], v1 = p[1][i], v2 = p[2][i], v3 = p[3][i], v4 = p[4][i],
          v5 = p[5][i], v6 = p[6][i], v7 = p[7][i], v8 = p[8][i];
    auto ex = [](float& a, float& b) {
      float lo = std::min(a, b);
      b = std::max(a, b);
      a = lo;
    };
    ex(v1, v2); ex(v4, v5); ex(v7, v8);
    ex(v0, v1); ex(v3, v4); ex(v6, v7);
    ex(v1, v2); ex(v4, v5); ex(v7, v8);
    ex(v0, v3); ex(v5, v8); ex(v4, v7);
    ex(v3, v6); ex(v1, v4); ex(v2, v5);
    ex(v4, v7); ex(v4, v2); ex(v6, v4);
    ex(v4, v2);
    out[i] = v4;
  }
}

const KernelTable kScalarTable = {
    "scalar",
    axpy_scalar,
    dot_scalar,
    sum_scalar,
    relu_scalar,
    relu_bwd_scalar,
    mul_scalar,
    select_ge_scalar,
    max_dot3_scalar,
    row_diff_scalar,
    row_121_scalar,
    grad_mag_scalar,
    median9_scalar,
};

}  // namespace

const KernelTable& scalar_table() { return kScalarTable; }

const KernelTable& active() {
  static const KernelTable* table = [] {
    const char* env = std::getenv("POPMAP_KERNELS");
    std::string_view want = env != nullptr ? env : "auto";
    if (want == "scalar") return &scalar_table();
    const KernelTable* simd = avx2_table();
    if (want == "avx2") {
      if (simd == nullptr)
        throw std::runtime_error("POPMAP_KERNELS=avx2 but AVX2 is unavailable");
      return simd;
    }
    return simd != nullptr ? simd : &scalar_table();
  }();
  return *table;
}

}  // namespace popmap::kern
