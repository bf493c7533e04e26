#include "popmap/kernels.hpp"

#if defined(POPMAP_COMPILE_AVX2) && defined(__AVX2__)

#include <immintrin.h>

#include <algorithm>
#include <cmath>
#include <cstdint>

// AVX2 variants. Multiplies and adds are kept separate (no FMA) so results
// match the scalar reference bit for bit; reductions follow the 4-lane
// order documented in kernels.hpp.

namespace popmap::kern {

namespace {

inline double reduce_lanes(__m256d acc) {
  __m128d lo = _mm256_castpd256_pd128(acc);
  __m128d hi = _mm256_extractf128_pd(acc, 1);
  __m128d s01 = _mm_hadd_pd(lo, lo);
  __m128d s23 = _mm_hadd_pd(hi, hi);
  return _mm_cvtsd_f64(_mm_add_sd(s01, s23));
}

void axpy_avx2(double* y, const double* x, double a, std::size_t n) {
  __m256d va = _mm256_set1_pd(a);
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    __m256d vy = _mm256_loadu_pd(y + i);
    __m256d vx = _mm256_loadu_pd(x + i);
    vy = _mm256_add_pd(vy, _mm256_mul_pd(va, vx));
    _mm256_storeu_pd(y + i, vy);
  }
  for (; i < n; ++i) y[i] += a * x[i];
}

double dot_avx2(const double* x, const double* y, std::size_t n) {
  __m256d acc = _mm256_setzero_pd();
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    __m256d vx = _mm256_loadu_pd(x + i);
    __m256d vy = _mm256_loadu_pd(y + i);
    acc = _mm256_add_pd(acc, _mm256_mul_pd(vx, vy));
  }
  double total = reduce_lanes(acc);
  for (; i < n; ++i) total += x[i] * y[i];
  return total;
}

double sum_avx2(const double* x, std::size_t n) {
  __m256d acc = _mm256_setzero_pd();
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) acc = _mm256_add_pd(acc, _mm256_loadu_pd(x + i));
  double total = reduce_lanes(acc);
  for (; i < n; ++i) total += x[i];
  return total;
}

void relu_avx2(double* y, const double* x, std::size_t n) {
  __m256d zero = _mm256_setzero_pd();
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4)
    _mm256_storeu_pd(y + i, _mm256_max_pd(_mm256_loadu_pd(x + i), zero));
  for (; i < n; ++i) y[i] = x[i] > 0.0 ? x[i] : 0.0;
}

void relu_bwd_avx2(double* dx, const double* x, const double* dy, std::size_t n) {
  __m256d zero = _mm256_setzero_pd();
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    __m256d mask = _mm256_cmp_pd(_mm256_loadu_pd(x + i), zero, _CMP_GT_OQ);
    _mm256_storeu_pd(dx + i, _mm256_and_pd(mask, _mm256_loadu_pd(dy + i)));
  }
  for (; i < n; ++i) dx[i] = x[i] > 0.0 ? dy[i] : 0.0;
}

void mul_avx2(double* out, const double* a, const double* b, std::size_t n) {
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4)
    _mm256_storeu_pd(out + i,
                     _mm256_mul_pd(_mm256_loadu_pd(a + i), _mm256_loadu_pd(b + i)));
  for (; i < n; ++i) out[i] = a[i] * b[i];
}

void select_ge_avx2(double* out, const double* score, const double* frac,
                    double tau, std::size_t n) {
  __m256d vt = _mm256_set1_pd(tau);
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    __m256d mask = _mm256_cmp_pd(_mm256_loadu_pd(score + i), vt, _CMP_GE_OQ);
    _mm256_storeu_pd(out + i, _mm256_and_pd(mask, _mm256_loadu_pd(frac + i)));
  }
  for (; i < n; ++i) out[i] = score[i] >= tau ? frac[i] : 0.0;
}

ArgMax max_dot3_avx2(const double* x, const double* y, const double* z,
                     double tx, double ty, double tz, std::size_t n) {
  if (n < 4) return scalar_table().max_dot3_f64(x, y, z, tx, ty, tz, n);

  __m256d vtx = _mm256_set1_pd(tx), vty = _mm256_set1_pd(ty), vtz = _mm256_set1_pd(tz);
  __m256d best_v = _mm256_set1_pd(-2.0);  // dot of unit vectors is >= -1
  __m256i best_i = _mm256_setzero_si256();
  __m256i idx = _mm256_setr_epi64x(0, 1, 2, 3);
  __m256i four = _mm256_set1_epi64x(4);
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    __m256d d = _mm256_mul_pd(vtx, _mm256_loadu_pd(x + i));
    d = _mm256_add_pd(d, _mm256_mul_pd(vty, _mm256_loadu_pd(y + i)));
    d = _mm256_add_pd(d, _mm256_mul_pd(vtz, _mm256_loadu_pd(z + i)));
    __m256d gt = _mm256_cmp_pd(d, best_v, _CMP_GT_OQ);
    best_v = _mm256_blendv_pd(best_v, d, gt);
    best_i = _mm256_blendv_epi8(best_i, idx, _mm256_castpd_si256(gt));
    idx = _mm256_add_epi64(idx, four);
  }
  alignas(32) double vals[4];
  alignas(32) std::int64_t idxs[4];
  _mm256_store_pd(vals, best_v);
  _mm256_store_si256(reinterpret_cast<__m256i*>(idxs), best_i);

  // Lanes hold interleaved index classes; combining in lane order with a
  // smallest-index tie break reproduces the sequential scan exactly.
  ArgMax best{vals[0], static_cast<std::size_t>(idxs[0])};
  for (int k = 1; k < 4; ++k) {
    std::size_t ik = static_cast<std::size_t>(idxs[k]);
    if (vals[k] > best.value || (vals[k] == best.value && ik < best.index))
      best = {vals[k], ik};
  }
  for (; i < n; ++i) {
    double d = (tx * x[i] + ty * y[i]) + tz * z[i];
    if (d > best.value) best = {d, i};
  }
  return best;
}

void row_diff_avx2(float* out, const float* a, const float* b, std::size_t n) {
  std::size_t i = 0;
  for (; i + 8 <= n; i += 8)
    _mm256_storeu_ps(out + i,
                     _mm256_sub_ps(_mm256_loadu_ps(a + i), _mm256_loadu_ps(b + i)));
  for (; i < n; ++i) out[i] = a[i] - b[i];
}

void row_121_avx2(float* out, const float* a, const float* b, const float* c,
                  std::size_t n) {
  __m256 two = _mm256_set1_ps(2.0f);
  std::size_t i = 0;
  for (; i + 8 <= n; i += 8) {
    __m256 r = _mm256_add_ps(_mm256_loadu_ps(a + i),
                             _mm256_mul_ps(two, _mm256_loadu_ps(b + i)));
    _mm256_storeu_ps(out + i, _mm256_add_ps(r, _mm256_loadu_ps(c + i)));
  }
  for (; i < n; ++i) out[i] = a[i] + 2.0f * b[i] + c[i];
}

void grad_mag_avx2(float* out, const float* gx, const float* gy, std::size_t n) {
  std::size_t i = 0;
  for (; i + 8 <= n; i += 8) {
    __m256 vx = _mm256_loadu_ps(gx + i);
    __m256 vy = _mm256_loadu_ps(gy + i);
    __m256 s = _mm256_add_ps(_mm256_mul_ps(vx, vx), _mm256_mul_ps(vy, vy));
    _mm256_storeu_ps(out + i, _mm256_sqrt_ps(s));
  }
  for (; i < n; ++i) out[i] = std::sqrt(gx[i] * gx[i] + gy[i] * gy[i]);
}

void median9_avx2(float* out, const float* const p[9], std::size_t n) {
  std::size_t i = 0;
  for (; i + 8 <= n; i += 8) {
    __m256 v[9];
    for (int k = 0; k < 9; ++k) v[k] = _mm256_loadu_ps(p[k] + i);
    auto ex = [&](int a, int b) {
      __m256 lo = _mm256_min_ps(v[a], v[b]);
      v[b] = _mm256_max_ps(v[a], v[b]);
      v[a] = lo;
    };
    ex(1, 2); ex(4, 5); ex(7, 8);
    ex(0, 1); ex(3, 4); ex(6, 7);
    ex(1, 2); ex(4, 5); ex(7, 8);
    ex(0, 3); ex(5, 8); ex(4, 7);
    ex(3, 6); ex(1, 4); ex(2, 5);
    ex(4, 7); ex(4, 2); ex(6, 4);
    ex(4, 2);
    _mm256_storeu_ps(out + i, v[4]);
  }
  if (i < n) {
    const float* tail[9];
    for (int k = 0; k < 9; ++k) tail[k] = p[k] + i;
    scalar_table().median9_f32(out + i, tail, n - i);
  }
}

const KernelTable kAvx2Table = {
    "avx2",
    axpy_avx2,
    dot_avx2,
    sum_avx2,
    relu_avx2,
    relu_bwd_avx2,
    mul_avx2,
    select_ge_avx2,
    max_dot3_avx2,
    row_diff_avx2,
    row_121_avx2,
    grad_mag_avx2,
    median9_avx2,
};

}  // namespace

const KernelTable* avx2_table() {
  return __builtin_cpu_supports("avx2") ? &kAvx2Table : nullptr;
}

}  // namespace popmap::kern

#else

namespace popmap::kern {
const KernelTable* avx2_table() { return nullptr; }
}  // namespace popmap::kern

#endif
