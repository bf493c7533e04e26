#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "popmap/errors.hpp"
#include "popmap/kernels.hpp"
#include "popmap/nn/cascade.hpp"
#include "popmap/nn/layers.hpp"
#include "popmap/nn/segnet.hpp"
#include "popmap/rng.hpp"

using namespace popmap;
using namespace popmap::nn;

namespace {

Tensor random_tensor(Rng& rng, int c, int h, int w, double lo = -1.0,
                     double hi = 1.0) {
  Tensor t(c, h, w);
  for (auto& v : t.v) v = rng.uniform(lo, hi);
  return t;
}

// Direct 2D convolution, zero padding, no clever loop structure.
Tensor conv3x3_oracle(const ParamStore& ps, const Conv3x3& conv, const Tensor& in) {
  Tensor out(conv.cout, in.h, in.w);
  for (int oc = 0; oc < conv.cout; ++oc)
    for (int y = 0; y < in.h; ++y)
      for (int x = 0; x < in.w; ++x) {
        double acc = ps.w[conv.b_off + static_cast<std::size_t>(oc)];
        for (int ic = 0; ic < conv.cin; ++ic)
          for (int ky = 0; ky < 3; ++ky)
            for (int kx = 0; kx < 3; ++kx) {
              const int iy = y + ky - 1, ix = x + kx - 1;
              if (iy < 0 || ix < 0 || iy >= in.h || ix >= in.w) continue;
              acc += ps.w[conv.w_off +
                          ((static_cast<std::size_t>(oc) * conv.cin + ic) * 3 + ky) *
                              3 +
                          kx] *
                     in.plane(ic)[static_cast<std::size_t>(iy) * in.w + ix];
            }
        out.plane(oc)[static_cast<std::size_t>(y) * in.w + x] = acc;
      }
  return out;
}

}  // namespace

TEST_CASE("conv3x3 forward equals the direct convolution oracle") {
  Rng rng(21);
  for (int rep = 0; rep < 10; ++rep) {
    ParamStore ps;
    const int cin = 1 + static_cast<int>(rng.bounded(3));
    const int cout = 1 + static_cast<int>(rng.bounded(3));
    const Conv3x3 conv = Conv3x3::make(ps, cin, cout, rng, 1.0);
    for (int oc = 0; oc < cout; ++oc)
      ps.w[conv.b_off + static_cast<std::size_t>(oc)] = rng.uniform(-0.5, 0.5);
    const Tensor in = random_tensor(rng, cin, 4 + static_cast<int>(rng.bounded(6)),
                                    4 + static_cast<int>(rng.bounded(6)));
    Tensor out;
    conv.forward(ps, in, out);
    const Tensor want = conv3x3_oracle(ps, conv, in);
    REQUIRE(out.size() == want.size());
    for (std::size_t i = 0; i < out.size(); ++i)
      CHECK(out.v[i] == doctest::Approx(want.v[i]).epsilon(1e-12));
  }
}

TEST_CASE("conv1x1 is a per-pixel dense map") {
  Rng rng(22);
  ParamStore ps;
  const Conv1x1 head = Conv1x1::make(ps, 3, 2, rng, 1.0);
  ps.w[head.b_off] = 0.1;
  ps.w[head.b_off + 1] = -0.2;
  const Tensor in = random_tensor(rng, 3, 5, 7);
  Tensor out;
  head.forward(ps, in, out);
  for (int y = 0; y < 5; ++y)
    for (int x = 0; x < 7; ++x)
      for (int oc = 0; oc < 2; ++oc) {
        double want = ps.w[head.b_off + static_cast<std::size_t>(oc)];
        for (int ic = 0; ic < 3; ++ic)
          want += ps.w[head.w_off + static_cast<std::size_t>(oc) * 3 + ic] *
                  in.plane(ic)[static_cast<std::size_t>(y) * 7 + x];
        CHECK(out.plane(oc)[static_cast<std::size_t>(y) * 7 + x] ==
              doctest::Approx(want).epsilon(1e-12));
      }
}

TEST_CASE("conv1x1 gradient matches finite differences at machine precision") {
  // The map is affine in its weights, so central differences are exact up
  // to rounding.
  Rng rng(23);
  ParamStore ps;
  const Conv1x1 head = Conv1x1::make(ps, 2, 1, rng, 1.0);
  const Tensor in = random_tensor(rng, 2, 4, 4);
  auto loss = [&] {
    Tensor out;
    head.forward(ps, in, out);
    double s = 0.0;
    for (const double v : out.v) s += v;
    return s;
  };
  Tensor dout(1, 4, 4);
  for (auto& v : dout.v) v = 1.0;
  ps.zero_grad();
  head.backward(ps, in, dout, nullptr);
  const double eps = 1e-6;
  for (std::size_t i = 0; i < ps.size(); ++i) {
    const double saved = ps.w[i];
    ps.w[i] = saved + eps;
    const double lp = loss();
    ps.w[i] = saved - eps;
    const double lm = loss();
    ps.w[i] = saved;
    CHECK(ps.g[i] == doctest::Approx((lp - lm) / (2 * eps)).epsilon(1e-9));
  }
}

TEST_CASE("maxpool records argmax and unpool restores it exactly") {
  Rng rng(24);
  const Tensor in = random_tensor(rng, 3, 8, 6);
  Tensor pooled;
  std::vector<std::int32_t> idx;
  maxpool2(in, pooled, idx);
  CHECK(pooled.h == 4);
  CHECK(pooled.w == 3);

  Tensor restored;
  unpool2(pooled, idx, restored);
  REQUIRE(restored.size() == in.size());
  // Max entries restored in place, zeros elsewhere (exact).
  for (int c = 0; c < 3; ++c)
    for (int y = 0; y < 8; ++y)
      for (int x = 0; x < 6; ++x) {
        const double r =
            restored.plane(c)[static_cast<std::size_t>(y) * 6 + x];
        const double v = in.plane(c)[static_cast<std::size_t>(y) * 6 + x];
        const double pool_max =
            pooled.plane(c)[static_cast<std::size_t>(y / 2) * 3 + x / 2];
        if (r != 0.0) CHECK(r == v);
        CHECK((r == 0.0 || r == pool_max));
      }
  CHECK_THROWS_AS(maxpool2(random_tensor(rng, 1, 5, 4), pooled, idx),
                  std::invalid_argument);
}

TEST_CASE("maxpool tie breaks to the first cell in row-major order") {
  Tensor in(1, 2, 2);
  in.v = {0.5, 0.5, 0.5, 0.5};
  Tensor pooled;
  std::vector<std::int32_t> idx;
  maxpool2(in, pooled, idx);
  CHECK(idx[0] == 0);
}

TEST_CASE("zero-initialized model scores one half everywhere") {
  SegNetModel m = SegNetModel::make(16, {2, 3}, 1, 1.0);
  std::fill(m.params.w.begin(), m.params.w.end(), 0.0);
  Rng rng(25);
  Tensor patch = random_tensor(rng, 1, 16, 16, 0.0, 1.0);
  SegNetTrace trace;
  const double score = segnet_forward(m, patch, trace);
  CHECK(score == 0.5);
  for (const double p : trace.prob.v) CHECK(p == 0.5);
}

TEST_CASE("score is exactly the spatial mean of the probability map") {
  Rng rng(26);
  SegNetModel m = SegNetModel::make(16, {2, 3}, 7, 1.0);
  for (int rep = 0; rep < 5; ++rep) {
    Tensor patch = random_tensor(rng, 1, 16, 16, 0.0, 1.0);
    SegNetTrace trace;
    const double score = segnet_forward(m, patch, trace);
    double mean = 0.0;
    for (const double p : trace.prob.v) mean += p;
    mean /= static_cast<double>(trace.prob.size());
    CHECK(std::fabs(score - mean) < 1e-12);
    CHECK(trace.prob.h == 16);
    CHECK(trace.prob.w == 16);
  }
  CHECK_THROWS_AS(
      [&] {
        SegNetTrace t2;
        segnet_forward(m, Tensor(1, 8, 8), t2);
      }(),
      std::invalid_argument);
}

TEST_CASE("cascade rule") {
  const GeoGrid g(1.0, 10.0, 30.0, 2, 2);
  Raster<double> score(g, 0.0, kDefaultNoData), frac(g, 0.0, kDefaultNoData);
  score.values = {0.2, 0.9, 0.5, 0.7};
  frac.values = {0.8, 0.37, 0.5, 0.0};
  const Raster<double> out = cascade(score, frac, 0.5);
  CHECK(out.values[0] == 0.0);   // suppressed
  CHECK(out.values[1] == 0.37);  // passed through
  CHECK(out.values[2] == 0.5);   // exactly tau passes
  CHECK(out.values[3] == 0.0);

  SUBCASE("tau 0 is the identity on footprints") {
    const Raster<double> id = cascade(score, frac, 0.0);
    CHECK(id.values == frac.values);
  }
  SUBCASE("output never exceeds the footprint") {
    Rng rng(27);
    Raster<double> s2(g, 0.0, kDefaultNoData), f2(g, 0.0, kDefaultNoData);
    for (int rep = 0; rep < 50; ++rep) {
      for (auto& v : s2.values) v = rng.uniform();
      for (auto& v : f2.values) v = rng.uniform();
      const double tau = rng.uniform();
      const Raster<double> c2 = cascade(s2, f2, tau);
      for (std::size_t i = 0; i < c2.values.size(); ++i) {
        CHECK(c2.values[i] <= f2.values[i]);
        CHECK(c2.values[i] == (s2.values[i] >= tau ? f2.values[i] : 0.0));
      }
    }
  }
  SUBCASE("grid mismatch and bad tau") {
    Raster<double> other(GeoGrid(1.0, 10.0, 30.0, 2, 3), 0.0, kDefaultNoData);
    CHECK_THROWS_AS(cascade(score, other, 0.5), ValidationError);
    CHECK_THROWS_AS(cascade(score, frac, 1.5), std::invalid_argument);
  }
}
