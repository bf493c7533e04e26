#include "popmap/nn/layers.hpp"

#include <cmath>
#include <stdexcept>

#include "popmap/kernels.hpp"

namespace popmap::nn {

namespace {

void init_uniform(ParamStore& ps, std::size_t off, std::size_t n, Rng& rng,
                  double bound) {
  for (std::size_t i = 0; i < n; ++i) ps.w[off + i] = rng.uniform(-bound, bound);
}

}  // namespace

Conv3x3 Conv3x3::make(ParamStore& ps, int cin, int cout, Rng& rng, double scale) {
  Conv3x3 c;
  c.cin = cin;
  c.cout = cout;
  c.w_off = ps.alloc(c.weight_count());
  c.b_off = ps.alloc(static_cast<std::size_t>(cout));
  const double bound = scale / std::sqrt(static_cast<double>(cin) * 9.0);
  init_uniform(ps, c.w_off, c.weight_count(), rng, bound);
  return c;  // biases start at zero
}

void Conv3x3::forward(const ParamStore& ps, const Tensor& in, Tensor& out) const {
  if (in.ch != cin) throw std::invalid_argument("Conv3x3: channel mismatch");
  out = Tensor(cout, in.h, in.w);
  const int h = in.h, w = in.w;
  for (int oc = 0; oc < cout; ++oc) {
    double* op = out.plane(oc);
    const double b = ps.w[b_off + oc];
    std::fill(op, op + out.plane_size(), b);
    for (int ic = 0; ic < cin; ++ic) {
      const double* ip = in.plane(ic);
      for (int ky = 0; ky < 3; ++ky) {
        for (int kx = 0; kx < 3; ++kx) {
          const double a =
              ps.w[w_off + ((static_cast<std::size_t>(oc) * cin + ic) * 3 + ky) * 3 + kx];
          if (a == 0.0) continue;
          const int x0 = kx == 0 ? 1 : 0;
          const int x1 = kx == 2 ? w - 1 : w;
          if (x1 <= x0) continue;
          for (int y = 0; y < h; ++y) {
            const int iy = y + ky - 1;
            if (iy < 0 || iy >= h) continue;
            kern::axpy(op + static_cast<std::size_t>(y) * w + x0,
                       ip + static_cast<std::size_t>(iy) * w + x0 + (kx - 1), a,
                       static_cast<std::size_t>(x1 - x0));
          }
        }
      }
    }
  }
}

void Conv3x3::backward(ParamStore& ps, const Tensor& in, const Tensor& dout,
                       Tensor* din) const {
  const int h = in.h, w = in.w;
  if (din != nullptr) {
    *din = Tensor(cin, h, w);
  }
  for (int oc = 0; oc < cout; ++oc) {
    const double* dop = dout.plane(oc);
    ps.g[b_off + oc] += kern::sum(dop, dout.plane_size());
    for (int ic = 0; ic < cin; ++ic) {
      const double* ip = in.plane(ic);
      double* dip = din != nullptr ? din->plane(ic) : nullptr;
      for (int ky = 0; ky < 3; ++ky) {
        for (int kx = 0; kx < 3; ++kx) {
          const std::size_t wi =
              w_off + ((static_cast<std::size_t>(oc) * cin + ic) * 3 + ky) * 3 + kx;
          const double a = ps.w[wi];
          const int x0 = kx == 0 ? 1 : 0;
          const int x1 = kx == 2 ? w - 1 : w;
          if (x1 <= x0) continue;
          double gw = 0.0;
          for (int y = 0; y < h; ++y) {
            const int iy = y + ky - 1;
            if (iy < 0 || iy >= h) continue;
            const double* drow = dop + static_cast<std::size_t>(y) * w + x0;
            const double* irow =
                ip + static_cast<std::size_t>(iy) * w + x0 + (kx - 1);
            gw += kern::dot(drow, irow, static_cast<std::size_t>(x1 - x0));
            if (dip != nullptr)
              kern::axpy(dip + static_cast<std::size_t>(iy) * w + x0 + (kx - 1),
                         drow, a, static_cast<std::size_t>(x1 - x0));
          }
          ps.g[wi] += gw;
        }
      }
    }
  }
}

void Conv3x3::backward_data(const ParamStore& ps, const Tensor& dout,
                            Tensor& din) const {
  const int h = dout.h, w = dout.w;
  din = Tensor(cin, h, w);
  for (int oc = 0; oc < cout; ++oc) {
    const double* dop = dout.plane(oc);
    for (int ic = 0; ic < cin; ++ic) {
      double* dip = din.plane(ic);
      for (int ky = 0; ky < 3; ++ky) {
        for (int kx = 0; kx < 3; ++kx) {
          const double a =
              ps.w[w_off + ((static_cast<std::size_t>(oc) * cin + ic) * 3 + ky) * 3 + kx];
          if (a == 0.0) continue;
          const int x0 = kx == 0 ? 1 : 0;
          const int x1 = kx == 2 ? w - 1 : w;
          if (x1 <= x0) continue;
          for (int y = 0; y < h; ++y) {
            const int iy = y + ky - 1;
            if (iy < 0 || iy >= h) continue;
            kern::axpy(dip + static_cast<std::size_t>(iy) * w + x0 + (kx - 1),
                       dop + static_cast<std::size_t>(y) * w + x0, a,
                       static_cast<std::size_t>(x1 - x0));
          }
        }
      }
    }
  }
}

Conv1x1 Conv1x1::make(ParamStore& ps, int cin, int cout, Rng& rng, double scale) {
  Conv1x1 c;
  c.cin = cin;
  c.cout = cout;
  c.w_off = ps.alloc(static_cast<std::size_t>(cout) * cin);
  c.b_off = ps.alloc(static_cast<std::size_t>(cout));
  const double bound = scale / std::sqrt(static_cast<double>(cin));
  init_uniform(ps, c.w_off, static_cast<std::size_t>(cout) * cin, rng, bound);
  return c;
}

void Conv1x1::forward(const ParamStore& ps, const Tensor& in, Tensor& out) const {
  if (in.ch != cin) throw std::invalid_argument("Conv1x1: channel mismatch");
  out = Tensor(cout, in.h, in.w);
  const std::size_t n = in.plane_size();
  for (int oc = 0; oc < cout; ++oc) {
    double* op = out.plane(oc);
    std::fill(op, op + n, ps.w[b_off + oc]);
    for (int ic = 0; ic < cin; ++ic)
      kern::axpy(op, in.plane(ic), ps.w[w_off + static_cast<std::size_t>(oc) * cin + ic],
                 n);
  }
}

void Conv1x1::backward(ParamStore& ps, const Tensor& in, const Tensor& dout,
                       Tensor* din) const {
  const std::size_t n = in.plane_size();
  if (din != nullptr) *din = Tensor(cin, in.h, in.w);
  for (int oc = 0; oc < cout; ++oc) {
    const double* dop = dout.plane(oc);
    ps.g[b_off + oc] += kern::sum(dop, n);
    for (int ic = 0; ic < cin; ++ic) {
      const std::size_t wi = w_off + static_cast<std::size_t>(oc) * cin + ic;
      ps.g[wi] += kern::dot(dop, in.plane(ic), n);
      if (din != nullptr) kern::axpy(din->plane(ic), dop, ps.w[wi], n);
    }
  }
}

void maxpool2(const Tensor& in, Tensor& out, std::vector<std::int32_t>& idx) {
  if (in.h % 2 != 0 || in.w % 2 != 0)
    throw std::invalid_argument("maxpool2: spatial dims must be even");
  out = Tensor(in.ch, in.h / 2, in.w / 2);
  idx.assign(out.size(), 0);
  for (int c = 0; c < in.ch; ++c) {
    const double* ip = in.plane(c);
    double* op = out.plane(c);
    const std::size_t base = static_cast<std::size_t>(c) * in.plane_size();
    for (int y = 0; y < out.h; ++y) {
      for (int x = 0; x < out.w; ++x) {
        const std::size_t i00 = static_cast<std::size_t>(2 * y) * in.w + 2 * x;
        const std::size_t cand[4] = {i00, i00 + 1, i00 + in.w, i00 + in.w + 1};
        std::size_t best = cand[0];
        for (int k = 1; k < 4; ++k)
          if (ip[cand[k]] > ip[best]) best = cand[k];
        const std::size_t oi = static_cast<std::size_t>(y) * out.w + x;
        op[oi] = ip[best];
        idx[static_cast<std::size_t>(c) * out.plane_size() + oi] =
            static_cast<std::int32_t>(base + best);
      }
    }
  }
}

void maxpool2_backward(const Tensor& dout, const std::vector<std::int32_t>& idx,
                       Tensor& din) {
  din = Tensor(dout.ch, dout.h * 2, dout.w * 2);
  for (std::size_t i = 0; i < dout.size(); ++i)
    din.v[static_cast<std::size_t>(idx[i])] += dout.v[i];
}

void unpool2(const Tensor& in, const std::vector<std::int32_t>& idx, Tensor& out) {
  if (idx.size() != in.size())
    throw std::invalid_argument("unpool2: index size mismatch");
  out = Tensor(in.ch, in.h * 2, in.w * 2);
  for (std::size_t i = 0; i < in.size(); ++i)
    out.v[static_cast<std::size_t>(idx[i])] = in.v[i];
}

void unpool2_backward(const Tensor& dout, const std::vector<std::int32_t>& idx,
                      Tensor& din) {
  din = Tensor(dout.ch, dout.h / 2, dout.w / 2);
  for (std::size_t i = 0; i < din.size(); ++i)
    din.v[i] = dout.v[static_cast<std::size_t>(idx[i])];
}

void relu(const Tensor& in, Tensor& out) {
  out = Tensor(in.ch, in.h, in.w);
  kern::relu(out.v.data(), in.v.data(), in.size());
}

void relu_backward(const Tensor& pre, const Tensor& dout, Tensor& din) {
  din = Tensor(pre.ch, pre.h, pre.w);
  kern::relu_bwd(din.v.data(), pre.v.data(), dout.v.data(), pre.size());
}

}  // namespace popmap::nn
