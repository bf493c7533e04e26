#include "popmap/nn/feedback.hpp"

#include <cmath>
#include <stdexcept>

#include "popmap/kernels.hpp"

namespace popmap::nn {

FeedbackModel FeedbackModel::make(int input_px, std::vector<int> channels,
                                  std::uint64_t seed, double init_scale) {
  if (channels.empty())
    throw std::invalid_argument("FeedbackModel: need at least one block");
  int span = 1;
  for (int c : channels) {
    if (c <= 0) throw std::invalid_argument("FeedbackModel: bad channel count");
    span *= 2;
  }
  if (input_px % span != 0 || input_px / span < 1)
    throw std::invalid_argument("FeedbackModel: input_px not divisible by pool stack");

  FeedbackModel m;
  m.input_px = input_px;
  m.channels = channels;
  Rng rng(seed);
  int cin = 1;
  for (int c : channels) {
    m.convs.push_back(Conv3x3::make(m.params, cin, c, rng, init_scale));
    cin = c;
  }
  m.head_w_off = m.params.alloc(static_cast<std::size_t>(channels.back()));
  m.head_b_off = m.params.alloc(1);
  const double bound = init_scale / std::sqrt(static_cast<double>(channels.back()));
  for (int c = 0; c < channels.back(); ++c)
    m.params.w[m.head_w_off + c] = rng.uniform(-bound, bound);
  return m;
}

double feedback_forward(const FeedbackModel& m, const Tensor& image,
                        const GateStack* gates, FeedbackTrace& trace) {
  if (image.ch != 1 || image.h != m.input_px || image.w != m.input_px)
    throw std::invalid_argument("feedback_forward: image shape mismatch");
  if (gates != nullptr && gates->size() != m.convs.size())
    throw std::invalid_argument("feedback_forward: gate stack depth mismatch");

  const std::size_t nblocks = m.convs.size();
  trace.in.resize(nblocks);
  trace.z.resize(nblocks);
  trace.a.resize(nblocks);
  trace.pool_idx.resize(nblocks);

  Tensor cur = image;
  for (std::size_t i = 0; i < nblocks; ++i) {
    trace.in[i] = cur;
    m.convs[i].forward(m.params, trace.in[i], trace.z[i]);
    relu(trace.z[i], trace.a[i]);
    if (gates != nullptr && !(*gates)[i].empty()) {
      if ((*gates)[i].size() != trace.a[i].size())
        throw std::invalid_argument("feedback_forward: gate plane size mismatch");
      kern::mul(trace.a[i].v.data(), trace.a[i].v.data(), (*gates)[i].data(),
                trace.a[i].size());
    }
    maxpool2(trace.a[i], cur, trace.pool_idx[i]);
  }
  trace.last_pooled = cur;

  const int cback = m.channels.back();
  trace.gap.assign(static_cast<std::size_t>(cback), 0.0);
  const double inv_n = 1.0 / static_cast<double>(cur.plane_size());
  double logit = m.params.w[m.head_b_off];
  for (int c = 0; c < cback; ++c) {
    trace.gap[c] = kern::sum(cur.plane(c), cur.plane_size()) * inv_n;
    logit += m.params.w[m.head_w_off + c] * trace.gap[c];
  }
  trace.logit = logit;
  trace.score = sigmoid(logit);
  return trace.score;
}

void feedback_backward(const FeedbackModel& m, const FeedbackTrace& trace,
                       const GateStack* gates, double dscore, ParamStore* grads,
                       Tensor* dinput, std::vector<Tensor>* dact) {
  const std::size_t nblocks = m.convs.size();
  const double s = trace.score;
  const double dlogit = dscore * s * (1.0 - s);

  if (dact != nullptr) dact->assign(nblocks, Tensor());

  // Head: logit = b + sum_c w_c * mean(pooled_c)
  const Tensor& pooled = trace.last_pooled;
  const double inv_n = 1.0 / static_cast<double>(pooled.plane_size());
  Tensor dpooled(pooled.ch, pooled.h, pooled.w);
  for (int c = 0; c < pooled.ch; ++c) {
    const double dg = dlogit * m.params.w[m.head_w_off + c];
    double* dp = dpooled.plane(c);
    std::fill(dp, dp + pooled.plane_size(), dg * inv_n);
    if (grads != nullptr) grads->g[m.head_w_off + c] += dlogit * trace.gap[c];
  }
  if (grads != nullptr) grads->g[m.head_b_off] += dlogit;

  Tensor dcur = std::move(dpooled);
  for (std::size_t i = nblocks; i-- > 0;) {
    Tensor da;
    maxpool2_backward(dcur, trace.pool_idx[i], da);
    // Gate is a constant multiplier during backward.
    if (gates != nullptr && !(*gates)[i].empty())
      kern::mul(da.v.data(), da.v.data(), (*gates)[i].data(), da.size());
    if (dact != nullptr) (*dact)[i] = da;
    Tensor dz;
    relu_backward(trace.z[i], da, dz);
    const bool need_din = i > 0 || dinput != nullptr;
    Tensor din;
    if (grads != nullptr) {
      m.convs[i].backward(*grads, trace.in[i], dz, need_din ? &din : nullptr);
    } else if (need_din) {
      m.convs[i].backward_data(m.params, dz, din);
    }
    if (i > 0)
      dcur = std::move(din);
    else if (dinput != nullptr)
      *dinput = std::move(din);
  }
}

FeedbackSegmentResult feedback_segment(const FeedbackModel& m, const Tensor& image,
                                       int passes) {
  if (passes < 0) throw std::invalid_argument("feedback_segment: passes must be >= 0");

  FeedbackSegmentResult res;
  res.gates.assign(m.convs.size(), {});

  FeedbackTrace trace;
  for (int pass = 0; pass < passes; ++pass) {
    feedback_forward(m, image, &res.gates, trace);
    std::vector<Tensor> dact;
    feedback_backward(m, trace, &res.gates, 1.0, nullptr, nullptr, &dact);
    for (std::size_t i = 0; i < m.convs.size(); ++i) {
      std::vector<double>& g = res.gates[i];
      g.assign(trace.a[i].size(), 0.0);
      for (std::size_t j = 0; j < g.size(); ++j)
        g[j] = trace.a[i].v[j] * dact[i].v[j] > 0.0 ? 1.0 : 0.0;
    }
  }

  res.score = feedback_forward(m, image, &res.gates, trace);
  res.low_confidence = std::fabs(res.score - 0.5) < 0.05;
  Tensor dinput;
  feedback_backward(m, trace, &res.gates, 1.0, nullptr, &dinput, nullptr);

  res.relevance = Tensor(1, image.h, image.w);
  double maxv = 0.0;
  for (std::size_t i = 0; i < dinput.size(); ++i) {
    const double r = dinput.v[i] * image.v[i];
    const double clamped = r > 0.0 ? r : 0.0;
    res.relevance.v[i] = clamped;
    maxv = std::max(maxv, clamped);
  }
  if (maxv > 0.0) {
    const double inv = 1.0 / maxv;
    for (double& r : res.relevance.v) r *= inv;
  }
  return res;
}

}  // namespace popmap::nn
