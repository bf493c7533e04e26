#include "popmap/nn/segnet.hpp"

#include <stdexcept>

#include "popmap/kernels.hpp"

namespace popmap::nn {

SegNetModel SegNetModel::make(int input_px, std::vector<int> channels,
                              std::uint64_t seed, double init_scale) {
  if (channels.empty())
    throw std::invalid_argument("SegNetModel: need at least one encoder block");
  int span = 1;
  for (std::size_t i = 0; i < channels.size(); ++i) {
    if (channels[i] <= 0) throw std::invalid_argument("SegNetModel: bad channel count");
    span *= 2;
  }
  if (input_px % span != 0 || input_px / span < 1)
    throw std::invalid_argument("SegNetModel: input_px not divisible by pool stack");

  SegNetModel m;
  m.input_px = input_px;
  m.channels = channels;
  Rng rng(seed);
  int cin = 1;
  for (int c : channels) {
    m.enc.push_back(Conv3x3::make(m.params, cin, c, rng, init_scale));
    cin = c;
  }
  // Mirrored decoder: channels shrink back toward the first block's width.
  for (std::size_t i = channels.size(); i-- > 0;) {
    const int dec_out = i == 0 ? channels[0] : channels[i - 1];
    m.dec.push_back(Conv3x3::make(m.params, channels[i], dec_out, rng, init_scale));
  }
  m.head = Conv1x1::make(m.params, channels[0], 1, rng, init_scale);
  return m;
}

double segnet_forward(const SegNetModel& m, const Tensor& patch, SegNetTrace& trace) {
  if (patch.ch != 1 || patch.h != m.input_px || patch.w != m.input_px)
    throw std::invalid_argument("segnet_forward: patch shape mismatch");

  const std::size_t nblocks = m.enc.size();
  trace.enc_in.resize(nblocks);
  trace.enc_z.resize(nblocks);
  trace.enc_a.resize(nblocks);
  trace.pool_idx.resize(nblocks);
  trace.dec_in.resize(nblocks);
  trace.dec_z.resize(nblocks);
  trace.dec_a.resize(nblocks);

  Tensor cur = patch;
  for (std::size_t i = 0; i < nblocks; ++i) {
    trace.enc_in[i] = cur;
    m.enc[i].forward(m.params, trace.enc_in[i], trace.enc_z[i]);
    relu(trace.enc_z[i], trace.enc_a[i]);
    maxpool2(trace.enc_a[i], cur, trace.pool_idx[i]);
  }
  for (std::size_t i = 0; i < nblocks; ++i) {
    const std::size_t pi = nblocks - 1 - i;  // unpool in reverse pool order
    unpool2(cur, trace.pool_idx[pi], trace.dec_in[i]);
    m.dec[i].forward(m.params, trace.dec_in[i], trace.dec_z[i]);
    relu(trace.dec_z[i], trace.dec_a[i]);
    cur = trace.dec_a[i];
  }
  m.head.forward(m.params, cur, trace.logits);
  trace.prob = Tensor(1, trace.logits.h, trace.logits.w);
  for (std::size_t i = 0; i < trace.logits.size(); ++i)
    trace.prob.v[i] = sigmoid(trace.logits.v[i]);
  trace.score =
      kern::sum(trace.prob.v.data(), trace.prob.size()) /
      static_cast<double>(trace.prob.size());
  return trace.score;
}

void segnet_backward(SegNetModel& m, const SegNetTrace& trace, double dscore) {
  const std::size_t nblocks = m.enc.size();
  const double inv_n = 1.0 / static_cast<double>(trace.prob.size());

  Tensor dlogits(1, trace.logits.h, trace.logits.w);
  for (std::size_t i = 0; i < dlogits.size(); ++i) {
    const double p = trace.prob.v[i];
    dlogits.v[i] = dscore * inv_n * p * (1.0 - p);
  }

  Tensor dcur;
  m.head.backward(m.params, trace.dec_a[nblocks - 1], dlogits, &dcur);
  for (std::size_t i = nblocks; i-- > 0;) {
    Tensor dz;
    relu_backward(trace.dec_z[i], dcur, dz);
    Tensor dunpooled;
    m.dec[i].backward(m.params, trace.dec_in[i], dz, &dunpooled);
    unpool2_backward(dunpooled, trace.pool_idx[nblocks - 1 - i], dcur);
  }
  for (std::size_t i = nblocks; i-- > 0;) {
    Tensor da;
    maxpool2_backward(dcur, trace.pool_idx[i], da);
    Tensor dz;
    relu_backward(trace.enc_z[i], da, dz);
    const bool need_din = i > 0;
    Tensor din;
    m.enc[i].backward(m.params, trace.enc_in[i], dz, need_din ? &din : nullptr);
    if (need_din) dcur = std::move(din);
  }
}

}  // namespace popmap::nn
