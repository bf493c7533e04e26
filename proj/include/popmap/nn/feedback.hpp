#pragma once

#include <cstdint>
#include <vector>

#include "popmap/nn/layers.hpp"

namespace popmap::nn {

// Image-level classifier backbone: [conv3x3 + gated ReLU + maxpool2]
// blocks, global average pooling, dense sigmoid head. The gates are binary
// multipliers on the post-ReLU activations; feedback passes close the
// gates of units whose contribution (activation x dscore/dactivation) is
// not positive, which focuses the saliency readout on supporting evidence.
struct FeedbackModel {
  int input_px = 256;
  std::vector<int> channels;
  ParamStore params;
  std::vector<Conv3x3> convs;
  std::size_t head_w_off = 0, head_b_off = 0;  // dense channels.back() -> 1

  static FeedbackModel make(int input_px, std::vector<int> channels,
                            std::uint64_t seed, double init_scale);
};

// One gate plane per block, sized like the pre-pool activation tensor;
// empty vector means all-open gates.
using GateStack = std::vector<std::vector<double>>;

struct FeedbackTrace {
  std::vector<Tensor> in;      // conv inputs
  std::vector<Tensor> z;       // conv outputs (pre-ReLU)
  std::vector<Tensor> a;       // post-ReLU, post-gate activations
  std::vector<std::vector<std::int32_t>> pool_idx;
  std::vector<double> gap;     // channel means of the last pooled tensor
  Tensor last_pooled;
  double logit = 0.0;
  double score = 0.0;
};

double feedback_forward(const FeedbackModel& m, const Tensor& image,
                        const GateStack* gates, FeedbackTrace& trace);

// Backward for dL/dscore = dscore. Optionally produces the gradient with
// respect to the input image and/or the post-gate activations of every
// block. Parameter gradients accumulate into *grads when given (pass
// &m.params to train); with nullptr only data gradients are computed.
void feedback_backward(const FeedbackModel& m, const FeedbackTrace& trace,
                       const GateStack* gates, double dscore, ParamStore* grads,
                       Tensor* dinput, std::vector<Tensor>* dact);

struct FeedbackSegmentResult {
  Tensor relevance;   // 1 x px x px, max-normalized, in [0,1]
  double score = 0.0; // classifier score of the final pass
  GateStack gates;    // gate state after the last pass
  // Score in the dead zone around 0.5; typical of an untrained model.
  bool low_confidence = false;
};

// Iterative feedback segmentation: `passes` gate-update rounds, then a
// gradient x input readout (clamped at zero, max-normalized; an all-zero
// map stays zero). passes = 0 is the plain saliency map.
FeedbackSegmentResult feedback_segment(const FeedbackModel& m, const Tensor& image,
                                       int passes);

}  // namespace popmap::nn
