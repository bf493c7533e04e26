#pragma once

#include <cstdint>
#include <vector>

#include "popmap/nn/layers.hpp"

namespace popmap::nn {

// Encoder-decoder patch classifier: [conv3x3 + ReLU + maxpool2] blocks,
// mirrored [unpool2 + conv3x3 + ReLU] blocks reusing the recorded pool
// indices, then a 1x1 conv head with per-pixel sigmoid. The scalar score
// is the spatial mean of the probability map.
struct SegNetModel {
  int input_px = 64;
  std::vector<int> channels;  // encoder block output channels
  ParamStore params;
  std::vector<Conv3x3> enc;
  std::vector<Conv3x3> dec;
  Conv1x1 head;

  static SegNetModel make(int input_px, std::vector<int> channels,
                          std::uint64_t seed, double init_scale);
};

struct SegNetTrace {
  std::vector<Tensor> enc_in;   // input of each encoder conv
  std::vector<Tensor> enc_z;    // conv output (pre-ReLU)
  std::vector<Tensor> enc_a;    // ReLU output (pre-pool)
  std::vector<std::vector<std::int32_t>> pool_idx;
  std::vector<Tensor> dec_in;   // unpooled input of each decoder conv
  std::vector<Tensor> dec_z;
  std::vector<Tensor> dec_a;
  Tensor logits;  // 1 x px x px
  Tensor prob;    // sigmoid(logits)
  double score = 0.0;
};

// Returns the score; trace holds everything backward needs plus the
// probability map. Throws std::invalid_argument on shape mismatch.
double segnet_forward(const SegNetModel& m, const Tensor& patch, SegNetTrace& trace);

// Accumulates parameter gradients for dL/dscore = dscore.
void segnet_backward(SegNetModel& m, const SegNetTrace& trace, double dscore);

}  // namespace popmap::nn
