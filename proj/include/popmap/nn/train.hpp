#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "popmap/nn/feedback.hpp"
#include "popmap/nn/segnet.hpp"

namespace popmap::nn {

struct TrainSample {
  Tensor x;
  int label = 0;  // 0 = no building, 1 = building
};

struct TrainConfig {
  double lr = 0.1;
  int epochs = 30;
  int batch = 8;
  std::uint64_t seed = 1;
  double init_scale = 1.0;
};

struct TrainResult {
  std::vector<double> loss_trace;  // mean loss per epoch
  std::vector<std::string> warnings;
  bool aborted = false;
  std::string abort_reason;
};

double bce_loss(double score, int label);

// Minibatch SGD on the binary cross-entropy of the scalar score.
// Deterministic given cfg.seed; single-threaded by contract. Throws
// std::invalid_argument on an empty corpus; records a warning when only
// one class is present; aborts with a diagnostic on non-finite loss.
TrainResult train(SegNetModel& m, const std::vector<TrainSample>& corpus,
                  const TrainConfig& cfg);
TrainResult train(FeedbackModel& m, const std::vector<TrainSample>& corpus,
                  const TrainConfig& cfg);

// Central finite differences over every parameter against the analytic
// gradient of the score loss; returns the maximum guarded relative error
// |a - n| / max(1, |a| + |n|). corrupt_index >= 0 perturbs that analytic
// component first (mutation testing of the checker itself).
double grad_check(SegNetModel& m, const Tensor& patch, int label, double eps,
                  long corrupt_index = -1);
double grad_check(FeedbackModel& m, const Tensor& image, int label, double eps,
                  long corrupt_index = -1);

}  // namespace popmap::nn
