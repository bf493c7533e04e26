#include "popmap/nn/train.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>

#include "popmap/rng.hpp"

namespace popmap::nn {

namespace {

constexpr double kScoreClamp = 1e-12;

double clamp_score(double s) {
  return std::min(1.0 - kScoreClamp, std::max(kScoreClamp, s));
}

double bce_dscore(double score, int label) {
  const double s = clamp_score(score);
  return label == 1 ? -1.0 / s : 1.0 / (1.0 - s);
}

// Fwd: double(const Tensor&); Bwd: void(double dscore) for the sample the
// last Fwd saw.
template <typename Fwd, typename Bwd>
TrainResult train_loop(ParamStore& params, const std::vector<TrainSample>& corpus,
                       const TrainConfig& cfg, Fwd&& fwd, Bwd&& bwd) {
  if (corpus.empty()) throw std::invalid_argument("train: corpus is empty");
  if (cfg.lr < 0.0) throw std::invalid_argument("train: negative learning rate");
  if (cfg.epochs < 1 || cfg.batch < 1)
    throw std::invalid_argument("train: epochs and batch must be >= 1");

  TrainResult res;
  bool has_pos = false, has_neg = false;
  for (const TrainSample& s : corpus) (s.label == 1 ? has_pos : has_neg) = true;
  if (!has_pos || !has_neg)
    res.warnings.push_back("corpus contains a single class; scores will saturate");

  Rng rng(cfg.seed);
  std::vector<std::size_t> order(corpus.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;

  for (int epoch = 0; epoch < cfg.epochs; ++epoch) {
    rng.shuffle(order);
    double epoch_loss = 0.0;
    for (std::size_t start = 0; start < order.size();
         start += static_cast<std::size_t>(cfg.batch)) {
      const std::size_t end =
          std::min(order.size(), start + static_cast<std::size_t>(cfg.batch));
      params.zero_grad();
      for (std::size_t k = start; k < end; ++k) {
        const TrainSample& s = corpus[order[k]];
        const double score = fwd(s.x);
        // Check the raw score: clamping would hide a NaN as a finite loss.
        if (!std::isfinite(score)) {
          res.aborted = true;
          res.abort_reason = "non-finite score at epoch " +
                             std::to_string(epoch + 1) + ", sample " +
                             std::to_string(order[k]);
          res.loss_trace.push_back(std::numeric_limits<double>::quiet_NaN());
          return res;
        }
        epoch_loss += bce_loss(score, s.label);
        bwd(bce_dscore(score, s.label));
      }
      const double step = cfg.lr / static_cast<double>(end - start);
      for (std::size_t i = 0; i < params.size(); ++i)
        params.w[i] -= step * params.g[i];
    }
    epoch_loss /= static_cast<double>(corpus.size());
    res.loss_trace.push_back(epoch_loss);
  }
  return res;
}

template <typename Fwd, typename BwdAnalytic>
double grad_check_impl(ParamStore& params, Fwd&& loss_of_params,
                       BwdAnalytic&& analytic, double eps, long corrupt_index) {
  if (!(eps > 0.0)) throw std::invalid_argument("grad_check: eps must be positive");
  std::vector<double> g = analytic();
  if (corrupt_index >= 0 && corrupt_index < static_cast<long>(g.size()))
    g[corrupt_index] = g[corrupt_index] * 1.5 + 0.1;

  double max_err = 0.0;
  for (std::size_t i = 0; i < params.size(); ++i) {
    const double saved = params.w[i];
    params.w[i] = saved + eps;
    const double lp = loss_of_params();
    params.w[i] = saved - eps;
    const double lm = loss_of_params();
    params.w[i] = saved;
    const double numeric = (lp - lm) / (2.0 * eps);
    const double err = std::fabs(g[i] - numeric) /
                       std::max(1.0, std::fabs(g[i]) + std::fabs(numeric));
    max_err = std::max(max_err, err);
  }
  return max_err;
}

}  // namespace

double bce_loss(double score, int label) {
  const double s = clamp_score(score);
  return label == 1 ? -std::log(s) : -std::log(1.0 - s);
}

TrainResult train(SegNetModel& m, const std::vector<TrainSample>& corpus,
                  const TrainConfig& cfg) {
  SegNetTrace trace;
  return train_loop(
      m.params, corpus, cfg,
      [&](const Tensor& x) { return segnet_forward(m, x, trace); },
      [&](double d) { segnet_backward(m, trace, d); });
}

TrainResult train(FeedbackModel& m, const std::vector<TrainSample>& corpus,
                  const TrainConfig& cfg) {
  FeedbackTrace trace;
  return train_loop(
      m.params, corpus, cfg,
      [&](const Tensor& x) { return feedback_forward(m, x, nullptr, trace); },
      [&](double d) {
        feedback_backward(m, trace, nullptr, d, &m.params, nullptr, nullptr);
      });
}

double grad_check(SegNetModel& m, const Tensor& patch, int label, double eps,
                  long corrupt_index) {
  SegNetTrace trace;
  auto loss = [&] { return bce_loss(segnet_forward(m, patch, trace), label); };
  auto analytic = [&] {
    m.params.zero_grad();
    const double s = segnet_forward(m, patch, trace);
    segnet_backward(m, trace, bce_dscore(s, label));
    return m.params.g;
  };
  return grad_check_impl(m.params, loss, analytic, eps, corrupt_index);
}

double grad_check(FeedbackModel& m, const Tensor& image, int label, double eps,
                  long corrupt_index) {
  FeedbackTrace trace;
  auto loss = [&] {
    return bce_loss(feedback_forward(m, image, nullptr, trace), label);
  };
  auto analytic = [&] {
    m.params.zero_grad();
    const double s = feedback_forward(m, image, nullptr, trace);
    feedback_backward(m, trace, nullptr, bce_dscore(s, label), &m.params, nullptr,
                      nullptr);
    return m.params.g;
  };
  return grad_check_impl(m.params, loss, analytic, eps, corrupt_index);
}

}  // namespace popmap::nn
