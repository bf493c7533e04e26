#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <limits>

#include "popmap/nn/model_io.hpp"
#include "popmap/nn/train.hpp"
#include "popmap/rng.hpp"

using namespace popmap;
using namespace popmap::nn;

namespace {

Tensor random_patch(Rng& rng, int side) {
  Tensor t(1, side, side);
  for (auto& v : t.v) v = rng.uniform(0.0, 1.0);
  return t;
}

// Bright block on dark noise vs plain noise; trivially separable.
std::vector<TrainSample> toy_corpus(Rng& rng, int side, int n_each) {
  std::vector<TrainSample> corpus;
  for (int i = 0; i < n_each; ++i) {
    Tensor pos(1, side, side);
    for (auto& v : pos.v) v = rng.uniform(0.05, 0.25);
    const int half = side / 2;
    for (int y = half / 2; y < half / 2 + half; ++y)
      for (int x = half / 2; x < half / 2 + half; ++x)
        pos.v[static_cast<std::size_t>(y) * side + x] = rng.uniform(0.75, 0.95);
    corpus.push_back({std::move(pos), 1});

    Tensor neg(1, side, side);
    for (auto& v : neg.v) v = rng.uniform(0.05, 0.25);
    corpus.push_back({std::move(neg), 0});
  }
  return corpus;
}

template <typename Model>
double train_accuracy(const Model& m, const std::vector<TrainSample>& corpus) {
  std::size_t ok = 0;
  for (const TrainSample& s : corpus) {
    double score;
    if constexpr (std::is_same_v<Model, SegNetModel>) {
      SegNetTrace t;
      score = segnet_forward(m, s.x, t);
    } else {
      FeedbackTrace t;
      score = feedback_forward(m, s.x, nullptr, t);
    }
    ok += (score >= 0.5 ? 1 : 0) == s.label ? 1 : 0;
  }
  return static_cast<double>(ok) / static_cast<double>(corpus.size());
}

}  // namespace

TEST_CASE("gradient check passes for every layer type") {
  Rng rng(31);
  SUBCASE("encoder-decoder classifier (conv3x3, pool/unpool, 1x1 head)") {
    SegNetModel m = SegNetModel::make(16, {2, 3}, 5, 1.0);
    const Tensor patch = random_patch(rng, 16);
    CHECK(grad_check(m, patch, 1, 1e-4) < 1e-5);
    CHECK(grad_check(m, patch, 0, 1e-4) < 1e-5);
  }
  SUBCASE("feedback backbone (conv3x3, GAP, dense head)") {
    FeedbackModel m = FeedbackModel::make(16, {2, 3}, 6, 1.0);
    const Tensor img = random_patch(rng, 16);
    CHECK(grad_check(m, img, 1, 1e-4) < 1e-5);
  }
  SUBCASE("eps must be positive") {
    SegNetModel m = SegNetModel::make(16, {2}, 5, 1.0);
    CHECK_THROWS_AS(grad_check(m, random_patch(rng, 16), 1, 0.0),
                    std::invalid_argument);
  }
}

TEST_CASE("a corrupted gradient is flagged") {
  Rng rng(32);
  SegNetModel m = SegNetModel::make(16, {2, 3}, 5, 1.0);
  const Tensor patch = random_patch(rng, 16);
  CHECK(grad_check(m, patch, 1, 1e-4, 3) > 1e-2);
}

TEST_CASE("twenty-patch overfit and bit-exact retrace") {
  Rng rng(33);
  const std::vector<TrainSample> corpus = toy_corpus(rng, 32, 10);
  TrainConfig cfg;
  cfg.lr = 0.5;
  cfg.epochs = 30;
  cfg.batch = 4;
  cfg.seed = 404;

  SegNetModel m1 = SegNetModel::make(32, {4, 8}, cfg.seed, 1.0);
  const TrainResult r1 = train(m1, corpus, cfg);
  CHECK(!r1.aborted);
  CHECK(r1.loss_trace.size() == 30);
  CHECK(r1.loss_trace.back() < r1.loss_trace.front());
  CHECK(train_accuracy(m1, corpus) == 1.0);

  SegNetModel m2 = SegNetModel::make(32, {4, 8}, cfg.seed, 1.0);
  const TrainResult r2 = train(m2, corpus, cfg);
  CHECK(r1.loss_trace == r2.loss_trace);  // bitwise
  CHECK(m1.params.w == m2.params.w);
}

TEST_CASE("learning rate zero leaves weights unchanged") {
  Rng rng(34);
  const std::vector<TrainSample> corpus = toy_corpus(rng, 16, 3);
  SegNetModel m = SegNetModel::make(16, {2, 3}, 11, 1.0);
  const std::vector<double> before = m.params.w;
  TrainConfig cfg;
  cfg.lr = 0.0;
  cfg.epochs = 3;
  const TrainResult r = train(m, corpus, cfg);
  CHECK(!r.aborted);
  CHECK(m.params.w == before);
}

TEST_CASE("empty and single-class corpora") {
  SegNetModel m = SegNetModel::make(16, {2}, 1, 1.0);
  TrainConfig cfg;
  cfg.epochs = 1;
  CHECK_THROWS_AS(train(m, {}, cfg), std::invalid_argument);

  Rng rng(35);
  std::vector<TrainSample> one_class;
  one_class.push_back({random_patch(rng, 16), 1});
  one_class.push_back({random_patch(rng, 16), 1});
  const TrainResult r = train(m, one_class, cfg);
  REQUIRE(!r.warnings.empty());
  CHECK(r.warnings[0].find("single class") != std::string::npos);
}

TEST_CASE("non-finite forward aborts with a diagnostic") {
  Rng rng(36);
  std::vector<TrainSample> corpus;
  corpus.push_back({random_patch(rng, 16), 1});
  Tensor poisoned = random_patch(rng, 16);
  poisoned.v[7] = std::numeric_limits<double>::quiet_NaN();
  corpus.push_back({std::move(poisoned), 0});

  SegNetModel m = SegNetModel::make(16, {2}, 2, 1.0);
  TrainConfig cfg;
  cfg.epochs = 2;
  const TrainResult r = train(m, corpus, cfg);
  CHECK(r.aborted);
  CHECK(r.abort_reason.find("non-finite") != std::string::npos);
}

TEST_CASE("model files round trip bit-exactly") {
  const auto dir = std::filesystem::temp_directory_path() / "popmap_test_models";
  std::filesystem::create_directories(dir);

  SegNetModel m = SegNetModel::make(16, {2, 3}, 77, 1.0);
  const auto mpath = dir / "classifier.bin";
  save_model(m, mpath);
  CHECK(peek_model_kind(mpath) == kModelKindSegNet);
  const SegNetModel back = load_segnet(mpath);
  CHECK(back.input_px == 16);
  CHECK(back.channels == m.channels);
  CHECK(back.params.w == m.params.w);

  FeedbackModel f = FeedbackModel::make(16, {2, 3}, 78, 1.0);
  const auto fpath = dir / "segmenter.bin";
  save_model(f, fpath);
  CHECK(peek_model_kind(fpath) == kModelKindFeedback);
  const FeedbackModel fback = load_feedback(fpath);
  CHECK(fback.params.w == f.params.w);

  // Cross-loading is rejected.
  CHECK_THROWS_AS(load_feedback(mpath), IoError);
  CHECK_THROWS_AS(load_segnet(fpath), IoError);

  // Truncation is detected.
  const auto tpath = dir / "truncated.bin";
  {
    std::ifstream in(mpath, std::ios::binary);
    std::vector<char> bytes((std::istreambuf_iterator<char>(in)),
                            std::istreambuf_iterator<char>());
    bytes.resize(bytes.size() / 2);
    std::ofstream out(tpath, std::ios::binary);
    out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
  }
  CHECK_THROWS_AS(load_segnet(tpath), IoError);
}
