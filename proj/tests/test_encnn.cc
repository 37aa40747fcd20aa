// Copyright 2026 The NIDS Workbench Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include <algorithm>
#include <cmath>
#include <cstring>
#include <vector>

#include "doctest.h"
#include "nids/binio.h"
#include "nids/encnn.h"
#include "nids/errors.h"
#include "nids/linear_svm.h"
#include "nids/rng.h"
#include "synthetic_kdd.h"

namespace nids::encnn {
namespace {

// Two Gaussian-ish blobs on an s x s grid: class 1 lights up the left half.
struct Blobs {
  Matrix x;
  std::vector<int> y;
};

Blobs MakeBlobs(size_t n, size_t side, uint64_t seed) {
  Rng rng(seed);
  Blobs b{Matrix(n, side * side), std::vector<int>(n)};
  for (size_t i = 0; i < n; ++i) {
    b.y[i] = int(i % 2);
    for (size_t p = 0; p < side * side; ++p) {
      const bool left = p % side < side / 2;
      const double centre = (b.y[i] == 1) == left ? 0.8 : 0.2;
      b.x.at(i, p) = std::clamp(centre + rng.Uniform(-0.15, 0.15), 0.0, 1.0);
    }
  }
  return b;
}

EnCnnConfig SmallConfig() {
  EnCnnConfig c;
  c.stage_filters = {4, 8, 8};
  c.dense_units = {32, 32};
  c.grid_side = 8;
  c.class_count = 2;
  c.sgd.batch_size = 16;
  c.sgd.epochs = 10;
  c.sgd.seed = 5;
  return c;
}

double Accuracy(const std::vector<int>& a, const std::vector<int>& b) {
  size_t hit = 0;
  for (size_t i = 0; i < a.size(); ++i) hit += a[i] == b[i];
  return double(hit) / a.size();
}

bool SameBits(const Matrix& a, const Matrix& b) {
  return a.values.size() == b.values.size() &&
         std::memcmp(a.values.data(), b.values.data(),
                     a.values.size() * sizeof(double)) == 0;
}

TEST_CASE("default stack on an 11x11 grid") {
  const auto m = BuildModel(EnCnnConfig{});
  const auto& net = m.network;
  // conv, relu, pool per stage: pooled sides 5, 2, 1.
  CHECK(net.shape_at(3) == nn::Shape{16, 5, 5});
  CHECK(net.shape_at(6) == nn::Shape{32, 2, 2});
  CHECK(net.shape_at(9) == nn::Shape{64, 1, 1});
  CHECK(net.shape_at(10) == nn::Shape{64, 1, 1});  // flattened
  const auto stack = LayerStack(EnCnnConfig{});
  REQUIRE(stack.size() == 18);
  CHECK(stack[16] == nn::LayerSpec::Dense(5));
  CHECK(stack[17] == nn::LayerSpec::Softmax());
  CHECK(net.layer(16).params().size() == 512 * 5 + 5);
}

TEST_CASE("side 12 with two classes") {
  EnCnnConfig c;
  c.grid_side = 12;
  c.class_count = 2;
  const auto m = BuildModel(c);
  CHECK(m.network.shape_at(3) == nn::Shape{16, 6, 6});
  CHECK(m.network.shape_at(6) == nn::Shape{32, 3, 3});
  CHECK(m.network.shape_at(9) == nn::Shape{64, 1, 1});
}

TEST_CASE("too small a grid cannot survive three pools") {
  EnCnnConfig c;
  c.grid_side = 4;
  CHECK_THROWS_AS(BuildModel(c), ShapeChainError);
  c.grid_side = 11;
  c.class_count = 1;
  CHECK_THROWS_AS(BuildModel(c), ConfigError);
  c.class_count = 5;
  c.dropout_rate = 1.0;
  CHECK_THROWS_AS(BuildModel(c), ConfigError);
}

TEST_CASE("build-time shapes equal runtime shapes for every side 8..32") {
  Rng rng(1);
  for (size_t s = 8; s <= 32; ++s) {
    EnCnnConfig c;
    c.stage_filters = {2, 2, 2};
    c.dense_units = {4, 4};
    c.grid_side = s;
    auto m = BuildModel(c);
    nn::Tensor x(nn::Shape{1, s, s});
    for (auto& v : x.vec()) v = rng.Uniform();
    size_t side = s;
    for (int k = 0; k < 3; ++k) side /= 2;
    CHECK(m.network.shape_at(9) == nn::Shape{2, side, side});
    for (size_t i = 0; i <= m.network.layer_count(); ++i) {
      CHECK(m.network.Forward(x, nn::Phase::kInfer, {}, i).shape() ==
            m.network.shape_at(i));
    }
  }
}

TEST_CASE("blob smoke test: accuracy and a falling loss") {
  // Batch 32: with batch 16 the loss floor is noisy enough to break the
  // window check once it nears zero.
  for (uint64_t seed : {5, 6, 7}) {
    CAPTURE(seed);
    const auto b = MakeBlobs(200, 8, 11 + seed);
    auto c = SmallConfig();
    c.svm_head = false;
    c.sgd.batch_size = 32;
    c.sgd.seed = seed;
    auto m = BuildModel(c);
    const auto report = TrainModel(m, b.x, b.y);
    REQUIRE(report.epoch_loss.size() == 10);
    CHECK(report.train_accuracy >= 0.95);
    for (size_t i = 0; i + 2 < report.epoch_loss.size(); ++i) {
      CAPTURE(i);
      CHECK(report.epoch_loss[i + 2] <= report.epoch_loss[i]);
    }
    CHECK(Accuracy(Predict(m, b.x), b.y) >= 0.95);
  }
}

TEST_CASE("zero epochs leaves the parameters alone") {
  auto c = SmallConfig();
  c.sgd.epochs = 0;
  auto m = BuildModel(c);
  const auto before = m.network;
  const auto b = MakeBlobs(20, 8, 2);
  const auto report = TrainModel(m, b.x, b.y);
  CHECK(report.epoch_loss.empty());
  CHECK(m.network == before);
}

TEST_CASE("identical seeds train identically") {
  const auto b = MakeBlobs(60, 8, 3);
  auto run = [&] {
    auto m = BuildModel(SmallConfig());
    auto r = TrainModel(m, b.x, b.y);
    FitSvmHead(m, b.x, b.y);
    return std::make_pair(std::move(m), r.epoch_loss);
  };
  auto [m1, l1] = run();
  auto [m2, l2] = run();
  CHECK(l1 == l2);
  CHECK(m1.network == m2.network);
  CHECK(m1.head == m2.head);
  CHECK(SaveModelBytes(m1) == SaveModelBytes(m2));
}

TEST_CASE("memorizes a small set without dropout") {
  auto c = SmallConfig();
  c.stage_filters = {16, 32, 64};
  c.dense_units = {512, 512};
  c.dropout_rate = 0.0;
  c.pooling_modes = {nn::PoolMode::kMax, nn::PoolMode::kMax, nn::PoolMode::kMax};
  c.svm_head = false;
  c.class_count = 5;
  c.sgd.batch_size = 8;
  c.sgd.epochs = 1;
  Rng rng(4);
  Matrix x(32, 64);
  for (auto& v : x.values) v = rng.Uniform();
  std::vector<int> y(32);
  for (auto& v : y) v = int(rng.Index(5));
  auto m = BuildModel(c);
  double loss = INFINITY;
  size_t epochs = 0;
  while (epochs < 200 && loss >= 0.01) {
    loss = TrainModel(m, x, y).epoch_loss.back();
    // Continue from the trained weights with a fresh epoch stream.
    m.config.sgd.seed += 1;
    ++epochs;
  }
  CAPTURE(epochs);
  CHECK(loss < 0.01);
}

TEST_CASE("training input errors") {
  auto m = BuildModel(SmallConfig());
  const auto b = MakeBlobs(10, 8, 4);
  CHECK_THROWS_AS(TrainModel(m, Matrix(0, 64), std::vector<int>{}), EmptyInputError);
  std::vector<int> bad = b.y;
  bad[3] = 2;
  CHECK_THROWS_AS(TrainModel(m, b.x, bad), LabelRangeError);
  CHECK_THROWS_AS(TrainModel(m, Matrix(10, 49), b.y), DimensionMismatchError);
}

TEST_CASE("svm head lifecycle") {
  auto m = BuildModel(SmallConfig());
  const auto b = MakeBlobs(100, 8, 5);
  CHECK_THROWS_AS(FitSvmHead(m, b.x, b.y), UntrainedModelError);
  CHECK_THROWS_AS(Predict(m, b.x), MissingHeadError);
  TrainModel(m, b.x, b.y);
  CHECK_THROWS_AS(FitSvmHead(m, b.x, std::vector<int>(100, 1)), SingleClassError);
  const auto& head = FitSvmHead(m, b.x, b.y);
  CHECK(head.dim == 32);
  CHECK(head.classes == 2);
  const auto with_head = Predict(m, b.x);
  m.config.svm_head = false;
  const auto without = Predict(m, b.x);
  for (size_t i = 0; i < with_head.size(); ++i) {
    CHECK(with_head[i] >= 0);
    CHECK(with_head[i] < 2);
    CHECK(without[i] >= 0);
    CHECK(without[i] < 2);
  }
  CHECK(Accuracy(with_head, b.y) >= 0.95);
}

TEST_CASE("all-zero network predicts class 0") {
  EnCnnConfig c;
  c.svm_head = false;
  auto m = BuildModel(c);
  for (size_t i = 0; i < m.network.layer_count(); ++i) {
    for (auto& p : m.network.layer(i).params()) p = 0.0;
  }
  m.trained = true;
  Rng rng(6);
  Matrix x(7, 121);
  for (auto& v : x.values) v = rng.Uniform();
  CHECK(Predict(m, x) == std::vector<int>(7, 0));
}

TEST_CASE("inference is a pure function of the model and the input") {
  const auto b = MakeBlobs(40, 8, 7);
  auto c = SmallConfig();
  c.pooling_modes = {nn::PoolMode::kStochastic, nn::PoolMode::kStochastic,
                     nn::PoolMode::kStochastic};
  auto m = BuildModel(c);
  TrainModel(m, b.x, b.y);
  FitSvmHead(m, b.x, b.y);
  const auto p1 = PredictProba(m, b.x);
  const auto y1 = Predict(m, b.x);
  CHECK(SameBits(PredictProba(m, b.x), p1));
  CHECK(Predict(m, b.x) == y1);
}

TEST_CASE("save and load round trip") {
  const auto b = MakeBlobs(60, 8, 8);
  auto m = BuildModel(SmallConfig());
  TrainModel(m, b.x, b.y);
  FitSvmHead(m, b.x, b.y);
  const auto bytes = SaveModelBytes(m, "pipeline text");
  std::string attachment;
  auto back = LoadModelBytes(bytes, &attachment);
  CHECK(attachment == "pipeline text");
  CHECK(back.network == m.network);
  CHECK(back.head == m.head);
  CHECK(Predict(back, b.x) == Predict(m, b.x));
  CHECK(SameBits(PredictProba(back, b.x), PredictProba(m, b.x)));
  CHECK(SaveModelBytes(back, "pipeline text") == bytes);

  const std::string path = testing::TempDir("encnn_io") + "/m.bin";
  SaveModel(m, path);
  auto from_file = LoadModel(path);
  CHECK(Predict(from_file, b.x) == Predict(m, b.x));
}

TEST_CASE("corrupt model files are rejected") {
  auto m = BuildModel(SmallConfig());
  auto bytes = SaveModelBytes(m);
  auto wrong = bytes;
  wrong[0] = 'X';
  CHECK_THROWS_AS(LoadModelBytes(wrong), MagicMismatchError);
  auto version = bytes;
  version[4] = 99;
  CHECK_THROWS_AS(LoadModelBytes(version), VersionError);
  // Cut inside the parameters: the error names a layer.
  auto cut = std::vector<uint8_t>(bytes.begin(), bytes.begin() + bytes.size() / 2);
  try {
    LoadModelBytes(cut);
    FAIL("expected TruncationError");
  } catch (const TruncationError& e) {
    CHECK(std::string(e.what()).find("layer") != std::string::npos);
  }
  CHECK_THROWS_AS(LoadModel("/nonexistent/model.bin"), IoError);
}

// ---------------------------------------------------------------------------
// Linear one-vs-rest SVM.

TEST_CASE("svm: separable data is fitted exactly") {
  Matrix x(40, 2);
  std::vector<int> y(40);
  Rng rng(9);
  for (size_t i = 0; i < 40; ++i) {
    y[i] = int(i % 2);
    x.at(i, 0) = (y[i] ? 2.0 : -2.0) + rng.Uniform(-0.5, 0.5);
    x.at(i, 1) = rng.Uniform(-1, 1);
  }
  nn::LinearSvmConfig cfg;
  cfg.epochs = 20;
  const auto m = nn::FitLinearOvr(x, y, 2, cfg);
  size_t hit = 0;
  for (size_t i = 0; i < 40; ++i) hit += m.Predict(x.row(i)) == y[i];
  CHECK(hit == 40);
  CHECK_THROWS_AS(m.Scores(std::vector<double>{1.0}), DimensionMismatchError);
}

Matrix SvmToySet(double spread, std::vector<int>& y) {
  Matrix x(60, 3);
  y.assign(60, 0);
  Rng rng(10);
  for (size_t i = 0; i < 60; ++i) {
    y[i] = int(i % 3);
    for (size_t j = 0; j < 3; ++j) {
      x.at(i, j) = (size_t(y[i]) == j ? 1.5 : 0.0) + rng.Uniform(-spread, spread);
    }
  }
  return x;
}

TEST_CASE("svm: hinge objective falls every epoch under the decaying step") {
  // Small steps keep per-sample updates in the descent regime.
  for (double spread : {0.2, 1.0}) {
    CAPTURE(spread);
    std::vector<int> y;
    const auto x = SvmToySet(spread, y);
    nn::LinearSvmConfig cfg;
    cfg.lambda = 0.01;
    cfg.eta0 = 0.01;
    cfg.epochs = 15;
    std::vector<double> objective;
    const auto m = nn::FitLinearOvr(x, y, 3, cfg, &objective);
    REQUIRE(objective.size() == 15);
    for (size_t i = 1; i < objective.size(); ++i) {
      CAPTURE(i);
      CHECK(objective[i] <= objective[i - 1]);
    }
    CHECK(nn::HingeObjective(m, x, y, cfg.lambda) ==
          doctest::Approx(objective.back()));
  }
}

TEST_CASE("svm: with large steps only the trend falls") {
  // Near the optimum per-sample steps jitter by about a percent.
  std::vector<int> y;
  const auto x = SvmToySet(1.0, y);
  nn::LinearSvmConfig cfg;
  cfg.lambda = 0.01;
  cfg.eta0 = 0.05;
  cfg.epochs = 15;
  std::vector<double> objective;
  nn::FitLinearOvr(x, y, 3, cfg, &objective);
  CHECK(objective.back() < objective.front());
}

TEST_CASE("svm: input errors") {
  Matrix x(4, 1);
  CHECK_THROWS_AS(nn::FitLinearOvr(x, std::vector<int>{0, 0, 0, 0}, 2, {}),
                  SingleClassError);
  CHECK_THROWS_AS(nn::FitLinearOvr(x, std::vector<int>{0, 1, 2, 0}, 2, {}),
                  LabelRangeError);
  CHECK_THROWS_AS(nn::FitLinearOvr(x, std::vector<int>{0, 1}, 2, {}),
                  LengthMismatchError);
}

}  // namespace
}  // namespace nids::encnn
