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

#include "nids/encnn.h"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <numeric>

#include "nids/binio.h"
#include "nids/errors.h"
#include "nids/rng.h"

namespace nids::encnn {
namespace {

// Stream coordinates under config.sgd.seed.
constexpr uint64_t kInitStream = 0x1001;
constexpr uint64_t kShuffleStream = 0x1002;
constexpr uint64_t kLayerStream = 0x1003;
constexpr uint64_t kHeadStream = 0x1004;

constexpr uint32_t kConfigTag = 1;
constexpr uint32_t kMetaTag = 2;
constexpr uint32_t kLayerTag = 3;
constexpr uint32_t kHeadTag = 4;

nn::Tensor InputTensor(const EnCnnModel& model, const Matrix& grids,
                       size_t row) {
  const size_t s = model.config.grid_side;
  auto r = grids.row(row);
  return nn::Tensor(nn::Shape{1, s, s}, std::vector<double>(r.begin(), r.end()));
}

void CheckGrids(const EnCnnModel& model, const Matrix& grids) {
  const size_t s = model.config.grid_side;
  if (grids.cols != s * s) {
    throw DimensionMismatchError("EnCNN expects " + std::to_string(s * s) +
                                 " grid cells per row, got " +
                                 std::to_string(grids.cols));
  }
}

// Index of the last dense layer (the C-way classifier).
size_t FinalDenseIndex(const nn::Network& net) {
  for (size_t i = net.layer_count(); i-- > 0;) {
    if (net.layer(i).spec().kind == nn::LayerKind::kDense) return i;
  }
  throw ShapeChainError("network has no dense layer");
}

int ArgMax(std::span<const double> v) {
  return static_cast<int>(std::max_element(v.begin(), v.end()) - v.begin());
}

}  // namespace

void Validate(const EnCnnConfig& config) {
  if (config.class_count < 2) {
    throw ConfigError("class_count must be >= 2, got " +
                      std::to_string(config.class_count));
  }
  if (!(config.dropout_rate >= 0.0 && config.dropout_rate < 1.0)) {
    throw ConfigError("dropout rate must lie in [0, 1)");
  }
  for (size_t f : config.stage_filters) {
    if (f == 0) throw ConfigError("stage filter counts must be positive");
  }
  for (size_t u : config.dense_units) {
    if (u == 0) throw ConfigError("dense unit counts must be positive");
  }
  if (config.grid_side == 0) throw ConfigError("grid side must be positive");
  nn::Validate(config.sgd);
}

std::vector<nn::LayerSpec> LayerStack(const EnCnnConfig& config) {
  using nn::LayerSpec;
  std::vector<LayerSpec> s;
  for (size_t k = 0; k < 3; ++k) {
    s.push_back(LayerSpec::Conv2d(config.stage_filters[k]));
    s.push_back(LayerSpec::Relu());
    s.push_back(LayerSpec::Pool(config.pooling_modes[k]));
  }
  s.push_back(LayerSpec::Flatten());
  for (size_t units : config.dense_units) {
    s.push_back(LayerSpec::Dense(units));
    s.push_back(LayerSpec::Relu());
    s.push_back(LayerSpec::Dropout(config.dropout_rate));
  }
  s.push_back(LayerSpec::Dense(config.class_count));
  s.push_back(LayerSpec::Softmax());
  return s;
}

EnCnnModel BuildModel(const EnCnnConfig& config) {
  Validate(config);
  EnCnnModel m;
  m.config = config;
  const size_t s = config.grid_side;
  m.network = nn::Network::Build(nn::Shape{1, s, s}, LayerStack(config));
  Rng init(DeriveSeed(config.sgd.seed, {kInitStream}));
  m.network.InitializeHeUniform(init);
  return m;
}

TrainReport TrainModel(EnCnnModel& model, const Matrix& grids,
                       std::span<const int> labels) {
  const auto start = std::chrono::steady_clock::now();
  const auto& cfg = model.config;
  nn::Validate(cfg.sgd);
  if (grids.rows == 0) throw EmptyInputError("no training rows");
  if (labels.size() != grids.rows) {
    throw LengthMismatchError(std::to_string(grids.rows) + " rows, " +
                              std::to_string(labels.size()) + " labels");
  }
  CheckGrids(model, grids);
  for (int l : labels) {
    if (l < 0 || static_cast<size_t>(l) >= cfg.class_count) {
      throw LabelRangeError("label " + std::to_string(l) + " outside [0, " +
                            std::to_string(cfg.class_count) + ")");
    }
  }

  auto& net = model.network;
  std::vector<std::vector<double>> velocity(net.layer_count());
  for (size_t i = 0; i < net.layer_count(); ++i) {
    velocity[i].assign(net.layer(i).params().size(), 0.0);
  }

  TrainReport report;
  std::vector<size_t> order(grids.rows);
  std::iota(order.begin(), order.end(), size_t{0});
  const size_t batch = cfg.sgd.batch_size;
  for (size_t epoch = 0; epoch < cfg.sgd.epochs; ++epoch) {
    Rng shuffle(DeriveSeed(cfg.sgd.seed, {kShuffleStream, epoch}));
    shuffle.Shuffle(std::span(order));
    std::vector<Rng> streams;
    streams.reserve(net.layer_count());
    for (size_t l = 0; l < net.layer_count(); ++l) {
      streams.emplace_back(DeriveSeed(cfg.sgd.seed, {kLayerStream, epoch, l}));
    }

    double loss_sum = 0.0;
    for (size_t b0 = 0; b0 < order.size(); b0 += batch) {
      const size_t b1 = std::min(order.size(), b0 + batch);
      net.ZeroGrads();
      for (size_t k = b0; k < b1; ++k) {
        const size_t row = order[k];
        loss_sum += net.AccumulateGradients(InputTensor(model, grids, row),
                                            labels[row], nn::Phase::kTrain,
                                            streams)
                        .loss;
      }
      const double inv = 1.0 / static_cast<double>(b1 - b0);
      for (size_t l = 0; l < net.layer_count(); ++l) {
        auto g = net.layer(l).grads();
        if (g.empty()) continue;
        for (double& v : g) v *= inv;
        nn::SgdStep(net.layer(l).params(), g, velocity[l],
                    cfg.sgd.learning_rate, cfg.sgd.momentum);
      }
    }
    const double mean = loss_sum / static_cast<double>(order.size());
    if (!std::isfinite(mean)) {
      throw DivergenceError("training loss became non-finite in epoch " +
                            std::to_string(epoch));
    }
    report.epoch_loss.push_back(mean);
    model.epochs_run = epoch + 1;
    model.final_loss = mean;
  }
  net.ZeroGrads();
  model.trained = true;

  const auto probs = PredictProba(model, grids);
  size_t correct = 0;
  for (size_t i = 0; i < grids.rows; ++i) {
    correct += ArgMax(probs.row(i)) == labels[i];
  }
  report.train_accuracy = static_cast<double>(correct) / grids.rows;
  report.seconds = std::chrono::duration<double>(
                       std::chrono::steady_clock::now() - start)
                       .count();
  return report;
}

Matrix PenultimateActivations(EnCnnModel& model, const Matrix& grids) {
  CheckGrids(model, grids);
  auto& net = model.network;
  const size_t end = FinalDenseIndex(net);
  const size_t width = net.shape_at(end).size();
  Matrix out(grids.rows, width);
  for (size_t i = 0; i < grids.rows; ++i) {
    const auto act =
        net.Forward(InputTensor(model, grids, i), nn::Phase::kInfer, {}, end);
    std::copy(act.vec().begin(), act.vec().end(), out.row(i).begin());
  }
  return out;
}

const nn::LinearOvr& FitSvmHead(EnCnnModel& model, const Matrix& grids,
                                std::span<const int> labels) {
  if (!model.trained) {
    throw UntrainedModelError("the SVM head needs a trained network");
  }
  const Matrix features = PenultimateActivations(model, grids);
  nn::LinearSvmConfig svm = model.config.svm;
  svm.seed = DeriveSeed(model.config.sgd.seed, {kHeadStream, svm.seed});
  model.head =
      nn::FitLinearOvr(features, labels, model.config.class_count, svm);
  return *model.head;
}

Matrix PredictProba(EnCnnModel& model, const Matrix& grids) {
  CheckGrids(model, grids);
  auto& net = model.network;
  const size_t end = net.logits_end();
  Matrix out(grids.rows, model.config.class_count);
  for (size_t i = 0; i < grids.rows; ++i) {
    const auto logits =
        net.Forward(InputTensor(model, grids, i), nn::Phase::kInfer, {}, end);
    const auto p = nn::Softmax(logits.data());
    std::copy(p.begin(), p.end(), out.row(i).begin());
  }
  return out;
}

std::vector<int> Predict(EnCnnModel& model, const Matrix& grids) {
  std::vector<int> out(grids.rows);
  if (model.config.svm_head) {
    if (!model.head) {
      throw MissingHeadError("model is configured with an SVM head that was "
                             "never fitted");
    }
    const Matrix features = PenultimateActivations(model, grids);
    for (size_t i = 0; i < grids.rows; ++i) {
      out[i] = model.head->Predict(features.row(i));
    }
    return out;
  }
  const Matrix probs = PredictProba(model, grids);
  for (size_t i = 0; i < grids.rows; ++i) out[i] = ArgMax(probs.row(i));
  return out;
}

// ---------------------------------------------------------------------------
// Persistence

namespace {

void WriteConfig(ByteWriter& w, const EnCnnConfig& c) {
  for (size_t f : c.stage_filters) w.U64(f);
  for (auto m : c.pooling_modes) w.U8(m == nn::PoolMode::kMax ? 0 : 1);
  for (size_t u : c.dense_units) w.U64(u);
  w.F64(c.dropout_rate);
  w.U64(c.class_count);
  w.U64(c.grid_side);
  w.U8(c.svm_head ? 1 : 0);
  w.F64(c.sgd.learning_rate);
  w.F64(c.sgd.momentum);
  w.U64(c.sgd.batch_size);
  w.U64(c.sgd.epochs);
  w.U64(c.sgd.seed);
  w.F64(c.svm.lambda);
  w.U64(c.svm.epochs);
  w.F64(c.svm.eta0);
  w.U64(c.svm.seed);
}

EnCnnConfig ReadConfig(ByteReader& r) {
  EnCnnConfig c;
  for (size_t& f : c.stage_filters) f = r.U64();
  for (auto& m : c.pooling_modes) {
    m = r.U8() == 0 ? nn::PoolMode::kMax : nn::PoolMode::kStochastic;
  }
  for (size_t& u : c.dense_units) u = r.U64();
  c.dropout_rate = r.F64();
  c.class_count = r.U64();
  c.grid_side = r.U64();
  c.svm_head = r.U8() != 0;
  c.sgd.learning_rate = r.F64();
  c.sgd.momentum = r.F64();
  c.sgd.batch_size = r.U64();
  c.sgd.epochs = r.U64();
  c.sgd.seed = r.U64();
  c.svm.lambda = r.F64();
  c.svm.epochs = r.U64();
  c.svm.eta0 = r.F64();
  c.svm.seed = r.U64();
  return c;
}

}  // namespace

std::vector<uint8_t> SaveModelBytes(const EnCnnModel& model,
                                    std::string_view attachment) {
  ByteWriter records;
  {
    ByteWriter w;
    WriteConfig(w, model.config);
    records.Record(kConfigTag, w);
  }
  {
    ByteWriter w;
    w.U8(model.trained ? 1 : 0);
    w.U64(model.epochs_run);
    w.F64(model.final_loss);
    records.Record(kMetaTag, w);
  }
  const auto& net = model.network;
  for (size_t i = 0; i < net.layer_count(); ++i) {
    const auto& layer = net.layer(i);
    const auto spec = layer.spec();
    ByteWriter w;
    w.U32(static_cast<uint32_t>(i));
    w.U32(static_cast<uint32_t>(spec.kind));
    w.U64(spec.units);
    w.F64(spec.rate);
    w.U64(layer.params().size());
    w.F64s(layer.params());
    records.Record(kLayerTag, w);
  }
  if (model.head) {
    ByteWriter w;
    w.U64(model.head->classes);
    w.U64(model.head->dim);
    w.F64s(model.head->weights);
    w.F64s(model.head->bias);
    records.Record(kHeadTag, w);
  }
  if (!attachment.empty()) {
    ByteWriter w;
    w.Str(attachment);
    records.Record(kAttachmentTag, w);
  }
  return EncodeContainer(ModelKind::kEnCnn, records);
}

EnCnnModel LoadModelBytes(std::span<const uint8_t> bytes,
                          std::string* attachment) {
  const auto describe = [](uint32_t tag, std::span<const uint8_t> partial) {
    if (tag == kLayerTag && partial.size() >= 4) {
      ByteReader r(partial, "layer");
      return "layer " + std::to_string(r.U32()) + " parameter block";
    }
    if (tag == kHeadTag) return std::string("svm head");
    if (tag == kConfigTag) return std::string("config");
    return std::string();
  };
  const auto decoded = DecodeContainer(bytes, describe);
  if (decoded.kind != ModelKind::kEnCnn) {
    throw MagicMismatchError("container holds model kind " +
                             std::to_string(static_cast<uint32_t>(decoded.kind)) +
                             ", not an EnCNN");
  }
  EnCnnModel m;
  bool have_config = false;
  size_t next_layer = 0;
  for (const auto& rec : decoded.records) {
    switch (rec.tag) {
      case kConfigTag: {
        ByteReader r(rec.payload, "config");
        const EnCnnConfig cfg = ReadConfig(r);
        Validate(cfg);
        m.config = cfg;
        const size_t s = cfg.grid_side;
        m.network = nn::Network::Build(nn::Shape{1, s, s}, LayerStack(cfg));
        have_config = true;
        break;
      }
      case kMetaTag: {
        ByteReader r(rec.payload, "metadata");
        m.trained = r.U8() != 0;
        m.epochs_run = r.U64();
        m.final_loss = r.F64();
        break;
      }
      case kLayerTag: {
        if (!have_config) throw TruncationError("layer record before config");
        ByteReader r(rec.payload, "layer " + std::to_string(next_layer));
        const uint32_t index = r.U32();
        const std::string name = "layer " + std::to_string(index);
        if (index != next_layer || index >= m.network.layer_count()) {
          throw SchemaMismatchError(name + " out of order or beyond the stack");
        }
        nn::LayerSpec spec;
        spec.kind = static_cast<nn::LayerKind>(r.U32());
        spec.units = r.U64();
        spec.rate = r.F64();
        auto& layer = m.network.layer(index);
        if (!(spec == layer.spec())) {
          throw SchemaMismatchError(name + " does not match the config");
        }
        const uint64_t count = r.U64();
        if (count != layer.params().size()) {
          throw SchemaMismatchError(name + " has " + std::to_string(count) +
                                    " parameters, expected " +
                                    std::to_string(layer.params().size()));
        }
        ByteReader pr(r.Take(r.remaining()), name + " parameter block");
        pr.F64sInto(layer.params());
        ++next_layer;
        break;
      }
      case kHeadTag: {
        ByteReader r(rec.payload, "svm head");
        nn::LinearOvr head;
        head.classes = r.U64();
        head.dim = r.U64();
        if (head.classes > (1u << 20) || head.dim > (1u << 24)) {
          throw TruncationError("svm head dimensions are implausible");
        }
        head.weights = r.F64s(head.classes * head.dim);
        head.bias = r.F64s(head.classes);
        m.head = std::move(head);
        break;
      }
      case kAttachmentTag: {
        ByteReader r(rec.payload, "attachment");
        if (attachment) *attachment = r.Str();
        break;
      }
      default:
        break;
    }
  }
  if (!have_config) throw TruncationError("model has no config record");
  if (next_layer != m.network.layer_count()) {
    throw TruncationError("layer " + std::to_string(next_layer) +
                          " parameter block missing");
  }
  return m;
}

void SaveModel(const EnCnnModel& model, const std::string& path,
               std::string_view attachment) {
  WriteFileAtomic(path, SaveModelBytes(model, attachment));
}

EnCnnModel LoadModel(const std::string& path, std::string* attachment) {
  const auto bytes = ReadFileBytes(path);
  return LoadModelBytes(bytes, attachment);
}

}  // namespace nids::encnn
