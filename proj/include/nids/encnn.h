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

// The EnCNN intrusion classifier.
//
// Layer stack for a 1 x s x s input grid:
//
//   [Conv(f_k) -> ReLU -> Pool_k] for f = 16, 32, 64
//   Flatten -> Dense(512) -> ReLU -> Dropout -> Dense(512) -> ReLU -> Dropout
//   -> Dense(C) -> Softmax
//
// Pool_k is max or stochastic per stage. The optional head is a one-vs-rest
// linear SVM on the 512-wide activation that feeds the final dense layer;
// when present it replaces the softmax argmax at prediction time.

#ifndef NIDS_ENCNN_H_
#define NIDS_ENCNN_H_

#include <array>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "nids/linear_svm.h"
#include "nids/matrix.h"
#include "nids/nn.h"

namespace nids::encnn {

struct EnCnnConfig {
  std::array<size_t, 3> stage_filters = {16, 32, 64};
  std::array<nn::PoolMode, 3> pooling_modes = {
      nn::PoolMode::kStochastic, nn::PoolMode::kStochastic,
      nn::PoolMode::kStochastic};
  std::array<size_t, 2> dense_units = {512, 512};
  double dropout_rate = 0.5;
  size_t class_count = 5;
  size_t grid_side = 11;
  bool svm_head = true;
  nn::SgdConfig sgd;
  nn::LinearSvmConfig svm;
};

/// Throws ConfigError (C < 2, bad dropout, bad SGD settings).
void Validate(const EnCnnConfig& config);

std::vector<nn::LayerSpec> LayerStack(const EnCnnConfig& config);

struct TrainReport {
  std::vector<double> epoch_loss;
  double seconds = 0.0;
  double train_accuracy = 0.0;
};

struct EnCnnModel {
  EnCnnConfig config;
  nn::Network network;
  std::optional<nn::LinearOvr> head;
  bool trained = false;
  size_t epochs_run = 0;
  double final_loss = 0.0;
};

/// Validates the config and the shape chain (ShapeChainError) and draws
/// He-uniform weights from config.sgd.seed.
EnCnnModel BuildModel(const EnCnnConfig& config);

/// Rows of `grids` are flattened s x s inputs (see select::EmbedGrid).
/// Mini-batch SGD with momentum; every epoch reshuffles with its own stream
/// and gives each layer its own stream for dropout and stochastic pooling.
/// Throws EmptyInputError, LabelRangeError, DimensionMismatchError and
/// DivergenceError (non-finite loss).
TrainReport TrainModel(EnCnnModel& model, const Matrix& grids,
                       std::span<const int> labels);

/// Inference-phase activations entering the final dense layer, one row per
/// input.
Matrix PenultimateActivations(EnCnnModel& model, const Matrix& grids);

/// Fits and stores the SVM head. Throws UntrainedModelError and
/// SingleClassError.
const nn::LinearOvr& FitSvmHead(EnCnnModel& model, const Matrix& grids,
                                std::span<const int> labels);

/// Softmax probabilities, inference phase.
Matrix PredictProba(EnCnnModel& model, const Matrix& grids);

/// Class codes. Uses the head when config.svm_head is set (MissingHeadError
/// if it was never fitted), otherwise the softmax argmax. Ties go to the
/// lowest class code.
std::vector<int> Predict(EnCnnModel& model, const Matrix& grids);

/// Versioned binary container (see binio.h). `attachment` is an opaque blob
/// stored alongside the model, e.g. the preprocessing pipeline.
std::vector<uint8_t> SaveModelBytes(const EnCnnModel& model,
                                    std::string_view attachment = {});
EnCnnModel LoadModelBytes(std::span<const uint8_t> bytes,
                          std::string* attachment = nullptr);

void SaveModel(const EnCnnModel& model, const std::string& path,
               std::string_view attachment = {});
EnCnnModel LoadModel(const std::string& path, std::string* attachment = nullptr);

}  // namespace nids::encnn

#endif  // NIDS_ENCNN_H_
