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

#ifndef NIDS_LINEAR_SVM_H_
#define NIDS_LINEAR_SVM_H_

#include <cstdint>
#include <span>
#include <vector>

#include "nids/matrix.h"

namespace nids::nn {

/// One-vs-rest linear SVM trained by stochastic sub-gradient descent on
///   lambda/2 ||w||^2 + mean_i max(0, 1 - y_i (w.x_i + b))
/// with step size eta_t = eta0 / (1 + eta0 * lambda * t). The bias is not
/// regularized.
struct LinearSvmConfig {
  double lambda = 1e-4;
  size_t epochs = 5;
  double eta0 = 0.1;
  uint64_t seed = 0;

  friend bool operator==(const LinearSvmConfig&,
                         const LinearSvmConfig&) = default;
};

struct LinearOvr {
  size_t classes = 0;
  size_t dim = 0;
  std::vector<double> weights;  // classes x dim
  std::vector<double> bias;     // classes

  std::vector<double> Scores(std::span<const double> x) const;
  /// argmax of the scores, ties -> lowest class.
  int Predict(std::span<const double> x) const;

  friend bool operator==(const LinearOvr&, const LinearOvr&) = default;
};

/// Mean over classes of the binary objectives above.
double HingeObjective(const LinearOvr& model, const Matrix& x,
                      std::span<const int> labels, double lambda);

/// Throws SingleClassError when fewer than two classes occur in `labels`,
/// LengthMismatchError, LabelRangeError. When `epoch_objectives` is given it
/// receives HingeObjective after every epoch.
LinearOvr FitLinearOvr(const Matrix& x, std::span<const int> labels,
                       size_t classes, const LinearSvmConfig& config,
                       std::vector<double>* epoch_objectives = nullptr);

}  // namespace nids::nn

#endif  // NIDS_LINEAR_SVM_H_
