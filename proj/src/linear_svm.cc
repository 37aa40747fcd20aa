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

#include "nids/linear_svm.h"

#include <algorithm>
#include <numeric>
#include <set>

#include "nids/errors.h"
#include "nids/rng.h"

namespace nids::nn {

std::vector<double> LinearOvr::Scores(std::span<const double> x) const {
  if (x.size() != dim) {
    throw DimensionMismatchError("svm expects " + std::to_string(dim) +
                                 " features, got " + std::to_string(x.size()));
  }
  std::vector<double> s(classes);
  for (size_t c = 0; c < classes; ++c) {
    const double* w = weights.data() + c * dim;
    double v = bias[c];
    for (size_t j = 0; j < dim; ++j) v += w[j] * x[j];
    s[c] = v;
  }
  return s;
}

int LinearOvr::Predict(std::span<const double> x) const {
  const auto s = Scores(x);
  return static_cast<int>(std::max_element(s.begin(), s.end()) - s.begin());
}

double HingeObjective(const LinearOvr& model, const Matrix& x,
                      std::span<const int> labels, double lambda) {
  double total = 0.0;
  for (size_t c = 0; c < model.classes; ++c) {
    const double* w = model.weights.data() + c * model.dim;
    double norm2 = 0.0;
    for (size_t j = 0; j < model.dim; ++j) norm2 += w[j] * w[j];
    double hinge = 0.0;
    for (size_t i = 0; i < x.rows; ++i) {
      const double y = labels[i] == static_cast<int>(c) ? 1.0 : -1.0;
      auto row = x.row(i);
      double m = model.bias[c];
      for (size_t j = 0; j < model.dim; ++j) m += w[j] * row[j];
      hinge += std::max(0.0, 1.0 - y * m);
    }
    total += 0.5 * lambda * norm2 + hinge / std::max<size_t>(x.rows, 1);
  }
  return total / std::max<size_t>(model.classes, 1);
}

LinearOvr FitLinearOvr(const Matrix& x, std::span<const int> labels,
                       size_t classes, const LinearSvmConfig& config,
                       std::vector<double>* epoch_objectives) {
  if (x.rows != labels.size()) {
    throw LengthMismatchError(std::to_string(x.rows) + " rows, " +
                              std::to_string(labels.size()) + " labels");
  }
  std::set<int> present;
  for (int l : labels) {
    if (l < 0 || static_cast<size_t>(l) >= classes) {
      throw LabelRangeError("label " + std::to_string(l) + " outside [0, " +
                            std::to_string(classes) + ")");
    }
    present.insert(l);
  }
  if (present.size() < 2) {
    throw SingleClassError("one-vs-rest needs at least two classes");
  }
  if (!(config.lambda > 0.0) || !(config.eta0 > 0.0)) {
    throw ConfigError("svm lambda and eta0 must be positive");
  }

  LinearOvr m;
  m.classes = classes;
  m.dim = x.cols;
  m.weights.assign(classes * x.cols, 0.0);
  m.bias.assign(classes, 0.0);

  std::vector<size_t> order(x.rows);
  std::iota(order.begin(), order.end(), size_t{0});
  Rng rng(config.seed);
  uint64_t t = 0;
  for (size_t epoch = 0; epoch < config.epochs; ++epoch) {
    rng.Shuffle(std::span(order));
    for (size_t i : order) {
      const double eta = config.eta0 / (1.0 + config.eta0 * config.lambda * t);
      ++t;
      const double decay = 1.0 - eta * config.lambda;
      auto row = x.row(i);
      for (size_t c = 0; c < classes; ++c) {
        double* w = m.weights.data() + c * m.dim;
        double margin = m.bias[c];
        for (size_t j = 0; j < m.dim; ++j) margin += w[j] * row[j];
        const double y = labels[i] == static_cast<int>(c) ? 1.0 : -1.0;
        const bool violated = y * margin < 1.0;
        for (size_t j = 0; j < m.dim; ++j) {
          w[j] = decay * w[j] + (violated ? eta * y * row[j] : 0.0);
        }
        if (violated) m.bias[c] += eta * y;
      }
    }
    if (epoch_objectives) {
      epoch_objectives->push_back(HingeObjective(m, x, labels, config.lambda));
    }
  }
  return m;
}

}  // namespace nids::nn
