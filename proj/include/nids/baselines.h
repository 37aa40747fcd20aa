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

// Classical comparison classifiers behind one fit/predict contract.

#ifndef NIDS_BASELINES_H_
#define NIDS_BASELINES_H_

#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "nids/linear_svm.h"
#include "nids/matrix.h"

namespace nids::baselines {

enum class ClassifierKind {
  kLogisticRegression,
  kDecisionTree,
  kLinearSvm,
  kRandomForest,
  kAdaBoost,
  kVotingEnsemble,
};

/// In report order.
std::span<const ClassifierKind> AllKinds();

/// Short CLI name: logreg, tree, svm, forest, adaboost, voting.
std::string_view ShortName(ClassifierKind k);
/// Report name, e.g. "Logistic Regression".
std::string_view DisplayName(ClassifierKind k);
/// Accepts the short name. Throws ConfigError.
ClassifierKind ParseClassifierKind(std::string_view name);

struct LogRegConfig {
  double learning_rate = 0.1;
  size_t epochs = 30;
  double l2 = 1e-4;
  size_t batch_size = 32;
  friend bool operator==(const LogRegConfig&, const LogRegConfig&) = default;
};

struct TreeConfig {
  size_t max_depth = 12;
  size_t min_leaf = 5;
  friend bool operator==(const TreeConfig&, const TreeConfig&) = default;
};

struct ForestConfig {
  size_t n_trees = 50;
  /// sqrt(d) candidate features per split when set, all d otherwise.
  bool feature_subsample = true;
  bool bootstrap = true;
  friend bool operator==(const ForestConfig&, const ForestConfig&) = default;
};

struct AdaBoostConfig {
  size_t n_rounds = 50;
  friend bool operator==(const AdaBoostConfig&, const AdaBoostConfig&) = default;
};

struct VotingConfig {
  std::vector<ClassifierKind> members = {
      ClassifierKind::kLogisticRegression, ClassifierKind::kDecisionTree,
      ClassifierKind::kLinearSvm, ClassifierKind::kRandomForest,
      ClassifierKind::kAdaBoost};
  friend bool operator==(const VotingConfig&, const VotingConfig&) = default;
};

struct BaselineConfig {
  size_t class_count = 5;
  LogRegConfig logreg;
  TreeConfig tree;
  nn::LinearSvmConfig svm{1e-4, 10, 0.1, 0};
  ForestConfig forest;
  AdaBoostConfig adaboost;
  VotingConfig voting;
  /// Inverse-frequency sample weights for the logistic and tree models.
  bool class_weighting = false;
  friend bool operator==(const BaselineConfig&, const BaselineConfig&) = default;
};

/// CART node. Internal when feature >= 0: rows with x[feature] <= threshold
/// go left.
struct TreeNode {
  int64_t feature = -1;
  double threshold = 0.0;
  int64_t left = -1;
  int64_t right = -1;
  int64_t label = 0;

  friend bool operator==(const TreeNode&, const TreeNode&) = default;
};

struct DecisionTree {
  std::vector<TreeNode> nodes;  // root at 0

  int Predict(std::span<const double> x) const;
  size_t depth() const;
  friend bool operator==(const DecisionTree&, const DecisionTree&) = default;
};

struct SoftmaxRegression {
  std::vector<double> weights;  // classes x dim
  std::vector<double> bias;

  friend bool operator==(const SoftmaxRegression&,
                         const SoftmaxRegression&) = default;
};

struct RandomForest {
  std::vector<DecisionTree> trees;
  friend bool operator==(const RandomForest&, const RandomForest&) = default;
};

struct AdaBoostModel {
  std::vector<DecisionTree> stumps;
  std::vector<double> alphas;
  /// Weighted training error per accepted round.
  std::vector<double> errors;
  friend bool operator==(const AdaBoostModel&, const AdaBoostModel&) = default;
};

class TrainedClassifier;

struct VotingModel {
  std::vector<TrainedClassifier> members;
  friend bool operator==(const VotingModel&, const VotingModel&);
};

class TrainedClassifier {
 public:
  using Model = std::variant<SoftmaxRegression, DecisionTree, nn::LinearOvr,
                             RandomForest, AdaBoostModel, VotingModel>;

  TrainedClassifier(ClassifierKind kind, size_t dim, size_t classes,
                    Model model)
      : kind_(kind), dim_(dim), classes_(classes), model_(std::move(model)) {}

  ClassifierKind kind() const { return kind_; }
  size_t dim() const { return dim_; }
  size_t classes() const { return classes_; }
  const Model& model() const { return model_; }

  template <typename T>
  const T& as() const {
    return std::get<T>(model_);
  }

  friend bool operator==(const TrainedClassifier&,
                         const TrainedClassifier&) = default;

 private:
  ClassifierKind kind_;
  size_t dim_;
  size_t classes_;
  Model model_;
};

/// Deterministic given `seed`. Throws SingleClassError (fewer than two
/// classes in y), NonFiniteFeatureError, LengthMismatchError,
/// LabelRangeError.
TrainedClassifier FitClassifier(ClassifierKind kind, const Matrix& x,
                                std::span<const int> y,
                                const BaselineConfig& config, uint64_t seed);

/// Voting ensemble over already-fitted members (same dim and classes).
TrainedClassifier MakeVoting(std::vector<TrainedClassifier> members);

/// Throws DimensionMismatchError.
std::vector<int> PredictClassifier(const TrainedClassifier& model,
                                   const Matrix& x);

/// Majority over votes in [0, classes); ties go to the lowest code.
int MajorityVote(std::span<const int> votes, size_t classes);

/// SAMME round weight ln((1 - err) / err) + ln(classes - 1).
double SammeAlpha(double weighted_error, size_t classes);

std::vector<uint8_t> SaveClassifierBytes(const TrainedClassifier& model,
                                         std::string_view attachment = {});
TrainedClassifier LoadClassifierBytes(std::span<const uint8_t> bytes,
                                      std::string* attachment = nullptr);

}  // namespace nids::baselines

#endif  // NIDS_BASELINES_H_
