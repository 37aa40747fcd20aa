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

// Evaluation harness: metrics, stratified splitting, the per-fold feature
// pipeline, cross-validation, grid search and the raw-vs-preprocessed
// comparison report.
//
// Every fold fits its own preprocessing plan and feature selection on the
// training rows only. Per-fold seeds are DeriveSeed(seed, {fold}), so results
// do not depend on how many threads evaluate the folds.

#ifndef NIDS_EVAL_H_
#define NIDS_EVAL_H_

#include <cstdint>
#include <functional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "nids/baselines.h"
#include "nids/encnn.h"
#include "nids/feature_select.h"
#include "nids/kdd.h"
#include "nids/matrix.h"
#include "nids/preprocess.h"

namespace nids::eval {

// ---------------------------------------------------------------------------
// Metrics

/// Rows are true classes, columns predicted classes.
struct ConfusionMatrix {
  size_t classes = 0;
  std::vector<uint64_t> counts;

  explicit ConfusionMatrix(size_t c = 0) : classes(c), counts(c * c, 0) {}
  uint64_t& at(size_t t, size_t p) { return counts[t * classes + p]; }
  uint64_t at(size_t t, size_t p) const { return counts[t * classes + p]; }
  uint64_t total() const;
  void Add(const ConfusionMatrix& other);

  friend bool operator==(const ConfusionMatrix&,
                         const ConfusionMatrix&) = default;
};

/// One-vs-rest view of a single class.
struct ClassMetrics {
  uint64_t tp = 0, fp = 0, fn = 0, tn = 0;
  double precision = 0.0;
  double recall = 0.0;
  double f1 = 0.0;
};

struct Metrics {
  double accuracy = 0.0;
  std::vector<ClassMetrics> per_class;
  double macro_precision = 0.0;
  double macro_recall = 0.0;
  double macro_f1 = 0.0;
  /// One line per 0/0 denominator that was mapped to 0.
  std::vector<std::string> warnings;
};

/// Throws LengthMismatchError and CodeRangeError.
ConfusionMatrix Tally(std::span<const int> y_true, std::span<const int> y_pred,
                      size_t classes);

/// Metrics are a pure function of the matrix.
Metrics ComputeMetrics(const ConfusionMatrix& cm);

std::pair<ConfusionMatrix, Metrics> ConfusionAndMetrics(
    std::span<const int> y_true, std::span<const int> y_pred, size_t classes);

// ---------------------------------------------------------------------------
// Splitting

struct FoldPlan {
  size_t k = 0;
  /// Held-out rows per fold, ascending. Indices are positions in the label
  /// sequence the plan was built from.
  std::vector<std::vector<size_t>> folds;
  /// class_counts[f][c]: rows of class c in fold f.
  std::vector<std::vector<size_t>> class_counts;

  /// Complement of fold f, ascending.
  std::vector<size_t> TrainRows(size_t f) const;
};

/// Per class: seeded shuffle, then round-robin over the folds with the fold
/// cursor carried from one class to the next. Classes smaller than k appear
/// in only some folds. Throws KTooLargeError (k > rows) and ConfigError
/// (k < 2).
FoldPlan StratifiedKFold(std::span<const int> labels, size_t k, uint64_t seed);

struct HoldoutSplit {
  std::vector<size_t> train;  // ascending
  std::vector<size_t> test;   // ascending
  std::vector<std::string> warnings;
};

/// Stratified, seeded, disjoint and exhaustive. A class with n >= 2 rows puts
/// round(fraction * n) rows in train, clamped to [1, n - 1]; a single-row
/// class goes to train with a warning. Throws ConfigError for fractions
/// outside (0, 1) and DegenerateSplitError if a class of size >= 2 still
/// misses a side.
HoldoutSplit MakeHoldoutSplit(std::span<const int> labels,
                              double train_fraction, uint64_t seed);

/// n rows drawn without replacement with per-class quotas by largest
/// remainder (every present class keeps at least one row when n allows).
/// Returns ascending positions. Throws ConfigError when n is 0 or exceeds
/// the row count.
std::vector<size_t> StratifiedSample(std::span<const int> labels, size_t n,
                                     uint64_t seed);

// ---------------------------------------------------------------------------
// Feature pipeline

enum class Stage { kRaw, kPreprocessed };

std::string ToString(Stage s);

struct PipelineConfig {
  prep::PreprocessConfig preprocess;
  bool select_enabled = true;
  size_t select_k = 121;
  double select_min_gain = 0.0;
  select::DiscretizationConfig discretization;
  /// Normal vs attack instead of the five classes.
  bool binary = false;

  size_t class_count() const { return binary ? 2 : kdd::kClassCount; }
};

/// The raw stage keeps one-hot encoding and min-max scaling and turns off
/// fence clipping and feature selection.
PipelineConfig ForStage(const PipelineConfig& base, Stage stage);

struct FittedPipeline {
  prep::PreprocessPlan plan;
  bool select_enabled = false;
  select::SelectionResult selection;
  std::vector<select::FeatureScore> scores;
  bool binary = false;

  size_t width() const;
  std::vector<std::string> column_names() const;
};

/// Labels as used by the pipeline: class codes, or 0/1 in binary mode.
std::vector<int> PipelineLabels(const kdd::Dataset& data,
                                std::span<const size_t> rows, bool binary);

/// Fits the plan, and when enabled scores and selects features, on `rows`
/// only. The selection k is clamped to the encoded width.
FittedPipeline FitPipeline(const PipelineConfig& config,
                           const kdd::Dataset& data,
                           std::span<const size_t> rows);

struct Features {
  Matrix x;
  std::vector<int> y;
};

Features Transform(const FittedPipeline& pipeline, const kdd::Dataset& data,
                   std::span<const size_t> rows);

/// Text form stored next to trained models.
std::string SerializePipeline(const FittedPipeline& pipeline);
FittedPipeline ParsePipeline(const std::string& text);

// ---------------------------------------------------------------------------
// Models

/// Smallest side >= 8 whose square holds `width` features.
size_t GridSideFor(size_t width);

/// Zero-padded s x s embedding of every row.
Matrix ToGrids(const Matrix& x, size_t side);

using FitPredictFn = std::function<std::vector<int>(
    const Matrix& train_x, std::span<const int> train_y, const Matrix& test_x,
    size_t classes, uint64_t seed)>;

struct ModelSpec {
  enum class Family { kBaseline, kEnCnn, kCustom };

  std::string name;
  Family family = Family::kCustom;
  baselines::ClassifierKind kind = baselines::ClassifierKind::kDecisionTree;
  baselines::BaselineConfig baseline;
  encnn::EnCnnConfig encnn;
  FitPredictFn custom;
};

ModelSpec BaselineSpec(baselines::ClassifierKind kind,
                       const baselines::BaselineConfig& config);
ModelSpec EnCnnSpec(const encnn::EnCnnConfig& config);
ModelSpec CustomSpec(std::string name, FitPredictFn fn);

/// Trains an EnCNN (and its head when configured) on a feature matrix,
/// choosing the grid side from the width. Seeds both SGD and the head.
encnn::EnCnnModel FitEnCnn(encnn::EnCnnConfig config, const Matrix& x,
                           std::span<const int> y, size_t classes,
                           uint64_t seed);
std::vector<int> PredictEnCnn(encnn::EnCnnModel& model, const Matrix& x);

// ---------------------------------------------------------------------------
// Evaluation

struct Summary {
  double accuracy = 0.0;
  double precision = 0.0;
  double recall = 0.0;
  double f1 = 0.0;
};

struct Evaluation {
  std::string model;
  std::vector<Metrics> folds;
  /// Sum of the per-fold matrices.
  ConfusionMatrix pooled;
  /// Population statistics across folds.
  Summary mean;
  Summary std;
  /// Fit plus predict time summed over folds.
  double seconds = 0.0;
};

struct Protocol {
  enum class Kind { kKFold, kHoldout };
  Kind kind = Kind::kKFold;
  size_t folds = 10;
  double train_fraction = 0.8;

  std::string Describe() const;
};

struct EvalOptions {
  size_t threads = 1;
  /// Fit the pipeline inside each fold (default) or once on all rows.
  bool per_fold_pipeline = true;
  /// Called with every fitted pipeline and its fold index.
  std::function<void(size_t, const FittedPipeline&)> observer;
};

/// Train/test row sets of `protocol` over `rows` of `data`. Returned indices
/// are dataset row numbers.
std::vector<std::pair<std::vector<size_t>, std::vector<size_t>>> MakeFolds(
    const kdd::Dataset& data, std::span<const size_t> rows,
    const PipelineConfig& config, const Protocol& protocol, uint64_t seed);

/// Evaluates every model on the same folds, sharing each fold's fitted
/// pipeline. Training errors are rethrown as FoldError naming the fold and
/// model.
std::vector<Evaluation> EvaluateModels(std::span<const ModelSpec> models,
                                       const kdd::Dataset& data,
                                       std::span<const size_t> rows,
                                       const PipelineConfig& config,
                                       const Protocol& protocol, uint64_t seed,
                                       const EvalOptions& options = {});

/// Cross-validation on an already encoded matrix.
Evaluation CrossValidateMatrix(const ModelSpec& model, const Matrix& x,
                               std::span<const int> y, size_t classes,
                               const FoldPlan& plan, uint64_t seed,
                               size_t threads = 1);

std::vector<int> FitPredict(const ModelSpec& model, const Matrix& train_x,
                            std::span<const int> train_y, const Matrix& test_x,
                            size_t classes, uint64_t seed);

// ---------------------------------------------------------------------------
// Grid search

struct GridAxis {
  std::string key;
  std::vector<std::string> values;
};

struct GridSpec {
  std::vector<GridAxis> axes;
  size_t cap = 64;
  /// accuracy, precision, recall or f1 (macro).
  std::string metric = "f1";
};

using Assignment = std::vector<std::pair<std::string, std::string>>;

struct GridCell {
  Assignment assignment;
  /// "key=value,key=value" in axis order.
  std::string label;
  bool failed = false;
  std::string error;
  Summary mean;
  Summary std;
  double score = 0.0;
};

struct GridResult {
  std::vector<GridCell> cells;  // enumeration order
  size_t best = 0;
};

double SelectMetric(const Summary& s, const std::string& metric);

/// Axis values are deduplicated in first-seen order and the Cartesian
/// product is evaluated by inner cross-validation. A cell whose training
/// diverges is recorded as failed. Best is the highest score with ties to
/// the lexicographically smallest label. Throws CapExceededError,
/// ConfigError (no axes, empty axis, unknown metric) and DivergenceError
/// when every cell failed.
GridResult GridSearch(const GridSpec& spec,
                      const std::function<ModelSpec(const Assignment&)>& factory,
                      const Matrix& x, std::span<const int> y, size_t classes,
                      const FoldPlan& inner, uint64_t seed);

std::string GridCsv(const GridResult& result);

// ---------------------------------------------------------------------------
// Stage comparison

struct ReportRow {
  std::string model;
  Stage stage = Stage::kRaw;
  Summary mean;
  Summary std;
  double seconds = 0.0;
  ConfusionMatrix pooled;
};

struct ExperimentReport {
  std::string protocol;
  size_t classes = 0;
  std::vector<ReportRow> rows;

  /// model,stage,accuracy,precision,recall,f1,acc_std,seconds. The seconds
  /// column is written as 0 unless `timing` is set, which keeps reruns
  /// byte-identical.
  std::string Csv(bool timing = false) const;
  /// Aligned table in percent, one block per stage.
  std::string Table() const;
  std::string ConfusionCsv() const;
};

/// Every model under the raw and the preprocessed stage on the same folds.
ExperimentReport CompareStages(std::span<const ModelSpec> models,
                               const kdd::Dataset& data,
                               std::span<const size_t> rows,
                               const PipelineConfig& config,
                               const Protocol& protocol, uint64_t seed,
                               const EvalOptions& options = {});

}  // namespace nids::eval

#endif  // NIDS_EVAL_H_
