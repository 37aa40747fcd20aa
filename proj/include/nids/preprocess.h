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

// Fit-then-apply tabular transforms for KDD records: median/mode imputation,
// IQR fence handling, one-hot encoding of symbols, and min-max or z-score
// scaling.
//
// Order of operations in ApplyPlan, per numeric column:
//   impute (median) -> clip to fences (Clip mode only) -> scale.
// Scaling statistics (min, max, mean, std) are taken over the imputed and
// clipped training values, so the transform is fitted on exactly what it
// will later scale.

#ifndef NIDS_PREPROCESS_H_
#define NIDS_PREPROCESS_H_

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "nids/kdd.h"
#include "nids/matrix.h"

namespace nids::prep {

enum class ScalingMode { kMinMax, kZScore };

/// kClip winsorizes to the fences. kFlag leaves values untouched and only
/// counts them (EncodedMatrix::outlier_counts).
enum class OutlierAction { kClip, kFlag };

struct PreprocessConfig {
  ScalingMode scaling_mode = ScalingMode::kMinMax;
  double iqr_k = 1.5;
  OutlierAction outlier_action = OutlierAction::kClip;

  friend bool operator==(const PreprocessConfig&, const PreprocessConfig&) = default;
};

struct NumericStats {
  std::string name;
  double min = 0.0;
  double max = 0.0;
  double mean = 0.0;
  double std = 0.0;  // population
  double median = 0.0;
  double q1 = 0.0;
  double q3 = 0.0;
  double lower_fence = 0.0;
  double upper_fence = 0.0;

  friend bool operator==(const NumericStats&, const NumericStats&) = default;
};

struct CategoricalStats {
  std::string name;
  /// Sorted, duplicate-free.
  std::vector<std::string> vocabulary;
  std::string mode;

  friend bool operator==(const CategoricalStats&, const CategoricalStats&) = default;
};

struct PreprocessPlan {
  PreprocessConfig config;
  std::vector<NumericStats> numeric;          // kdd::kNumericCount entries
  std::vector<CategoricalStats> categorical;  // kdd::kCategoricalCount entries
  uint64_t fitted_rows = 0;

  /// Width of the encoded matrix.
  size_t encoded_width() const;
  std::vector<std::string> column_names() const;

  friend bool operator==(const PreprocessPlan&, const PreprocessPlan&) = default;
};

struct EncodedMatrix {
  Matrix values;
  std::vector<int> labels;
  std::vector<std::string> column_names;
  /// Per numeric column, rows outside the fences (both actions count).
  std::vector<uint64_t> outlier_counts;
};

/// Linear-interpolation quantile of sorted data, h = (n-1)p.
double QuantileSorted(std::span<const double> sorted, double p);

struct Fences {
  double lower;
  double upper;
};

/// Q1 - k*IQR, Q3 + k*IQR. Throws EmptyColumnError.
Fences IqrFences(std::span<const double> column, double k);

/// Fits on `rows` of `train` (all rows when empty is passed via the overload).
/// Throws EmptyDatasetError, ConfigError (iqr_k <= 0).
PreprocessPlan FitPlan(const kdd::Dataset& train, std::span<const size_t> rows,
                       const PreprocessConfig& config);
PreprocessPlan FitPlan(const kdd::Dataset& train,
                       const PreprocessConfig& config);

/// Encodes `rows` of `data` in order. Labels are the AttackClass codes.
/// Throws SchemaMismatchError when the plan does not describe the KDD schema.
EncodedMatrix ApplyPlan(const PreprocessPlan& plan, const kdd::Dataset& data,
                        std::span<const size_t> rows);
EncodedMatrix ApplyPlan(const PreprocessPlan& plan, const kdd::Dataset& data);

/// Key-value text form: `column.stat = value` with '#' comments.
std::string SerializePlan(const PreprocessPlan& plan);
/// Throws PlanFormatError naming the offending line.
PreprocessPlan ParsePlan(const std::string& text);

std::string ToString(ScalingMode m);
std::string ToString(OutlierAction a);
/// Throws ConfigError.
ScalingMode ParseScalingMode(const std::string& s);
OutlierAction ParseOutlierAction(const std::string& s);

}  // namespace nids::prep

#endif  // NIDS_PREPROCESS_H_
