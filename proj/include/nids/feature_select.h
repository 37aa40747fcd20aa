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

// Information-gain filter selection and the tabular -> square grid embedding
// consumed by the convolutional model.

#ifndef NIDS_FEATURE_SELECT_H_
#define NIDS_FEATURE_SELECT_H_

#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include "nids/matrix.h"

namespace nids::select {

enum class BinStrategy { kEqualFrequency, kEqualWidth };

struct DiscretizationConfig {
  int bin_count = 10;
  BinStrategy strategy = BinStrategy::kEqualFrequency;
};

/// Interior cut points of one feature. A value x falls in bin
/// upper_bound(edges, x) - edges.begin(), so there are edges.size() + 1 bins.
struct FeatureBins {
  std::vector<double> edges;  // strictly ascending

  size_t bin_count() const { return edges.size() + 1; }
  size_t BinOf(double x) const;
};

/// Columns with at most `bin_count` distinct values are binned on their
/// native values. Otherwise equal-frequency cuts sit on order statistics
/// (rank-based, so any strictly increasing transform of the feature yields
/// the same partition) and equal-width cuts split [min, max] evenly.
FeatureBins FitBins(std::span<const double> column,
                    const DiscretizationConfig& config);

struct FeatureScore {
  size_t feature_index = 0;
  double gain_bits = 0.0;
};

struct SelectionResult {
  /// Sorted ascending.
  std::vector<size_t> selected_indices;
  size_t grid_side = 0;
  size_t pad_count = 0;
};

/// Shannon entropy in bits of the empirical class distribution.
/// Labels are non-negative codes. Throws EmptyInputError.
double Entropy(std::span<const int> labels);

/// H(Class) - H(Class | bin). Throws LengthMismatchError, EmptyInputError.
double InfoGain(std::span<const double> feature, std::span<const int> labels,
                const FeatureBins& bins);

/// Fits bins then computes the gain.
FeatureScore ScoreFeature(size_t feature_index,
                          std::span<const double> feature,
                          std::span<const int> labels,
                          const DiscretizationConfig& config);

/// Scores every column of `x`, in column order.
std::vector<FeatureScore> ScoreFeatures(const Matrix& x,
                                        std::span<const int> labels,
                                        const DiscretizationConfig& config);

/// Keeps scores with gain >= min_gain, then the k highest (ties -> lower
/// index). If fewer than k survive the threshold, all survivors are kept.
/// Throws KOutOfRangeError when k is 0 or exceeds scores.size(), or when no
/// feature passes the threshold.
SelectionResult SelectTopK(std::span<const FeatureScore> scores, size_t k,
                           double min_gain = 0.0);

/// Smallest s with s*s >= k.
size_t GridSide(size_t k);

/// Places `row` row-major into an s x s grid (returned flat, length s*s),
/// zero-padding the tail. Throws LengthMismatchError.
std::vector<double> EmbedGrid(std::span<const double> row,
                              const SelectionResult& result);

/// CSV `feature_index,feature_name,gain_bits`, sorted by gain descending
/// (ties by index).
std::string ScoresCsv(std::span<const FeatureScore> scores,
                      std::span<const std::string> names);

}  // namespace nids::select

#endif  // NIDS_FEATURE_SELECT_H_
