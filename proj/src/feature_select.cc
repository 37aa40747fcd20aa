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

#include "nids/feature_select.h"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <numeric>
#include <sstream>

#include "nids/errors.h"

namespace nids::select {
namespace {

// Entropy of a histogram with total n.
double HistogramEntropy(std::span<const size_t> counts, size_t n) {
  double h = 0.0;
  for (size_t c : counts) {
    if (c == 0) continue;
    const double p = static_cast<double>(c) / n;
    h -= p * std::log2(p);
  }
  return h;
}

int MaxLabel(std::span<const int> labels) {
  int m = 0;
  for (int l : labels) {
    if (l < 0) throw LabelRangeError("negative class code " + std::to_string(l));
    m = std::max(m, l);
  }
  return m;
}

}  // namespace

size_t FeatureBins::BinOf(double x) const {
  return static_cast<size_t>(std::upper_bound(edges.begin(), edges.end(), x) -
                             edges.begin());
}

FeatureBins FitBins(std::span<const double> column,
                    const DiscretizationConfig& config) {
  if (config.bin_count < 1) {
    throw ConfigError("bin_count must be >= 1, got " +
                      std::to_string(config.bin_count));
  }
  FeatureBins bins;
  if (column.empty()) return bins;
  std::vector<double> sorted(column.begin(), column.end());
  std::sort(sorted.begin(), sorted.end());

  std::vector<double> distinct = sorted;
  distinct.erase(std::unique(distinct.begin(), distinct.end()), distinct.end());
  const size_t b = static_cast<size_t>(config.bin_count);
  if (distinct.size() <= b) {
    bins.edges.assign(distinct.begin() + 1, distinct.end());
    return bins;
  }

  const size_t n = sorted.size();
  if (config.strategy == BinStrategy::kEqualFrequency) {
    for (size_t i = 1; i < b; ++i) {
      // Cut at the first element of the i-th rank block.
      const size_t rank = (i * n + b - 1) / b;
      bins.edges.push_back(sorted[std::min(rank, n - 1)]);
    }
  } else {
    const double lo = sorted.front();
    const double hi = sorted.back();
    for (size_t i = 1; i < b; ++i) {
      bins.edges.push_back(lo + (hi - lo) * static_cast<double>(i) / b);
    }
  }
  // A cut at the minimum would leave an empty first bin.
  auto& e = bins.edges;
  e.erase(std::unique(e.begin(), e.end()), e.end());
  e.erase(std::remove_if(e.begin(), e.end(),
                         [&](double v) { return v <= sorted.front(); }),
          e.end());
  return bins;
}

double Entropy(std::span<const int> labels) {
  if (labels.empty()) throw EmptyInputError("entropy of an empty label set");
  std::vector<size_t> counts(MaxLabel(labels) + 1, 0);
  for (int l : labels) ++counts[l];
  return HistogramEntropy(counts, labels.size());
}

double InfoGain(std::span<const double> feature, std::span<const int> labels,
                const FeatureBins& bins) {
  if (feature.size() != labels.size()) {
    throw LengthMismatchError("feature has " + std::to_string(feature.size()) +
                              " rows, labels " + std::to_string(labels.size()));
  }
  if (labels.empty()) throw EmptyInputError("info gain of an empty column");
  const size_t classes = MaxLabel(labels) + 1;
  const size_t nb = bins.bin_count();
  std::vector<size_t> table(nb * classes, 0);
  std::vector<size_t> class_totals(classes, 0);
  std::vector<size_t> bin_totals(nb, 0);
  for (size_t i = 0; i < labels.size(); ++i) {
    const size_t b = bins.BinOf(feature[i]);
    ++table[b * classes + labels[i]];
    ++class_totals[labels[i]];
    ++bin_totals[b];
  }
  const size_t n = labels.size();
  const double h_class = HistogramEntropy(class_totals, n);
  double h_cond = 0.0;
  for (size_t b = 0; b < nb; ++b) {
    if (bin_totals[b] == 0) continue;
    h_cond += static_cast<double>(bin_totals[b]) / n *
              HistogramEntropy(std::span(table).subspan(b * classes, classes),
                               bin_totals[b]);
  }
  return std::clamp(h_class - h_cond, 0.0, h_class);
}

FeatureScore ScoreFeature(size_t feature_index,
                          std::span<const double> feature,
                          std::span<const int> labels,
                          const DiscretizationConfig& config) {
  const FeatureBins bins = FitBins(feature, config);
  return {feature_index, InfoGain(feature, labels, bins)};
}

std::vector<FeatureScore> ScoreFeatures(const Matrix& x,
                                        std::span<const int> labels,
                                        const DiscretizationConfig& config) {
  std::vector<FeatureScore> out;
  out.reserve(x.cols);
  for (size_t c = 0; c < x.cols; ++c) {
    const auto col = x.column(c);
    out.push_back(ScoreFeature(c, col, labels, config));
  }
  return out;
}

SelectionResult SelectTopK(std::span<const FeatureScore> scores, size_t k,
                           double min_gain) {
  if (k == 0 || k > scores.size()) {
    throw KOutOfRangeError("k=" + std::to_string(k) + " outside [1, " +
                           std::to_string(scores.size()) + "]");
  }
  std::vector<FeatureScore> kept;
  for (const auto& s : scores) {
    if (s.gain_bits >= min_gain) kept.push_back(s);
  }
  if (kept.empty()) {
    throw KOutOfRangeError("no feature reaches the minimum gain threshold");
  }
  std::sort(kept.begin(), kept.end(), [](const auto& a, const auto& b) {
    if (a.gain_bits != b.gain_bits) return a.gain_bits > b.gain_bits;
    return a.feature_index < b.feature_index;
  });
  kept.resize(std::min(k, kept.size()));

  SelectionResult r;
  for (const auto& s : kept) r.selected_indices.push_back(s.feature_index);
  std::sort(r.selected_indices.begin(), r.selected_indices.end());
  r.grid_side = GridSide(r.selected_indices.size());
  r.pad_count = r.grid_side * r.grid_side - r.selected_indices.size();
  return r;
}

size_t GridSide(size_t k) {
  size_t s = static_cast<size_t>(std::sqrt(static_cast<double>(k)));
  while (s * s < k) ++s;
  while (s > 0 && (s - 1) * (s - 1) >= k) --s;
  return s;
}

std::vector<double> EmbedGrid(std::span<const double> row,
                              const SelectionResult& result) {
  if (row.size() != result.selected_indices.size()) {
    throw LengthMismatchError("row has " + std::to_string(row.size()) +
                              " values, selection has " +
                              std::to_string(result.selected_indices.size()));
  }
  std::vector<double> grid(result.grid_side * result.grid_side, 0.0);
  std::copy(row.begin(), row.end(), grid.begin());
  return grid;
}

std::string ScoresCsv(std::span<const FeatureScore> scores,
                      std::span<const std::string> names) {
  std::vector<FeatureScore> sorted(scores.begin(), scores.end());
  std::sort(sorted.begin(), sorted.end(), [](const auto& a, const auto& b) {
    if (a.gain_bits != b.gain_bits) return a.gain_bits > b.gain_bits;
    return a.feature_index < b.feature_index;
  });
  std::ostringstream out;
  out << "feature_index,feature_name,gain_bits\n";
  char buf[64];
  for (const auto& s : sorted) {
    auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), s.gain_bits);
    out << s.feature_index << ','
        << (s.feature_index < names.size() ? names[s.feature_index] : "")
        << ',' << std::string_view(buf, ptr - buf) << '\n';
  }
  return out.str();
}

}  // namespace nids::select
