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

#include "nids/preprocess.h"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <map>
#include <numeric>
#include <sstream>

#include "nids/errors.h"

namespace nids::prep {
namespace {

using kdd::ColumnKind;

std::string FormatDouble(double v) {
  char buf[64];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, ptr);
}

std::vector<size_t> AllRows(size_t n) {
  std::vector<size_t> rows(n);
  std::iota(rows.begin(), rows.end(), size_t{0});
  return rows;
}

// Clipping is skipped for degenerate fences: with IQR = 0 every value off the
// quartile would collapse onto it, erasing sparse counters entirely.
bool ClipActive(const PreprocessConfig& config, const NumericStats& s) {
  return config.outlier_action == OutlierAction::kClip &&
         s.upper_fence > s.lower_fence;
}

double ClipValue(double v, const NumericStats& s) {
  return std::clamp(v, s.lower_fence, s.upper_fence);
}

double Scale(double v, const NumericStats& s, ScalingMode mode) {
  if (mode == ScalingMode::kMinMax) {
    const double range = s.max - s.min;
    return range > 0.0 ? (v - s.min) / range : 0.0;
  }
  return s.std > 0.0 ? (v - s.mean) / s.std : 0.0;
}

void CheckSchema(const PreprocessPlan& plan) {
  const auto schema = kdd::Schema();
  if (plan.numeric.size() != kdd::kNumericCount ||
      plan.categorical.size() != kdd::kCategoricalCount) {
    throw SchemaMismatchError(
        "plan has " + std::to_string(plan.numeric.size()) + " numeric and " +
        std::to_string(plan.categorical.size()) +
        " categorical columns; the KDD schema has 38 and 3");
  }
  for (const auto& col : schema) {
    const std::string& name = col.kind == ColumnKind::kCategorical
                                  ? plan.categorical[col.slot].name
                                  : plan.numeric[col.slot].name;
    if (name != col.name) {
      throw SchemaMismatchError("plan column '" + name + "' where schema has '" +
                                std::string(col.name) + "'");
    }
  }
}

}  // namespace

size_t PreprocessPlan::encoded_width() const {
  size_t w = numeric.size();
  for (const auto& c : categorical) w += c.vocabulary.size();
  return w;
}

std::vector<std::string> PreprocessPlan::column_names() const {
  std::vector<std::string> names;
  names.reserve(encoded_width());
  for (const auto& col : kdd::Schema()) {
    if (col.kind == ColumnKind::kCategorical) {
      const auto& cat = categorical[col.slot];
      for (const auto& v : cat.vocabulary) names.push_back(cat.name + "=" + v);
    } else {
      names.push_back(numeric[col.slot].name);
    }
  }
  return names;
}

double QuantileSorted(std::span<const double> sorted, double p) {
  const size_t n = sorted.size();
  if (n == 0) throw EmptyColumnError("quantile of an empty column");
  if (n == 1) return sorted[0];
  const double h = (n - 1) * p;
  const size_t lo = static_cast<size_t>(std::floor(h));
  if (lo + 1 >= n) return sorted[n - 1];
  const double frac = h - lo;
  return sorted[lo] + frac * (sorted[lo + 1] - sorted[lo]);
}

Fences IqrFences(std::span<const double> column, double k) {
  if (column.empty()) throw EmptyColumnError("IQR fences of an empty column");
  std::vector<double> sorted(column.begin(), column.end());
  std::sort(sorted.begin(), sorted.end());
  const double q1 = QuantileSorted(sorted, 0.25);
  const double q3 = QuantileSorted(sorted, 0.75);
  const double iqr = q3 - q1;
  return {q1 - k * iqr, q3 + k * iqr};
}

PreprocessPlan FitPlan(const kdd::Dataset& train,
                       const PreprocessConfig& config) {
  const auto rows = AllRows(train.size());
  return FitPlan(train, rows, config);
}

PreprocessPlan FitPlan(const kdd::Dataset& train, std::span<const size_t> rows,
                       const PreprocessConfig& config) {
  if (rows.empty()) throw EmptyDatasetError("cannot fit a plan on zero rows");
  if (!(config.iqr_k > 0.0)) {
    throw ConfigError("iqr_k must be positive, got " +
                      FormatDouble(config.iqr_k));
  }
  PreprocessPlan plan;
  plan.config = config;
  plan.fitted_rows = rows.size();
  plan.numeric.resize(kdd::kNumericCount);
  plan.categorical.resize(kdd::kCategoricalCount);

  std::vector<double> values;
  values.reserve(rows.size());
  for (const auto& col : kdd::Schema()) {
    if (col.kind == ColumnKind::kCategorical) {
      auto& cat = plan.categorical[col.slot];
      cat.name = std::string(col.name);
      std::map<std::string, uint64_t> freq;
      for (size_t r : rows) {
        const auto& s = train.records[r].symbols[col.slot];
        if (!s.empty()) ++freq[s];
      }
      uint64_t best = 0;
      for (const auto& [sym, n] : freq) {
        cat.vocabulary.push_back(sym);
        if (n > best) {
          best = n;
          cat.mode = sym;
        }
      }
      continue;
    }

    auto& st = plan.numeric[col.slot];
    st.name = std::string(col.name);
    values.clear();
    for (size_t r : rows) {
      const double v = train.records[r].numeric[col.slot];
      if (!std::isnan(v)) values.push_back(v);
    }
    std::sort(values.begin(), values.end());
    if (!values.empty()) {
      st.median = QuantileSorted(values, 0.5);
      st.q1 = QuantileSorted(values, 0.25);
      st.q3 = QuantileSorted(values, 0.75);
    }
    const double iqr = st.q3 - st.q1;
    st.lower_fence = st.q1 - config.iqr_k * iqr;
    st.upper_fence = st.q3 + config.iqr_k * iqr;

    // Scaling statistics over the values the transform will actually see.
    const bool clip = ClipActive(config, st);
    double lo = INFINITY, hi = -INFINITY, sum = 0.0;
    const double missing_fill = clip ? ClipValue(st.median, st) : st.median;
    auto transformed = [&](size_t r) {
      const double v = train.records[r].numeric[col.slot];
      if (std::isnan(v)) return missing_fill;
      return clip ? ClipValue(v, st) : v;
    };
    for (size_t r : rows) {
      const double v = transformed(r);
      lo = std::min(lo, v);
      hi = std::max(hi, v);
      sum += v;
    }
    st.min = lo;
    st.max = hi;
    st.mean = sum / rows.size();
    double ss = 0.0;
    for (size_t r : rows) {
      const double d = transformed(r) - st.mean;
      ss += d * d;
    }
    st.std = std::sqrt(ss / rows.size());
  }
  return plan;
}

EncodedMatrix ApplyPlan(const PreprocessPlan& plan, const kdd::Dataset& data) {
  const auto rows = AllRows(data.size());
  return ApplyPlan(plan, data, rows);
}

EncodedMatrix ApplyPlan(const PreprocessPlan& plan, const kdd::Dataset& data,
                        std::span<const size_t> rows) {
  CheckSchema(plan);
  EncodedMatrix out;
  out.column_names = plan.column_names();
  out.values = Matrix(rows.size(), out.column_names.size());
  out.labels.resize(rows.size());
  out.outlier_counts.assign(plan.numeric.size(), 0);

  std::vector<bool> clip(plan.numeric.size());
  for (size_t i = 0; i < plan.numeric.size(); ++i) {
    clip[i] = ClipActive(plan.config, plan.numeric[i]);
  }

  for (size_t i = 0; i < rows.size(); ++i) {
    const auto& rec = data.records.at(rows[i]);
    out.labels[i] = static_cast<int>(data.classes.at(rows[i]));
    auto dst = out.values.row(i);
    size_t c = 0;
    for (const auto& col : kdd::Schema()) {
      if (col.kind == ColumnKind::kCategorical) {
        const auto& cat = plan.categorical[col.slot];
        const std::string& raw = rec.symbols[col.slot];
        const std::string& sym = raw.empty() ? cat.mode : raw;
        auto it = std::lower_bound(cat.vocabulary.begin(), cat.vocabulary.end(),
                                   sym);
        if (it != cat.vocabulary.end() && *it == sym) {
          dst[c + (it - cat.vocabulary.begin())] = 1.0;
        }
        c += cat.vocabulary.size();
        continue;
      }
      const auto& st = plan.numeric[col.slot];
      double v = rec.numeric[col.slot];
      if (std::isnan(v)) v = st.median;
      if (v < st.lower_fence || v > st.upper_fence) ++out.outlier_counts[col.slot];
      if (clip[col.slot]) v = ClipValue(v, st);
      dst[c++] = Scale(v, st, plan.config.scaling_mode);
    }
  }
  return out;
}

std::string ToString(ScalingMode m) {
  return m == ScalingMode::kMinMax ? "minmax" : "zscore";
}

std::string ToString(OutlierAction a) {
  return a == OutlierAction::kClip ? "clip" : "flag";
}

ScalingMode ParseScalingMode(const std::string& s) {
  if (s == "minmax") return ScalingMode::kMinMax;
  if (s == "zscore") return ScalingMode::kZScore;
  throw ConfigError("scaling mode must be minmax or zscore, got '" + s + "'");
}

OutlierAction ParseOutlierAction(const std::string& s) {
  if (s == "clip") return OutlierAction::kClip;
  if (s == "flag") return OutlierAction::kFlag;
  throw ConfigError("outlier action must be clip or flag, got '" + s + "'");
}

std::string SerializePlan(const PreprocessPlan& plan) {
  std::ostringstream out;
  out << "# preprocess plan\n";
  out << "format = 1\n";
  out << "fitted_rows = " << plan.fitted_rows << "\n";
  out << "config.scaling_mode = " << ToString(plan.config.scaling_mode) << "\n";
  out << "config.iqr_k = " << FormatDouble(plan.config.iqr_k) << "\n";
  out << "config.outlier_action = " << ToString(plan.config.outlier_action)
      << "\n";
  for (const auto& col : kdd::Schema()) {
    if (col.kind == ColumnKind::kCategorical) {
      const auto& cat = plan.categorical.at(col.slot);
      out << cat.name << ".vocabulary = ";
      for (size_t i = 0; i < cat.vocabulary.size(); ++i) {
        out << (i ? "," : "") << cat.vocabulary[i];
      }
      out << "\n" << cat.name << ".mode = " << cat.mode << "\n";
      continue;
    }
    const auto& s = plan.numeric.at(col.slot);
    const std::pair<const char*, double> stats[] = {
        {"min", s.min},       {"max", s.max},
        {"mean", s.mean},     {"std", s.std},
        {"median", s.median}, {"q1", s.q1},
        {"q3", s.q3},         {"lower_fence", s.lower_fence},
        {"upper_fence", s.upper_fence}};
    for (const auto& [key, v] : stats) {
      out << s.name << '.' << key << " = " << FormatDouble(v) << "\n";
    }
  }
  return out.str();
}

namespace {

std::string Trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return std::string(s.substr(b, e - b + 1));
}

}  // namespace

PreprocessPlan ParsePlan(const std::string& text) {
  std::map<std::string, std::pair<std::string, int>> kv;
  std::istringstream in(text);
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const std::string t = Trim(line);
    if (t.empty() || t[0] == '#') continue;
    const auto eq = t.find('=');
    if (eq == std::string::npos) {
      throw PlanFormatError("line " + std::to_string(line_no) +
                            ": expected 'key = value'");
    }
    const std::string key = Trim(std::string_view(t).substr(0, eq));
    if (!kv.emplace(key, std::pair{Trim(std::string_view(t).substr(eq + 1)),
                                   line_no})
             .second) {
      throw PlanFormatError("line " + std::to_string(line_no) +
                            ": duplicate key '" + key + "'");
    }
  }

  auto take = [&](const std::string& key) -> std::pair<std::string, int> {
    auto it = kv.find(key);
    if (it == kv.end()) throw PlanFormatError("missing key '" + key + "'");
    auto v = it->second;
    kv.erase(it);
    return v;
  };
  auto take_double = [&](const std::string& key) {
    auto [v, ln] = take(key);
    double d = 0.0;
    auto [ptr, ec] = std::from_chars(v.data(), v.data() + v.size(), d);
    if (ec != std::errc() || ptr != v.data() + v.size()) {
      throw PlanFormatError("line " + std::to_string(ln) + ": '" + key +
                            "' is not a number: '" + v + "'");
    }
    return d;
  };

  PreprocessPlan plan;
  if (take("format").first != "1") {
    throw PlanFormatError("unsupported plan format");
  }
  plan.fitted_rows = static_cast<uint64_t>(take_double("fitted_rows"));
  try {
    plan.config.scaling_mode = ParseScalingMode(take("config.scaling_mode").first);
    plan.config.outlier_action =
        ParseOutlierAction(take("config.outlier_action").first);
  } catch (const ConfigError& e) {
    throw PlanFormatError(e.detail());
  }
  plan.config.iqr_k = take_double("config.iqr_k");
  plan.numeric.resize(kdd::kNumericCount);
  plan.categorical.resize(kdd::kCategoricalCount);
  for (const auto& col : kdd::Schema()) {
    const std::string name(col.name);
    if (col.kind == ColumnKind::kCategorical) {
      auto& cat = plan.categorical[col.slot];
      cat.name = name;
      const std::string vocab = take(name + ".vocabulary").first;
      std::istringstream vs(vocab);
      std::string item;
      while (std::getline(vs, item, ',')) {
        if (!item.empty()) cat.vocabulary.push_back(item);
      }
      if (!std::is_sorted(cat.vocabulary.begin(), cat.vocabulary.end()) ||
          std::adjacent_find(cat.vocabulary.begin(), cat.vocabulary.end()) !=
              cat.vocabulary.end()) {
        throw PlanFormatError(name + ".vocabulary must be sorted and unique");
      }
      cat.mode = take(name + ".mode").first;
      continue;
    }
    auto& s = plan.numeric[col.slot];
    s.name = name;
    s.min = take_double(name + ".min");
    s.max = take_double(name + ".max");
    s.mean = take_double(name + ".mean");
    s.std = take_double(name + ".std");
    s.median = take_double(name + ".median");
    s.q1 = take_double(name + ".q1");
    s.q3 = take_double(name + ".q3");
    s.lower_fence = take_double(name + ".lower_fence");
    s.upper_fence = take_double(name + ".upper_fence");
  }
  if (!kv.empty()) {
    const auto& [key, v] = *kv.begin();
    throw PlanFormatError("line " + std::to_string(v.second) +
                          ": unknown key '" + key + "'");
  }
  return plan;
}

}  // namespace nids::prep
