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

#include "nids/config.h"

#include <algorithm>
#include <array>
#include <charconv>
#include <functional>
#include <sstream>
#include <thread>

#include "nids/errors.h"

namespace nids::config {
namespace {

std::string Trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return "";
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

std::vector<std::string> SplitList(const std::string& s) {
  std::vector<std::string> out;
  std::string tok;
  std::istringstream in(s);
  while (std::getline(in, tok, ',')) {
    tok = Trim(tok);
    if (!tok.empty()) out.push_back(tok);
  }
  return out;
}

std::string JoinList(const std::vector<std::string>& v) {
  std::string out;
  for (size_t i = 0; i < v.size(); ++i) out += (i ? "," : "") + v[i];
  return out;
}

double ToDouble(const std::string& s) {
  double v = 0.0;
  const auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || p != s.data() + s.size()) {
    throw ConfigError("expected a number, got '" + s + "'");
  }
  return v;
}

uint64_t ToU64(const std::string& s) {
  uint64_t v = 0;
  const auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || p != s.data() + s.size()) {
    throw ConfigError("expected a non-negative integer, got '" + s + "'");
  }
  return v;
}

size_t ToPositive(const std::string& s) {
  const uint64_t v = ToU64(s);
  if (v == 0) throw ConfigError("expected a positive integer, got '" + s + "'");
  return static_cast<size_t>(v);
}

bool ToBool(const std::string& s) {
  if (s == "true" || s == "1" || s == "on" || s == "yes") return true;
  if (s == "false" || s == "0" || s == "off" || s == "no") return false;
  throw ConfigError("expected true or false, got '" + s + "'");
}

std::string FromDouble(double v) {
  char buf[64];
  const auto [p, ec] = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, p);
}

std::string FromBool(bool b) { return b ? "true" : "false"; }

template <size_t N>
std::array<size_t, N> ToSizes(const std::string& s) {
  const auto parts = SplitList(s);
  if (parts.size() != N) {
    throw ConfigError("expected " + std::to_string(N) +
                      " comma-separated values, got '" + s + "'");
  }
  std::array<size_t, N> out{};
  for (size_t i = 0; i < N; ++i) out[i] = ToPositive(parts[i]);
  return out;
}

template <size_t N>
std::string FromSizes(const std::array<size_t, N>& a) {
  std::string out;
  for (size_t i = 0; i < N; ++i) out += (i ? "," : "") + std::to_string(a[i]);
  return out;
}

struct Entry {
  KeyInfo info;
  std::function<std::string(const RunConfig&)> get;
  std::function<void(RunConfig&, const std::string&)> set;
};

#define NIDS_SIZE(field) \
  [](const RunConfig& c) { return std::to_string(c.field); }, \
  [](RunConfig& c, const std::string& v) { c.field = ToPositive(v); }
#define NIDS_DOUBLE(field) \
  [](const RunConfig& c) { return FromDouble(c.field); }, \
  [](RunConfig& c, const std::string& v) { c.field = ToDouble(v); }
#define NIDS_BOOL(field) \
  [](const RunConfig& c) { return FromBool(c.field); }, \
  [](RunConfig& c, const std::string& v) { c.field = ToBool(v); }

const std::vector<Entry>& Table() {
  static const std::vector<Entry> table = {
      {{"preprocess.scaling_mode", "minmax or zscore"},
       [](const RunConfig& c) {
         return prep::ToString(c.pipeline.preprocess.scaling_mode);
       },
       [](RunConfig& c, const std::string& v) {
         c.pipeline.preprocess.scaling_mode = prep::ParseScalingMode(v);
       }},
      {{"preprocess.iqr_k", "IQR fence multiplier (> 0)"},
       NIDS_DOUBLE(pipeline.preprocess.iqr_k)},
      {{"preprocess.outlier_action", "clip (winsorize to fence) or flag"},
       [](const RunConfig& c) {
         return prep::ToString(c.pipeline.preprocess.outlier_action);
       },
       [](RunConfig& c, const std::string& v) {
         c.pipeline.preprocess.outlier_action = prep::ParseOutlierAction(v);
       }},
      {{"select.enabled", "information-gain selection on or off"},
       NIDS_BOOL(pipeline.select_enabled)},
      {{"select.k", "features kept (clamped to the encoded width)"},
       NIDS_SIZE(pipeline.select_k)},
      {{"select.min_gain", "minimum gain in bits for a feature to survive"},
       NIDS_DOUBLE(pipeline.select_min_gain)},
      {{"select.bin_count", "discretization bins per continuous feature"},
       [](const RunConfig& c) {
         return std::to_string(c.pipeline.discretization.bin_count);
       },
       [](RunConfig& c, const std::string& v) {
         c.pipeline.discretization.bin_count = static_cast<int>(ToPositive(v));
       }},
      {{"select.strategy", "equal_frequency or equal_width"},
       [](const RunConfig& c) {
         return std::string(c.pipeline.discretization.strategy ==
                                    select::BinStrategy::kEqualWidth
                                ? "equal_width"
                                : "equal_frequency");
       },
       [](RunConfig& c, const std::string& v) {
         if (v == "equal_width") {
           c.pipeline.discretization.strategy = select::BinStrategy::kEqualWidth;
         } else if (v == "equal_frequency") {
           c.pipeline.discretization.strategy =
               select::BinStrategy::kEqualFrequency;
         } else {
           throw ConfigError("expected equal_frequency or equal_width, got '" +
                             v + "'");
         }
       }},
      {{"encnn.stage_filters", "filters of the three conv stages"},
       [](const RunConfig& c) { return FromSizes(c.encnn.stage_filters); },
       [](RunConfig& c, const std::string& v) {
         c.encnn.stage_filters = ToSizes<3>(v);
       }},
      {{"encnn.pooling_modes", "max or stochastic for each of the three stages"},
       [](const RunConfig& c) {
         std::vector<std::string> v;
         for (auto m : c.encnn.pooling_modes) v.push_back(nn::ToString(m));
         return JoinList(v);
       },
       [](RunConfig& c, const std::string& v) {
         const auto parts = SplitList(v);
         if (parts.size() != 3) {
           throw ConfigError("expected three pooling modes, got '" + v + "'");
         }
         for (size_t i = 0; i < 3; ++i) {
           if (parts[i] == "max") {
             c.encnn.pooling_modes[i] = nn::PoolMode::kMax;
           } else if (parts[i] == "stochastic") {
             c.encnn.pooling_modes[i] = nn::PoolMode::kStochastic;
           } else {
             throw ConfigError("pooling mode must be max or stochastic, got '" +
                               parts[i] + "'");
           }
         }
       }},
      {{"encnn.dense_units", "widths of the two hidden dense layers"},
       [](const RunConfig& c) { return FromSizes(c.encnn.dense_units); },
       [](RunConfig& c, const std::string& v) {
         c.encnn.dense_units = ToSizes<2>(v);
       }},
      {{"encnn.dropout_rate", "dropout after each hidden dense layer, [0, 1)"},
       NIDS_DOUBLE(encnn.dropout_rate)},
      {{"encnn.svm_head", "predict with the linear SVM head"},
       NIDS_BOOL(encnn.svm_head)},
      {{"encnn.lr", "SGD learning rate"}, NIDS_DOUBLE(encnn.sgd.learning_rate)},
      {{"encnn.momentum", "SGD momentum, [0, 1)"}, NIDS_DOUBLE(encnn.sgd.momentum)},
      {{"encnn.batch_size", "SGD mini-batch size"}, NIDS_SIZE(encnn.sgd.batch_size)},
      {{"encnn.epochs", "SGD epochs"},
       [](const RunConfig& c) { return std::to_string(c.encnn.sgd.epochs); },
       [](RunConfig& c, const std::string& v) {
         c.encnn.sgd.epochs = static_cast<size_t>(ToU64(v));
       }},
      {{"encnn.svm_lambda", "SVM head L2 strength"}, NIDS_DOUBLE(encnn.svm.lambda)},
      {{"encnn.svm_epochs", "SVM head epochs"}, NIDS_SIZE(encnn.svm.epochs)},
      {{"encnn.svm_eta0", "SVM head initial step size"},
       NIDS_DOUBLE(encnn.svm.eta0)},
      {{"baseline.logreg.lr", "logistic regression learning rate"},
       NIDS_DOUBLE(baseline.logreg.learning_rate)},
      {{"baseline.logreg.epochs", "logistic regression epochs"},
       NIDS_SIZE(baseline.logreg.epochs)},
      {{"baseline.logreg.l2", "logistic regression L2 strength"},
       NIDS_DOUBLE(baseline.logreg.l2)},
      {{"baseline.logreg.batch_size", "logistic regression mini-batch size"},
       NIDS_SIZE(baseline.logreg.batch_size)},
      {{"baseline.tree.max_depth", "tree depth limit"},
       NIDS_SIZE(baseline.tree.max_depth)},
      {{"baseline.tree.min_leaf", "minimum rows per leaf"},
       NIDS_SIZE(baseline.tree.min_leaf)},
      {{"baseline.forest.n_trees", "trees in the random forest"},
       NIDS_SIZE(baseline.forest.n_trees)},
      {{"baseline.forest.feature_subsample", "sqrt(d) candidate features per split"},
       NIDS_BOOL(baseline.forest.feature_subsample)},
      {{"baseline.forest.bootstrap", "bootstrap rows per tree"},
       NIDS_BOOL(baseline.forest.bootstrap)},
      {{"baseline.adaboost.n_rounds", "boosting rounds"},
       NIDS_SIZE(baseline.adaboost.n_rounds)},
      {{"baseline.svm.lambda", "linear SVM L2 strength"},
       NIDS_DOUBLE(baseline.svm.lambda)},
      {{"baseline.svm.epochs", "linear SVM epochs"}, NIDS_SIZE(baseline.svm.epochs)},
      {{"baseline.svm.eta0", "linear SVM initial step size"},
       NIDS_DOUBLE(baseline.svm.eta0)},
      {{"baseline.voting.members", "voting members by short name"},
       [](const RunConfig& c) {
         std::vector<std::string> v;
         for (auto k : c.baseline.voting.members) {
           v.emplace_back(baselines::ShortName(k));
         }
         return JoinList(v);
       },
       [](RunConfig& c, const std::string& v) {
         std::vector<baselines::ClassifierKind> kinds;
         for (const auto& name : SplitList(v)) {
           const auto k = baselines::ParseClassifierKind(name);
           if (k == baselines::ClassifierKind::kVotingEnsemble) {
             throw ConfigError("voting cannot be its own member");
           }
           kinds.push_back(k);
         }
         if (kinds.empty()) throw ConfigError("voting needs at least one member");
         c.baseline.voting.members = kinds;
       }},
      {{"baseline.class_weighting", "inverse-frequency sample weights"},
       NIDS_BOOL(baseline.class_weighting)},
      {{"eval.protocol", "kfold or holdout"},
       [](const RunConfig& c) {
         return std::string(c.protocol.kind == eval::Protocol::Kind::kKFold
                                ? "kfold"
                                : "holdout");
       },
       [](RunConfig& c, const std::string& v) {
         if (v == "kfold") {
           c.protocol.kind = eval::Protocol::Kind::kKFold;
         } else if (v == "holdout") {
           c.protocol.kind = eval::Protocol::Kind::kHoldout;
         } else {
           throw ConfigError("expected kfold or holdout, got '" + v + "'");
         }
       }},
      {{"eval.folds", "folds for k-fold cross-validation"},
       [](const RunConfig& c) { return std::to_string(c.protocol.folds); },
       [](RunConfig& c, const std::string& v) {
         const size_t k = ToPositive(v);
         if (k < 2) throw ConfigError("eval.folds must be >= 2");
         c.protocol.folds = k;
       }},
      {{"eval.train_fraction", "train share of the holdout split"},
       [](const RunConfig& c) { return FromDouble(c.protocol.train_fraction); },
       [](RunConfig& c, const std::string& v) {
         const double f = ToDouble(v);
         if (!(f > 0.0 && f < 1.0)) {
           throw ConfigError("eval.train_fraction must lie in (0, 1)");
         }
         c.protocol.train_fraction = f;
       }},
      {{"eval.seed", "master seed for splits, sampling and training"},
       [](const RunConfig& c) { return std::to_string(c.seed); },
       [](RunConfig& c, const std::string& v) { c.seed = ToU64(v); }},
      {{"eval.binary", "normal vs attack instead of five classes"},
       NIDS_BOOL(pipeline.binary)},
      {{"eval.threads", "fold-level worker threads, or auto"},
       [](const RunConfig& c) {
         return c.threads == 0 ? std::string("auto") : std::to_string(c.threads);
       },
       [](RunConfig& c, const std::string& v) {
         c.threads = v == "auto" ? 0 : ToPositive(v);
       }},
      {{"eval.per_fold_pipeline", "fit preprocessing inside every fold"},
       NIDS_BOOL(per_fold_pipeline)},
      {{"eval.models", "models compared, e.g. encnn,logreg,tree"},
       [](const RunConfig& c) { return JoinList(c.models); },
       [](RunConfig& c, const std::string& v) {
         auto names = SplitList(v);
         if (names.empty()) throw ConfigError("eval.models is empty");
         for (const auto& n : names) {
           if (n != "encnn") baselines::ParseClassifierKind(n);
         }
         c.models = names;
       }},
      {{"grid.cap", "largest grid allowed"}, NIDS_SIZE(grid_cap)},
      {{"grid.metric", "accuracy, precision, recall or f1"},
       [](const RunConfig& c) { return c.grid_metric; },
       [](RunConfig& c, const std::string& v) {
         eval::SelectMetric(eval::Summary{}, v);
         c.grid_metric = v;
       }},
      {{"grid.inner_folds", "inner folds per grid cell"},
       [](const RunConfig& c) { return std::to_string(c.grid_inner_folds); },
       [](RunConfig& c, const std::string& v) {
         const size_t k = ToPositive(v);
         if (k < 2) throw ConfigError("grid.inner_folds must be >= 2");
         c.grid_inner_folds = k;
       }},
      {{"report.timing", "write wall times into report CSVs"},
       NIDS_BOOL(report_timing)},
  };
  return table;
}

#undef NIDS_SIZE
#undef NIDS_DOUBLE
#undef NIDS_BOOL

const Entry& Find(const std::string& key) {
  for (const auto& e : Table()) {
    if (e.info.key == key) return e;
  }
  throw ConfigError("unknown key '" + key + "'");
}

}  // namespace

size_t RunConfig::ResolvedThreads() const {
  if (threads > 0) return threads;
  return std::max(1u, std::thread::hardware_concurrency());
}

std::span<const KeyInfo> Keys() {
  static const std::vector<KeyInfo> keys = [] {
    std::vector<KeyInfo> k;
    for (const auto& e : Table()) k.push_back(e.info);
    return k;
  }();
  return keys;
}

void Set(RunConfig& config, const std::string& key, const std::string& value) {
  const Entry& e = Find(key);
  try {
    e.set(config, value);
  } catch (const ConfigError& err) {
    throw ConfigError(key + ": " + err.detail());
  }
}

std::string Get(const RunConfig& config, const std::string& key) {
  return Find(key).get(config);
}

std::pair<std::string, std::string> SplitAssignment(const std::string& text) {
  const auto eq = text.find('=');
  if (eq == std::string::npos) {
    throw ConfigError("expected key = value, got '" + text + "'");
  }
  std::string key = Trim(text.substr(0, eq));
  std::string value = Trim(text.substr(eq + 1));
  if (key.empty()) throw ConfigError("empty key in '" + text + "'");
  return {std::move(key), std::move(value)};
}

RunConfig ParseConfigText(const std::string& text, const std::string& source,
                          RunConfig base) {
  std::istringstream in(text);
  std::string line;
  size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    if (Trim(line).empty()) continue;
    try {
      const auto [key, value] = SplitAssignment(line);
      Set(base, key, value);
    } catch (const ConfigError& e) {
      throw ConfigError(source + ":" + std::to_string(line_no) + ": " +
                        e.detail());
    }
  }
  return base;
}

std::string ResolvedText(const RunConfig& config) {
  std::string out;
  for (const auto& e : Table()) {
    out += e.info.key + " = " + e.get(config) + "\n";
  }
  return out;
}

std::string KeyHelp() {
  const RunConfig defaults;
  std::string out = "Configuration keys (key = value, default in brackets):\n";
  for (const auto& e : Table()) {
    std::string line = "  " + e.info.key;
    line.resize(std::max<size_t>(line.size() + 1, 38), ' ');
    out += line + e.info.help + " [" + e.get(defaults) + "]\n";
  }
  return out;
}

eval::ModelSpec MakeModelSpec(const RunConfig& config, const std::string& name) {
  if (name == "encnn") return eval::EnCnnSpec(config.encnn);
  return eval::BaselineSpec(baselines::ParseClassifierKind(name),
                            config.baseline);
}

}  // namespace nids::config
