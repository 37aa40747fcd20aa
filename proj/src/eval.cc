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

#include "nids/eval.h"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <exception>
#include <map>
#include <numeric>
#include <optional>
#include <sstream>
#include <thread>

#include "nids/errors.h"
#include "nids/rng.h"

namespace nids::eval {
namespace {

using Clock = std::chrono::steady_clock;

double SecondsSince(Clock::time_point start) {
  return std::chrono::duration<double>(Clock::now() - start).count();
}

double Ratio(uint64_t num, uint64_t den, const std::string& what,
             std::vector<std::string>& warnings) {
  if (den == 0) {
    warnings.push_back(what + " is 0/0, reported as 0");
    return 0.0;
  }
  return static_cast<double>(num) / static_cast<double>(den);
}

std::string ClassLabel(size_t c, size_t classes) {
  if (classes == 2) return c == 0 ? "Normal" : "Attack";
  if (classes == kdd::kClassCount) return std::string(kdd::ClassName(int(c)));
  return std::to_string(c);
}

std::string Fixed(double v, int digits) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.*f", digits, v);
  return buf;
}

// Runs job(i) for i in [0, n) on up to `threads` workers. The first failure
// by index is rethrown after all workers finish.
void RunIndexed(size_t n, size_t threads,
                const std::function<void(size_t)>& job) {
  std::vector<std::exception_ptr> errors(n);
  if (threads <= 1 || n <= 1) {
    for (size_t i = 0; i < n; ++i) job(i);
    return;
  }
  std::atomic<size_t> next{0};
  auto worker = [&] {
    for (size_t i = next++; i < n; i = next++) {
      try {
        job(i);
      } catch (...) {
        errors[i] = std::current_exception();
      }
    }
  };
  std::vector<std::thread> pool;
  for (size_t t = 0; t < std::min(threads, n); ++t) pool.emplace_back(worker);
  for (auto& t : pool) t.join();
  for (auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }
}

Summary SummaryOf(const Metrics& m) {
  return {m.accuracy, m.macro_precision, m.macro_recall, m.macro_f1};
}

void Aggregate(Evaluation& ev) {
  const double n = static_cast<double>(ev.folds.size());
  if (ev.folds.empty()) return;
  Summary sum, sq;
  for (const auto& m : ev.folds) {
    const Summary s = SummaryOf(m);
    sum.accuracy += s.accuracy;
    sum.precision += s.precision;
    sum.recall += s.recall;
    sum.f1 += s.f1;
  }
  ev.mean = {sum.accuracy / n, sum.precision / n, sum.recall / n, sum.f1 / n};
  for (const auto& m : ev.folds) {
    const Summary s = SummaryOf(m);
    sq.accuracy += (s.accuracy - ev.mean.accuracy) * (s.accuracy - ev.mean.accuracy);
    sq.precision += (s.precision - ev.mean.precision) * (s.precision - ev.mean.precision);
    sq.recall += (s.recall - ev.mean.recall) * (s.recall - ev.mean.recall);
    sq.f1 += (s.f1 - ev.mean.f1) * (s.f1 - ev.mean.f1);
  }
  ev.std = {std::sqrt(sq.accuracy / n), std::sqrt(sq.precision / n),
            std::sqrt(sq.recall / n), std::sqrt(sq.f1 / n)};
}

std::vector<int> Gather(std::span<const int> v, std::span<const size_t> idx) {
  std::vector<int> out(idx.size());
  for (size_t i = 0; i < idx.size(); ++i) out[i] = v[idx[i]];
  return out;
}

}  // namespace

// ---------------------------------------------------------------------------
// Metrics

uint64_t ConfusionMatrix::total() const {
  return std::accumulate(counts.begin(), counts.end(), uint64_t{0});
}

void ConfusionMatrix::Add(const ConfusionMatrix& other) {
  if (other.classes != classes) {
    throw DimensionMismatchError("confusion matrices of different sizes");
  }
  for (size_t i = 0; i < counts.size(); ++i) counts[i] += other.counts[i];
}

ConfusionMatrix Tally(std::span<const int> y_true, std::span<const int> y_pred,
                      size_t classes) {
  if (y_true.size() != y_pred.size()) {
    throw LengthMismatchError(std::to_string(y_true.size()) + " labels, " +
                              std::to_string(y_pred.size()) + " predictions");
  }
  ConfusionMatrix cm(classes);
  for (size_t i = 0; i < y_true.size(); ++i) {
    for (int v : {y_true[i], y_pred[i]}) {
      if (v < 0 || static_cast<size_t>(v) >= classes) {
        throw CodeRangeError("code " + std::to_string(v) + " at position " +
                             std::to_string(i) + " outside [0, " +
                             std::to_string(classes) + ")");
      }
    }
    ++cm.at(y_true[i], y_pred[i]);
  }
  return cm;
}

Metrics ComputeMetrics(const ConfusionMatrix& cm) {
  Metrics m;
  const size_t C = cm.classes;
  const uint64_t total = cm.total();
  uint64_t trace = 0;
  for (size_t c = 0; c < C; ++c) trace += cm.at(c, c);
  m.accuracy = Ratio(trace, total, "accuracy", m.warnings);
  m.per_class.resize(C);
  for (size_t c = 0; c < C; ++c) {
    ClassMetrics& k = m.per_class[c];
    k.tp = cm.at(c, c);
    for (size_t o = 0; o < C; ++o) {
      if (o == c) continue;
      k.fn += cm.at(c, o);
      k.fp += cm.at(o, c);
    }
    k.tn = total - k.tp - k.fp - k.fn;
    const std::string who = "class " + ClassLabel(c, C);
    k.precision = Ratio(k.tp, k.tp + k.fp, who + " precision", m.warnings);
    k.recall = Ratio(k.tp, k.tp + k.fn, who + " recall", m.warnings);
    const double pr = k.precision + k.recall;
    if (pr == 0.0) {
      m.warnings.push_back(who + " f1 is 0/0, reported as 0");
      k.f1 = 0.0;
    } else {
      k.f1 = 2.0 * k.precision * k.recall / pr;
    }
    m.macro_precision += k.precision;
    m.macro_recall += k.recall;
    m.macro_f1 += k.f1;
  }
  if (C > 0) {
    m.macro_precision /= C;
    m.macro_recall /= C;
    m.macro_f1 /= C;
  }
  return m;
}

std::pair<ConfusionMatrix, Metrics> ConfusionAndMetrics(
    std::span<const int> y_true, std::span<const int> y_pred, size_t classes) {
  ConfusionMatrix cm = Tally(y_true, y_pred, classes);
  Metrics m = ComputeMetrics(cm);
  return {std::move(cm), std::move(m)};
}

// ---------------------------------------------------------------------------
// Splitting

namespace {

std::vector<std::vector<size_t>> GroupByClass(std::span<const int> labels) {
  std::vector<std::vector<size_t>> groups;
  for (size_t i = 0; i < labels.size(); ++i) {
    if (labels[i] < 0) {
      throw LabelRangeError("negative label at position " + std::to_string(i));
    }
    const size_t c = static_cast<size_t>(labels[i]);
    if (c >= groups.size()) groups.resize(c + 1);
    groups[c].push_back(i);
  }
  return groups;
}

}  // namespace

std::vector<size_t> FoldPlan::TrainRows(size_t f) const {
  std::vector<size_t> out;
  for (size_t g = 0; g < folds.size(); ++g) {
    if (g != f) out.insert(out.end(), folds[g].begin(), folds[g].end());
  }
  std::sort(out.begin(), out.end());
  return out;
}

FoldPlan StratifiedKFold(std::span<const int> labels, size_t k, uint64_t seed) {
  if (k < 2) throw ConfigError("k-fold needs k >= 2, got " + std::to_string(k));
  if (k > labels.size()) {
    throw KTooLargeError("k=" + std::to_string(k) + " exceeds " +
                         std::to_string(labels.size()) + " rows");
  }
  auto groups = GroupByClass(labels);
  FoldPlan plan;
  plan.k = k;
  plan.folds.resize(k);
  plan.class_counts.assign(k, std::vector<size_t>(groups.size(), 0));
  size_t cursor = 0;
  for (size_t c = 0; c < groups.size(); ++c) {
    auto& g = groups[c];
    Rng rng(DeriveSeed(seed, {c}));
    rng.Shuffle(std::span(g));
    for (size_t row : g) {
      plan.folds[cursor].push_back(row);
      ++plan.class_counts[cursor][c];
      cursor = (cursor + 1) % k;
    }
  }
  for (auto& f : plan.folds) std::sort(f.begin(), f.end());
  return plan;
}

HoldoutSplit MakeHoldoutSplit(std::span<const int> labels,
                              double train_fraction, uint64_t seed) {
  if (!(train_fraction > 0.0 && train_fraction < 1.0)) {
    throw ConfigError("train fraction must lie in (0, 1), got " +
                      Fixed(train_fraction, 4));
  }
  auto groups = GroupByClass(labels);
  HoldoutSplit split;
  for (size_t c = 0; c < groups.size(); ++c) {
    auto& g = groups[c];
    if (g.empty()) continue;
    if (g.size() == 1) {
      split.train.push_back(g[0]);
      split.warnings.push_back("class " + std::to_string(c) +
                               " has a single row; it goes to train only");
      continue;
    }
    Rng rng(DeriveSeed(seed, {c}));
    rng.Shuffle(std::span(g));
    const double want = std::round(train_fraction * double(g.size()));
    const size_t n_train =
        std::clamp<size_t>(static_cast<size_t>(want), 1, g.size() - 1);
    if (n_train == 0 || n_train == g.size()) {
      throw DegenerateSplitError("class " + std::to_string(c) +
                                 " misses one side of the split");
    }
    split.train.insert(split.train.end(), g.begin(), g.begin() + n_train);
    split.test.insert(split.test.end(), g.begin() + n_train, g.end());
  }
  std::sort(split.train.begin(), split.train.end());
  std::sort(split.test.begin(), split.test.end());
  return split;
}

std::vector<size_t> StratifiedSample(std::span<const int> labels, size_t n,
                                     uint64_t seed) {
  if (n == 0 || n > labels.size()) {
    throw ConfigError("sample size " + std::to_string(n) + " outside [1, " +
                      std::to_string(labels.size()) + "]");
  }
  auto groups = GroupByClass(labels);
  const size_t C = groups.size();
  std::vector<size_t> quota(C, 0);
  std::vector<std::pair<double, size_t>> remainders;
  size_t assigned = 0;
  for (size_t c = 0; c < C; ++c) {
    const double exact =
        double(n) * double(groups[c].size()) / double(labels.size());
    quota[c] = static_cast<size_t>(exact);
    assigned += quota[c];
    remainders.push_back({exact - double(quota[c]), c});
  }
  std::stable_sort(remainders.begin(), remainders.end(),
                   [](const auto& a, const auto& b) { return a.first > b.first; });
  for (size_t i = 0; assigned < n; ++i) {
    ++quota[remainders[i % C].second];
    ++assigned;
  }
  // Keep rare classes represented by borrowing from the largest quota.
  for (size_t c = 0; c < C; ++c) {
    if (quota[c] > 0 || groups[c].empty()) continue;
    const size_t donor = static_cast<size_t>(
        std::max_element(quota.begin(), quota.end()) - quota.begin());
    if (quota[donor] <= 1) break;
    --quota[donor];
    quota[c] = 1;
  }
  std::vector<size_t> out;
  out.reserve(n);
  for (size_t c = 0; c < C; ++c) {
    auto& g = groups[c];
    Rng rng(DeriveSeed(seed, {c, 0x5a17}));
    rng.Shuffle(std::span(g));
    out.insert(out.end(), g.begin(), g.begin() + std::min(quota[c], g.size()));
  }
  std::sort(out.begin(), out.end());
  return out;
}

// ---------------------------------------------------------------------------
// Pipeline

std::string ToString(Stage s) {
  return s == Stage::kRaw ? "raw" : "preprocessed";
}

PipelineConfig ForStage(const PipelineConfig& base, Stage stage) {
  if (stage == Stage::kPreprocessed) return base;
  PipelineConfig raw = base;
  raw.preprocess.scaling_mode = prep::ScalingMode::kMinMax;
  raw.preprocess.outlier_action = prep::OutlierAction::kFlag;
  raw.select_enabled = false;
  return raw;
}

size_t FittedPipeline::width() const {
  return select_enabled ? selection.selected_indices.size()
                        : plan.encoded_width();
}

std::vector<std::string> FittedPipeline::column_names() const {
  auto all = plan.column_names();
  if (!select_enabled) return all;
  std::vector<std::string> out;
  for (size_t i : selection.selected_indices) out.push_back(all[i]);
  return out;
}

std::vector<int> PipelineLabels(const kdd::Dataset& data,
                                std::span<const size_t> rows, bool binary) {
  std::vector<int> y(rows.size());
  for (size_t i = 0; i < rows.size(); ++i) {
    const int c = static_cast<int>(data.classes[rows[i]]);
    y[i] = binary ? (c == 0 ? 0 : 1) : c;
  }
  return y;
}

FittedPipeline FitPipeline(const PipelineConfig& config,
                           const kdd::Dataset& data,
                           std::span<const size_t> rows) {
  FittedPipeline p;
  p.plan = prep::FitPlan(data, rows, config.preprocess);
  p.binary = config.binary;
  p.select_enabled = config.select_enabled;
  if (config.select_enabled) {
    if (config.select_k == 0) throw ConfigError("select.k must be >= 1");
    const auto enc = prep::ApplyPlan(p.plan, data, rows);
    const auto y = PipelineLabels(data, rows, config.binary);
    p.scores = select::ScoreFeatures(enc.values, y, config.discretization);
    const size_t k = std::min(config.select_k, enc.values.cols);
    p.selection = select::SelectTopK(p.scores, k, config.select_min_gain);
  } else {
    const size_t w = p.plan.encoded_width();
    p.selection.selected_indices.resize(w);
    std::iota(p.selection.selected_indices.begin(),
              p.selection.selected_indices.end(), size_t{0});
    p.selection.grid_side = select::GridSide(w);
    p.selection.pad_count = p.selection.grid_side * p.selection.grid_side - w;
  }
  return p;
}

Features Transform(const FittedPipeline& pipeline, const kdd::Dataset& data,
                   std::span<const size_t> rows) {
  auto enc = prep::ApplyPlan(pipeline.plan, data, rows);
  Features f;
  f.x = pipeline.select_enabled
            ? enc.values.SelectColumns(pipeline.selection.selected_indices)
            : std::move(enc.values);
  f.y = PipelineLabels(data, rows, pipeline.binary);
  return f;
}

std::string SerializePipeline(const FittedPipeline& pipeline) {
  std::ostringstream out;
  out << "pipeline.binary = " << (pipeline.binary ? 1 : 0) << "\n";
  out << "pipeline.select_enabled = " << (pipeline.select_enabled ? 1 : 0)
      << "\n";
  out << "pipeline.selected = ";
  for (size_t i = 0; i < pipeline.selection.selected_indices.size(); ++i) {
    out << (i ? "," : "") << pipeline.selection.selected_indices[i];
  }
  out << "\n" << prep::SerializePlan(pipeline.plan);
  return out.str();
}

FittedPipeline ParsePipeline(const std::string& text) {
  std::istringstream in(text);
  std::string line, rest;
  FittedPipeline p;
  bool have_selected = false;
  while (std::getline(in, line)) {
    if (line.rfind("pipeline.", 0) != 0) {
      rest += line + "\n";
      continue;
    }
    const auto eq = line.find('=');
    if (eq == std::string::npos) {
      throw PlanFormatError("pipeline line without '=': " + line);
    }
    auto trim = [](std::string s) {
      const auto b = s.find_first_not_of(" \t");
      const auto e = s.find_last_not_of(" \t");
      return b == std::string::npos ? std::string() : s.substr(b, e - b + 1);
    };
    const std::string key = trim(line.substr(0, eq));
    const std::string value = trim(line.substr(eq + 1));
    if (key == "pipeline.binary") {
      p.binary = value == "1";
    } else if (key == "pipeline.select_enabled") {
      p.select_enabled = value == "1";
    } else if (key == "pipeline.selected") {
      have_selected = true;
      std::istringstream vs(value);
      std::string tok;
      while (std::getline(vs, tok, ',')) {
        try {
          p.selection.selected_indices.push_back(std::stoul(tok));
        } catch (const std::exception&) {
          throw PlanFormatError("bad selected index '" + tok + "'");
        }
      }
    } else {
      throw PlanFormatError("unknown pipeline key '" + key + "'");
    }
  }
  if (!have_selected) throw PlanFormatError("pipeline.selected missing");
  p.plan = prep::ParsePlan(rest);
  const size_t width = p.plan.encoded_width();
  for (size_t i : p.selection.selected_indices) {
    if (i >= width) {
      throw PlanFormatError("selected index " + std::to_string(i) +
                            " beyond encoded width " + std::to_string(width));
    }
  }
  const size_t k = p.selection.selected_indices.size();
  p.selection.grid_side = select::GridSide(k);
  p.selection.pad_count = p.selection.grid_side * p.selection.grid_side - k;
  return p;
}

// ---------------------------------------------------------------------------
// Models

size_t GridSideFor(size_t width) {
  return std::max<size_t>(8, select::GridSide(width));
}

Matrix ToGrids(const Matrix& x, size_t side) {
  if (x.cols > side * side) {
    throw DimensionMismatchError(std::to_string(x.cols) +
                                 " features do not fit a " +
                                 std::to_string(side) + "x" +
                                 std::to_string(side) + " grid");
  }
  Matrix g(x.rows, side * side);
  for (size_t r = 0; r < x.rows; ++r) {
    auto src = x.row(r);
    std::copy(src.begin(), src.end(), g.row(r).begin());
  }
  return g;
}

ModelSpec BaselineSpec(baselines::ClassifierKind kind,
                       const baselines::BaselineConfig& config) {
  ModelSpec s;
  s.name = std::string(baselines::DisplayName(kind));
  s.family = ModelSpec::Family::kBaseline;
  s.kind = kind;
  s.baseline = config;
  return s;
}

ModelSpec EnCnnSpec(const encnn::EnCnnConfig& config) {
  ModelSpec s;
  s.name = "EnCNN";
  s.family = ModelSpec::Family::kEnCnn;
  s.encnn = config;
  return s;
}

ModelSpec CustomSpec(std::string name, FitPredictFn fn) {
  ModelSpec s;
  s.name = std::move(name);
  s.family = ModelSpec::Family::kCustom;
  s.custom = std::move(fn);
  return s;
}

encnn::EnCnnModel FitEnCnn(encnn::EnCnnConfig config, const Matrix& x,
                           std::span<const int> y, size_t classes,
                           uint64_t seed) {
  config.class_count = classes;
  config.grid_side = GridSideFor(x.cols);
  config.sgd.seed = seed;
  config.svm.seed = seed;
  encnn::EnCnnModel model = encnn::BuildModel(config);
  const Matrix grids = ToGrids(x, config.grid_side);
  encnn::TrainModel(model, grids, y);
  if (config.svm_head) encnn::FitSvmHead(model, grids, y);
  return model;
}

std::vector<int> PredictEnCnn(encnn::EnCnnModel& model, const Matrix& x) {
  return encnn::Predict(model, ToGrids(x, model.config.grid_side));
}

std::vector<int> FitPredict(const ModelSpec& model, const Matrix& train_x,
                            std::span<const int> train_y, const Matrix& test_x,
                            size_t classes, uint64_t seed) {
  switch (model.family) {
    case ModelSpec::Family::kBaseline: {
      auto cfg = model.baseline;
      cfg.class_count = classes;
      const auto fitted =
          baselines::FitClassifier(model.kind, train_x, train_y, cfg, seed);
      return baselines::PredictClassifier(fitted, test_x);
    }
    case ModelSpec::Family::kEnCnn: {
      auto m = FitEnCnn(model.encnn, train_x, train_y, classes, seed);
      return PredictEnCnn(m, test_x);
    }
    case ModelSpec::Family::kCustom:
      return model.custom(train_x, train_y, test_x, classes, seed);
  }
  throw ConfigError("unknown model family");
}

// ---------------------------------------------------------------------------
// Evaluation

std::string Protocol::Describe() const {
  if (kind == Kind::kKFold) {
    return "stratified " + std::to_string(folds) + "-fold cross-validation";
  }
  const int train = static_cast<int>(std::lround(train_fraction * 100));
  return "stratified holdout " + std::to_string(train) + "/" +
         std::to_string(100 - train);
}

std::vector<std::pair<std::vector<size_t>, std::vector<size_t>>> MakeFolds(
    const kdd::Dataset& data, std::span<const size_t> rows,
    const PipelineConfig& config, const Protocol& protocol, uint64_t seed) {
  (void)config;
  // Stratify on the five classes even in binary mode so rare attack
  // families spread evenly.
  const auto labels = PipelineLabels(data, rows, false);
  auto to_rows = [&](const std::vector<size_t>& pos) {
    std::vector<size_t> out(pos.size());
    for (size_t i = 0; i < pos.size(); ++i) out[i] = rows[pos[i]];
    return out;
  };
  std::vector<std::pair<std::vector<size_t>, std::vector<size_t>>> out;
  if (protocol.kind == Protocol::Kind::kKFold) {
    const FoldPlan plan = StratifiedKFold(labels, protocol.folds, seed);
    for (size_t f = 0; f < plan.k; ++f) {
      out.emplace_back(to_rows(plan.TrainRows(f)), to_rows(plan.folds[f]));
    }
  } else {
    const auto split = MakeHoldoutSplit(labels, protocol.train_fraction, seed);
    out.emplace_back(to_rows(split.train), to_rows(split.test));
  }
  return out;
}

namespace {

struct CachedFit {
  baselines::ClassifierKind kind;
  baselines::BaselineConfig config;
  std::optional<baselines::TrainedClassifier> model;
  double seconds = 0.0;
};

struct FoldOutcome {
  std::vector<ConfusionMatrix> matrices;
  std::vector<double> seconds;
};

// Fits every model on one fold. Baseline fits are cached so a voting
// ensemble with the same config and seed reuses its members.
FoldOutcome RunFold(std::span<const ModelSpec> models, const Features& train,
                    const Features& test, size_t classes, uint64_t seed,
                    size_t fold) {
  FoldOutcome out;
  std::vector<CachedFit> cache;
  auto cached = [&](baselines::ClassifierKind kind,
                    const baselines::BaselineConfig& cfg) -> CachedFit& {
    for (auto& c : cache) {
      if (c.kind == kind && c.config == cfg) return c;
    }
    CachedFit fit{kind, cfg, std::nullopt, 0.0};
    const auto start = Clock::now();
    fit.model = baselines::FitClassifier(kind, train.x, train.y, cfg, seed);
    fit.seconds = SecondsSince(start);
    cache.push_back(std::move(fit));
    return cache.back();
  };

  for (const auto& model : models) {
    try {
      std::vector<int> pred;
      double seconds = 0.0;
      if (model.family == ModelSpec::Family::kBaseline) {
        auto cfg = model.baseline;
        cfg.class_count = classes;
        if (model.kind == baselines::ClassifierKind::kVotingEnsemble) {
          std::vector<baselines::TrainedClassifier> members;
          for (auto k : cfg.voting.members) {
            if (k == baselines::ClassifierKind::kVotingEnsemble) {
              throw ConfigError("voting ensemble cannot contain itself");
            }
            const CachedFit& c = cached(k, cfg);
            members.push_back(*c.model);
            seconds += c.seconds;
          }
          const auto start = Clock::now();
          const auto voting = baselines::MakeVoting(std::move(members));
          pred = baselines::PredictClassifier(voting, test.x);
          seconds += SecondsSince(start);
        } else {
          const CachedFit& c = cached(model.kind, cfg);
          const auto start = Clock::now();
          pred = baselines::PredictClassifier(*c.model, test.x);
          seconds = c.seconds + SecondsSince(start);
        }
      } else {
        const auto start = Clock::now();
        pred = FitPredict(model, train.x, train.y, test.x, classes, seed);
        seconds = SecondsSince(start);
      }
      out.matrices.push_back(Tally(test.y, pred, classes));
      out.seconds.push_back(seconds);
    } catch (const Error& e) {
      throw FoldError(fold, e, model.name);
    }
  }
  return out;
}

}  // namespace

std::vector<Evaluation> EvaluateModels(std::span<const ModelSpec> models,
                                       const kdd::Dataset& data,
                                       std::span<const size_t> rows,
                                       const PipelineConfig& config,
                                       const Protocol& protocol, uint64_t seed,
                                       const EvalOptions& options) {
  const auto folds = MakeFolds(data, rows, config, protocol, seed);
  const size_t classes = config.class_count();

  std::optional<FittedPipeline> shared;
  if (!options.per_fold_pipeline) {
    shared = FitPipeline(config, data, rows);
    if (options.observer) options.observer(0, *shared);
  }

  std::vector<FoldOutcome> outcomes(folds.size());
  RunIndexed(folds.size(), options.threads, [&](size_t f) {
    const auto& [train_rows, test_rows] = folds[f];
    FittedPipeline local;
    try {
      if (!shared) {
        local = FitPipeline(config, data, train_rows);
        if (options.observer) options.observer(f, local);
      }
    } catch (const Error& e) {
      throw FoldError(f, e, "pipeline");
    }
    const FittedPipeline& p = shared ? *shared : local;
    const Features train = Transform(p, data, train_rows);
    const Features test = Transform(p, data, test_rows);
    outcomes[f] = RunFold(models, train, test, classes, DeriveSeed(seed, {f}), f);
  });

  std::vector<Evaluation> evals(models.size());
  for (size_t m = 0; m < models.size(); ++m) {
    Evaluation& ev = evals[m];
    ev.model = models[m].name;
    ev.pooled = ConfusionMatrix(classes);
    for (const auto& o : outcomes) {
      ev.folds.push_back(ComputeMetrics(o.matrices[m]));
      ev.pooled.Add(o.matrices[m]);
      ev.seconds += o.seconds[m];
    }
    Aggregate(ev);
  }
  return evals;
}

Evaluation CrossValidateMatrix(const ModelSpec& model, const Matrix& x,
                               std::span<const int> y, size_t classes,
                               const FoldPlan& plan, uint64_t seed,
                               size_t threads) {
  if (x.rows != y.size()) {
    throw LengthMismatchError(std::to_string(x.rows) + " rows, " +
                              std::to_string(y.size()) + " labels");
  }
  std::vector<ConfusionMatrix> matrices(plan.k);
  std::vector<double> seconds(plan.k, 0.0);
  RunIndexed(plan.k, threads, [&](size_t f) {
    const auto train_rows = plan.TrainRows(f);
    const auto& test_rows = plan.folds[f];
    const Matrix xtr = x.SelectRows(train_rows);
    const Matrix xte = x.SelectRows(test_rows);
    const auto ytr = Gather(y, train_rows);
    const auto yte = Gather(y, test_rows);
    const auto start = Clock::now();
    const auto pred = FitPredict(model, xtr, ytr, xte, classes,
                                 DeriveSeed(seed, {f}));
    seconds[f] = SecondsSince(start);
    matrices[f] = Tally(yte, pred, classes);
  });
  Evaluation ev;
  ev.model = model.name;
  ev.pooled = ConfusionMatrix(classes);
  for (size_t f = 0; f < plan.k; ++f) {
    ev.folds.push_back(ComputeMetrics(matrices[f]));
    ev.pooled.Add(matrices[f]);
    ev.seconds += seconds[f];
  }
  Aggregate(ev);
  return ev;
}

// ---------------------------------------------------------------------------
// Grid search

double SelectMetric(const Summary& s, const std::string& metric) {
  if (metric == "accuracy") return s.accuracy;
  if (metric == "precision") return s.precision;
  if (metric == "recall") return s.recall;
  if (metric == "f1") return s.f1;
  throw ConfigError("unknown selection metric '" + metric +
                    "' (expected accuracy, precision, recall or f1)");
}

GridResult GridSearch(const GridSpec& spec,
                      const std::function<ModelSpec(const Assignment&)>& factory,
                      const Matrix& x, std::span<const int> y, size_t classes,
                      const FoldPlan& inner, uint64_t seed) {
  if (spec.axes.empty()) throw ConfigError("grid search needs at least one axis");
  SelectMetric(Summary{}, spec.metric);

  std::vector<GridAxis> axes;
  size_t combos = 1;
  for (const auto& a : spec.axes) {
    GridAxis d{a.key, {}};
    for (const auto& v : a.values) {
      if (std::find(d.values.begin(), d.values.end(), v) == d.values.end()) {
        d.values.push_back(v);
      }
    }
    if (d.values.empty()) throw ConfigError("grid axis '" + a.key + "' is empty");
    combos *= d.values.size();
    if (combos > spec.cap) {
      throw CapExceededError("grid has more than " + std::to_string(spec.cap) +
                             " combinations");
    }
    axes.push_back(std::move(d));
  }

  GridResult result;
  std::vector<size_t> odometer(axes.size(), 0);
  for (size_t cell = 0; cell < combos; ++cell) {
    GridCell c;
    for (size_t a = 0; a < axes.size(); ++a) {
      c.assignment.emplace_back(axes[a].key, axes[a].values[odometer[a]]);
      c.label += (a ? "," : "") + axes[a].key + "=" + axes[a].values[odometer[a]];
    }
    const ModelSpec model = factory(c.assignment);
    try {
      const auto ev = CrossValidateMatrix(model, x, y, classes, inner, seed);
      c.mean = ev.mean;
      c.std = ev.std;
      c.score = SelectMetric(ev.mean, spec.metric);
    } catch (const DivergenceError& e) {
      c.failed = true;
      c.error = e.what();
    }
    result.cells.push_back(std::move(c));
    for (size_t a = axes.size(); a-- > 0;) {
      if (++odometer[a] < axes[a].values.size()) break;
      odometer[a] = 0;
    }
  }

  std::optional<size_t> best;
  for (size_t i = 0; i < result.cells.size(); ++i) {
    const auto& c = result.cells[i];
    if (c.failed) continue;
    if (!best) {
      best = i;
      continue;
    }
    const auto& b = result.cells[*best];
    if (c.score > b.score || (c.score == b.score && c.label < b.label)) best = i;
  }
  if (!best) throw DivergenceError("every grid cell diverged");
  result.best = *best;
  return result;
}

std::string GridCsv(const GridResult& result) {
  std::ostringstream out;
  out << "config,status,accuracy,precision,recall,f1,score,best\n";
  for (size_t i = 0; i < result.cells.size(); ++i) {
    const auto& c = result.cells[i];
    out << '"' << c.label << "\"," << (c.failed ? "diverged" : "ok") << ','
        << Fixed(c.mean.accuracy, 6) << ',' << Fixed(c.mean.precision, 6) << ','
        << Fixed(c.mean.recall, 6) << ',' << Fixed(c.mean.f1, 6) << ','
        << Fixed(c.score, 6) << ',' << (i == result.best ? 1 : 0) << '\n';
  }
  return out.str();
}

// ---------------------------------------------------------------------------
// Stage comparison

std::string ExperimentReport::Csv(bool timing) const {
  std::ostringstream out;
  out << "model,stage,accuracy,precision,recall,f1,acc_std,seconds\n";
  for (const auto& r : rows) {
    out << r.model << ',' << ToString(r.stage) << ','
        << Fixed(r.mean.accuracy, 6) << ',' << Fixed(r.mean.precision, 6)
        << ',' << Fixed(r.mean.recall, 6) << ',' << Fixed(r.mean.f1, 6) << ','
        << Fixed(r.std.accuracy, 6) << ','
        << (timing ? Fixed(r.seconds, 3) : std::string("0")) << '\n';
  }
  return out.str();
}

std::string ExperimentReport::Table() const {
  std::ostringstream out;
  out << "Protocol: " << protocol << ", " << classes << " classes\n";
  char line[256];
  for (Stage stage : {Stage::kRaw, Stage::kPreprocessed}) {
    out << "\n"
        << (stage == Stage::kRaw ? "Before pre-processing (raw)"
                                 : "After pre-processing")
        << "\n";
    std::snprintf(line, sizeof line, "%-22s %10s %10s %10s %10s %9s %10s\n",
                  "Model", "Accuracy", "Precision", "Recall", "F1-Score",
                  "Acc std", "Seconds");
    out << line;
    for (const auto& r : rows) {
      if (r.stage != stage) continue;
      std::snprintf(line, sizeof line,
                    "%-22s %9.2f%% %9.2f%% %9.2f%% %9.2f%% %8.2f%% %10.2f\n",
                    r.model.c_str(), 100 * r.mean.accuracy,
                    100 * r.mean.precision, 100 * r.mean.recall,
                    100 * r.mean.f1, 100 * r.std.accuracy, r.seconds);
      out << line;
    }
  }
  return out.str();
}

std::string ExperimentReport::ConfusionCsv() const {
  std::ostringstream out;
  out << "model,stage,true_class";
  for (size_t c = 0; c < classes; ++c) out << ",pred_" << ClassLabel(c, classes);
  out << '\n';
  for (const auto& r : rows) {
    for (size_t t = 0; t < classes; ++t) {
      out << r.model << ',' << ToString(r.stage) << ',' << ClassLabel(t, classes);
      for (size_t p = 0; p < classes; ++p) out << ',' << r.pooled.at(t, p);
      out << '\n';
    }
  }
  return out.str();
}

ExperimentReport CompareStages(std::span<const ModelSpec> models,
                               const kdd::Dataset& data,
                               std::span<const size_t> rows,
                               const PipelineConfig& config,
                               const Protocol& protocol, uint64_t seed,
                               const EvalOptions& options) {
  ExperimentReport report;
  report.protocol = protocol.Describe();
  report.classes = config.class_count();
  for (Stage stage : {Stage::kRaw, Stage::kPreprocessed}) {
    const auto evals = EvaluateModels(models, data, rows,
                                      ForStage(config, stage), protocol, seed,
                                      options);
    for (const auto& ev : evals) {
      report.rows.push_back(
          {ev.model, stage, ev.mean, ev.std, ev.seconds, ev.pooled});
    }
  }
  return report;
}

}  // namespace nids::eval
