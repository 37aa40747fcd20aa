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

#include "nids/baselines.h"

#include <algorithm>
#include <array>
#include <cmath>
#include <numeric>
#include <set>

#include "nids/binio.h"
#include "nids/errors.h"
#include "nids/nn.h"
#include "nids/rng.h"

namespace nids::baselines {
namespace {

constexpr std::array<ClassifierKind, 6> kAllKinds = {
    ClassifierKind::kLogisticRegression, ClassifierKind::kDecisionTree,
    ClassifierKind::kLinearSvm,          ClassifierKind::kRandomForest,
    ClassifierKind::kAdaBoost,           ClassifierKind::kVotingEnsemble};

int ArgMaxLowest(std::span<const double> v) {
  return static_cast<int>(std::max_element(v.begin(), v.end()) - v.begin());
}

// ---------------------------------------------------------------------------
// CART with presorted feature orders.

// Column-major copy of X plus each feature's row order sorted by value.
struct Presorted {
  size_t n = 0;
  size_t d = 0;
  std::vector<double> xt;                    // d x n
  std::vector<std::vector<uint32_t>> order;  // d lists of n rows

  explicit Presorted(const Matrix& x) : n(x.rows), d(x.cols), xt(x.rows * x.cols) {
    for (size_t r = 0; r < n; ++r) {
      for (size_t f = 0; f < d; ++f) xt[f * n + r] = x.at(r, f);
    }
    order.resize(d);
    for (size_t f = 0; f < d; ++f) {
      auto& o = order[f];
      o.resize(n);
      std::iota(o.begin(), o.end(), 0u);
      const double* col = &xt[f * n];
      std::stable_sort(o.begin(), o.end(),
                       [col](uint32_t a, uint32_t b) { return col[a] < col[b]; });
    }
  }

  double value(size_t f, uint32_t r) const { return xt[f * n + r]; }
};

class TreeBuilder {
 public:
  // `count[i]` is the multiplicity of row i (bootstrap); `weight[i]` its
  // per-copy weight. Rows with count 0 are ignored.
  TreeBuilder(const Presorted& data, std::span<const int> y, size_t classes,
              const TreeConfig& config, size_t mtry, Rng* rng,
              std::span<const double> weight, std::span<const uint32_t> count)
      : data_(data),
        y_(y),
        classes_(classes),
        config_(config),
        mtry_(std::min(mtry, data.d)),
        rng_(rng),
        count_(count),
        sw_(data.n),
        goes_left_(data.n, 0) {
    for (size_t i = 0; i < data.n; ++i) sw_[i] = weight[i] * count[i];
  }

  DecisionTree Build() {
    std::vector<std::vector<uint32_t>> lists(data_.d);
    for (size_t f = 0; f < data_.d; ++f) {
      auto& l = lists[f];
      l.reserve(data_.n);
      for (uint32_t r : data_.order[f]) {
        if (count_[r] > 0) l.push_back(r);
      }
    }
    tree_.nodes.clear();
    Grow(std::move(lists), 0);
    return std::move(tree_);
  }

 private:
  struct Split {
    bool found = false;
    size_t feature = 0;
    size_t position = 0;  // last index (in the feature list) going left
    double threshold = 0.0;
    double score = INFINITY;
  };

  int64_t Grow(std::vector<std::vector<uint32_t>> lists, size_t depth) {
    const int64_t id = static_cast<int64_t>(tree_.nodes.size());
    tree_.nodes.emplace_back();

    // Any feature list enumerates the node's rows.
    const auto& rows = lists.empty() ? empty_ : lists[0];
    std::vector<double> totals(classes_, 0.0);
    uint64_t n_count = 0;
    for (uint32_t r : rows) {
      totals[y_[r]] += sw_[r];
      n_count += count_[r];
    }
    tree_.nodes[id].label = ArgMaxLowest(totals);

    size_t live = 0;
    for (double t : totals) live += t > 0.0;
    if (depth >= config_.max_depth || live <= 1 ||
        n_count < 2 * config_.min_leaf || lists.empty()) {
      return id;
    }

    const Split best = FindSplit(lists, totals, n_count);
    if (!best.found) return id;

    const auto& split_list = lists[best.feature];
    for (size_t i = 0; i <= best.position; ++i) goes_left_[split_list[i]] = 1;
    std::vector<std::vector<uint32_t>> left(data_.d), right(data_.d);
    for (size_t f = 0; f < data_.d; ++f) {
      for (uint32_t r : lists[f]) {
        (goes_left_[r] ? left[f] : right[f]).push_back(r);
      }
      std::vector<uint32_t>().swap(lists[f]);
    }
    for (uint32_t r : left[0]) goes_left_[r] = 0;

    tree_.nodes[id].feature = static_cast<int64_t>(best.feature);
    tree_.nodes[id].threshold = best.threshold;
    const int64_t l = Grow(std::move(left), depth + 1);
    const int64_t rgt = Grow(std::move(right), depth + 1);
    tree_.nodes[id].left = l;
    tree_.nodes[id].right = rgt;
    return id;
  }

  std::vector<size_t> CandidateFeatures() {
    std::vector<size_t> feats(data_.d);
    std::iota(feats.begin(), feats.end(), size_t{0});
    if (mtry_ >= data_.d || rng_ == nullptr) return feats;
    // Partial Fisher-Yates, then evaluate in ascending order.
    for (size_t i = 0; i < mtry_; ++i) {
      const size_t j = i + static_cast<size_t>(rng_->Index(data_.d - i));
      std::swap(feats[i], feats[j]);
    }
    feats.resize(mtry_);
    std::sort(feats.begin(), feats.end());
    return feats;
  }

  Split FindSplit(const std::vector<std::vector<uint32_t>>& lists,
                  const std::vector<double>& totals, uint64_t n_count) {
    Split best;
    double total_w = 0.0;
    for (double t : totals) total_w += t;
    std::vector<double> left(classes_);
    for (size_t f : CandidateFeatures()) {
      const auto& list = lists[f];
      std::fill(left.begin(), left.end(), 0.0);
      double left_w = 0.0;
      uint64_t left_n = 0;
      for (size_t i = 0; i + 1 < list.size(); ++i) {
        const uint32_t r = list[i];
        left[y_[r]] += sw_[r];
        left_w += sw_[r];
        left_n += count_[r];
        const double a = data_.value(f, r);
        const double b = data_.value(f, list[i + 1]);
        if (!(a < b)) continue;
        if (left_n < config_.min_leaf || n_count - left_n < config_.min_leaf) {
          continue;
        }
        // W * gini = W - sum_c w_c^2 / W for each side.
        const double right_w = total_w - left_w;
        double sl = 0.0, sr = 0.0;
        for (size_t c = 0; c < classes_; ++c) {
          sl += left[c] * left[c];
          const double rc = totals[c] - left[c];
          sr += rc * rc;
        }
        const double score = (left_w > 0.0 ? left_w - sl / left_w : 0.0) +
                             (right_w > 0.0 ? right_w - sr / right_w : 0.0);
        if (score < best.score) {
          double t = 0.5 * (a + b);
          if (!(t < b)) t = a;
          best = {true, f, i, t, score};
        }
      }
    }
    return best;
  }

  const Presorted& data_;
  std::span<const int> y_;
  size_t classes_;
  TreeConfig config_;
  size_t mtry_;
  Rng* rng_;
  std::span<const uint32_t> count_;
  std::vector<double> sw_;
  std::vector<uint8_t> goes_left_;
  std::vector<uint32_t> empty_;
  DecisionTree tree_;
};

DecisionTree FitTree(const Presorted& data, std::span<const int> y,
                     size_t classes, const TreeConfig& config, size_t mtry,
                     Rng* rng, std::span<const double> weight,
                     std::span<const uint32_t> count) {
  TreeBuilder b(data, y, classes, config, mtry, rng, weight, count);
  return b.Build();
}

std::vector<double> SampleWeights(std::span<const int> y, size_t classes,
                                  bool class_weighting) {
  std::vector<double> w(y.size(), 1.0);
  if (!class_weighting) return w;
  std::vector<size_t> counts(classes, 0);
  for (int l : y) ++counts[l];
  size_t present = 0;
  for (size_t c : counts) present += c > 0;
  for (size_t i = 0; i < y.size(); ++i) {
    w[i] = static_cast<double>(y.size()) / (present * counts[y[i]]);
  }
  return w;
}

// ---------------------------------------------------------------------------

SoftmaxRegression FitLogReg(const Matrix& x, std::span<const int> y,
                            size_t classes, const LogRegConfig& cfg,
                            std::span<const double> sample_weight,
                            uint64_t seed) {
  if (!(cfg.learning_rate > 0.0) || cfg.batch_size == 0) {
    throw ConfigError("logreg learning rate and batch size must be positive");
  }
  const size_t d = x.cols;
  SoftmaxRegression m{std::vector<double>(classes * d, 0.0),
                      std::vector<double>(classes, 0.0)};
  std::vector<double> gw(classes * d), gb(classes), logits(classes);
  std::vector<size_t> order(x.rows);
  std::iota(order.begin(), order.end(), size_t{0});
  Rng rng(seed);
  for (size_t epoch = 0; epoch < cfg.epochs; ++epoch) {
    rng.Shuffle(std::span(order));
    for (size_t b0 = 0; b0 < order.size(); b0 += cfg.batch_size) {
      const size_t b1 = std::min(order.size(), b0 + cfg.batch_size);
      std::fill(gw.begin(), gw.end(), 0.0);
      std::fill(gb.begin(), gb.end(), 0.0);
      for (size_t k = b0; k < b1; ++k) {
        const size_t i = order[k];
        auto row = x.row(i);
        for (size_t c = 0; c < classes; ++c) {
          const double* w = &m.weights[c * d];
          double s = m.bias[c];
          for (size_t j = 0; j < d; ++j) s += w[j] * row[j];
          logits[c] = s;
        }
        const auto p = nn::Softmax(logits);
        for (size_t c = 0; c < classes; ++c) {
          const double g =
              sample_weight[i] * (p[c] - (y[i] == static_cast<int>(c) ? 1.0 : 0.0));
          if (g == 0.0) continue;
          double* gwc = &gw[c * d];
          for (size_t j = 0; j < d; ++j) gwc[j] += g * row[j];
          gb[c] += g;
        }
      }
      const double inv = 1.0 / static_cast<double>(b1 - b0);
      for (size_t k = 0; k < m.weights.size(); ++k) {
        m.weights[k] -= cfg.learning_rate * (gw[k] * inv + cfg.l2 * m.weights[k]);
      }
      for (size_t c = 0; c < classes; ++c) {
        m.bias[c] -= cfg.learning_rate * gb[c] * inv;
      }
    }
  }
  return m;
}

int PredictLogReg(const SoftmaxRegression& m, size_t classes,
                  std::span<const double> x) {
  const size_t d = x.size();
  std::vector<double> logits(classes);
  for (size_t c = 0; c < classes; ++c) {
    const double* w = &m.weights[c * d];
    double s = m.bias[c];
    for (size_t j = 0; j < d; ++j) s += w[j] * x[j];
    logits[c] = s;
  }
  return ArgMaxLowest(logits);
}

RandomForest FitForest(const Matrix& x, std::span<const int> y, size_t classes,
                       const TreeConfig& tree, const ForestConfig& cfg,
                       std::span<const double> sample_weight, uint64_t seed) {
  if (cfg.n_trees == 0) throw ConfigError("forest needs at least one tree");
  const Presorted data(x);
  const size_t mtry =
      cfg.feature_subsample
          ? std::max<size_t>(1, static_cast<size_t>(std::sqrt(double(x.cols))))
          : x.cols;
  RandomForest forest;
  std::vector<uint32_t> count(x.rows);
  for (size_t t = 0; t < cfg.n_trees; ++t) {
    Rng rng(DeriveSeed(seed, {t}));
    if (cfg.bootstrap) {
      std::fill(count.begin(), count.end(), 0u);
      for (size_t i = 0; i < x.rows; ++i) ++count[rng.Index(x.rows)];
    } else {
      std::fill(count.begin(), count.end(), 1u);
    }
    forest.trees.push_back(FitTree(data, y, classes, tree, mtry, &rng,
                                   sample_weight, count));
  }
  return forest;
}

AdaBoostModel FitAdaBoost(const Matrix& x, std::span<const int> y,
                          size_t classes, const AdaBoostConfig& cfg,
                          std::span<const double> sample_weight) {
  if (cfg.n_rounds == 0) throw ConfigError("adaboost needs at least one round");
  const Presorted data(x);
  const TreeConfig stump{1, 1};
  std::vector<uint32_t> count(x.rows, 1u);
  std::vector<double> w(sample_weight.begin(), sample_weight.end());
  double wsum = std::accumulate(w.begin(), w.end(), 0.0);
  for (double& v : w) v /= wsum;

  AdaBoostModel m;
  const double reject_at = static_cast<double>(classes - 1) / classes;
  std::vector<uint8_t> miss(x.rows);
  for (size_t round = 0; round < cfg.n_rounds; ++round) {
    DecisionTree h = FitTree(data, y, classes, stump, x.cols, nullptr, w, count);
    double err = 0.0;
    for (size_t i = 0; i < x.rows; ++i) {
      miss[i] = h.Predict(x.row(i)) != y[i];
      if (miss[i]) err += w[i];
    }
    if (err >= reject_at) {
      // Rejected round; the first one is kept with unit weight so the
      // ensemble is never empty.
      if (m.stumps.empty()) {
        m.stumps.push_back(std::move(h));
        m.alphas.push_back(1.0);
        m.errors.push_back(err);
      }
      break;
    }
    const double alpha = SammeAlpha(std::max(err, 1e-10), classes);
    m.stumps.push_back(std::move(h));
    m.alphas.push_back(alpha);
    m.errors.push_back(err);
    if (err <= 0.0) break;
    wsum = 0.0;
    for (size_t i = 0; i < x.rows; ++i) {
      if (miss[i]) w[i] *= std::exp(alpha);
      wsum += w[i];
    }
    for (double& v : w) v /= wsum;
  }
  return m;
}

void CheckFitInputs(const Matrix& x, std::span<const int> y, size_t classes) {
  if (x.rows != y.size()) {
    throw LengthMismatchError(std::to_string(x.rows) + " rows, " +
                              std::to_string(y.size()) + " labels");
  }
  if (classes < 2) throw ConfigError("class_count must be >= 2");
  std::set<int> present;
  for (int l : y) {
    if (l < 0 || static_cast<size_t>(l) >= classes) {
      throw LabelRangeError("label " + std::to_string(l) + " outside [0, " +
                            std::to_string(classes) + ")");
    }
    present.insert(l);
  }
  if (present.size() < 2) {
    throw SingleClassError("training data holds " +
                           std::to_string(present.size()) +
                           " class(es); at least two are required");
  }
  for (size_t i = 0; i < x.values.size(); ++i) {
    if (!std::isfinite(x.values[i])) {
      throw NonFiniteFeatureError("row " + std::to_string(i / x.cols) +
                                  ", column " + std::to_string(i % x.cols));
    }
  }
}

}  // namespace

std::span<const ClassifierKind> AllKinds() { return kAllKinds; }

std::string_view ShortName(ClassifierKind k) {
  switch (k) {
    case ClassifierKind::kLogisticRegression: return "logreg";
    case ClassifierKind::kDecisionTree: return "tree";
    case ClassifierKind::kLinearSvm: return "svm";
    case ClassifierKind::kRandomForest: return "forest";
    case ClassifierKind::kAdaBoost: return "adaboost";
    case ClassifierKind::kVotingEnsemble: return "voting";
  }
  return "?";
}

std::string_view DisplayName(ClassifierKind k) {
  switch (k) {
    case ClassifierKind::kLogisticRegression: return "Logistic Regression";
    case ClassifierKind::kDecisionTree: return "Decision Trees";
    case ClassifierKind::kLinearSvm: return "SVM";
    case ClassifierKind::kRandomForest: return "Random Forest";
    case ClassifierKind::kAdaBoost: return "AdaBoost";
    case ClassifierKind::kVotingEnsemble: return "Voting Ensemble";
  }
  return "?";
}

ClassifierKind ParseClassifierKind(std::string_view name) {
  for (auto k : kAllKinds) {
    if (ShortName(k) == name) return k;
  }
  throw ConfigError("unknown classifier '" + std::string(name) +
                    "' (expected logreg, tree, svm, forest, adaboost or "
                    "voting)");
}

int DecisionTree::Predict(std::span<const double> x) const {
  size_t i = 0;
  while (nodes[i].feature >= 0) {
    const auto& n = nodes[i];
    i = static_cast<size_t>(x[n.feature] <= n.threshold ? n.left : n.right);
  }
  return static_cast<int>(nodes[i].label);
}

size_t DecisionTree::depth() const {
  std::vector<size_t> d(nodes.size(), 0);
  size_t best = 0;
  // Children always follow their parent in `nodes`.
  for (size_t i = 0; i < nodes.size(); ++i) {
    best = std::max(best, d[i]);
    if (nodes[i].feature >= 0) {
      d[nodes[i].left] = d[i] + 1;
      d[nodes[i].right] = d[i] + 1;
    }
  }
  return best;
}

bool operator==(const VotingModel& a, const VotingModel& b) {
  return a.members == b.members;
}

int MajorityVote(std::span<const int> votes, size_t classes) {
  std::vector<size_t> tally(classes, 0);
  for (int v : votes) ++tally.at(static_cast<size_t>(v));
  return static_cast<int>(std::max_element(tally.begin(), tally.end()) -
                          tally.begin());
}

double SammeAlpha(double weighted_error, size_t classes) {
  return std::log((1.0 - weighted_error) / weighted_error) +
         std::log(static_cast<double>(classes) - 1.0);
}

TrainedClassifier FitClassifier(ClassifierKind kind, const Matrix& x,
                                std::span<const int> y,
                                const BaselineConfig& config, uint64_t seed) {
  const size_t C = config.class_count;
  CheckFitInputs(x, y, C);
  const auto weights = SampleWeights(y, C, config.class_weighting);
  switch (kind) {
    case ClassifierKind::kLogisticRegression:
      return {kind, x.cols, C, FitLogReg(x, y, C, config.logreg, weights, seed)};
    case ClassifierKind::kDecisionTree: {
      if (config.tree.max_depth == 0 || config.tree.min_leaf == 0) {
        throw ConfigError("tree depth and min_leaf must be >= 1");
      }
      const Presorted data(x);
      const std::vector<uint32_t> count(x.rows, 1u);
      return {kind, x.cols, C,
              FitTree(data, y, C, config.tree, x.cols, nullptr, weights, count)};
    }
    case ClassifierKind::kLinearSvm: {
      nn::LinearSvmConfig svm = config.svm;
      svm.seed = seed;
      return {kind, x.cols, C, nn::FitLinearOvr(x, y, C, svm)};
    }
    case ClassifierKind::kRandomForest:
      return {kind, x.cols, C,
              FitForest(x, y, C, config.tree, config.forest, weights, seed)};
    case ClassifierKind::kAdaBoost:
      return {kind, x.cols, C, FitAdaBoost(x, y, C, config.adaboost, weights)};
    case ClassifierKind::kVotingEnsemble: {
      if (config.voting.members.empty()) {
        throw ConfigError("voting ensemble needs at least one member");
      }
      std::vector<TrainedClassifier> members;
      for (auto k : config.voting.members) {
        if (k == ClassifierKind::kVotingEnsemble) {
          throw ConfigError("voting ensemble cannot contain itself");
        }
        members.push_back(FitClassifier(k, x, y, config, seed));
      }
      return MakeVoting(std::move(members));
    }
  }
  throw ConfigError("unknown classifier kind");
}

TrainedClassifier MakeVoting(std::vector<TrainedClassifier> members) {
  if (members.empty()) throw ConfigError("voting ensemble needs members");
  const size_t dim = members[0].dim();
  const size_t classes = members[0].classes();
  for (const auto& m : members) {
    if (m.dim() != dim || m.classes() != classes) {
      throw DimensionMismatchError("voting members disagree on shape");
    }
  }
  return {ClassifierKind::kVotingEnsemble, dim, classes,
          VotingModel{std::move(members)}};
}

std::vector<int> PredictClassifier(const TrainedClassifier& model,
                                   const Matrix& x) {
  if (x.cols != model.dim()) {
    throw DimensionMismatchError("model expects " + std::to_string(model.dim()) +
                                 " features, got " + std::to_string(x.cols));
  }
  const size_t C = model.classes();
  std::vector<int> out(x.rows);
  switch (model.kind()) {
    case ClassifierKind::kLogisticRegression: {
      const auto& m = model.as<SoftmaxRegression>();
      for (size_t i = 0; i < x.rows; ++i) out[i] = PredictLogReg(m, C, x.row(i));
      break;
    }
    case ClassifierKind::kDecisionTree: {
      const auto& t = model.as<DecisionTree>();
      for (size_t i = 0; i < x.rows; ++i) out[i] = t.Predict(x.row(i));
      break;
    }
    case ClassifierKind::kLinearSvm: {
      const auto& m = model.as<nn::LinearOvr>();
      for (size_t i = 0; i < x.rows; ++i) out[i] = m.Predict(x.row(i));
      break;
    }
    case ClassifierKind::kRandomForest: {
      const auto& f = model.as<RandomForest>();
      std::vector<int> votes(f.trees.size());
      for (size_t i = 0; i < x.rows; ++i) {
        for (size_t t = 0; t < f.trees.size(); ++t) {
          votes[t] = f.trees[t].Predict(x.row(i));
        }
        out[i] = MajorityVote(votes, C);
      }
      break;
    }
    case ClassifierKind::kAdaBoost: {
      const auto& m = model.as<AdaBoostModel>();
      std::vector<double> score(C);
      for (size_t i = 0; i < x.rows; ++i) {
        std::fill(score.begin(), score.end(), 0.0);
        for (size_t t = 0; t < m.stumps.size(); ++t) {
          score[m.stumps[t].Predict(x.row(i))] += m.alphas[t];
        }
        out[i] = ArgMaxLowest(score);
      }
      break;
    }
    case ClassifierKind::kVotingEnsemble: {
      const auto& v = model.as<VotingModel>();
      std::vector<std::vector<int>> member_preds;
      for (const auto& m : v.members) {
        member_preds.push_back(PredictClassifier(m, x));
      }
      std::vector<int> votes(v.members.size());
      for (size_t i = 0; i < x.rows; ++i) {
        for (size_t k = 0; k < votes.size(); ++k) votes[k] = member_preds[k][i];
        out[i] = MajorityVote(votes, C);
      }
      break;
    }
  }
  return out;
}

// ---------------------------------------------------------------------------
// Persistence

namespace {

constexpr uint32_t kShapeTag = 1;
constexpr uint32_t kLogRegTag = 2;
constexpr uint32_t kTreeTag = 3;
constexpr uint32_t kSvmTag = 4;
constexpr uint32_t kAlphaTag = 5;
constexpr uint32_t kMemberTag = 6;

ModelKind ContainerKind(ClassifierKind k) {
  switch (k) {
    case ClassifierKind::kLogisticRegression: return ModelKind::kLogisticRegression;
    case ClassifierKind::kDecisionTree: return ModelKind::kDecisionTree;
    case ClassifierKind::kLinearSvm: return ModelKind::kLinearSvm;
    case ClassifierKind::kRandomForest: return ModelKind::kRandomForest;
    case ClassifierKind::kAdaBoost: return ModelKind::kAdaBoost;
    case ClassifierKind::kVotingEnsemble: return ModelKind::kVotingEnsemble;
  }
  return ModelKind::kDecisionTree;
}

ClassifierKind KindFromContainer(ModelKind k) {
  for (auto c : kAllKinds) {
    if (ContainerKind(c) == k) return c;
  }
  throw MagicMismatchError("container holds model kind " +
                           std::to_string(static_cast<uint32_t>(k)) +
                           ", not a baseline classifier");
}

void WriteTree(ByteWriter& records, const DecisionTree& t) {
  ByteWriter w;
  w.U64(t.nodes.size());
  for (const auto& n : t.nodes) {
    w.I64(n.feature);
    w.F64(n.threshold);
    w.I64(n.left);
    w.I64(n.right);
    w.I64(n.label);
  }
  records.Record(kTreeTag, w);
}

DecisionTree ReadTree(std::span<const uint8_t> payload, size_t index,
                      size_t dim, size_t classes) {
  const std::string name = "tree " + std::to_string(index);
  ByteReader r(payload, name);
  const uint64_t n = r.U64();
  if (n == 0 || n > r.remaining() / 40) {
    throw TruncationError(name + ": node count " + std::to_string(n) +
                          " does not fit the record");
  }
  DecisionTree t;
  t.nodes.resize(n);
  for (auto& node : t.nodes) {
    node.feature = r.I64();
    node.threshold = r.F64();
    node.left = r.I64();
    node.right = r.I64();
    node.label = r.I64();
  }
  for (size_t i = 0; i < n; ++i) {
    const auto& node = t.nodes[i];
    const bool bad_leaf = node.label < 0 || node.label >= int64_t(classes);
    const bool bad_split =
        node.feature >= 0 &&
        (node.feature >= int64_t(dim) || node.left <= int64_t(i) ||
         node.right <= int64_t(i) || node.left >= int64_t(n) ||
         node.right >= int64_t(n));
    if (bad_leaf || bad_split) {
      throw SchemaMismatchError(name + ": node " + std::to_string(i) +
                                " is malformed");
    }
  }
  return t;
}

void WriteBody(ByteWriter& records, const TrainedClassifier& m) {
  {
    ByteWriter w;
    w.U32(static_cast<uint32_t>(m.kind()));
    w.U64(m.dim());
    w.U64(m.classes());
    records.Record(kShapeTag, w);
  }
  switch (m.kind()) {
    case ClassifierKind::kLogisticRegression: {
      const auto& s = m.as<SoftmaxRegression>();
      ByteWriter w;
      w.F64s(s.weights);
      w.F64s(s.bias);
      records.Record(kLogRegTag, w);
      break;
    }
    case ClassifierKind::kDecisionTree:
      WriteTree(records, m.as<DecisionTree>());
      break;
    case ClassifierKind::kLinearSvm: {
      const auto& s = m.as<nn::LinearOvr>();
      ByteWriter w;
      w.F64s(s.weights);
      w.F64s(s.bias);
      records.Record(kSvmTag, w);
      break;
    }
    case ClassifierKind::kRandomForest:
      for (const auto& t : m.as<RandomForest>().trees) WriteTree(records, t);
      break;
    case ClassifierKind::kAdaBoost: {
      const auto& a = m.as<AdaBoostModel>();
      for (const auto& t : a.stumps) WriteTree(records, t);
      ByteWriter w;
      w.U64(a.alphas.size());
      w.F64s(a.alphas);
      w.F64s(a.errors);
      records.Record(kAlphaTag, w);
      break;
    }
    case ClassifierKind::kVotingEnsemble:
      for (const auto& member : m.as<VotingModel>().members) {
        ByteWriter inner;
        WriteBody(inner, member);
        records.Record(kMemberTag, inner);
      }
      break;
  }
}

TrainedClassifier ReadBody(std::span<const RawRecord> records,
                           ClassifierKind expected) {
  if (records.empty() || records[0].tag != kShapeTag) {
    throw TruncationError("classifier shape record missing");
  }
  ByteReader sr(records[0].payload, "shape");
  const auto kind = static_cast<ClassifierKind>(sr.U32());
  const size_t dim = sr.U64();
  const size_t classes = sr.U64();
  if (kind != expected) {
    throw SchemaMismatchError("classifier body kind does not match header");
  }
  if (classes < 2 || classes > 4096 || dim > (1u << 24)) {
    throw SchemaMismatchError("implausible classifier shape");
  }
  const auto body = records.subspan(1);
  auto only = [&](uint32_t tag) -> std::span<const uint8_t> {
    for (const auto& r : body) {
      if (r.tag == tag) return r.payload;
    }
    throw TruncationError("record with tag " + std::to_string(tag) +
                          " missing");
  };
  switch (kind) {
    case ClassifierKind::kLogisticRegression: {
      ByteReader r(only(kLogRegTag), "logreg weights");
      SoftmaxRegression s;
      s.weights = r.F64s(classes * dim);
      s.bias = r.F64s(classes);
      return {kind, dim, classes, std::move(s)};
    }
    case ClassifierKind::kDecisionTree:
      return {kind, dim, classes, ReadTree(only(kTreeTag), 0, dim, classes)};
    case ClassifierKind::kLinearSvm: {
      ByteReader r(only(kSvmTag), "svm weights");
      nn::LinearOvr s;
      s.classes = classes;
      s.dim = dim;
      s.weights = r.F64s(classes * dim);
      s.bias = r.F64s(classes);
      return {kind, dim, classes, std::move(s)};
    }
    case ClassifierKind::kRandomForest: {
      RandomForest f;
      for (const auto& r : body) {
        if (r.tag == kTreeTag) {
          f.trees.push_back(ReadTree(r.payload, f.trees.size(), dim, classes));
        }
      }
      if (f.trees.empty()) throw TruncationError("forest has no trees");
      return {kind, dim, classes, std::move(f)};
    }
    case ClassifierKind::kAdaBoost: {
      AdaBoostModel a;
      for (const auto& r : body) {
        if (r.tag == kTreeTag) {
          a.stumps.push_back(ReadTree(r.payload, a.stumps.size(), dim, classes));
        }
      }
      ByteReader r(only(kAlphaTag), "adaboost weights");
      const uint64_t n = r.U64();
      if (n != a.stumps.size()) {
        throw SchemaMismatchError("adaboost has " + std::to_string(n) +
                                  " weights for " +
                                  std::to_string(a.stumps.size()) + " stumps");
      }
      a.alphas = r.F64s(n);
      a.errors = r.F64s(n);
      return {kind, dim, classes, std::move(a)};
    }
    case ClassifierKind::kVotingEnsemble: {
      std::vector<TrainedClassifier> members;
      for (const auto& r : body) {
        if (r.tag != kMemberTag) continue;
        // Members reuse the record framing without a container header.
        std::vector<RawRecord> inner;
        ByteReader mr(r.payload, "voting member " + std::to_string(members.size()));
        while (!mr.AtEnd()) {
          const uint32_t tag = mr.U32();
          const uint64_t len = mr.U64();
          inner.push_back({tag, mr.Take(len)});
        }
        if (inner.empty()) throw TruncationError("empty voting member");
        ByteReader peek(inner[0].payload, "voting member shape");
        const auto member_kind = static_cast<ClassifierKind>(peek.U32());
        if (member_kind == ClassifierKind::kVotingEnsemble) {
          throw SchemaMismatchError("nested voting ensembles are not allowed");
        }
        members.push_back(ReadBody(inner, member_kind));
      }
      return MakeVoting(std::move(members));
    }
  }
  throw SchemaMismatchError("unknown classifier kind");
}

}  // namespace

std::vector<uint8_t> SaveClassifierBytes(const TrainedClassifier& model,
                                         std::string_view attachment) {
  ByteWriter records;
  WriteBody(records, model);
  if (!attachment.empty()) {
    ByteWriter w;
    w.Str(attachment);
    records.Record(kAttachmentTag, w);
  }
  return EncodeContainer(ContainerKind(model.kind()), records);
}

TrainedClassifier LoadClassifierBytes(std::span<const uint8_t> bytes,
                                      std::string* attachment) {
  const auto decoded = DecodeContainer(bytes);
  const ClassifierKind kind = KindFromContainer(decoded.kind);
  std::vector<RawRecord> body;
  for (const auto& r : decoded.records) {
    if (r.tag == kAttachmentTag) {
      if (attachment) {
        ByteReader ar(r.payload, "attachment");
        *attachment = ar.Str();
      }
    } else {
      body.push_back(r);
    }
  }
  return ReadBody(body, kind);
}

}  // namespace nids::baselines
