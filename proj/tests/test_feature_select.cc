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

#include <algorithm>
#include <cmath>
#include <map>
#include <vector>

#include "doctest.h"
#include "nids/errors.h"
#include "nids/feature_select.h"
#include "nids/rng.h"

namespace nids::select {
namespace {

double Log2Entropy(const std::vector<int>& labels) {
  std::map<int, double> n;
  for (int y : labels) n[y] += 1.0;
  double h = 0.0;
  for (const auto& [k, c] : n) {
    const double p = c / labels.size();
    h -= p * std::log2(p);
  }
  return h;
}

TEST_CASE("entropy of small label sets") {
  CHECK(Entropy(std::vector<int>{0, 0, 1, 1}) == doctest::Approx(1.0));
  CHECK(Entropy(std::vector<int>{0, 0, 0, 0}) == 0.0);
  const double expected = -0.75 * std::log2(0.75) - 0.25 * std::log2(0.25);
  CHECK(Entropy(std::vector<int>{0, 0, 0, 1}) ==
        doctest::Approx(expected).epsilon(1e-12));
  CHECK(expected == doctest::Approx(0.811278).epsilon(1e-6));
  CHECK_THROWS_AS(Entropy(std::vector<int>{}), EmptyInputError);
}

TEST_CASE("gain on a four-row table with equal-width bins") {
  const std::vector<double> f = {1, 1, 2, 2};
  const std::vector<int> y = {0, 0, 0, 1};
  const auto bins = FitBins(f, {2, BinStrategy::kEqualWidth});
  REQUIRE(bins.bin_count() == 2);
  // H(Y) - (1/2)*0 - (1/2)*1
  const double expected = Log2Entropy(y) - 0.5;
  CHECK(InfoGain(f, y, bins) == doctest::Approx(expected).epsilon(1e-12));
  CHECK(expected == doctest::Approx(0.311278).epsilon(1e-6));
}

TEST_CASE("perfect and constant attributes") {
  Rng rng(3);
  for (int t = 0; t < 50; ++t) {
    std::vector<int> y(5 + rng.Index(60));
    std::vector<double> same(y.size()), constant(y.size(), -2.0);
    for (size_t i = 0; i < y.size(); ++i) same[i] = y[i] = int(rng.Index(4));
    const auto s = ScoreFeature(0, same, y, {});
    CHECK(s.gain_bits == doctest::Approx(Log2Entropy(y)).epsilon(1e-12));
    CHECK(ScoreFeature(1, constant, y, {}).gain_bits == doctest::Approx(0.0));
  }
}

TEST_CASE("gain is bounded by the class entropy") {
  Rng rng(5);
  for (int t = 0; t < 200; ++t) {
    std::vector<int> y(3 + rng.Index(80));
    std::vector<double> f(y.size());
    for (size_t i = 0; i < y.size(); ++i) {
      y[i] = int(rng.Index(5));
      f[i] = rng.Uniform() < 0.3 ? 0.0 : std::floor(rng.Uniform(0, 1000));
    }
    for (auto strat : {BinStrategy::kEqualFrequency, BinStrategy::kEqualWidth}) {
      const double g = ScoreFeature(0, f, y, {1 + int(rng.Index(12)), strat}).gain_bits;
      CHECK(g >= 0.0);
      CHECK(g <= Entropy(y) + 1e-9);
    }
  }
}

TEST_CASE("equal-frequency gain is invariant under increasing transforms") {
  Rng rng(9);
  for (int t = 0; t < 100; ++t) {
    std::vector<int> y(10 + rng.Index(100));
    std::vector<double> f(y.size()), g(y.size());
    for (size_t i = 0; i < y.size(); ++i) {
      y[i] = int(rng.Index(3));
      f[i] = std::floor(rng.Uniform(0, 30));
      g[i] = std::exp(f[i] / 7.0) * 3.0 + 11.0;
    }
    const DiscretizationConfig cfg{1 + int(rng.Index(10)),
                                   BinStrategy::kEqualFrequency};
    CHECK(ScoreFeature(0, f, y, cfg).gain_bits ==
          doctest::Approx(ScoreFeature(0, g, y, cfg).gain_bits).epsilon(1e-12));
  }
}

TEST_CASE("bins are strictly ascending") {
  Rng rng(17);
  for (int t = 0; t < 100; ++t) {
    std::vector<double> f(1 + rng.Index(50));
    for (auto& v : f) v = std::floor(rng.Uniform(0, 6));
    for (auto strat : {BinStrategy::kEqualFrequency, BinStrategy::kEqualWidth}) {
      const auto b = FitBins(f, {10, strat});
      CHECK(b.bin_count() >= 1);
      CHECK(std::adjacent_find(b.edges.begin(), b.edges.end(),
                               std::greater_equal<>()) == b.edges.end());
    }
  }
  CHECK_THROWS_AS(FitBins(std::vector<double>{1.0}, {0}), ConfigError);
}

TEST_CASE("gain input errors") {
  const FeatureBins bins{{0.5}};
  CHECK_THROWS_AS(InfoGain(std::vector<double>{1, 2}, std::vector<int>{0}, bins),
                  LengthMismatchError);
  CHECK_THROWS_AS(InfoGain(std::vector<double>{}, std::vector<int>{}, bins),
                  EmptyInputError);
}

std::vector<FeatureScore> Scores(const std::vector<double>& gains) {
  std::vector<FeatureScore> s;
  for (size_t i = 0; i < gains.size(); ++i) s.push_back({i, gains[i]});
  return s;
}

TEST_CASE("top-k with ties prefers the lower index") {
  const auto r = SelectTopK(Scores({0.9, 0.1, 0.9}), 2);
  CHECK(r.selected_indices == std::vector<size_t>{0, 2});
  const auto all = SelectTopK(Scores({0.3, 0.1, 0.2}), 3);
  CHECK(all.selected_indices == std::vector<size_t>{0, 1, 2});
  CHECK_THROWS_AS(SelectTopK(Scores({0.3}), 0), KOutOfRangeError);
  CHECK_THROWS_AS(SelectTopK(Scores({0.3}), 2), KOutOfRangeError);
}

TEST_CASE("the perfect predictor wins a one-feature selection") {
  const std::vector<int> y = {0, 0, 0, 1};
  Matrix x(4, 2);
  const double cols[2][4] = {{1, 1, 2, 2}, {0, 0, 0, 1}};
  for (size_t r = 0; r < 4; ++r) {
    for (size_t c = 0; c < 2; ++c) x.at(r, c) = cols[c][r];
  }
  const auto scores = ScoreFeatures(x, y, {2, BinStrategy::kEqualWidth});
  CHECK(scores[1].gain_bits > scores[0].gain_bits);
  CHECK(SelectTopK(scores, 1).selected_indices == std::vector<size_t>{1});
}

TEST_CASE("minimum gain threshold filters before top-k") {
  const auto r = SelectTopK(Scores({0.5, 0.05, 0.3, 0.01}), 4, 0.1);
  CHECK(r.selected_indices == std::vector<size_t>{0, 2});
  CHECK_THROWS_AS(SelectTopK(Scores({0.05}), 1, 0.1), KOutOfRangeError);
}

TEST_CASE("top-k is invariant to input order") {
  Rng rng(23);
  for (int t = 0; t < 100; ++t) {
    std::vector<double> gains(2 + rng.Index(30));
    for (auto& g : gains) g = double(rng.Index(5)) / 4.0;  // plenty of ties
    auto s = Scores(gains);
    const size_t k = 1 + rng.Index(gains.size());
    const auto a = SelectTopK(s, k);
    rng.Shuffle(std::span<FeatureScore>(s));
    CHECK(SelectTopK(s, k).selected_indices == a.selected_indices);
  }
}

TEST_CASE("grid geometry") {
  CHECK(GridSide(4) == 2);
  CHECK(GridSide(5) == 3);
  CHECK(GridSide(121) == 11);
  CHECK(GridSide(122) == 12);
  for (size_t k = 1; k < 400; ++k) {
    const size_t s = GridSide(k);
    CHECK(s * s >= k);
    CHECK((s - 1) * (s - 1) < k);
  }
  const auto five = SelectTopK(Scores({5, 4, 3, 2, 1}), 5);
  CHECK(five.grid_side == 3);
  CHECK(five.pad_count == 4);
  const auto four = SelectTopK(Scores({5, 4, 3, 2}), 4);
  CHECK(four.grid_side == 2);
  CHECK(four.pad_count == 0);
}

TEST_CASE("embedding keeps the selected values in order then pads") {
  Rng rng(29);
  for (int t = 0; t < 50; ++t) {
    const size_t d = 3 + rng.Index(40);
    std::vector<double> gains(d), row(d);
    for (size_t i = 0; i < d; ++i) {
      gains[i] = rng.Uniform();
      row[i] = rng.Uniform(-1, 1);
    }
    const size_t k = 1 + rng.Index(d);
    const auto sel = SelectTopK(Scores(gains), k);
    std::vector<double> picked;
    for (size_t i : sel.selected_indices) picked.push_back(row[i]);
    const auto grid = EmbedGrid(picked, sel);
    REQUIRE(grid.size() == sel.grid_side * sel.grid_side);
    CHECK(std::vector<double>(grid.begin(), grid.begin() + k) == picked);
    for (size_t j = k; j < grid.size(); ++j) CHECK(grid[j] == 0.0);
  }
  const auto sel = SelectTopK(Scores({1, 2}), 2);
  CHECK_THROWS_AS(EmbedGrid(std::vector<double>{1.0}, sel), LengthMismatchError);
}

TEST_CASE("scores csv lists every feature") {
  const auto csv = ScoresCsv(Scores({0.25, 0.5}), std::vector<std::string>{"a", "b"});
  CHECK(csv.find("a") != std::string::npos);
  CHECK(csv.find("b") != std::string::npos);
  CHECK(std::count(csv.begin(), csv.end(), '\n') == 3);
}

}  // namespace
}  // namespace nids::select
