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


#include <filesystem>
#include <fstream>
#include <json.hpp>
#include <sstream>
#include <string>
#include <vector>

#include "doctest.h"
#include "nids/cli.h"
#include "nids/config.h"
#include "synthetic_kdd.h"

namespace nids::cli {
namespace {

namespace fs = std::filesystem;

struct Run {
  int code;
  std::string out;
  std::string err;
};

Run Cli(std::vector<std::string> args) {
  std::ostringstream out, err;
  const int code = RunCommand(args, out, err);
  return {code, out.str(), err.str()};
}

std::string Slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  return {std::istreambuf_iterator<char>(in), {}};
}

bool Contains(const std::string& hay, const std::string& needle) {
  return hay.find(needle) != std::string::npos;
}

// A small network and short schedules so whole commands run in seconds.
constexpr char kQuickConfig[] =
    "encnn.stage_filters = 2,4,4\n"
    "encnn.dense_units = 16,16\n"
    "encnn.epochs = 2\n"
    "baseline.forest.n_trees = 4\n"
    "baseline.adaboost.n_rounds = 4\n"
    "baseline.logreg.epochs = 4\n"
    "eval.folds = 3\n"
    "eval.threads = 2\n";

struct Workspace {
  fs::path dir;
  std::string data;
  std::string config;

  explicit Workspace(const std::string& name) : dir(testing::TempDir(name)) {
    testing::SyntheticSpec spec;
    spec.rows = 300;
    data = (dir / "kdd.txt").string();
    std::ofstream(data) << testing::SyntheticKddText(spec);
    config = (dir / "quick.cfg").string();
    std::ofstream(config) << kQuickConfig;
  }
  std::string Path(const std::string& leaf) const { return (dir / leaf).string(); }
};

TEST_CASE("version, schema and help") {
  const auto v = Cli({"--version"});
  CHECK(v.code == kExitOk);
  CHECK(v.out == std::string("nids ") + kToolVersion + "\n");
  const auto s = Cli({"--schema"});
  CHECK(s.code == kExitOk);
  CHECK(Contains(s.out, "duration"));
  const auto h = Cli({"--help"});
  CHECK(h.code == kExitOk);
  for (const auto& k : config::Keys()) {
    CAPTURE(k.key);
    CHECK(Contains(h.out, k.key));
  }
  CHECK(Cli({}).code == kExitUsage);
  CHECK(Cli({"frobnicate"}).code == kExitUsage);
}

TEST_CASE("ingest prints the distribution and writes a manifest") {
  Workspace w("cli_ingest");
  const auto r = Cli({"ingest", "--data", w.data, "--out", w.Path("dist.csv")});
  REQUIRE(r.code == kExitOk);
  CHECK(Contains(r.out, "Total"));
  CHECK(Contains(r.out, "300"));
  const auto csv = Slurp(w.Path("dist.csv"));
  CHECK(csv.rfind("class,count,percent,reference_percent\n", 0) == 0);
  const auto m = nlohmann::json::parse(Slurp(w.Path("dist.csv.manifest.json")));
  CHECK(m["command"] == "ingest");
  CHECK(m["inputs"][0]["path"] == w.data);
  CHECK(m["inputs"][0]["bytes"] == fs::file_size(w.data));
  const auto bytes = Slurp(w.data);
  char hex[17];
  std::snprintf(hex, sizeof hex, "%016llx",
                static_cast<unsigned long long>(Fnv1a64(std::span(
                    reinterpret_cast<const uint8_t*>(bytes.data()), bytes.size()))));
  CHECK(m["inputs"][0]["fnv1a64"] == hex);
}

TEST_CASE("fnv-1a reference values") {
  CHECK(Fnv1a64({}) == 0xcbf29ce484222325ULL);
  const uint8_t a[] = {'a'};
  CHECK(Fnv1a64(a) == 0xaf63dc4c8601ec8cULL);
  const uint8_t foobar[] = {'f', 'o', 'o', 'b', 'a', 'r'};
  CHECK(Fnv1a64(foobar) == 0x85944171f73967e8ULL);
}

TEST_CASE("preprocess and select write their artifacts") {
  Workspace w("cli_prep");
  auto r = Cli({"preprocess", "--data", w.data, "--out", w.Path("plan.txt"),
                "--encoded", w.Path("enc.csv")});
  REQUIRE(r.code == kExitOk);
  CHECK(fs::file_size(w.Path("plan.txt")) > 0);
  const auto enc = Slurp(w.Path("enc.csv"));
  CHECK(std::count(enc.begin(), enc.end(), '\n') == 301);
  r = Cli({"select", "--data", w.data, "--out", w.Path("scores.csv"),
           "--set", "select.k=10"});
  REQUIRE(r.code == kExitOk);
  CHECK(Slurp(w.Path("scores.csv")).rfind("feature_index,feature_name,gain_bits\n", 0) == 0);
}

TEST_CASE("train then evaluate a saved model") {
  Workspace w("cli_train");
  for (const std::string algo : {"encnn", "tree"}) {
    CAPTURE(algo);
    const auto model = w.Path(algo + ".bin");
    auto r = Cli({"train", "--data", w.data, "--config", w.config, "--model", algo,
                  "--out", model});
    REQUIRE(r.code == kExitOk);
    r = Cli({"evaluate", "--data", w.data, "--model", model, "--out",
             w.Path(algo + ".csv")});
    REQUIRE(r.code == kExitOk);
    const auto csv = Slurp(w.Path(algo + ".csv"));
    CHECK(std::count(csv.begin(), csv.end(), '\n') == 2);
    const auto m = nlohmann::json::parse(Slurp(w.Path(algo + ".csv.manifest.json")));
    CHECK(m["inputs"].size() == 2);
  }
  CHECK(Cli({"evaluate", "--data", w.data}).code == kExitUsage);
  CHECK(Cli({"evaluate", "--data", w.data, "--model", w.Path("missing.bin")}).code ==
        kExitData);
}

TEST_CASE("compare reruns are byte-identical") {
  Workspace w("cli_compare");
  std::string reports[2];
  for (int i = 0; i < 2; ++i) {
    const auto out = w.Path("run" + std::to_string(i));
    fs::create_directories(out);
    const auto r = Cli({"compare", "--data", w.data, "--config", w.config,
                        "--out-dir", out});
    REQUIRE(r.code == kExitOk);
    CHECK(Contains(r.out, "EnCNN"));
    reports[i] = Slurp(fs::path(out) / "report.csv");
    const auto m = nlohmann::json::parse(Slurp(fs::path(out) / "manifest.json"));
    CHECK(m["command"] == "compare");
    CHECK(m["config"]["eval.folds"] == "3");
    CHECK(m["protocol"] == "stratified 3-fold cross-validation");
  }
  CHECK(reports[0] == reports[1]);
  CHECK(std::count(reports[0].begin(), reports[0].end(), '\n') == 15);
}

TEST_CASE("gridsearch writes one row per cell") {
  Workspace w("cli_grid");
  const auto r = Cli({"gridsearch", "--data", w.data, "--config", w.config,
                      "--model", "tree", "--axis", "baseline.tree.max_depth=2,4",
                      "--axis", "baseline.tree.min_leaf=1,5", "--out",
                      w.Path("grid.csv")});
  REQUIRE(r.code == kExitOk);
  const auto csv = Slurp(w.Path("grid.csv"));
  CHECK(std::count(csv.begin(), csv.end(), '\n') == 5);
  CHECK(Cli({"gridsearch", "--data", w.data, "--model", "tree", "--axis",
             "baseline.tree.max_depth=1,2,3,4", "--set", "grid.cap=2"})
            .code == kExitUsage);
}

TEST_CASE("usage and data errors map to exit codes") {
  Workspace w("cli_errors");
  std::ofstream(w.Path("typo.cfg")) << "eval.folds = 3\nencnn.filtres = 4\n";
  auto r = Cli({"compare", "--data", w.data, "--config", w.Path("typo.cfg")});
  CHECK(r.code == kExitUsage);
  CHECK(Contains(r.err, "unknown key"));
  CHECK(Contains(r.err, "typo.cfg:2"));

  r = Cli({"ingest", "--data", w.Path("absent.txt")});
  CHECK(r.code == kExitData);

  std::ofstream(w.Path("short.txt")) << "0,tcp,http,SF,1\n";
  r = Cli({"ingest", "--data", w.Path("short.txt")});
  CHECK(r.code == kExitData);
  CHECK(Contains(r.err, "short.txt:1"));

  r = Cli({"ingest", "--data", w.data, "--set", "eval.folds=zero"});
  CHECK(r.code == kExitUsage);
}

}  // namespace
}  // namespace nids::cli
