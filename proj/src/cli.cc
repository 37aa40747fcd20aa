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

#include "nids/cli.h"

#include <CLI11.hpp>
#include <algorithm>
#include <charconv>
#include <chrono>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <json.hpp>
#include <numeric>
#include <optional>
#include <ostream>
#include <sstream>

#include "nids/baselines.h"
#include "nids/binio.h"
#include "nids/config.h"
#include "nids/encnn.h"
#include "nids/errors.h"
#include "nids/eval.h"
#include "nids/feature_select.h"
#include "nids/kdd.h"
#include "nids/preprocess.h"

namespace nids::cli {
namespace {

namespace fs = std::filesystem;
using Json = nlohmann::ordered_json;

constexpr char kDefaultDataFile[] = "kddcup.data_10_percent";

// Published class shares of the 10% file, in percent.
constexpr double kReferencePercent[kdd::kClassCount] = {19.7, 79.29, 0.8, 0.2,
                                                        0.01};

struct Common {
  std::string data;
  std::string config_file;
  std::vector<std::string> sets;
  size_t rows = 0;
  bool stratified = false;
  std::string manifest;
};

void AddCommon(CLI::App* app, Common& c, bool needs_data = true) {
  if (needs_data) {
    app->add_option("--data", c.data,
                    "KDD file (default: $NIDS_DATA_DIR/" +
                        std::string(kDefaultDataFile) + ")");
    app->add_option("--rows", c.rows, "Use only N rows");
    app->add_flag("--stratified", c.stratified,
                  "With --rows: stratified seeded sample instead of the first "
                  "N rows");
  }
  app->add_option("--config", c.config_file, "key = value configuration file");
  app->add_option("--set", c.sets, "Override one key, e.g. --set eval.folds=5");
  app->add_option("--manifest", c.manifest,
                  "Manifest path (default: next to the main output)");
}

std::string Hex64(uint64_t v) {
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(v));
  return buf;
}

std::string ReadText(const std::string& path) {
  const auto bytes = ReadFileBytes(path);
  return std::string(bytes.begin(), bytes.end());
}

// Collects what a run read and wrote.
class Manifest {
 public:
  Manifest(std::string command, const std::vector<std::string>& args)
      : start_(std::chrono::steady_clock::now()) {
    json_["tool"] = "nids";
    json_["version"] = kToolVersion;
    json_["command"] = std::move(command);
    json_["arguments"] = args;
    json_["inputs"] = Json::array();
    json_["outputs"] = Json::array();
  }

  void Input(const std::string& path) {
    const auto bytes = ReadFileBytes(path);
    json_["inputs"].push_back({{"path", path},
                               {"bytes", bytes.size()},
                               {"fnv1a64", Hex64(Fnv1a64(bytes))}});
  }

  void Output(const std::string& path) { json_["outputs"].push_back(path); }

  void Config(const config::RunConfig& cfg) {
    json_["seed"] = cfg.seed;
    Json c = Json::object();
    for (const auto& k : config::Keys()) c[k.key] = config::Get(cfg, k.key);
    json_["config"] = std::move(c);
  }

  Json& operator[](const char* key) { return json_[key]; }

  void Write(const std::string& path) {
    json_["wall_seconds"] = std::chrono::duration<double>(
                                std::chrono::steady_clock::now() - start_)
                                .count();
    WriteFileAtomic(path, json_.dump(2) + "\n");
  }

 private:
  Json json_;
  std::chrono::steady_clock::time_point start_;
};

void WriteOutput(Manifest& m, const std::string& path, std::string_view text) {
  const fs::path parent = fs::path(path).parent_path();
  if (!parent.empty()) fs::create_directories(parent);
  WriteFileAtomic(path, text);
  m.Output(path);
}

struct Context {
  config::RunConfig cfg;
  kdd::Dataset data;
  std::vector<size_t> rows;
};

config::RunConfig ResolveConfig(const Common& c, Manifest& m,
                                std::ostream& err) {
  config::RunConfig cfg;
  if (!c.config_file.empty()) {
    cfg = config::ParseConfigText(ReadText(c.config_file), c.config_file, cfg);
    m.Input(c.config_file);
  }
  for (const auto& s : c.sets) {
    try {
      const auto [key, value] = config::SplitAssignment(s);
      config::Set(cfg, key, value);
    } catch (const ConfigError& e) {
      throw ConfigError("--set " + s + ": " + e.detail());
    }
  }
  m.Config(cfg);
  err << "# resolved configuration\n";
  std::istringstream lines(config::ResolvedText(cfg));
  for (std::string line; std::getline(lines, line);) err << "#   " << line << "\n";
  return cfg;
}

std::string DataPath(const Common& c) {
  if (!c.data.empty()) return c.data;
  if (const char* dir = std::getenv("NIDS_DATA_DIR"); dir && *dir) {
    return (fs::path(dir) / kDefaultDataFile).string();
  }
  throw ConfigError("no dataset given: pass --data or set NIDS_DATA_DIR");
}

Context Load(const Common& c, Manifest& m, std::ostream& err) {
  Context ctx;
  ctx.cfg = ResolveConfig(c, m, err);
  const std::string path = DataPath(c);
  ctx.data = kdd::LoadDataset(path);
  m.Input(path);
  if (c.rows > 0 && c.rows < ctx.data.size()) {
    if (c.stratified) {
      ctx.rows = eval::StratifiedSample(ctx.data.class_codes(), c.rows,
                                        ctx.cfg.seed);
    } else {
      ctx.rows.resize(c.rows);
      std::iota(ctx.rows.begin(), ctx.rows.end(), size_t{0});
    }
  } else {
    ctx.rows.resize(ctx.data.size());
    std::iota(ctx.rows.begin(), ctx.rows.end(), size_t{0});
  }
  if (ctx.rows.empty()) throw EmptyDatasetError(path + " holds no records");
  m["rows"] = ctx.rows.size();
  err << "# loaded " << ctx.data.size() << " records from " << path << ", using "
      << ctx.rows.size() << "\n";
  return ctx;
}

// Restricts rows to one side of the seeded holdout split.
void ApplySplit(Context& ctx, const std::string& side) {
  if (side == "all") return;
  if (side != "train" && side != "test") {
    throw ConfigError("split must be all, train or test, got '" + side + "'");
  }
  std::vector<int> labels(ctx.rows.size());
  for (size_t i = 0; i < ctx.rows.size(); ++i) {
    labels[i] = static_cast<int>(ctx.data.classes[ctx.rows[i]]);
  }
  const auto split = eval::MakeHoldoutSplit(
      labels, ctx.cfg.protocol.train_fraction, ctx.cfg.seed);
  const auto& pick = side == "train" ? split.train : split.test;
  std::vector<size_t> rows;
  for (size_t p : pick) rows.push_back(ctx.rows[p]);
  ctx.rows = std::move(rows);
}

eval::Stage ParseStage(const std::string& s) {
  if (s == "raw") return eval::Stage::kRaw;
  if (s == "preprocessed") return eval::Stage::kPreprocessed;
  throw ConfigError("stage must be raw or preprocessed, got '" + s + "'");
}

std::string ManifestPath(const Common& c, const std::string& main_output) {
  return c.manifest.empty() ? main_output + ".manifest.json" : c.manifest;
}

// ---------------------------------------------------------------------------

int Ingest(const Common& c, const std::string& out_path,
           const std::vector<std::string>& args, std::ostream& out,
           std::ostream& err) {
  Manifest m("ingest", args);
  Context ctx = Load(c, m, err);
  const kdd::Dataset sub = kdd::Subset(ctx.data, ctx.rows);
  const auto dist = sub.class_distribution();
  std::ostringstream table, csv;
  csv << "class,count,percent,reference_percent\n";
  char line[160];
  std::snprintf(line, sizeof line, "%-8s %10s %10s %12s\n", "Class", "Count",
                "Percent", "Reference");
  table << line;
  for (int k = 0; k < kdd::kClassCount; ++k) {
    const std::string name(kdd::ClassName(k));
    std::snprintf(line, sizeof line, "%-8s %10llu %9.3f%% %11.2f%%\n",
                  name.c_str(), static_cast<unsigned long long>(dist.counts[k]),
                  100.0 * dist.ratios[k], kReferencePercent[k]);
    table << line;
    std::snprintf(line, sizeof line, "%s,%llu,%.6f,%.2f\n", name.c_str(),
                  static_cast<unsigned long long>(dist.counts[k]),
                  100.0 * dist.ratios[k], kReferencePercent[k]);
    csv << line;
  }
  std::snprintf(line, sizeof line, "%-8s %10llu\n", "Total",
                static_cast<unsigned long long>(dist.total));
  table << line;
  out << table.str();
  if (!out_path.empty()) {
    WriteOutput(m, out_path, csv.str());
    m.Write(ManifestPath(c, out_path));
  } else if (!c.manifest.empty()) {
    m.Write(c.manifest);
  }
  return kExitOk;
}

int Preprocess(const Common& c, const std::string& out_path,
               const std::string& encoded_path,
               const std::vector<std::string>& args, std::ostream& out,
               std::ostream& err) {
  Manifest m("preprocess", args);
  Context ctx = Load(c, m, err);
  const auto plan =
      prep::FitPlan(ctx.data, ctx.rows, ctx.cfg.pipeline.preprocess);
  const auto enc = prep::ApplyPlan(plan, ctx.data, ctx.rows);
  uint64_t outliers = 0;
  for (auto n : enc.outlier_counts) outliers += n;
  WriteOutput(m, out_path, prep::SerializePlan(plan));
  if (!encoded_path.empty()) {
    std::ostringstream csv;
    for (const auto& name : enc.column_names) csv << name << ',';
    csv << "label\n";
    char buf[32];
    for (size_t r = 0; r < enc.values.rows; ++r) {
      for (double v : enc.values.row(r)) {
        const auto [p, ec] = std::to_chars(buf, buf + sizeof buf, v);
        csv << std::string_view(buf, p - buf) << ',';
      }
      csv << enc.labels[r] << '\n';
    }
    WriteOutput(m, encoded_path, csv.str());
  }
  out << "fitted rows      " << plan.fitted_rows << "\n"
      << "encoded width    " << plan.encoded_width() << "\n"
      << "fence outliers   " << outliers << " ("
      << prep::ToString(plan.config.outlier_action) << ")\n"
      << "plan written to  " << out_path << "\n";
  m.Write(ManifestPath(c, out_path));
  return kExitOk;
}

int Select(const Common& c, const std::string& out_path,
           const std::vector<std::string>& args, std::ostream& out,
           std::ostream& err) {
  Manifest m("select", args);
  Context ctx = Load(c, m, err);
  auto pcfg = ctx.cfg.pipeline;
  pcfg.select_enabled = true;
  const auto p = eval::FitPipeline(pcfg, ctx.data, ctx.rows);
  const auto names = p.plan.column_names();
  WriteOutput(m, out_path, select::ScoresCsv(p.scores, names));
  auto ranked = p.scores;
  std::stable_sort(ranked.begin(), ranked.end(), [](const auto& a, const auto& b) {
    return a.gain_bits > b.gain_bits;
  });
  out << "selected " << p.selection.selected_indices.size() << " of "
      << names.size() << " features, grid " << p.selection.grid_side << "x"
      << p.selection.grid_side << " (" << p.selection.pad_count
      << " padding)\n";
  char line[160];
  for (size_t i = 0; i < std::min<size_t>(10, ranked.size()); ++i) {
    std::snprintf(line, sizeof line, "  %-34s %.6f bits\n",
                  names[ranked[i].feature_index].c_str(), ranked[i].gain_bits);
    out << line;
  }
  m.Write(ManifestPath(c, out_path));
  return kExitOk;
}

int Train(const Common& c, const std::string& algo, const std::string& out_path,
          const std::string& split, const std::string& stage,
          const std::vector<std::string>& args, std::ostream& out,
          std::ostream& err) {
  Manifest m("train", args);
  Context ctx = Load(c, m, err);
  ApplySplit(ctx, split);
  const auto pcfg = eval::ForStage(ctx.cfg.pipeline, ParseStage(stage));
  const auto pipeline = eval::FitPipeline(pcfg, ctx.data, ctx.rows);
  const auto feats = eval::Transform(pipeline, ctx.data, ctx.rows);
  const size_t classes = pcfg.class_count();
  const std::string attachment = eval::SerializePipeline(pipeline);
  std::vector<uint8_t> bytes;
  std::vector<int> fitted;
  if (algo == "encnn") {
    auto model =
        eval::FitEnCnn(ctx.cfg.encnn, feats.x, feats.y, classes, ctx.cfg.seed);
    fitted = eval::PredictEnCnn(model, feats.x);
    bytes = encnn::SaveModelBytes(model, attachment);
    out << "epochs run       " << model.epochs_run << "\n"
        << "final loss       " << model.final_loss << "\n";
  } else {
    auto bcfg = ctx.cfg.baseline;
    bcfg.class_count = classes;
    const auto model = baselines::FitClassifier(
        baselines::ParseClassifierKind(algo), feats.x, feats.y, bcfg,
        ctx.cfg.seed);
    fitted = baselines::PredictClassifier(model, feats.x);
    bytes = baselines::SaveClassifierBytes(model, attachment);
  }
  const auto [cm, metrics] = eval::ConfusionAndMetrics(feats.y, fitted, classes);
  const fs::path parent = fs::path(out_path).parent_path();
  if (!parent.empty()) fs::create_directories(parent);
  WriteFileAtomic(out_path, bytes);
  m.Output(out_path);
  out << "model            " << algo << "\n"
      << "training rows    " << feats.x.rows << "\n"
      << "features         " << feats.x.cols << "\n"
      << "train accuracy   " << metrics.accuracy << "\n"
      << "model written to " << out_path << "\n";
  m.Write(ManifestPath(c, out_path));
  return kExitOk;
}

eval::ExperimentReport SingleRowReport(const std::string& model,
                                       eval::Stage stage,
                                       const eval::Evaluation& ev,
                                       const std::string& protocol,
                                       size_t classes) {
  eval::ExperimentReport r;
  r.protocol = protocol;
  r.classes = classes;
  r.rows.push_back({model, stage, ev.mean, ev.std, ev.seconds, ev.pooled});
  return r;
}

void WriteReport(Manifest& m, const eval::ExperimentReport& report,
                 const std::string& csv_path, bool timing, std::ostream& out) {
  WriteOutput(m, csv_path, report.Csv(timing));
  const std::string stem = fs::path(csv_path).replace_extension("").string();
  WriteOutput(m, stem + ".confusion.csv", report.ConfusionCsv());
  WriteOutput(m, stem + ".txt", report.Table());
  out << report.Table();
}

int Evaluate(const Common& c, const std::string& model_path,
             const std::string& algo, const std::string& out_path,
             const std::string& split, const std::string& stage_name,
             const std::vector<std::string>& args, std::ostream& out,
             std::ostream& err) {
  if (model_path.empty() == algo.empty()) {
    throw ConfigError("evaluate needs exactly one of --model FILE or --algo NAME");
  }
  Manifest m("evaluate", args);
  Context ctx = Load(c, m, err);
  eval::ExperimentReport report;
  if (!model_path.empty()) {
    ApplySplit(ctx, split);
    const auto bytes = ReadFileBytes(model_path);
    m.Input(model_path);
    std::string attachment;
    std::optional<encnn::EnCnnModel> cnn;
    std::optional<baselines::TrainedClassifier> base;
    std::string name;
    if (PeekContainerKind(bytes) == ModelKind::kEnCnn) {
      cnn = encnn::LoadModelBytes(bytes, &attachment);
      name = "EnCNN";
    } else {
      base = baselines::LoadClassifierBytes(bytes, &attachment);
      name = std::string(baselines::DisplayName(base->kind()));
    }
    if (attachment.empty()) {
      throw SchemaMismatchError(model_path + " carries no feature pipeline");
    }
    const auto pipeline = eval::ParsePipeline(attachment);
    const auto feats = eval::Transform(pipeline, ctx.data, ctx.rows);
    const size_t classes = pipeline.binary ? 2 : kdd::kClassCount;
    const auto start = std::chrono::steady_clock::now();
    const auto pred = cnn ? eval::PredictEnCnn(*cnn, feats.x)
                          : baselines::PredictClassifier(*base, feats.x);
    eval::Evaluation ev;
    ev.model = name;
    ev.seconds = std::chrono::duration<double>(
                     std::chrono::steady_clock::now() - start)
                     .count();
    auto [cm, metrics] = eval::ConfusionAndMetrics(feats.y, pred, classes);
    ev.pooled = cm;
    ev.mean = {metrics.accuracy, metrics.macro_precision, metrics.macro_recall,
               metrics.macro_f1};
    ev.folds.push_back(std::move(metrics));
    const bool raw = !pipeline.select_enabled &&
                     pipeline.plan.config.outlier_action ==
                         prep::OutlierAction::kFlag;
    report = SingleRowReport(
        name, raw ? eval::Stage::kRaw : eval::Stage::kPreprocessed, ev,
        "saved model on " + std::to_string(feats.x.rows) + " rows (" + split +
            ")",
        classes);
    for (const auto& w : ev.folds[0].warnings) err << "warning: " << w << "\n";
  } else {
    const eval::Stage stage = ParseStage(stage_name);
    const auto pcfg = eval::ForStage(ctx.cfg.pipeline, stage);
    const std::vector<eval::ModelSpec> specs = {
        config::MakeModelSpec(ctx.cfg, algo)};
    eval::EvalOptions opts;
    opts.threads = ctx.cfg.ResolvedThreads();
    opts.per_fold_pipeline = ctx.cfg.per_fold_pipeline;
    const auto evs = eval::EvaluateModels(specs, ctx.data, ctx.rows, pcfg,
                                          ctx.cfg.protocol, ctx.cfg.seed, opts);
    report = SingleRowReport(specs[0].name, stage, evs[0],
                             ctx.cfg.protocol.Describe(), pcfg.class_count());
  }
  m["protocol"] = report.protocol;
  WriteReport(m, report, out_path, ctx.cfg.report_timing, out);
  m.Write(ManifestPath(c, out_path));
  return kExitOk;
}

int Compare(const Common& c, const std::string& out_dir,
            const std::vector<std::string>& args, std::ostream& out,
            std::ostream& err) {
  Manifest m("compare", args);
  Context ctx = Load(c, m, err);
  std::vector<eval::ModelSpec> specs;
  for (const auto& name : ctx.cfg.models) {
    specs.push_back(config::MakeModelSpec(ctx.cfg, name));
  }
  eval::EvalOptions opts;
  opts.threads = ctx.cfg.ResolvedThreads();
  opts.per_fold_pipeline = ctx.cfg.per_fold_pipeline;
  const auto report =
      eval::CompareStages(specs, ctx.data, ctx.rows, ctx.cfg.pipeline,
                          ctx.cfg.protocol, ctx.cfg.seed, opts);
  m["protocol"] = report.protocol;
  const std::string csv = (fs::path(out_dir) / "report.csv").string();
  WriteReport(m, report, csv, ctx.cfg.report_timing, out);
  m.Write(c.manifest.empty() ? (fs::path(out_dir) / "manifest.json").string()
                             : c.manifest);
  return kExitOk;
}

int GridSearchCmd(const Common& c, const std::string& algo,
                  const std::vector<std::string>& axes,
                  const std::string& out_path,
                  const std::vector<std::string>& args, std::ostream& out,
                  std::ostream& err) {
  Manifest m("gridsearch", args);
  Context ctx = Load(c, m, err);
  eval::GridSpec spec;
  spec.cap = ctx.cfg.grid_cap;
  spec.metric = ctx.cfg.grid_metric;
  for (const auto& a : axes) {
    const auto [key, values] = config::SplitAssignment(a);
    eval::GridAxis axis{key, {}};
    std::istringstream in(values);
    for (std::string v; std::getline(in, v, ',');) {
      if (!v.empty()) axis.values.push_back(v);
    }
    // Reject unknown keys and bad values before any training.
    config::RunConfig probe = ctx.cfg;
    for (const auto& v : axis.values) config::Set(probe, key, v);
    spec.axes.push_back(std::move(axis));
  }
  const auto pipeline = eval::FitPipeline(ctx.cfg.pipeline, ctx.data, ctx.rows);
  const auto feats = eval::Transform(pipeline, ctx.data, ctx.rows);
  const auto inner =
      eval::StratifiedKFold(feats.y, ctx.cfg.grid_inner_folds, ctx.cfg.seed);
  const config::RunConfig base = ctx.cfg;
  const auto result = eval::GridSearch(
      spec,
      [&](const eval::Assignment& assignment) {
        config::RunConfig cell = base;
        for (const auto& [k, v] : assignment) config::Set(cell, k, v);
        return config::MakeModelSpec(cell, algo);
      },
      feats.x, feats.y, ctx.cfg.pipeline.class_count(), inner, ctx.cfg.seed);
  WriteOutput(m, out_path, eval::GridCsv(result));
  for (const auto& cell : result.cells) {
    out << (cell.failed ? "  diverged " : "  ") << cell.label;
    if (!cell.failed) out << "  " << spec.metric << "=" << cell.score;
    out << "\n";
  }
  out << "best: " << result.cells[result.best].label << "\n";
  m["best"] = result.cells[result.best].label;
  m.Write(ManifestPath(c, out_path));
  return kExitOk;
}

int ExitCodeFor(ErrorCategory c) {
  switch (c) {
    case ErrorCategory::kUsage: return kExitUsage;
    case ErrorCategory::kData: return kExitData;
    case ErrorCategory::kRuntime: return kExitRuntime;
  }
  return kExitRuntime;
}

}  // namespace

uint64_t Fnv1a64(std::span<const uint8_t> bytes) {
  uint64_t h = 0xcbf29ce484222325ull;
  for (uint8_t b : bytes) {
    h ^= b;
    h *= 0x100000001b3ull;
  }
  return h;
}

int RunCommand(const std::vector<std::string>& args, std::ostream& out,
               std::ostream& err) {
  CLI::App app{"Network intrusion detection workbench (KDD Cup 99, EnCNN and "
               "classical baselines)",
               "nids"};
  app.require_subcommand(0, 1);
  app.footer("\n" + config::KeyHelp());
  bool schema = false;
  bool version = false;
  app.add_flag("--schema", schema, "Print the 41-column KDD schema");
  app.add_flag("--version", version, "Print the tool version");

  Common common;
  std::string out_path, encoded_path, algo, model_path, split = "all",
                                                        stage = "preprocessed";
  std::vector<std::string> axes;

  auto* ingest = app.add_subcommand("ingest", "Validate and summarize a dataset");
  AddCommon(ingest, common);
  ingest->add_option("--out", out_path, "Write the distribution as CSV");

  auto* preprocess =
      app.add_subcommand("preprocess", "Fit the preprocessing plan and write it");
  AddCommon(preprocess, common);
  preprocess->add_option("--out", out_path, "Plan file")->default_str("plan.txt");
  preprocess->add_option("--encoded", encoded_path, "Also write the encoded CSV");

  auto* select_cmd =
      app.add_subcommand("select", "Rank features by information gain");
  AddCommon(select_cmd, common);
  select_cmd->add_option("--out", out_path, "Scores CSV")->default_str("scores.csv");

  auto* train = app.add_subcommand("train", "Train one model and save it");
  AddCommon(train, common);
  train->add_option("--model", algo,
                    "encnn, logreg, tree, svm, forest, adaboost or voting")
      ->required();
  train->add_option("--out", out_path, "Model file")->default_str("model.bin");
  train->add_option("--split", split, "all, train or test side of the holdout");
  train->add_option("--stage", stage, "raw or preprocessed");

  auto* evaluate = app.add_subcommand(
      "evaluate", "Score a saved model, or cross-validate an algorithm");
  AddCommon(evaluate, common);
  evaluate->add_option("--model", model_path, "Saved model file");
  evaluate->add_option("--algo", algo, "Algorithm to cross-validate");
  evaluate->add_option("--out", out_path, "Report CSV")->default_str("report.csv");
  evaluate->add_option("--split", split, "all, train or test (with --model)");
  evaluate->add_option("--stage", stage, "raw or preprocessed (with --algo)");

  auto* compare = app.add_subcommand(
      "compare", "Every model under the raw and preprocessed stages");
  AddCommon(compare, common);
  compare->add_option("--out-dir", out_path, "Output directory")->default_str(".");

  auto* grid = app.add_subcommand("gridsearch", "Exhaustive hyperparameter search");
  AddCommon(grid, common);
  grid->add_option("--model", algo, "Algorithm")->default_str("encnn");
  grid->add_option("--axis", axes, "key=v1,v2,... (repeatable)")->required();
  grid->add_option("--out", out_path, "Grid CSV")->default_str("grid.csv");

  std::vector<std::string> reversed(args.rbegin(), args.rend());
  try {
    app.parse(reversed);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kExitOk : kExitUsage;
  }

  auto or_default = [&](const std::string& def) {
    return out_path.empty() ? def : out_path;
  };
  try {
    if (version) {
      out << "nids " << kToolVersion << "\n";
      return kExitOk;
    }
    if (schema) {
      out << kdd::SchemaText();
      return kExitOk;
    }
    if (ingest->parsed()) return Ingest(common, out_path, args, out, err);
    if (preprocess->parsed()) {
      return Preprocess(common, or_default("plan.txt"), encoded_path, args, out,
                        err);
    }
    if (select_cmd->parsed()) {
      return Select(common, or_default("scores.csv"), args, out, err);
    }
    if (train->parsed()) {
      return Train(common, algo, or_default("model.bin"), split, stage, args,
                   out, err);
    }
    if (evaluate->parsed()) {
      return Evaluate(common, model_path, algo, or_default("report.csv"), split,
                      stage, args, out, err);
    }
    if (compare->parsed()) return Compare(common, or_default("."), args, out, err);
    if (grid->parsed()) {
      return GridSearchCmd(common, algo.empty() ? "encnn" : algo, axes,
                           or_default("grid.csv"), args, out, err);
    }
    out << app.help();
    return kExitUsage;
  } catch (const Error& e) {
    err << "error: " << e.what() << "\n";
    return ExitCodeFor(e.category());
  } catch (const fs::filesystem_error& e) {
    err << "error: " << e.what() << "\n";
    return kExitData;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return kExitRuntime;
  }
}

}  // namespace nids::cli
