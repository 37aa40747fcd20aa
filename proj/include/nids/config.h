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

// Flat run configuration. Every tunable lives under a dotted key and is read
// from `key = value` text with '#' comments. Unknown keys are errors.

#ifndef NIDS_CONFIG_H_
#define NIDS_CONFIG_H_

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "nids/baselines.h"
#include "nids/encnn.h"
#include "nids/eval.h"

namespace nids::config {

struct RunConfig {
  eval::PipelineConfig pipeline;
  encnn::EnCnnConfig encnn;
  baselines::BaselineConfig baseline;
  eval::Protocol protocol;
  uint64_t seed = 1;
  /// 0 means one per hardware thread.
  size_t threads = 0;
  bool per_fold_pipeline = true;
  /// Models for compare, by short name; "encnn" plus the baseline names.
  std::vector<std::string> models = {"encnn", "logreg", "tree",  "svm",
                                     "forest", "adaboost", "voting"};
  size_t grid_cap = 64;
  std::string grid_metric = "f1";
  size_t grid_inner_folds = 3;
  /// Write real timings into report CSVs (breaks byte-identical reruns).
  bool report_timing = false;

  size_t ResolvedThreads() const;
};

struct KeyInfo {
  std::string key;
  std::string help;
};

/// Every recognised key in documentation order.
std::span<const KeyInfo> Keys();

/// Throws ConfigError naming the key for unknown keys or bad values.
void Set(RunConfig& config, const std::string& key, const std::string& value);
std::string Get(const RunConfig& config, const std::string& key);

/// Applies `text` on top of `base`. Errors name `source` and the line.
RunConfig ParseConfigText(const std::string& text, const std::string& source,
                          RunConfig base = {});

/// Splits "key=value". Throws ConfigError.
std::pair<std::string, std::string> SplitAssignment(const std::string& text);

/// One `key = value` line per key, parseable by ParseConfigText.
std::string ResolvedText(const RunConfig& config);

/// Key reference for --help.
std::string KeyHelp();

/// Spec for a model short name ("encnn", "logreg", ...). Throws ConfigError.
eval::ModelSpec MakeModelSpec(const RunConfig& config, const std::string& name);

}  // namespace nids::config

#endif  // NIDS_CONFIG_H_
