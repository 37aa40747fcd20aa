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

// Seeded generator of KDD-format records for tests. Each attack name has a
// crude traffic profile loosely shaped like the real file (smurf floods of
// ICMP echo replies, neptune SYN floods, port scans with REJ flags and so
// on), so classifiers have real structure to learn. A `noise` share of rows
// borrows the feature profile of another attack while keeping its own label.

#ifndef NIDS_TESTS_SUPPORT_SYNTHETIC_KDD_H_
#define NIDS_TESTS_SUPPORT_SYNTHETIC_KDD_H_

#include <array>
#include <cstdint>
#include <string>

#include "nids/kdd.h"

namespace nids::testing {

struct SyntheticSpec {
  size_t rows = 1000;
  /// Share of Normal, Dos, Probe, R2L, U2R.
  std::array<double, 5> class_share = {0.40, 0.35, 0.15, 0.07, 0.03};
  double noise = 0.05;
  uint64_t seed = 7;
};

std::string SyntheticKddText(const SyntheticSpec& spec);
kdd::Dataset SyntheticKdd(const SyntheticSpec& spec);

/// Writes the text to a fresh file under the system temp directory and
/// returns its path.
std::string WriteTempFile(const std::string& name, const std::string& text);

/// Fresh empty directory under the system temp directory.
std::string TempDir(const std::string& name);

}  // namespace nids::testing

#endif  // NIDS_TESTS_SUPPORT_SYNTHETIC_KDD_H_
