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

// KDDCUP'99 connection records: schema, parsing, label taxonomy and loading.

#ifndef NIDS_KDD_H_
#define NIDS_KDD_H_

#include <array>
#include <cstddef>
#include <cstdint>
#include <limits>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace nids::kdd {

inline constexpr int kFeatureCount = 41;
inline constexpr int kNumericCount = 38;
inline constexpr int kCategoricalCount = 3;
inline constexpr int kClassCount = 5;

/// Stable integer codes 0..4. Do not reorder: codes are persisted in model
/// files, fold plans and report CSVs.
enum class AttackClass : int {
  kNormal = 0,
  kDos = 1,
  kProbe = 2,
  kR2L = 3,
  kU2R = 4,
};

std::string_view ClassName(AttackClass c);
std::string_view ClassName(int code);

enum class ColumnKind {
  kCount,        // non-negative integer-valued counter or byte count
  kContinuous,   // non-negative real (duration)
  kBinary,       // 0/1 flag
  kRate,         // fraction in [0, 1]
  kCategorical,  // symbol
};

struct ColumnInfo {
  std::string_view name;
  ColumnKind kind;
  /// Slot in KddRecord::numeric or KddRecord::symbols.
  int slot;
};

/// The 41 feature columns in file order.
std::span<const ColumnInfo> Schema();

/// Human-readable schema dump, one column per line.
std::string SchemaText();

/// Missing numeric values are stored as quiet NaN ("?" or empty token);
/// missing symbols as the empty string.
inline constexpr double kMissing = std::numeric_limits<double>::quiet_NaN();

struct KddRecord {
  /// The 38 numeric features in file order (categorical columns skipped).
  std::array<double, kNumericCount> numeric{};
  /// protocol_type, service, flag.
  std::array<std::string, kCategoricalCount> symbols;
  /// Label without the trailing '.'.
  std::string raw_label;

  friend bool operator==(const KddRecord& a, const KddRecord& b);
};

/// Parses one comma-separated line of 41 features plus a label.
/// Throws FieldCountError or NumericParseError (0-based column). Rate values
/// outside [0, 1] and negative counts are reported as NumericParseError too.
KddRecord ParseRecord(std::string_view line);

/// Formats a record back to KDD text (label with trailing '.'). Reals use the
/// shortest representation that parses back to the same double.
std::string FormatRecord(const KddRecord& record);

/// Attack name to class, per the dataset's training_attack_types taxonomy.
/// Throws UnknownLabelError.
AttackClass MapLabel(std::string_view raw_label);

/// Known attack names, "normal" included.
std::span<const std::string_view> KnownLabels();

struct ClassDistribution {
  std::array<uint64_t, kClassCount> counts{};
  std::array<double, kClassCount> ratios{};
  uint64_t total = 0;
};

ClassDistribution Distribution(std::span<const AttackClass> classes);

struct Dataset {
  std::vector<KddRecord> records;
  std::vector<AttackClass> classes;
  std::string source_path;

  size_t size() const { return records.size(); }
  ClassDistribution class_distribution() const { return Distribution(classes); }
  std::vector<int> class_codes() const;
};

/// Loads a KDD file. Parse and label errors are rethrown with
/// "path:line:" prepended. Blank lines are skipped.
Dataset LoadDataset(const std::string& path);

/// Same as LoadDataset but from in-memory text.
Dataset ParseDataset(std::string_view text, const std::string& source_name);

/// Concatenated FormatRecord lines.
std::string FormatDataset(const Dataset& data);

/// Row subset in the given order.
Dataset Subset(const Dataset& data, std::span<const size_t> rows);

}  // namespace nids::kdd

#endif  // NIDS_KDD_H_
