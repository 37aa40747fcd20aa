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

#include "nids/kdd.h"

#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>
#include <unordered_map>

#include "nids/errors.h"

namespace nids::kdd {
namespace {

using K = ColumnKind;

// Slots are filled in by MakeSchema().
constexpr std::array<std::pair<std::string_view, ColumnKind>, kFeatureCount>
    kColumns = {{
        {"duration", K::kContinuous},
        {"protocol_type", K::kCategorical},
        {"service", K::kCategorical},
        {"flag", K::kCategorical},
        {"src_bytes", K::kCount},
        {"dst_bytes", K::kCount},
        {"land", K::kBinary},
        {"wrong_fragment", K::kCount},
        {"urgent", K::kCount},
        {"hot", K::kCount},
        {"num_failed_logins", K::kCount},
        {"logged_in", K::kBinary},
        {"num_compromised", K::kCount},
        {"root_shell", K::kBinary},
        {"su_attempted", K::kCount},
        {"num_root", K::kCount},
        {"num_file_creations", K::kCount},
        {"num_shells", K::kCount},
        {"num_access_files", K::kCount},
        {"num_outbound_cmds", K::kCount},
        {"is_host_login", K::kBinary},
        {"is_guest_login", K::kBinary},
        {"count", K::kCount},
        {"srv_count", K::kCount},
        {"serror_rate", K::kRate},
        {"srv_serror_rate", K::kRate},
        {"rerror_rate", K::kRate},
        {"srv_rerror_rate", K::kRate},
        {"same_srv_rate", K::kRate},
        {"diff_srv_rate", K::kRate},
        {"srv_diff_host_rate", K::kRate},
        {"dst_host_count", K::kCount},
        {"dst_host_srv_count", K::kCount},
        {"dst_host_same_srv_rate", K::kRate},
        {"dst_host_diff_srv_rate", K::kRate},
        {"dst_host_same_src_port_rate", K::kRate},
        {"dst_host_srv_diff_host_rate", K::kRate},
        {"dst_host_serror_rate", K::kRate},
        {"dst_host_srv_serror_rate", K::kRate},
        {"dst_host_rerror_rate", K::kRate},
        {"dst_host_srv_rerror_rate", K::kRate},
    }};

std::array<ColumnInfo, kFeatureCount> MakeSchema() {
  std::array<ColumnInfo, kFeatureCount> out{};
  int numeric = 0;
  int symbolic = 0;
  for (int i = 0; i < kFeatureCount; ++i) {
    const auto& [name, kind] = kColumns[i];
    out[i] = {name, kind, kind == K::kCategorical ? symbolic++ : numeric++};
  }
  return out;
}

const std::array<ColumnInfo, kFeatureCount>& SchemaArray() {
  static const auto schema = MakeSchema();
  return schema;
}

struct LabelEntry {
  std::string_view name;
  AttackClass cls;
};

// The 22 attack names of the 10% training file plus "normal".
constexpr std::array<LabelEntry, 23> kLabels = {{
    {"normal", AttackClass::kNormal},
    {"back", AttackClass::kDos},
    {"land", AttackClass::kDos},
    {"neptune", AttackClass::kDos},
    {"pod", AttackClass::kDos},
    {"smurf", AttackClass::kDos},
    {"teardrop", AttackClass::kDos},
    {"ipsweep", AttackClass::kProbe},
    {"nmap", AttackClass::kProbe},
    {"portsweep", AttackClass::kProbe},
    {"satan", AttackClass::kProbe},
    {"ftp_write", AttackClass::kR2L},
    {"guess_passwd", AttackClass::kR2L},
    {"imap", AttackClass::kR2L},
    {"multihop", AttackClass::kR2L},
    {"phf", AttackClass::kR2L},
    {"spy", AttackClass::kR2L},
    {"warezclient", AttackClass::kR2L},
    {"warezmaster", AttackClass::kR2L},
    {"buffer_overflow", AttackClass::kU2R},
    {"loadmodule", AttackClass::kU2R},
    {"perl", AttackClass::kU2R},
    {"rootkit", AttackClass::kU2R},
}};

constexpr std::array<std::string_view, kClassCount> kClassNames = {
    "Normal", "Dos", "Probe", "R2L", "U2R"};

bool IsMissingToken(std::string_view tok) { return tok.empty() || tok == "?"; }

double ParseNumeric(std::string_view tok, int column, ColumnKind kind) {
  if (IsMissingToken(tok)) return kMissing;
  double v = 0.0;
  const char* end = tok.data() + tok.size();
  auto [ptr, ec] = std::from_chars(tok.data(), end, v);
  if (ec != std::errc() || ptr != end || !std::isfinite(v)) {
    throw NumericParseError(column, "column " + std::to_string(column) + " (" +
                                        std::string(kColumns[column].first) +
                                        "): not a number: '" +
                                        std::string(tok) + "'");
  }
  if (v < 0.0) {
    throw NumericParseError(column, "column " + std::to_string(column) + " (" +
                                        std::string(kColumns[column].first) +
                                        "): negative value " +
                                        std::string(tok));
  }
  if (kind == K::kRate && v > 1.0) {
    throw NumericParseError(column, "column " + std::to_string(column) + " (" +
                                        std::string(kColumns[column].first) +
                                        "): rate above 1: " + std::string(tok));
  }
  return v;
}

void AppendShortest(std::string& out, double v) {
  char buf[64];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), v);
  out.append(buf, ptr);
}

}  // namespace

std::string_view ClassName(AttackClass c) {
  return kClassNames[static_cast<int>(c)];
}

std::string_view ClassName(int code) {
  if (code < 0 || code >= kClassCount) return "?";
  return kClassNames[code];
}

std::span<const ColumnInfo> Schema() { return SchemaArray(); }

std::string SchemaText() {
  static constexpr std::array<std::string_view, 5> kKindNames = {
      "count", "continuous", "binary", "rate", "categorical"};
  std::ostringstream out;
  out << "# index name kind\n";
  for (int i = 0; i < kFeatureCount; ++i) {
    const auto& c = Schema()[i];
    out << i << ' ' << c.name << ' ' << kKindNames[static_cast<int>(c.kind)]
        << '\n';
  }
  out << kFeatureCount << " label symbol\n";
  return out.str();
}

bool operator==(const KddRecord& a, const KddRecord& b) {
  for (int i = 0; i < kNumericCount; ++i) {
    const double x = a.numeric[i];
    const double y = b.numeric[i];
    if (std::isnan(x) != std::isnan(y)) return false;
    if (!std::isnan(x) && x != y) return false;
  }
  return a.symbols == b.symbols && a.raw_label == b.raw_label;
}

KddRecord ParseRecord(std::string_view line) {
  while (!line.empty() && (line.back() == '\r' || line.back() == '\n')) {
    line.remove_suffix(1);
  }
  std::array<std::string_view, kFeatureCount + 1> tokens;
  size_t count = 0;
  size_t start = 0;
  while (true) {
    const size_t comma = line.find(',', start);
    const auto tok = line.substr(start, comma == std::string_view::npos
                                            ? std::string_view::npos
                                            : comma - start);
    if (count < tokens.size()) tokens[count] = tok;
    ++count;
    if (comma == std::string_view::npos) break;
    start = comma + 1;
  }
  if (count != tokens.size()) {
    throw FieldCountError("expected " + std::to_string(tokens.size()) +
                          " comma-separated fields, found " +
                          std::to_string(count));
  }

  KddRecord rec;
  const auto& schema = SchemaArray();
  for (int i = 0; i < kFeatureCount; ++i) {
    const auto& col = schema[i];
    if (col.kind == K::kCategorical) {
      rec.symbols[col.slot] =
          IsMissingToken(tokens[i]) ? std::string() : std::string(tokens[i]);
    } else {
      rec.numeric[col.slot] = ParseNumeric(tokens[i], i, col.kind);
    }
  }
  std::string_view label = tokens[kFeatureCount];
  if (!label.empty() && label.back() == '.') label.remove_suffix(1);
  rec.raw_label = std::string(label);
  return rec;
}

std::string FormatRecord(const KddRecord& record) {
  std::string out;
  out.reserve(160);
  const auto& schema = SchemaArray();
  for (int i = 0; i < kFeatureCount; ++i) {
    const auto& col = schema[i];
    if (col.kind == K::kCategorical) {
      const auto& s = record.symbols[col.slot];
      out += s.empty() ? "?" : s;
    } else {
      const double v = record.numeric[col.slot];
      if (std::isnan(v)) {
        out += '?';
      } else {
        AppendShortest(out, v);
      }
    }
    out += ',';
  }
  out += record.raw_label;
  out += '.';
  return out;
}

AttackClass MapLabel(std::string_view raw_label) {
  for (const auto& e : kLabels) {
    if (e.name == raw_label) return e.cls;
  }
  throw UnknownLabelError("unknown attack label '" + std::string(raw_label) +
                          "'");
}

std::span<const std::string_view> KnownLabels() {
  static const auto names = [] {
    std::array<std::string_view, kLabels.size()> out{};
    for (size_t i = 0; i < kLabels.size(); ++i) out[i] = kLabels[i].name;
    return out;
  }();
  return names;
}

ClassDistribution Distribution(std::span<const AttackClass> classes) {
  ClassDistribution d;
  for (auto c : classes) ++d.counts[static_cast<int>(c)];
  d.total = classes.size();
  if (d.total > 0) {
    for (int c = 0; c < kClassCount; ++c) {
      d.ratios[c] = static_cast<double>(d.counts[c]) / d.total;
    }
  }
  return d;
}

std::vector<int> Dataset::class_codes() const {
  std::vector<int> out(classes.size());
  for (size_t i = 0; i < classes.size(); ++i) {
    out[i] = static_cast<int>(classes[i]);
  }
  return out;
}

namespace {

template <typename E>
[[noreturn]] void Rethrow(const E& e, const std::string& where) {
  throw E(where + e.detail());
}

void ParseInto(std::istream& in, const std::string& source, Dataset& out) {
  std::string line;
  uint64_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    const std::string where = source + ":" + std::to_string(line_no) + ": ";
    try {
      KddRecord rec = ParseRecord(line);
      const AttackClass cls = MapLabel(rec.raw_label);
      out.records.push_back(std::move(rec));
      out.classes.push_back(cls);
    } catch (const NumericParseError& e) {
      throw NumericParseError(e.column(), where + e.detail());
    } catch (const FieldCountError& e) {
      Rethrow(e, where);
    } catch (const UnknownLabelError& e) {
      Rethrow(e, where);
    }
  }
}

}  // namespace

Dataset LoadDataset(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open dataset " + path);
  Dataset out;
  out.source_path = path;
  ParseInto(in, path, out);
  if (in.bad()) throw IoError("read failed: " + path);
  return out;
}

Dataset ParseDataset(std::string_view text, const std::string& source_name) {
  std::istringstream in{std::string(text)};
  Dataset out;
  out.source_path = source_name;
  ParseInto(in, source_name, out);
  return out;
}

std::string FormatDataset(const Dataset& data) {
  std::string out;
  for (const auto& r : data.records) {
    out += FormatRecord(r);
    out += '\n';
  }
  return out;
}

Dataset Subset(const Dataset& data, std::span<const size_t> rows) {
  Dataset out;
  out.source_path = data.source_path;
  out.records.reserve(rows.size());
  out.classes.reserve(rows.size());
  for (size_t r : rows) {
    out.records.push_back(data.records.at(r));
    out.classes.push_back(data.classes.at(r));
  }
  return out;
}

}  // namespace nids::kdd
