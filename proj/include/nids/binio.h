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

// Versioned little-endian model container shared by EnCNN and baselines.
//
// Layout:
//   "ENC1"            4 magic bytes
//   u32 version       kContainerVersion
//   u32 kind          ModelKind tag
//   records...        each: u32 tag, u64 byte length, payload
//
// All integers are little-endian; reals are raw IEEE-754 binary64 bit
// patterns, so a save/load round trip is bit-exact.

#ifndef NIDS_BINIO_H_
#define NIDS_BINIO_H_

#include <cstdint>
#include <functional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace nids {

inline constexpr char kContainerMagic[4] = {'E', 'N', 'C', '1'};
inline constexpr uint32_t kContainerVersion = 1;

enum class ModelKind : uint32_t {
  kEnCnn = 1,
  kLogisticRegression = 10,
  kDecisionTree = 11,
  kLinearSvm = 12,
  kRandomForest = 13,
  kAdaBoost = 14,
  kVotingEnsemble = 15,
};

/// Record tag for an opaque caller blob (e.g. the preprocessing pipeline)
/// stored next to any model kind.
inline constexpr uint32_t kAttachmentTag = 100;

class ByteWriter {
 public:
  void U8(uint8_t v) { bytes_.push_back(v); }
  void U32(uint32_t v);
  void U64(uint64_t v);
  void I64(int64_t v) { U64(static_cast<uint64_t>(v)); }
  void F64(double v);
  void F64s(std::span<const double> v);
  void Str(std::string_view s);
  void Bytes(std::span<const uint8_t> b) {
    bytes_.insert(bytes_.end(), b.begin(), b.end());
  }

  /// Appends a length-prefixed record.
  void Record(uint32_t tag, const ByteWriter& payload);

  const std::vector<uint8_t>& bytes() const { return bytes_; }

 private:
  std::vector<uint8_t> bytes_;
};

/// Bounds-checked reader. Every overrun throws TruncationError whose message
/// begins with the reader's context string.
class ByteReader {
 public:
  ByteReader(std::span<const uint8_t> bytes, std::string context)
      : bytes_(bytes), context_(std::move(context)) {}

  uint8_t U8();
  uint32_t U32();
  uint64_t U64();
  int64_t I64() { return static_cast<int64_t>(U64()); }
  double F64();
  std::vector<double> F64s(uint64_t count);
  void F64sInto(std::span<double> out);
  std::string Str();
  std::span<const uint8_t> Take(uint64_t n);

  bool AtEnd() const { return pos_ == bytes_.size(); }
  size_t remaining() const { return bytes_.size() - pos_; }
  const std::string& context() const { return context_; }

 private:
  void Need(uint64_t n);

  std::span<const uint8_t> bytes_;
  size_t pos_ = 0;
  std::string context_;
};

struct RawRecord {
  uint32_t tag;
  std::span<const uint8_t> payload;
};

/// Builds header + records.
std::vector<uint8_t> EncodeContainer(ModelKind kind, const ByteWriter& records);

struct DecodedContainer {
  ModelKind kind;
  std::vector<RawRecord> records;
};

/// Names a record for error messages given its tag and whatever prefix of its
/// payload is present.
using RecordDescriber =
    std::function<std::string(uint32_t tag, std::span<const uint8_t> partial)>;

/// Validates magic and version and splits the record stream. `bytes` must
/// outlive the result.
DecodedContainer DecodeContainer(std::span<const uint8_t> bytes,
                                 const RecordDescriber& describe = {});

/// Reads the kind tag only.
ModelKind PeekContainerKind(std::span<const uint8_t> bytes);

std::vector<uint8_t> ReadFileBytes(const std::string& path);

/// Writes to `path + ".tmp"` then renames over `path`.
void WriteFileAtomic(const std::string& path, std::span<const uint8_t> bytes);
void WriteFileAtomic(const std::string& path, std::string_view text);

}  // namespace nids

#endif  // NIDS_BINIO_H_
