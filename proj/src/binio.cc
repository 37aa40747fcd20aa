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

#include "nids/binio.h"

#include <bit>
#include <cstdio>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <iterator>

#include "nids/errors.h"

namespace nids {

void ByteWriter::U32(uint32_t v) {
  for (int i = 0; i < 4; ++i) bytes_.push_back(static_cast<uint8_t>(v >> (8 * i)));
}

void ByteWriter::U64(uint64_t v) {
  for (int i = 0; i < 8; ++i) bytes_.push_back(static_cast<uint8_t>(v >> (8 * i)));
}

void ByteWriter::F64(double v) { U64(std::bit_cast<uint64_t>(v)); }

void ByteWriter::F64s(std::span<const double> v) {
  bytes_.reserve(bytes_.size() + 8 * v.size());
  for (double x : v) F64(x);
}

void ByteWriter::Str(std::string_view s) {
  U64(s.size());
  bytes_.insert(bytes_.end(), s.begin(), s.end());
}

void ByteWriter::Record(uint32_t tag, const ByteWriter& payload) {
  U32(tag);
  U64(payload.bytes_.size());
  Bytes(payload.bytes_);
}

void ByteReader::Need(uint64_t n) {
  if (n > remaining()) {
    throw TruncationError(context_ + ": need " + std::to_string(n) +
                          " bytes, " + std::to_string(remaining()) +
                          " remain");
  }
}

uint8_t ByteReader::U8() {
  Need(1);
  return bytes_[pos_++];
}

uint32_t ByteReader::U32() {
  Need(4);
  uint32_t v = 0;
  for (int i = 0; i < 4; ++i) v |= static_cast<uint32_t>(bytes_[pos_ + i]) << (8 * i);
  pos_ += 4;
  return v;
}

uint64_t ByteReader::U64() {
  Need(8);
  uint64_t v = 0;
  for (int i = 0; i < 8; ++i) v |= static_cast<uint64_t>(bytes_[pos_ + i]) << (8 * i);
  pos_ += 8;
  return v;
}

double ByteReader::F64() { return std::bit_cast<double>(U64()); }

std::vector<double> ByteReader::F64s(uint64_t count) {
  if (count > remaining() / 8) Need(count * 8);
  std::vector<double> out(count);
  F64sInto(out);
  return out;
}

void ByteReader::F64sInto(std::span<double> out) {
  Need(out.size() * 8);
  for (double& x : out) x = F64();
}

std::string ByteReader::Str() {
  const uint64_t n = U64();
  auto b = Take(n);
  return std::string(b.begin(), b.end());
}

std::span<const uint8_t> ByteReader::Take(uint64_t n) {
  Need(n);
  auto out = bytes_.subspan(pos_, n);
  pos_ += n;
  return out;
}

std::vector<uint8_t> EncodeContainer(ModelKind kind, const ByteWriter& records) {
  ByteWriter w;
  w.Bytes(std::span(reinterpret_cast<const uint8_t*>(kContainerMagic), 4));
  w.U32(kContainerVersion);
  w.U32(static_cast<uint32_t>(kind));
  w.Bytes(records.bytes());
  return w.bytes();
}

namespace {

ModelKind ReadHeader(ByteReader& r) {
  if (r.remaining() < 4 ||
      std::memcmp(r.Take(4).data(), kContainerMagic, 4) != 0) {
    throw MagicMismatchError("not an ENC1 model container");
  }
  const uint32_t version = r.U32();
  if (version != kContainerVersion) {
    throw VersionError("container version " + std::to_string(version) +
                       " is not supported (expected " +
                       std::to_string(kContainerVersion) + ")");
  }
  return static_cast<ModelKind>(r.U32());
}

}  // namespace

ModelKind PeekContainerKind(std::span<const uint8_t> bytes) {
  ByteReader r(bytes, "header");
  return ReadHeader(r);
}

DecodedContainer DecodeContainer(std::span<const uint8_t> bytes,
                                 const RecordDescriber& describe) {
  ByteReader r(bytes, "header");
  DecodedContainer out{ReadHeader(r), {}};
  while (!r.AtEnd()) {
    const size_t index = out.records.size();
    if (r.remaining() < 12) {
      throw TruncationError("record " + std::to_string(index) +
                            ": incomplete record header");
    }
    const uint32_t tag = r.U32();
    const uint64_t length = r.U64();
    if (length > r.remaining()) {
      auto partial = r.Take(r.remaining());
      std::string name = describe ? describe(tag, partial) : std::string();
      if (name.empty()) name = "record " + std::to_string(index);
      throw TruncationError(name + ": declared " + std::to_string(length) +
                            " bytes, " + std::to_string(partial.size()) +
                            " present");
    }
    out.records.push_back({tag, r.Take(length)});
  }
  return out;
}

std::vector<uint8_t> ReadFileBytes(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path);
  std::vector<uint8_t> bytes((std::istreambuf_iterator<char>(in)),
                             std::istreambuf_iterator<char>());
  if (in.bad()) throw IoError("read failed: " + path);
  return bytes;
}

void WriteFileAtomic(const std::string& path, std::span<const uint8_t> bytes) {
  const std::string tmp = path + ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw IoError("cannot open " + tmp + " for writing");
    out.write(reinterpret_cast<const char*>(bytes.data()),
              static_cast<std::streamsize>(bytes.size()));
    out.flush();
    if (!out) {
      std::remove(tmp.c_str());
      throw IoError("write failed: " + tmp);
    }
  }
  std::error_code ec;
  std::filesystem::rename(tmp, path, ec);
  if (ec) {
    std::remove(tmp.c_str());
    throw IoError("rename " + tmp + " -> " + path + ": " + ec.message());
  }
}

void WriteFileAtomic(const std::string& path, std::string_view text) {
  WriteFileAtomic(path, std::span(reinterpret_cast<const uint8_t*>(text.data()),
                                  text.size()));
}

}  // namespace nids
