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

// Command-line front end. Subcommands: ingest, preprocess, select, train,
// evaluate, compare, gridsearch.
//
// Exit codes: 0 success, 1 usage error, 2 data error, 3 runtime error.

#ifndef NIDS_CLI_H_
#define NIDS_CLI_H_

#include <cstdint>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

namespace nids::cli {

inline constexpr char kToolVersion[] = "0.1.0";

inline constexpr int kExitOk = 0;
inline constexpr int kExitUsage = 1;
inline constexpr int kExitData = 2;
inline constexpr int kExitRuntime = 3;

/// `args` excludes the program name.
int RunCommand(const std::vector<std::string>& args, std::ostream& out,
               std::ostream& err);

/// 64-bit FNV-1a, used for manifest input hashes.
uint64_t Fnv1a64(std::span<const uint8_t> bytes);

}  // namespace nids::cli

#endif  // NIDS_CLI_H_
