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

#ifndef NIDS_ERRORS_H_
#define NIDS_ERRORS_H_

#include <stdexcept>
#include <string>

namespace nids {

/// Coarse failure category. The CLI maps these onto process exit codes
/// (usage = 1, data = 2, runtime = 3).
enum class ErrorCategory { kUsage, kData, kRuntime };

/// Base of every error thrown by the library.
class Error : public std::runtime_error {
 public:
  Error(ErrorCategory category, const std::string& name,
        const std::string& detail)
      : std::runtime_error(name + ": " + detail),
        category_(category),
        detail_(detail) {}

  ErrorCategory category() const noexcept { return category_; }

  /// Message without the error-name prefix, for re-wrapping with context.
  const std::string& detail() const noexcept { return detail_; }

 private:
  ErrorCategory category_;
  std::string detail_;
};

#define NIDS_DEFINE_ERROR(Name, Category)                                \
  class Name : public ::nids::Error {                                    \
   public:                                                               \
    explicit Name(const std::string& detail)                             \
        : ::nids::Error(::nids::ErrorCategory::Category, #Name, detail) {} \
  }

// Input data problems.
NIDS_DEFINE_ERROR(IoError, kData);
NIDS_DEFINE_ERROR(FieldCountError, kData);
NIDS_DEFINE_ERROR(UnknownLabelError, kData);
NIDS_DEFINE_ERROR(EmptyDatasetError, kData);
NIDS_DEFINE_ERROR(EmptyColumnError, kData);
NIDS_DEFINE_ERROR(EmptyInputError, kData);
NIDS_DEFINE_ERROR(SchemaMismatchError, kData);
NIDS_DEFINE_ERROR(NonFiniteFeatureError, kData);
NIDS_DEFINE_ERROR(SingleClassError, kData);
NIDS_DEFINE_ERROR(MagicMismatchError, kData);
NIDS_DEFINE_ERROR(VersionError, kData);
NIDS_DEFINE_ERROR(TruncationError, kData);
NIDS_DEFINE_ERROR(PlanFormatError, kData);

// Caller contract violations.
NIDS_DEFINE_ERROR(LengthMismatchError, kUsage);
NIDS_DEFINE_ERROR(ShapeMismatchError, kUsage);
NIDS_DEFINE_ERROR(ShapeError, kUsage);
NIDS_DEFINE_ERROR(ShapeChainError, kUsage);
NIDS_DEFINE_ERROR(KOutOfRangeError, kUsage);
NIDS_DEFINE_ERROR(KTooLargeError, kUsage);
NIDS_DEFINE_ERROR(TargetOutOfRangeError, kUsage);
NIDS_DEFINE_ERROR(LabelRangeError, kUsage);
NIDS_DEFINE_ERROR(CodeRangeError, kUsage);
NIDS_DEFINE_ERROR(DimensionMismatchError, kUsage);
NIDS_DEFINE_ERROR(ConfigError, kUsage);
NIDS_DEFINE_ERROR(CapExceededError, kUsage);
NIDS_DEFINE_ERROR(DegenerateSplitError, kUsage);

// Failures while computing.
NIDS_DEFINE_ERROR(NegativeActivationError, kRuntime);
NIDS_DEFINE_ERROR(UntrainedModelError, kRuntime);
NIDS_DEFINE_ERROR(MissingHeadError, kRuntime);
NIDS_DEFINE_ERROR(DivergenceError, kRuntime);

/// Non-numeric token in a numeric slot. Carries the 0-based column.
class NumericParseError : public Error {
 public:
  NumericParseError(int column, const std::string& detail)
      : Error(ErrorCategory::kData, "NumericParseError", detail),
        column_(column) {}

  int column() const noexcept { return column_; }

 private:
  int column_;
};

/// Failure inside one evaluation fold. Keeps the category of the original
/// error so exit codes survive the wrapping.
class FoldError : public Error {
 public:
  FoldError(size_t fold, const Error& cause, const std::string& context)
      : Error(cause.category(), "FoldError",
              "fold " + std::to_string(fold) + ", " + context + ": " +
                  cause.what()),
        fold_(fold) {}

  size_t fold() const noexcept { return fold_; }

 private:
  size_t fold_;
};

}  // namespace nids

#endif  // NIDS_ERRORS_H_
