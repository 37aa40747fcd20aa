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

#ifndef NIDS_MATRIX_H_
#define NIDS_MATRIX_H_

#include <cstddef>
#include <span>
#include <vector>

namespace nids {

/// Dense row-major matrix of doubles.
struct Matrix {
  size_t rows = 0;
  size_t cols = 0;
  std::vector<double> values;

  Matrix() = default;
  Matrix(size_t r, size_t c, double fill = 0.0)
      : rows(r), cols(c), values(r * c, fill) {}

  double& at(size_t r, size_t c) { return values[r * cols + c]; }
  double at(size_t r, size_t c) const { return values[r * cols + c]; }

  std::span<double> row(size_t r) { return {values.data() + r * cols, cols}; }
  std::span<const double> row(size_t r) const {
    return {values.data() + r * cols, cols};
  }

  std::vector<double> column(size_t c) const {
    std::vector<double> out(rows);
    for (size_t r = 0; r < rows; ++r) out[r] = at(r, c);
    return out;
  }

  Matrix SelectRows(std::span<const size_t> idx) const {
    Matrix out(idx.size(), cols);
    for (size_t i = 0; i < idx.size(); ++i) {
      auto src = row(idx[i]);
      std::copy(src.begin(), src.end(), out.row(i).begin());
    }
    return out;
  }

  Matrix SelectColumns(std::span<const size_t> idx) const {
    Matrix out(rows, idx.size());
    for (size_t r = 0; r < rows; ++r) {
      for (size_t j = 0; j < idx.size(); ++j) out.at(r, j) = at(r, idx[j]);
    }
    return out;
  }
};

}  // namespace nids

#endif  // NIDS_MATRIX_H_
