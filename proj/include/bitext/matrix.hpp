// Copyright 2026 The bitext-align Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "bitext/error.hpp"

namespace bitext {

/// Row-major n x d matrix of 32-bit floats; row i belongs to sentence i.
class EmbeddingMatrix {
 public:
  EmbeddingMatrix() = default;
  EmbeddingMatrix(std::size_t rows, std::size_t dim)
      : rows_(rows), dim_(dim), data_(rows * dim, 0.0f) {}
  EmbeddingMatrix(std::size_t rows, std::size_t dim, std::vector<float> data,
                  bool normalized = false)
      : rows_(rows), dim_(dim), data_(std::move(data)), normalized_(normalized) {
    if (data_.size() != rows_ * dim_) {
      throw DimensionMismatch("matrix data size does not match rows x dim");
    }
  }

  static EmbeddingMatrix from_rows(const std::vector<std::vector<float>>& rows,
                                   std::size_t dim) {
    EmbeddingMatrix m(rows.size(), dim);
    for (std::size_t i = 0; i < rows.size(); ++i) {
      if (rows[i].size() != dim) {
        throw DimensionMismatch("row " + std::to_string(i) + " has length " +
                                std::to_string(rows[i].size()) +
                                ", expected " + std::to_string(dim));
      }
      std::copy(rows[i].begin(), rows[i].end(), m.data_.begin() + i * dim);
    }
    return m;
  }

  std::size_t rows() const noexcept { return rows_; }
  std::size_t dim() const noexcept { return dim_; }
  bool normalized() const noexcept { return normalized_; }
  std::span<const float> data() const noexcept { return data_; }

  std::span<const float> row(std::size_t i) const noexcept {
    return {data_.data() + i * dim_, dim_};
  }
  std::span<float> mutable_row(std::size_t i) noexcept {
    return {data_.data() + i * dim_, dim_};
  }

  friend bool operator==(const EmbeddingMatrix&,
                         const EmbeddingMatrix&) = default;

 private:
  friend EmbeddingMatrix normalize_rows(EmbeddingMatrix m);

  std::size_t rows_ = 0;
  std::size_t dim_ = 0;
  std::vector<float> data_;
  bool normalized_ = false;
};

/// Scales every row to unit L2 norm (norm accumulated in double).
inline EmbeddingMatrix normalize_rows(EmbeddingMatrix m) {
  for (std::size_t i = 0; i < m.rows(); ++i) {
    auto row = m.mutable_row(i);
    double sq = 0.0;
    for (float v : row) sq += static_cast<double>(v) * v;
    const double norm = std::sqrt(sq);
    if (!(norm >= 1e-12)) throw NormalizationError(i);
    for (float& v : row) v = static_cast<float>(v / norm);
  }
  m.normalized_ = true;
  return m;
}

}  // namespace bitext
