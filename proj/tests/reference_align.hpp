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

// Exhaustive dense reference for the retrieval criteria. Deliberately naive:
// full tables, no blocking, no log-sum-exp, explicit rank counting.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <functional>
#include <random>
#include <vector>

#include "bitext/alignment.hpp"
#include "bitext/matrix.hpp"

namespace bitext::testing_ref {

using Table = std::vector<std::vector<double>>;

inline Table dense_cosines(const EmbeddingMatrix& a, const EmbeddingMatrix& b) {
  Table t(a.rows(), std::vector<double>(b.rows()));
  for (std::size_t i = 0; i < a.rows(); ++i) {
    for (std::size_t j = 0; j < b.rows(); ++j) {
      double s = 0;
      for (std::size_t k = 0; k < a.dim(); ++k) {
        s += static_cast<double>(a.row(i)[k]) * static_cast<double>(b.row(j)[k]);
      }
      t[i][j] = s;
    }
  }
  return t;
}

inline double mean_of_top(std::vector<double> v, std::size_t k) {
  std::sort(v.begin(), v.end(), std::greater<>());
  double s = 0;
  for (std::size_t t = 0; t < k; ++t) s += v[t];
  return s / static_cast<double>(k);
}

struct RefPair {
  std::size_t j;
  double score;
};

/// Method score table, entry [i][j].
inline Table reference_scores(const Table& cos, Method method, std::size_t k,
                              double beta) {
  const std::size_t n = cos.size(), m = n ? cos[0].size() : 0;
  Table s(n, std::vector<double>(m));
  std::vector<double> r_src(n), r_tgt(m);
  if (method == Method::kCsls) {
    for (std::size_t i = 0; i < n; ++i) r_src[i] = mean_of_top(cos[i], k);
    for (std::size_t j = 0; j < m; ++j) {
      std::vector<double> col(n);
      for (std::size_t i = 0; i < n; ++i) col[i] = cos[i][j];
      r_tgt[j] = mean_of_top(col, k);
    }
  }
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < m; ++j) {
      switch (method) {
        case Method::kNn:
          s[i][j] = cos[i][j];
          break;
        case Method::kInvNn: {
          std::size_t rank = 0;
          for (std::size_t i2 = 0; i2 < n; ++i2) rank += cos[i2][j] > cos[i][j];
          s[i][j] = -static_cast<double>(rank);
          break;
        }
        case Method::kInvSoftmax: {
          double z = 0;
          for (std::size_t i2 = 0; i2 < n; ++i2) z += std::exp(beta * cos[i2][j]);
          s[i][j] = std::exp(beta * cos[i][j]) / z;
          break;
        }
        case Method::kCsls:
          s[i][j] = 2 * cos[i][j] - r_src[i] - r_tgt[j];
          break;
      }
    }
  }
  return s;
}

inline std::vector<RefPair> reference_align(const EmbeddingMatrix& src,
                                            const EmbeddingMatrix& tgt,
                                            Method method, std::size_t k = 10,
                                            double beta = 30) {
  const Table cos = dense_cosines(src, tgt);
  const Table s = reference_scores(cos, method, k, beta);
  std::vector<RefPair> out;
  for (std::size_t i = 0; i < src.rows(); ++i) {
    std::size_t best = 0;
    for (std::size_t j = 1; j < tgt.rows(); ++j) {
      const bool higher = s[i][j] > s[i][best];
      const bool tie_wins = method == Method::kInvNn && s[i][j] == s[i][best] &&
                            cos[i][j] > cos[i][best];
      if (higher || tie_wins) best = j;
    }
    out.push_back({best, s[i][best]});
  }
  return out;
}

inline EmbeddingMatrix random_unit_matrix(std::mt19937_64& rng, std::size_t n,
                                          std::size_t d) {
  std::normal_distribution<float> g(0.0f, 1.0f);
  EmbeddingMatrix m(n, d);
  for (std::size_t i = 0; i < n; ++i) {
    for (auto& x : m.mutable_row(i)) x = g(rng);
  }
  return normalize_rows(std::move(m));
}

}  // namespace bitext::testing_ref
