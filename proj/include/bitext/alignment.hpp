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

// Exact one-best-target-per-source retrieval over unit-normalized sentence
// embeddings. Four criteria are supported:
//
//   nn          cos(x_i, y_j)
//   invnn       -rank of x_i among all sources as seen from y_j
//               (ties: higher cosine, then lower j)
//   invsoftmax  exp(beta cos_ij) / sum_i' exp(beta cos_i'j)
//   csls        2 cos_ij - rT(i) - rS(j), r = mean of the k largest
//               cross-domain cosines
//
// Work is split into blocks so memory stays at O(block_size * n) cosines.
// nn and csls walk source blocks; invnn and invsoftmax need statistics over
// every source for a fixed target, so they walk target blocks and keep a
// running best per source. Candidates are compared under a strict total
// order, which makes the result independent of block size and thread count.

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstddef>
#include <cstdio>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <thread>
#include <vector>

#include "bitext/error.hpp"
#include "bitext/matrix.hpp"

namespace bitext {

enum class Method { kNn, kInvNn, kInvSoftmax, kCsls };

inline const char* to_string(Method m) {
  switch (m) {
    case Method::kNn: return "nn";
    case Method::kInvNn: return "invnn";
    case Method::kInvSoftmax: return "invsoftmax";
    case Method::kCsls: return "csls";
  }
  return "unknown";
}

inline Method parse_method(std::string_view name) {
  if (name == "nn") return Method::kNn;
  if (name == "invnn") return Method::kInvNn;
  if (name == "invsoftmax") return Method::kInvSoftmax;
  if (name == "csls") return Method::kCsls;
  throw ConfigError("unknown alignment method '" + std::string(name) + "'");
}

struct AlignmentParams {
  Method method = Method::kNn;
  std::size_t csls_k = 10;
  double beta = 30.0;
  std::optional<double> threshold;
  std::size_t block_size = 1024;
  unsigned threads = 1;
};

struct AlignmentPair {
  std::size_t src_idx = 0;
  std::size_t tgt_idx = 0;
  double score = 0.0;
  Method method = Method::kNn;
};

struct AlignmentResult {
  std::vector<AlignmentPair> pairs;  // sorted by src_idx
  AlignmentParams params;
  std::size_t n_src = 0;
  std::size_t n_tgt = 0;
};

/// Half-open row range of a matrix.
struct RowSlice {
  const EmbeddingMatrix& matrix;
  std::size_t begin = 0;
  std::size_t end = 0;

  std::size_t size() const noexcept { return end - begin; }
};

/// Dot product accumulated in double, always in index order.
inline double dot(std::span<const float> a, std::span<const float> b) {
  double acc = 0.0;
  for (std::size_t k = 0; k < a.size(); ++k) {
    acc += static_cast<double>(a[k]) * static_cast<double>(b[k]);
  }
  return acc;
}

/// Cosines between every row of `rows` and every row of `keys`, row-major
/// (rows.size() x keys.rows()).
inline std::vector<double> cosine_block(RowSlice rows,
                                        const EmbeddingMatrix& keys) {
  if (rows.matrix.dim() != keys.dim()) {
    throw DimensionMismatch("embedding dims differ: " +
                            std::to_string(rows.matrix.dim()) + " vs " +
                            std::to_string(keys.dim()));
  }
  std::vector<double> out(rows.size() * keys.rows());
  for (std::size_t r = 0; r < rows.size(); ++r) {
    const auto q = rows.matrix.row(rows.begin + r);
    double* dst = out.data() + r * keys.rows();
    for (std::size_t j = 0; j < keys.rows(); ++j) dst[j] = dot(q, keys.row(j));
  }
  return out;
}

inline std::vector<double> cosine_block(const EmbeddingMatrix& src,
                                        const EmbeddingMatrix& tgt) {
  return cosine_block(RowSlice{src, 0, src.rows()}, tgt);
}

namespace detail {

struct Candidate {
  double score = -HUGE_VAL;
  double tie = -HUGE_VAL;
  std::size_t j = static_cast<std::size_t>(-1);
};

// Strict total order: score, then method tie key, then lower index.
inline bool better(const Candidate& a, const Candidate& b) {
  if (a.score != b.score) return a.score > b.score;
  if (a.tie != b.tie) return a.tie > b.tie;
  return a.j < b.j;
}

template <typename Fn>
void for_each_block(std::size_t n, std::size_t block_size, unsigned threads,
                    Fn&& fn) {
  const std::size_t n_blocks = (n + block_size - 1) / block_size;
  const unsigned workers =
      static_cast<unsigned>(std::max<std::size_t>(1, std::min<std::size_t>(threads, n_blocks)));
  auto run = [&](unsigned worker) {
    for (std::size_t b = worker; b < n_blocks; b += workers) {
      fn(worker, b * block_size, std::min(n, (b + 1) * block_size));
    }
  };
  if (workers <= 1) {
    run(0);
    return;
  }
  std::vector<std::jthread> pool;
  pool.reserve(workers);
  for (unsigned w = 0; w < workers; ++w) pool.emplace_back(run, w);
}

inline void check_inputs(const EmbeddingMatrix& src, const EmbeddingMatrix& tgt,
                         const AlignmentParams& params) {
  if (src.dim() != tgt.dim()) {
    throw DimensionMismatch("embedding dims differ: source " +
                            std::to_string(src.dim()) + ", target " +
                            std::to_string(tgt.dim()));
  }
  if (!src.normalized() || !tgt.normalized()) {
    throw ValidationError("alignment requires row-normalized matrices");
  }
  if (tgt.rows() == 0) throw EmptyTargetError();
  if (params.block_size < 1) throw ConfigError("block_size must be >= 1");
  if (params.threads < 1) throw ConfigError("threads must be >= 1");
  if (params.method == Method::kInvSoftmax && !(params.beta > 0)) {
    throw ConfigError("beta must be > 0");
  }
  if (params.method == Method::kCsls) {
    if (params.csls_k < 1) throw ConfigError("csls_k must be >= 1");
    if (params.csls_k > tgt.rows() || params.csls_k > src.rows()) {
      throw ConfigError("csls_k (" + std::to_string(params.csls_k) +
                        ") exceeds the number of source or target rows");
    }
  }
}

// Mean of the k largest values, summed in descending order.
inline double top_k_mean(std::vector<double>& values, std::size_t k) {
  std::nth_element(values.begin(), values.begin() + (k - 1), values.end(),
                   std::greater<>());
  std::sort(values.begin(), values.begin() + k, std::greater<>());
  double sum = 0.0;
  for (std::size_t t = 0; t < k; ++t) sum += values[t];
  return sum / static_cast<double>(k);
}

inline double log_sum_exp_scaled(std::span<const double> cos, double beta) {
  double m = -HUGE_VAL;
  for (double c : cos) m = std::max(m, beta * c);
  double s = 0.0;
  for (double c : cos) s += std::exp(beta * c - m);
  return m + std::log(s);
}

// Per-target statistics a target-block criterion needs from its column.
inline void score_column(Method method, double beta, std::span<const double> col,
                         std::vector<double>& sorted, std::span<double> scores,
                         std::span<double> ties) {
  const std::size_t n = col.size();
  if (method == Method::kInvNn) {
    sorted.assign(col.begin(), col.end());
    std::sort(sorted.begin(), sorted.end());
    for (std::size_t i = 0; i < n; ++i) {
      const auto above = sorted.end() -
                         std::upper_bound(sorted.begin(), sorted.end(), col[i]);
      scores[i] = -static_cast<double>(above);
      ties[i] = col[i];
    }
  } else {
    const double lse = log_sum_exp_scaled(col, beta);
    for (std::size_t i = 0; i < n; ++i) {
      scores[i] = std::exp(beta * col[i] - lse);
      ties[i] = 0.0;
    }
  }
}

inline AlignmentResult finish(std::vector<Candidate> best,
                              const AlignmentParams& params, std::size_t n_src,
                              std::size_t n_tgt) {
  AlignmentResult result;
  result.params = params;
  result.n_src = n_src;
  result.n_tgt = n_tgt;
  result.pairs.reserve(n_src);
  for (std::size_t i = 0; i < n_src; ++i) {
    const auto& c = best[i];
    if (params.threshold && !(c.score >= *params.threshold)) continue;
    result.pairs.push_back({i, c.j, c.score, params.method});
  }
  return result;
}

// Source-block sweep shared by nn and csls.
inline AlignmentResult align_by_source(const EmbeddingMatrix& src,
                                       const EmbeddingMatrix& tgt,
                                       const AlignmentParams& params,
                                       std::span<const double> r_src,
                                       std::span<const double> r_tgt) {
  std::vector<Candidate> best(src.rows());
  const bool csls = params.method == Method::kCsls;
  for_each_block(src.rows(), params.block_size, params.threads,
                 [&](unsigned, std::size_t b0, std::size_t b1) {
                   const auto sims = cosine_block(RowSlice{src, b0, b1}, tgt);
                   for (std::size_t i = b0; i < b1; ++i) {
                     const double* row = sims.data() + (i - b0) * tgt.rows();
                     Candidate c;
                     for (std::size_t j = 0; j < tgt.rows(); ++j) {
                       const double s =
                           csls ? 2.0 * row[j] - (r_src[i] + r_tgt[j]) : row[j];
                       if (s > c.score) c = {s, 0.0, j};
                     }
                     best[i] = c;
                   }
                 });
  return finish(std::move(best), params, src.rows(), tgt.rows());
}

// Target-block sweep shared by invnn and invsoftmax.
inline AlignmentResult align_by_target(const EmbeddingMatrix& src,
                                       const EmbeddingMatrix& tgt,
                                       const AlignmentParams& params) {
  const std::size_t n_src = src.rows();
  const std::size_t n_blocks =
      (tgt.rows() + params.block_size - 1) / params.block_size;
  const unsigned workers = static_cast<unsigned>(
      std::max<std::size_t>(1, std::min<std::size_t>(params.threads, n_blocks)));
  std::vector<std::vector<Candidate>> best(workers,
                                           std::vector<Candidate>(n_src));
  for_each_block(
      tgt.rows(), params.block_size, params.threads,
      [&](unsigned worker, std::size_t b0, std::size_t b1) {
        auto& mine = best[worker];
        const auto cols = cosine_block(RowSlice{tgt, b0, b1}, src);
        std::vector<double> sorted;
        std::vector<double> scores(n_src), ties(n_src);
        for (std::size_t j = b0; j < b1; ++j) {
          const std::span<const double> col(cols.data() + (j - b0) * n_src, n_src);
          score_column(params.method, params.beta, col, sorted, scores, ties);
          for (std::size_t i = 0; i < n_src; ++i) {
            const Candidate c{scores[i], ties[i], j};
            if (better(c, mine[i])) mine[i] = c;
          }
        }
      });
  for (unsigned w = 1; w < workers; ++w) {
    for (std::size_t i = 0; i < n_src; ++i) {
      if (better(best[w][i], best[0][i])) best[0][i] = best[w][i];
    }
  }
  return finish(std::move(best[0]), params, n_src, tgt.rows());
}

}  // namespace detail

/// For each query row, the mean of its k largest cosines against `keys`.
inline std::vector<double> knn_mean_sim(const EmbeddingMatrix& queries,
                                        const EmbeddingMatrix& keys,
                                        std::size_t k,
                                        std::size_t block_size = 1024,
                                        unsigned threads = 1) {
  if (k < 1 || k > keys.rows()) {
    throw ConfigError("k = " + std::to_string(k) + " must lie in [1, " +
                      std::to_string(keys.rows()) + "]");
  }
  if (block_size < 1) throw ConfigError("block_size must be >= 1");
  std::vector<double> out(queries.rows());
  detail::for_each_block(
      queries.rows(), block_size, threads,
      [&](unsigned, std::size_t b0, std::size_t b1) {
        const auto sims = cosine_block(RowSlice{queries, b0, b1}, keys);
        std::vector<double> row(keys.rows());
        for (std::size_t q = b0; q < b1; ++q) {
          const double* src = sims.data() + (q - b0) * keys.rows();
          row.assign(src, src + keys.rows());
          out[q] = detail::top_k_mean(row, k);
        }
      });
  return out;
}

inline AlignmentResult align_nn(const EmbeddingMatrix& src,
                                const EmbeddingMatrix& tgt,
                                AlignmentParams params = {}) {
  params.method = Method::kNn;
  detail::check_inputs(src, tgt, params);
  return detail::align_by_source(src, tgt, params, {}, {});
}

inline AlignmentResult align_invnn(const EmbeddingMatrix& src,
                                   const EmbeddingMatrix& tgt,
                                   AlignmentParams params = {}) {
  params.method = Method::kInvNn;
  detail::check_inputs(src, tgt, params);
  return detail::align_by_target(src, tgt, params);
}

inline AlignmentResult align_invsoftmax(const EmbeddingMatrix& src,
                                        const EmbeddingMatrix& tgt,
                                        AlignmentParams params = {}) {
  params.method = Method::kInvSoftmax;
  detail::check_inputs(src, tgt, params);
  return detail::align_by_target(src, tgt, params);
}

inline AlignmentResult align_csls(const EmbeddingMatrix& src,
                                  const EmbeddingMatrix& tgt,
                                  AlignmentParams params = {}) {
  params.method = Method::kCsls;
  detail::check_inputs(src, tgt, params);
  const auto r_src =
      knn_mean_sim(src, tgt, params.csls_k, params.block_size, params.threads);
  const auto r_tgt =
      knn_mean_sim(tgt, src, params.csls_k, params.block_size, params.threads);
  return detail::align_by_source(src, tgt, params, r_src, r_tgt);
}

inline AlignmentResult align(const EmbeddingMatrix& src,
                             const EmbeddingMatrix& tgt,
                             const AlignmentParams& params) {
  switch (params.method) {
    case Method::kNn: return align_nn(src, tgt, params);
    case Method::kInvNn: return align_invnn(src, tgt, params);
    case Method::kInvSoftmax: return align_invsoftmax(src, tgt, params);
    case Method::kCsls: return align_csls(src, tgt, params);
  }
  throw ConfigError("unknown alignment method");
}

/// Full n_src x n_tgt table of method scores (row-major). Diagnostic use on
/// small inputs; alignment itself never materializes this table.
inline std::vector<double> score_table(const EmbeddingMatrix& src,
                                       const EmbeddingMatrix& tgt,
                                       const AlignmentParams& params) {
  detail::check_inputs(src, tgt, params);
  const std::size_t n = src.rows(), m = tgt.rows();
  std::vector<double> table = cosine_block(src, tgt);
  if (params.method == Method::kCsls) {
    const auto r_src = knn_mean_sim(src, tgt, params.csls_k);
    const auto r_tgt = knn_mean_sim(tgt, src, params.csls_k);
    for (std::size_t i = 0; i < n; ++i) {
      for (std::size_t j = 0; j < m; ++j) {
        double& c = table[i * m + j];
        c = 2.0 * c - (r_src[i] + r_tgt[j]);
      }
    }
  } else if (params.method != Method::kNn) {
    const auto cols = cosine_block(tgt, src);
    std::vector<double> sorted, scores(n), ties(n);
    for (std::size_t j = 0; j < m; ++j) {
      detail::score_column(params.method, params.beta,
                           std::span<const double>(cols.data() + j * n, n),
                           sorted, scores, ties);
      for (std::size_t i = 0; i < n; ++i) table[i * m + j] = scores[i];
    }
  }
  return table;
}

// -- output -------------------------------------------------------------------

namespace detail {

inline std::string shortest(double v) {
  char buf[64];
  const auto r = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, r.ptr);
}

inline std::string tsv_field(std::string_view text) {
  std::string out(text);
  for (char& c : out) {
    if (c == '\t' || c == '\n' || c == '\r') c = ' ';
  }
  return out;
}

}  // namespace detail

inline std::string alignment_header(const AlignmentParams& params) {
  return std::string("#method=") + to_string(params.method) +
         " k=" + std::to_string(params.csls_k) +
         " beta=" + detail::shortest(params.beta) + " threshold=" +
         (params.threshold ? detail::shortest(*params.threshold) : "none");
}

inline std::string format_score(double score) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.6f", score);
  return buf;
}

/// Header line plus `src_idx\ttgt_idx\tscore\tsrc_text\ttgt_text` per pair.
inline std::string alignment_tsv(const AlignmentResult& result,
                                 std::span<const std::string> src_texts,
                                 std::span<const std::string> tgt_texts) {
  std::string out = alignment_header(result.params);
  out += '\n';
  for (const auto& p : result.pairs) {
    out += std::to_string(p.src_idx);
    out += '\t';
    out += std::to_string(p.tgt_idx);
    out += '\t';
    out += format_score(p.score);
    out += '\t';
    out += detail::tsv_field(src_texts[p.src_idx]);
    out += '\t';
    out += detail::tsv_field(tgt_texts[p.tgt_idx]);
    out += '\n';
  }
  return out;
}

/// Aligns two corpora whose matrices were embedded row-for-row.
inline AlignmentResult align_corpora(std::span<const std::string> src_texts,
                                     std::span<const std::string> tgt_texts,
                                     const EmbeddingMatrix& src,
                                     const EmbeddingMatrix& tgt,
                                     const AlignmentParams& params) {
  if (src.rows() != src_texts.size() || tgt.rows() != tgt_texts.size()) {
    throw DimensionMismatch("matrix row counts do not match corpus sizes");
  }
  return align(src, tgt, params);
}

}  // namespace bitext
