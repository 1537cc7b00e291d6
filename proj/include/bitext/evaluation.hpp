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

// Scoring predicted alignments against gold pairings, corpus statistics over
// mined pairs, and the human-annotation sample/summary round trip.

#include <algorithm>
#include <array>
#include <charconv>
#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <numeric>
#include <random>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <unordered_set>
#include <utility>
#include <vector>

#include "bitext/alignment.hpp"
#include "bitext/corpus_prep.hpp"
#include "bitext/error.hpp"
#include "bitext/io.hpp"
#include "bitext/rng.hpp"
#include "json.hpp"

namespace bitext {

struct GoldAlignment {
  std::vector<std::pair<std::size_t, std::size_t>> pairs;
  std::size_t n_src = 0;
  std::size_t n_tgt = 0;
};

struct F1Report {
  double precision = 0.0;
  double recall = 0.0;
  double f1 = 0.0;
  std::size_t n_pred = 0;
  std::size_t n_gold = 0;
  std::size_t n_correct = 0;
};

inline void to_json(nlohmann::json& j, const F1Report& r) {
  j = nlohmann::json{{"precision", r.precision}, {"recall", r.recall},
                     {"f1", r.f1},               {"n_pred", r.n_pred},
                     {"n_gold", r.n_gold},       {"n_correct", r.n_correct},
                     {"averaging", "micro over (src_idx, tgt_idx) pairs"}};
}

/// Micro precision/recall/F1 over the sets of (src, tgt) index pairs.
inline F1Report evaluate_f1(std::span<const AlignmentPair> pred,
                            const GoldAlignment& gold) {
  std::unordered_map<std::size_t, std::size_t> gold_by_src;
  for (const auto& [s, t] : gold.pairs) {
    if (s >= gold.n_src || t >= gold.n_tgt) {
      throw IndexOutOfBounds("gold pair (" + std::to_string(s) + ", " +
                             std::to_string(t) + ") out of bounds");
    }
    if (!gold_by_src.emplace(s, t).second) {
      throw ValidationError("gold has more than one pair for source " +
                            std::to_string(s));
    }
  }
  F1Report r;
  r.n_gold = gold.pairs.size();
  std::unordered_set<std::uint64_t> seen;
  for (const auto& p : pred) {
    if (p.src_idx >= gold.n_src || p.tgt_idx >= gold.n_tgt) {
      throw IndexOutOfBounds("predicted pair (" + std::to_string(p.src_idx) +
                             ", " + std::to_string(p.tgt_idx) +
                             ") out of bounds");
    }
    if (!seen.insert(p.src_idx * gold.n_tgt + p.tgt_idx).second) continue;
    ++r.n_pred;
    const auto it = gold_by_src.find(p.src_idx);
    if (it != gold_by_src.end() && it->second == p.tgt_idx) ++r.n_correct;
  }
  const auto n_correct = static_cast<double>(r.n_correct);
  r.precision = r.n_pred ? n_correct / static_cast<double>(r.n_pred) : 0.0;
  r.recall = r.n_gold ? n_correct / static_cast<double>(r.n_gold) : 0.0;
  const double denom = r.precision + r.recall;
  r.f1 = denom > 0 ? 2.0 * r.precision * r.recall / denom : 0.0;
  return r;
}

inline F1Report evaluate_f1(const AlignmentResult& pred,
                            const GoldAlignment& gold) {
  return evaluate_f1(std::span<const AlignmentPair>(pred.pairs), gold);
}

/// Line i of the source file pairs with line i of the target file.
inline GoldAlignment gold_from_parallel(std::size_t n_src, std::size_t n_tgt) {
  if (n_src != n_tgt) throw LineCountMismatch(n_src, n_tgt);
  GoldAlignment gold;
  gold.n_src = n_src;
  gold.n_tgt = n_tgt;
  gold.pairs.reserve(n_src);
  for (std::size_t i = 0; i < n_src; ++i) gold.pairs.emplace_back(i, i);
  return gold;
}

inline GoldAlignment load_gold_from_parallel(const std::filesystem::path& src,
                                             const std::filesystem::path& tgt) {
  return gold_from_parallel(io::read_lines(src).size(),
                            io::read_lines(tgt).size());
}

/// Target side reordered by a seeded permutation, so that evaluation cannot
/// pass by accident through index equality.
struct ShuffledTargets {
  std::vector<std::string> texts;
  std::vector<std::size_t> original_index;  // shuffled position -> original
};

inline ShuffledTargets shuffle_targets(std::span<const std::string> texts,
                                       std::uint64_t seed) {
  ShuffledTargets out;
  out.original_index = seeded_permutation(texts.size(), seed);
  out.texts.reserve(texts.size());
  for (std::size_t k : out.original_index) out.texts.push_back(texts[k]);
  return out;
}

inline AlignmentResult unshuffle(AlignmentResult result,
                                 const ShuffledTargets& shuffled) {
  for (auto& p : result.pairs) p.tgt_idx = shuffled.original_index.at(p.tgt_idx);
  return result;
}

// -- pair statistics ----------------------------------------------------------

struct PairStats {
  double mean_len_ratio = 0.0;
  double unique_tgt_frac = 0.0;
  std::size_t n_pairs = 0;
};

inline void to_json(nlohmann::json& j, const PairStats& s) {
  j = nlohmann::json{
      {"mean_len_ratio", s.mean_len_ratio},
      {"unique_tgt_frac", s.unique_tgt_frac},
      {"n_pairs", s.n_pairs},
      {"len_ratio_definition",
       "mean over pairs of target/source word-token counts"}};
}

inline PairStats compute_stats(std::span<const AlignmentPair> pairs,
                               std::span<const std::size_t> src_tokens,
                               std::span<const std::size_t> tgt_tokens) {
  if (pairs.empty()) throw EmptyPairs();
  PairStats s;
  s.n_pairs = pairs.size();
  std::unordered_set<std::size_t> targets;
  double sum = 0.0;
  for (const auto& p : pairs) {
    if (p.src_idx >= src_tokens.size() || p.tgt_idx >= tgt_tokens.size()) {
      throw IndexOutOfBounds("pair (" + std::to_string(p.src_idx) + ", " +
                             std::to_string(p.tgt_idx) +
                             ") out of corpus bounds");
    }
    if (src_tokens[p.src_idx] == 0) {
      throw ValidationError("source sentence " + std::to_string(p.src_idx) +
                            " has no tokens");
    }
    sum += static_cast<double>(tgt_tokens[p.tgt_idx]) /
           static_cast<double>(src_tokens[p.src_idx]);
    targets.insert(p.tgt_idx);
  }
  s.mean_len_ratio = sum / static_cast<double>(pairs.size());
  s.unique_tgt_frac =
      static_cast<double>(targets.size()) / static_cast<double>(pairs.size());
  return s;
}

inline std::vector<std::size_t> token_counts(std::span<const std::string> texts) {
  std::vector<std::size_t> out;
  out.reserve(texts.size());
  for (const auto& t : texts) out.push_back(count_tokens(t));
  return out;
}

inline PairStats compute_stats(std::span<const AlignmentPair> pairs,
                               std::span<const std::string> src_texts,
                               std::span<const std::string> tgt_texts) {
  const auto src = token_counts(src_texts);
  const auto tgt = token_counts(tgt_texts);
  return compute_stats(pairs, std::span<const std::size_t>(src),
                       std::span<const std::size_t>(tgt));
}

// -- alignment TSV round trip ---------------------------------------------------

struct AlignedRow {
  AlignmentPair pair;
  std::string src_text;
  std::string tgt_text;
};

namespace detail {

inline std::vector<std::string_view> split_tabs(std::string_view line) {
  std::vector<std::string_view> fields;
  std::size_t start = 0;
  for (;;) {
    const auto tab = line.find('\t', start);
    fields.push_back(line.substr(start, tab - start));
    if (tab == std::string_view::npos) break;
    start = tab + 1;
  }
  return fields;
}

inline std::size_t parse_index(std::string_view s, std::size_t line_no) {
  std::size_t v = 0;
  const auto r = std::from_chars(s.data(), s.data() + s.size(), v);
  if (s.empty() || r.ec != std::errc() || r.ptr != s.data() + s.size()) {
    throw ValidationError("line " + std::to_string(line_no) +
                          ": malformed index '" + std::string(s) + "'");
  }
  return v;
}

inline double parse_score(std::string_view s, std::size_t line_no) {
  double v = 0;
  const auto r = std::from_chars(s.data(), s.data() + s.size(), v);
  if (s.empty() || r.ec != std::errc() || r.ptr != s.data() + s.size()) {
    throw ValidationError("line " + std::to_string(line_no) +
                          ": malformed score '" + std::string(s) + "'");
  }
  return v;
}

}  // namespace detail

/// Parses alignment output (or an annotation file; a trailing label column
/// is ignored). Lines starting with '#' and the column header are skipped.
inline std::vector<AlignedRow> parse_alignment_tsv(std::string_view text) {
  std::vector<AlignedRow> rows;
  const auto lines = io::split_lines(std::string(text));
  for (std::size_t n = 0; n < lines.size(); ++n) {
    const std::string_view line = lines[n];
    if (line.empty() || line.front() == '#' || line.starts_with("src_idx\t")) {
      continue;
    }
    const auto f = detail::split_tabs(line);
    if (f.size() != 5 && f.size() != 6) {
      throw ValidationError("line " + std::to_string(n + 1) + ": expected 5 "
                            "tab-separated fields, found " +
                            std::to_string(f.size()));
    }
    AlignedRow row;
    row.pair.src_idx = detail::parse_index(f[0], n + 1);
    row.pair.tgt_idx = detail::parse_index(f[1], n + 1);
    row.pair.score = detail::parse_score(f[2], n + 1);
    row.src_text = std::string(f[3]);
    row.tgt_text = std::string(f[4]);
    rows.push_back(std::move(row));
  }
  return rows;
}

inline std::vector<AlignmentPair> pairs_of(std::span<const AlignedRow> rows) {
  std::vector<AlignmentPair> out;
  out.reserve(rows.size());
  for (const auto& r : rows) out.push_back(r.pair);
  return out;
}

// -- annotation -----------------------------------------------------------------

inline constexpr std::string_view kAnnotationHeader =
    "src_idx\ttgt_idx\tscore\tsrc_text\ttgt_text\tlabel";

/// Uniform sample of k rows without replacement, returned in original order.
inline std::vector<AlignedRow> sample_for_annotation(
    std::span<const AlignedRow> rows, std::size_t k, std::uint64_t seed) {
  if (k < 1 || k > rows.size()) {
    throw ConfigError("sample size " + std::to_string(k) +
                      " must lie in [1, " + std::to_string(rows.size()) + "]");
  }
  std::vector<std::size_t> idx(rows.size());
  std::iota(idx.begin(), idx.end(), std::size_t{0});
  std::mt19937_64 rng(seed);
  for (std::size_t i = 0; i < k; ++i) {
    std::swap(idx[i], idx[i + uniform_below(rng, rows.size() - i)]);
  }
  idx.resize(k);
  std::sort(idx.begin(), idx.end());
  std::vector<AlignedRow> out;
  out.reserve(k);
  for (std::size_t i : idx) out.push_back(rows[i]);
  return out;
}

inline std::string annotation_tsv(std::span<const AlignedRow> sample) {
  std::string out(kAnnotationHeader);
  out += '\n';
  for (const auto& r : sample) {
    out += std::to_string(r.pair.src_idx) + '\t' +
           std::to_string(r.pair.tgt_idx) + '\t' + format_score(r.pair.score) +
           '\t' + detail::tsv_field(r.src_text) + '\t' +
           detail::tsv_field(r.tgt_text) + "\t\n";
  }
  return out;
}

/// Quality labels: 1 not a translation, 2 bad, 3 acceptable, 4 good,
/// 5 perfect.
struct LabelDistribution {
  std::array<std::size_t, 5> counts{};
  std::array<double, 5> fractions{};
  std::size_t n_labeled = 0;
  std::size_t n_blank = 0;
};

inline void to_json(nlohmann::json& j, const LabelDistribution& d) {
  nlohmann::json fractions = nlohmann::json::object();
  nlohmann::json counts = nlohmann::json::object();
  for (int l = 0; l < 5; ++l) {
    fractions[std::to_string(l + 1)] = d.fractions[l];
    counts[std::to_string(l + 1)] = d.counts[l];
  }
  j = nlohmann::json{{"fractions", fractions},
                     {"counts", counts},
                     {"n_labeled", d.n_labeled},
                     {"n_blank", d.n_blank}};
}

/// Label is the last tab-separated column; line numbers in errors are
/// 1-based file lines.
inline LabelDistribution summarize_annotations(std::string_view tsv) {
  LabelDistribution d;
  const auto lines = io::split_lines(std::string(tsv));
  for (std::size_t n = 0; n < lines.size(); ++n) {
    const std::string_view line = lines[n];
    if (line.empty() || line.front() == '#' || line.starts_with("src_idx\t")) {
      continue;
    }
    const auto tab = line.rfind('\t');
    std::string_view label =
        tab == std::string_view::npos ? line : line.substr(tab + 1);
    while (!label.empty() && label.front() == ' ') label.remove_prefix(1);
    while (!label.empty() && label.back() == ' ') label.remove_suffix(1);
    if (label.empty()) {
      ++d.n_blank;
      continue;
    }
    if (label.size() != 1 || label[0] < '1' || label[0] > '5') {
      throw InvalidLabel(n + 1, std::string(label));
    }
    ++d.counts[label[0] - '1'];
    ++d.n_labeled;
  }
  for (int l = 0; l < 5; ++l) {
    d.fractions[l] = d.n_labeled ? static_cast<double>(d.counts[l]) /
                                       static_cast<double>(d.n_labeled)
                                 : 0.0;
  }
  return d;
}

}  // namespace bitext
