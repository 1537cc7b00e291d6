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

// Sentence splitting, word tokenization and length filtering that turn raw
// documents into one-sentence-per-line corpora.

#include <algorithm>
#include <cstddef>
#include <filesystem>
#include <span>
#include <string>
#include <string_view>
#include <thread>
#include <unordered_set>
#include <utility>
#include <vector>

#include "bitext/error.hpp"
#include "bitext/io.hpp"
#include "bitext/utf8.hpp"
#include "json.hpp"

namespace bitext {

struct RawDocument {
  std::string doc_id;
  std::string text;
};

struct Sentence {
  std::size_t index = 0;        // position in the cleaned corpus
  std::string text;
  std::size_t token_count = 0;
  std::size_t input_index = 0;  // position among the raw input sentences
};

struct CleanCorpus {
  std::string language_tag;
  std::vector<Sentence> sentences;

  std::size_t size() const noexcept { return sentences.size(); }
  std::vector<std::string> texts() const {
    std::vector<std::string> out;
    out.reserve(sentences.size());
    for (const auto& s : sentences) out.push_back(s.text);
    return out;
  }
};

struct PrepReport {
  std::size_t n_raw = 0;
  std::size_t n_kept = 0;
  std::size_t n_dropped_short = 0;
  std::size_t n_dropped_long = 0;
  std::size_t n_dropped_empty = 0;
  std::size_t n_dropped_duplicate = 0;  // stays 0 unless dedup is enabled
};

inline void to_json(nlohmann::json& j, const PrepReport& r) {
  j = nlohmann::json{{"n_raw", r.n_raw},
                     {"n_kept", r.n_kept},
                     {"n_dropped_short", r.n_dropped_short},
                     {"n_dropped_long", r.n_dropped_long},
                     {"n_dropped_empty", r.n_dropped_empty},
                     {"n_dropped_duplicate", r.n_dropped_duplicate}};
}

struct SplitterOptions {
  std::vector<std::string> abbreviations = {"Dr.", "Mr.",  "Mrs.", "Prof.",
                                            "St.", "No.", "vs."};
};

struct CleanOptions {
  std::size_t min_words = 5;
  std::size_t max_words = 80;
  bool dedup = false;
  std::string language_tag;
};

struct CleanResult {
  CleanCorpus corpus;
  PrepReport report;
};

/// Collapses every run of (Unicode) whitespace to one ASCII space and trims
/// both ends.
inline std::string collapse_whitespace(std::string_view text) {
  std::string out;
  out.reserve(text.size());
  bool pending_space = false;
  std::size_t pos = 0;
  while (pos < text.size()) {
    const std::size_t start = pos;
    const char32_t cp = utf8::next(text, pos);
    if (utf8::is_space(cp)) {
      pending_space = !out.empty();
      continue;
    }
    if (pending_space) {
      out.push_back(' ');
      pending_space = false;
    }
    out.append(text.substr(start, pos - start));
  }
  return out;
}

namespace detail {

inline bool is_terminator(char32_t cp) {
  return cp == U'.' || cp == U'!' || cp == U'?' || cp == 0x2026;
}

inline bool is_closer(char32_t cp) {
  return cp == U'"' || cp == U'\'' || cp == 0x201D || cp == 0x2019 ||
         cp == 0xBB || cp == U')' || cp == U']';
}

inline bool is_opener(char32_t cp) {
  return cp == U'"' || cp == U'\'' || cp == 0x201C || cp == 0x2018 ||
         cp == 0xAB || cp == U'(' || cp == U'[' || cp == 0xBF || cp == 0xA1;
}

// The whitespace-delimited word that ends at `term_end` (exclusive), with
// leading opening quotes/brackets removed.
inline std::string_view word_before(std::string_view text,
                                    std::size_t term_end) {
  std::size_t start = term_end;
  while (start > 0) {
    const char c = text[start - 1];
    if (c == ' ' || c == '\t' || c == '\n' || c == '\r') break;
    --start;
  }
  std::string_view word = text.substr(start, term_end - start);
  while (!word.empty() && (word.front() == '(' || word.front() == '[' ||
                           word.front() == '"' || word.front() == '\'')) {
    word.remove_prefix(1);
  }
  return word;
}

}  // namespace detail

/// Rule-based splitter: a sentence ends after a run of . ! ? or U+2026
/// (optionally followed by closing quotes/brackets) when whitespace and then
/// an uppercase letter, an opening quote or a digit follow, or at the end of
/// the text. A "." ending a word from the abbreviation list never splits.
inline std::vector<std::string> split_sentences(
    const RawDocument& doc, const SplitterOptions& options = {}) {
  const std::string_view text = doc.text;
  std::vector<std::string> out;
  auto emit = [&](std::size_t from, std::size_t to) {
    std::string s = collapse_whitespace(text.substr(from, to - from));
    if (!s.empty()) out.push_back(std::move(s));
  };

  std::size_t sentence_start = 0;
  std::size_t pos = 0;
  while (pos < text.size()) {
    const std::size_t term_start = pos;
    const char32_t cp = utf8::next(text, pos);
    if (!detail::is_terminator(cp)) continue;

    std::size_t end = pos;
    while (end < text.size()) {
      std::size_t probe = end;
      if (!detail::is_terminator(utf8::next(text, probe))) break;
      end = probe;
    }
    const std::size_t run_end = end;
    while (end < text.size()) {
      std::size_t probe = end;
      if (!detail::is_closer(utf8::next(text, probe))) break;
      end = probe;
    }
    pos = end;
    if (end >= text.size()) break;  // end of text: handled below

    std::size_t probe = end;
    if (!utf8::is_space(utf8::next(text, probe))) continue;
    std::size_t next_start = probe;
    char32_t next_cp = 0;
    while (probe < text.size()) {
      next_start = probe;
      next_cp = utf8::next(text, probe);
      if (!utf8::is_space(next_cp)) break;
    }
    if (utf8::is_space(next_cp) || next_cp == 0) break;  // trailing space
    if (!utf8::is_upper(next_cp) && !detail::is_opener(next_cp) &&
        !utf8::is_digit(next_cp)) {
      continue;
    }
    if (cp == U'.' && run_end == term_start + 1) {
      const auto word = detail::word_before(text, run_end);
      const bool guarded =
          std::find(options.abbreviations.begin(), options.abbreviations.end(),
                    word) != options.abbreviations.end();
      if (guarded) continue;
    }
    emit(sentence_start, end);
    sentence_start = next_start;
    pos = next_start;
  }
  if (sentence_start < text.size()) emit(sentence_start, text.size());
  return out;
}

/// Word tokens: maximal runs of word characters, where an apostrophe
/// (' U+2019) or hyphen between two word characters stays inside the token;
/// every other punctuation character is a token of its own.
inline std::vector<std::string> tokenize_words(std::string_view text) {
  std::vector<std::string> tokens;
  std::string current;
  auto flush = [&] {
    if (!current.empty()) tokens.push_back(std::move(current));
    current.clear();
  };
  std::size_t pos = 0;
  while (pos < text.size()) {
    const std::size_t start = pos;
    const char32_t cp = utf8::next(text, pos);
    if (utf8::is_space(cp)) {
      flush();
      continue;
    }
    if (utf8::is_word(cp)) {
      current.append(text.substr(start, pos - start));
      continue;
    }
    const bool connector = cp == U'\'' || cp == 0x2019 || cp == U'-';
    if (connector && !current.empty() && pos < text.size()) {
      std::size_t probe = pos;
      if (utf8::is_word(utf8::next(text, probe))) {
        current.append(text.substr(start, pos - start));
        continue;
      }
    }
    flush();
    tokens.emplace_back(text.substr(start, pos - start));
  }
  flush();
  return tokens;
}

inline std::size_t count_tokens(std::string_view text) {
  return tokenize_words(text).size();
}

/// Applies whitespace normalization and the token-count window. Kept
/// sentences preserve input order and are re-indexed 0..n-1.
inline CleanResult clean_corpus(std::span<const std::string> sentences,
                                const CleanOptions& options = {}) {
  if (options.min_words < 1) {
    throw ConfigError("min_words must be at least 1");
  }
  if (options.min_words > options.max_words) {
    throw ConfigError("min_words (" + std::to_string(options.min_words) +
                      ") exceeds max_words (" +
                      std::to_string(options.max_words) + ")");
  }
  CleanResult result;
  result.corpus.language_tag = options.language_tag;
  result.report.n_raw = sentences.size();
  std::unordered_set<std::string> seen;
  for (std::size_t i = 0; i < sentences.size(); ++i) {
    std::string text = collapse_whitespace(sentences[i]);
    if (text.empty()) {
      ++result.report.n_dropped_empty;
      continue;
    }
    const std::size_t n_tokens = count_tokens(text);
    if (n_tokens < options.min_words) {
      ++result.report.n_dropped_short;
      continue;
    }
    if (n_tokens > options.max_words) {
      ++result.report.n_dropped_long;
      continue;
    }
    if (options.dedup && !seen.insert(text).second) {
      ++result.report.n_dropped_duplicate;
      continue;
    }
    result.corpus.sentences.push_back(Sentence{
        result.corpus.sentences.size(), std::move(text), n_tokens, i});
  }
  result.report.n_kept = result.corpus.sentences.size();
  return result;
}

inline CleanResult clean_corpus(const std::vector<std::string>& sentences,
                                const CleanOptions& options = {}) {
  return clean_corpus(std::span<const std::string>(sentences), options);
}

/// Splits every document (in parallel when `threads` > 1) and cleans the
/// concatenation. Corpus order always follows document order.
inline CleanResult prepare_documents(std::span<const RawDocument> docs,
                                     const CleanOptions& options = {},
                                     const SplitterOptions& splitter = {},
                                     unsigned threads = 1) {
  std::unordered_set<std::string> ids;
  for (const auto& doc : docs) {
    if (doc.doc_id.empty()) throw ValidationError("document with empty id");
    if (!ids.insert(doc.doc_id).second) {
      throw ValidationError("duplicate document id '" + doc.doc_id + "'");
    }
  }
  std::vector<std::vector<std::string>> per_doc(docs.size());
  threads = std::max(1u, std::min<unsigned>(threads, docs.size()));
  auto work = [&](std::size_t worker) {
    for (std::size_t d = worker; d < docs.size(); d += threads) {
      per_doc[d] = split_sentences(docs[d], splitter);
    }
  };
  if (threads == 1) {
    work(0);
  } else {
    std::vector<std::jthread> pool;
    for (unsigned t = 0; t < threads; ++t) pool.emplace_back(work, t);
  }
  std::vector<std::string> all;
  for (auto& sents : per_doc) {
    for (auto& s : sents) all.push_back(std::move(s));
  }
  return clean_corpus(std::span<const std::string>(all), options);
}

/// A directory yields one document per *.txt file (sorted by file name); a
/// regular file is split into documents at blank lines.
inline std::vector<RawDocument> load_documents(
    const std::filesystem::path& path) {
  namespace fs = std::filesystem;
  std::error_code ec;
  if (!fs::exists(path, ec)) {
    throw IoError("input path does not exist: " + path.string());
  }
  std::vector<RawDocument> docs;
  if (fs::is_directory(path, ec)) {
    std::vector<fs::path> files;
    for (const auto& entry : fs::directory_iterator(path)) {
      if (entry.is_regular_file() && entry.path().extension() == ".txt") {
        files.push_back(entry.path());
      }
    }
    std::sort(files.begin(), files.end());
    for (const auto& f : files) {
      docs.push_back({f.filename().string(), io::read_file(f)});
    }
    return docs;
  }
  const auto lines = io::split_lines(io::read_file(path));
  std::string current;
  auto flush = [&] {
    if (collapse_whitespace(current).empty()) {
      current.clear();
      return;
    }
    docs.push_back({path.filename().string() + "#" +
                        std::to_string(docs.size()),
                    std::move(current)});
    current.clear();
  };
  for (const auto& line : lines) {
    if (collapse_whitespace(line).empty()) {
      flush();
    } else {
      current += line;
      current += '\n';
    }
  }
  flush();
  return docs;
}

}  // namespace bitext
