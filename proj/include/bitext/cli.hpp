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

// Subcommand driver behind tools/bitext.cpp. Exit codes: 0 success,
// 1 usage, 2 I/O, 3 provider/auth, 4 validation.

#include <filesystem>
#include <iostream>
#include <memory>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "bitext/alignment.hpp"
#include "bitext/cache.hpp"
#include "bitext/clock.hpp"
#include "bitext/config.hpp"
#include "bitext/corpus_prep.hpp"
#include "bitext/embed.hpp"
#include "bitext/error.hpp"
#include "bitext/evaluation.hpp"
#include "bitext/io.hpp"
#include "bitext/remote_provider.hpp"
#include "json.hpp"

namespace bitext::cli {

namespace detail {

struct Overrides {
  std::optional<std::string> config_path;
  std::optional<std::string> cache;
  std::optional<std::uint64_t> seed;
  std::optional<std::string> out;

  std::optional<std::string> provider;
  std::optional<std::string> endpoint;
  std::optional<std::string> model;
  std::optional<std::string> input_type;
  std::optional<std::size_t> dim;
  std::optional<std::string> api_key_env;
  std::optional<double> noise_sigma;

  std::optional<double> window_seconds;
  std::optional<std::size_t> max_texts;
  std::optional<std::size_t> chunk_size;

  std::optional<std::string> method;
  std::optional<std::size_t> csls_k;
  std::optional<double> beta;
  std::optional<double> threshold;
  std::optional<std::size_t> block_size;
  std::optional<unsigned> threads;
};

inline void add_provider_flags(CLI::App* cmd, Overrides& o) {
  cmd->add_option("--provider", o.provider, "remote | hash_mock | oracle");
  cmd->add_option("--endpoint", o.endpoint, "Remote embedding endpoint URL");
  cmd->add_option("--model", o.model, "Provider model id");
  cmd->add_option("--input-type", o.input_type, "Provider input-type tag");
  cmd->add_option("--dim", o.dim, "Embedding dimension");
  cmd->add_option("--api-key-env", o.api_key_env,
                  "Environment variable holding the API key");
  cmd->add_option("--noise-sigma", o.noise_sigma, "Oracle target-side noise");
  cmd->add_option("--window-seconds", o.window_seconds, "Rate window length");
  cmd->add_option("--max-texts", o.max_texts, "Texts allowed per rate window");
  cmd->add_option("--chunk-size", o.chunk_size, "Texts per provider request");
}

inline void add_align_flags(CLI::App* cmd, Overrides& o) {
  cmd->add_option("--method", o.method, "nn | invnn | invsoftmax | csls");
  cmd->add_option("--k", o.csls_k, "CSLS neighbourhood size");
  cmd->add_option("--beta", o.beta, "Inverted-softmax temperature");
  cmd->add_option("--threshold", o.threshold, "Drop pairs scoring below this");
  cmd->add_option("--block-size", o.block_size, "Rows per similarity block");
  cmd->add_option("--threads", o.threads, "Worker threads");
}

inline RunConfig resolve(const Overrides& o) {
  RunConfig cfg;
  if (o.config_path) {
    if (!std::filesystem::exists(*o.config_path)) {
      throw IoError("config file not found: " + *o.config_path);
    }
    cfg = load_run_config(*o.config_path);
  }
  if (o.cache) cfg.cache_path = *o.cache;
  if (o.seed) cfg.seed = *o.seed;
  cfg.provider.seed = cfg.seed;
  if (o.provider) cfg.provider.kind = parse_provider_kind(*o.provider);
  if (o.endpoint) cfg.provider.endpoint_url = *o.endpoint;
  if (o.model) cfg.provider.model_id = *o.model;
  if (o.input_type) cfg.provider.input_type = *o.input_type;
  if (o.dim) cfg.provider.dim = *o.dim;
  if (o.api_key_env) cfg.provider.api_key_env = *o.api_key_env;
  if (o.noise_sigma) cfg.provider.noise_sigma = *o.noise_sigma;
  if (o.window_seconds) cfg.rate.window_seconds = *o.window_seconds;
  if (o.max_texts) cfg.rate.max_texts_per_window = *o.max_texts;
  if (o.chunk_size) cfg.rate.chunk_size = *o.chunk_size;
  if (o.method) cfg.align.method = parse_method(*o.method);
  if (o.csls_k) cfg.align.csls_k = *o.csls_k;
  if (o.beta) cfg.align.beta = *o.beta;
  if (o.threshold) cfg.align.threshold = *o.threshold;
  if (o.block_size) cfg.align.block_size = *o.block_size;
  if (o.threads) cfg.align.threads = *o.threads;
  cfg.provider.validate();
  cfg.rate.validate();
  return cfg;
}

inline std::vector<std::string> read_corpus(const std::string& path) {
  if (!std::filesystem::exists(path)) {
    throw IoError("input file not found: " + path);
  }
  return io::read_lines(path);
}

}  // namespace detail

/// Runs one CLI invocation. `clock` and `transport` are injectable for
/// tests; by default the system clock and an HTTP(S) client are used.
inline int run(const std::vector<std::string>& args, std::ostream& out,
               std::ostream& err, Clock* clock = nullptr,
               std::shared_ptr<HttpTransport> transport = nullptr) {
  detail::Overrides o;
  CLI::App app{"Parallel sentence mining with multilingual embeddings", "bitext"};
  app.fallthrough();
  app.require_subcommand(1);
  app.add_option("--config", o.config_path, "JSON run configuration");
  app.add_option("--cache", o.cache, "Embedding cache file");
  app.add_option("--seed", o.seed, "Seed for every random choice");
  app.add_option("--out", o.out, "Output path (default: stdout)");

  auto* prepare = app.add_subcommand("prepare", "Split and clean raw documents");
  std::string prep_in;
  std::size_t min_words = 5, max_words = 80;
  bool dedup = false;
  std::string lang;
  std::optional<std::string> report_path;
  unsigned prep_threads = 1;
  prepare->add_option("--in", prep_in, "Directory of .txt files or one file")
      ->required();
  prepare->add_option("--min-words", min_words, "Minimum tokens per sentence");
  prepare->add_option("--max-words", max_words, "Maximum tokens per sentence");
  prepare->add_flag("--dedup", dedup, "Drop repeated sentences");
  prepare->add_option("--lang", lang, "Language tag of the corpus");
  prepare->add_option("--report", report_path, "Write the report JSON here");
  prepare->add_option("--threads", prep_threads, "Worker threads");

  auto* embed = app.add_subcommand("embed", "Fill the embedding cache");
  std::string src_path, tgt_path;
  std::optional<std::string> opt_tgt;
  embed->add_option("--src", src_path, "Source sentence file")->required();
  embed->add_option("--tgt", opt_tgt, "Target sentence file");
  detail::add_provider_flags(embed, o);

  auto* align_cmd = app.add_subcommand("align", "Pair source and target sentences");
  align_cmd->add_option("--src", src_path, "Source sentence file")->required();
  align_cmd->add_option("--tgt", tgt_path, "Target sentence file")->required();
  detail::add_provider_flags(align_cmd, o);
  detail::add_align_flags(align_cmd, o);

  auto* evaluate = app.add_subcommand("evaluate", "F1 against parallel gold files");
  evaluate->add_option("--src", src_path, "Source side of a parallel set")->required();
  evaluate->add_option("--tgt", tgt_path, "Target side of a parallel set")->required();
  detail::add_provider_flags(evaluate, o);
  detail::add_align_flags(evaluate, o);

  auto* stats = app.add_subcommand("stats", "Length ratio and target uniqueness");
  std::string pairs_path;
  std::optional<std::string> stats_src, stats_tgt;
  stats->add_option("--pairs", pairs_path, "Alignment TSV")->required();
  stats->add_option("--src", stats_src, "Source corpus (default: TSV texts)");
  stats->add_option("--tgt", stats_tgt, "Target corpus (default: TSV texts)");

  auto* sample = app.add_subcommand("sample", "Draw pairs for human annotation");
  std::size_t sample_k = 0;
  sample->add_option("--pairs", pairs_path, "Alignment TSV")->required();
  sample->add_option("--k", sample_k, "Sample size")->required();

  auto* report = app.add_subcommand("report", "Summarize annotation labels");
  std::string annotations_path;
  report->add_option("--annotations", annotations_path, "Labelled TSV")->required();

  std::vector<const char*> argv;
  argv.push_back("bitext");
  for (const auto& a : args) argv.push_back(a.c_str());
  try {
    app.parse(static_cast<int>(argv.size()), argv.data());
  } catch (const CLI::ParseError& e) {
    if (e.get_exit_code() == 0) {
      out << app.help();
      return 0;
    }
    err << "usage error: " << e.what() << "\n";
    return static_cast<int>(ExitCode::kUsage);
  }

  SystemClock system_clock;
  if (clock == nullptr) clock = &system_clock;
  auto emit = [&](const std::string& text) {
    if (o.out) {
      io::write_file(*o.out, text);
    } else {
      out << text;
    }
  };

  try {
    if (prepare->parsed()) {
      if (!o.out) throw ConfigError("prepare requires --out <sentence file>");
      const auto docs = load_documents(prep_in);
      CleanOptions opts{min_words, max_words, dedup, lang};
      const auto result =
          prepare_documents(docs, opts, SplitterOptions{}, prep_threads);
      io::write_lines(*o.out, result.corpus.texts());
      const std::string json = nlohmann::json(result.report).dump(2) + "\n";
      if (report_path) {
        io::write_file(*report_path, json);
      } else {
        out << json;
      }
      return 0;
    }

    const RunConfig cfg = detail::resolve(o);

    if (embed->parsed()) {
      const auto src = detail::read_corpus(src_path);
      const auto tgt = opt_tgt ? detail::read_corpus(*opt_tgt)
                               : std::vector<std::string>{};
      auto provider = make_provider(cfg.provider, transport);
      const auto embedded = embed_corpora(src, tgt, *provider, cfg.provider,
                                          cfg.rate, cfg.cache_path, *clock);
      const nlohmann::json summary = {
          {"source_rows", embedded.source.rows()},
          {"target_rows", embedded.target.rows()},
          {"dim", cfg.provider.dim},
          {"cache_hits", embedded.stats.cache_hits},
          {"requested_texts", embedded.stats.requested_texts},
          {"provider_calls", embedded.stats.provider_calls},
          {"windows", embedded.stats.plan.windows.size()},
          {"window_sleeps", embedded.stats.window_sleeps}};
      emit(summary.dump(2) + "\n");
      return 0;
    }

    if (align_cmd->parsed()) {
      const auto src = detail::read_corpus(src_path);
      const auto tgt = detail::read_corpus(tgt_path);
      auto provider = make_provider(cfg.provider, transport);
      const auto embedded = embed_corpora(src, tgt, *provider, cfg.provider,
                                          cfg.rate, cfg.cache_path, *clock);
      const auto result =
          align_corpora(src, tgt, embedded.source, embedded.target, cfg.align);
      emit(alignment_tsv(result, src, tgt));
      return 0;
    }

    if (evaluate->parsed()) {
      const auto src = detail::read_corpus(src_path);
      const auto tgt = detail::read_corpus(tgt_path);
      const auto gold = gold_from_parallel(src.size(), tgt.size());
      const auto shuffled = shuffle_targets(tgt, cfg.seed);
      auto provider = make_provider(cfg.provider, transport);
      const auto embedded =
          embed_corpora(src, shuffled.texts, *provider, cfg.provider, cfg.rate,
                        cfg.cache_path, *clock);
      const auto result = unshuffle(
          align_corpora(src, shuffled.texts, embedded.source, embedded.target,
                        cfg.align),
          shuffled);
      nlohmann::json j = evaluate_f1(result, gold);
      j["n_sentences"] = src.size();
      j["method"] = to_string(cfg.align.method);
      emit(j.dump(2) + "\n");
      return 0;
    }

    if (stats->parsed()) {
      if (!std::filesystem::exists(pairs_path)) {
        throw IoError("pairs file not found: " + pairs_path);
      }
      const auto rows = parse_alignment_tsv(io::read_file(pairs_path));
      const auto pairs = pairs_of(rows);
      PairStats s;
      if (stats_src && stats_tgt) {
        const auto src = detail::read_corpus(*stats_src);
        const auto tgt = detail::read_corpus(*stats_tgt);
        s = compute_stats(pairs, std::span<const std::string>(src),
                          std::span<const std::string>(tgt));
      } else {
        std::vector<std::size_t> src_tokens, tgt_tokens;
        for (const auto& r : rows) {
          if (src_tokens.size() <= r.pair.src_idx) src_tokens.resize(r.pair.src_idx + 1);
          if (tgt_tokens.size() <= r.pair.tgt_idx) tgt_tokens.resize(r.pair.tgt_idx + 1);
          src_tokens[r.pair.src_idx] = count_tokens(r.src_text);
          tgt_tokens[r.pair.tgt_idx] = count_tokens(r.tgt_text);
        }
        s = compute_stats(pairs, std::span<const std::size_t>(src_tokens),
                          std::span<const std::size_t>(tgt_tokens));
      }
      emit(nlohmann::json(s).dump(2) + "\n");
      return 0;
    }

    if (sample->parsed()) {
      if (!std::filesystem::exists(pairs_path)) {
        throw IoError("pairs file not found: " + pairs_path);
      }
      const auto rows = parse_alignment_tsv(io::read_file(pairs_path));
      emit(annotation_tsv(sample_for_annotation(rows, sample_k, cfg.seed)));
      return 0;
    }

    if (report->parsed()) {
      if (!std::filesystem::exists(annotations_path)) {
        throw IoError("annotation file not found: " + annotations_path);
      }
      const auto dist = summarize_annotations(io::read_file(annotations_path));
      emit(nlohmann::json(dist).dump(2) + "\n");
      return 0;
    }
  } catch (const Error& e) {
    err << "error: " << e.what() << "\n";
    return static_cast<int>(e.exit_code());
  } catch (const std::filesystem::filesystem_error& e) {
    err << "error: " << e.what() << "\n";
    return static_cast<int>(ExitCode::kIo);
  }
  return static_cast<int>(ExitCode::kUsage);
}

}  // namespace bitext::cli
