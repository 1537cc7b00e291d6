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

// Acceptance gate: one PASS/FAIL line per criterion, nonzero exit on any
// failure.

#include <chrono>
#include <cmath>
#include <cstring>
#include <filesystem>
#include <functional>
#include <iostream>
#include <limits>
#include <random>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "bitext/alignment.hpp"
#include "bitext/cache.hpp"
#include "bitext/cli.hpp"
#include "bitext/corpus_prep.hpp"
#include "bitext/embed.hpp"
#include "bitext/evaluation.hpp"
#include "bitext/io.hpp"
#include "json.hpp"
#include "reference_align.hpp"

namespace fs = std::filesystem;
using namespace bitext;

namespace {

struct Verdict {
  bool pass;
  std::string detail;
};

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

std::string fmt(double v, int prec = 6) {
  std::ostringstream os;
  os.precision(prec);
  os << std::fixed << v;
  return os.str();
}

std::string sci(double v) {
  std::ostringstream os;
  os.precision(2);
  os << std::scientific << v;
  return os.str();
}

class Scratch {
 public:
  Scratch() : dir_(fs::temp_directory_path() / "bitext_acceptance") {
    fs::remove_all(dir_);
    fs::create_directories(dir_);
  }
  ~Scratch() { fs::remove_all(dir_); }
  std::string path(const std::string& name) const { return (dir_ / name).string(); }

 private:
  fs::path dir_;
};

void write_synthetic_parallel(const Scratch& s, std::size_t n) {
  std::vector<std::string> src, tgt;
  for (std::size_t i = 0; i < n; ++i) {
    src.push_back(std::to_string(i) + " jimla ta hausa mai lamba " + std::to_string(i) + " .");
    tgt.push_back(std::to_string(i) + " english sentence number " + std::to_string(i) + " .");
  }
  io::write_lines(s.path("src.txt"), src);
  io::write_lines(s.path("tgt.txt"), tgt);
}

// Runs `evaluate` through the CLI with the oracle provider; returns F1.
double cli_oracle_f1(const Scratch& s, double sigma) {
  std::ostringstream out, err;
  SimulatedClock clock;
  const int code = cli::run(
      {"--cache", s.path("oracle.cache"), "--seed", "42", "evaluate", "--src",
       s.path("src.txt"), "--tgt", s.path("tgt.txt"), "--provider", "oracle",
       "--dim", "768", "--noise-sigma", fmt(sigma, 3), "--method", "nn",
       "--threads", "1"},
      out, err, &clock);
  if (code != 0) throw std::runtime_error("evaluate exited " + std::to_string(code) + ": " + err.str());
  return nlohmann::json::parse(out.str())["f1"].get<double>();
}

Verdict oracle_end_to_end() {
  Scratch s;
  write_synthetic_parallel(s, 1000);
  const auto t0 = Clock::now();
  const double f1 = cli_oracle_f1(s, 0.01);
  const double secs = seconds_since(t0);
  return {f1 >= 0.99 && secs < 60.0,
          "F1=" + fmt(f1) + " (>= 0.99) in " + fmt(secs, 2) + " s (< 60 s)"};
}

Verdict noise_monotonicity() {
  Scratch s;
  write_synthetic_parallel(s, 1000);
  std::vector<double> f1s;
  for (double sigma : {0.0, 0.5, 1.0, 2.0}) f1s.push_back(cli_oracle_f1(s, sigma));
  bool ok = f1s[0] == 1.0;
  for (std::size_t k = 1; k < f1s.size(); ++k) ok = ok && f1s[k] <= f1s[k - 1];
  std::string detail = "F1 at sigma {0, 0.5, 1, 2} =";
  for (double f : f1s) detail += " " + fmt(f);
  return {ok, detail};
}

Verdict brute_force_equivalence() {
  const auto t0 = Clock::now();
  std::mt19937_64 rng(20260101);
  std::size_t mismatches = 0, checked = 0;
  double worst = 0;
  for (int instance = 0; instance < 100; ++instance) {
    const std::size_t n = 1 + rng() % 64, m = 1 + rng() % 64, d = 1 + rng() % 16;
    const auto src = testing_ref::random_unit_matrix(rng, n, d);
    const auto tgt = testing_ref::random_unit_matrix(rng, m, d);
    for (Method method : {Method::kNn, Method::kInvNn, Method::kInvSoftmax, Method::kCsls}) {
      AlignmentParams p;
      p.method = method;
      p.csls_k = 1 + rng() % std::min<std::size_t>({n, m, 10});
      p.beta = 30;
      p.block_size = 1 + rng() % 16;
      const auto got = align(src, tgt, p);
      const auto want = testing_ref::reference_align(src, tgt, method, p.csls_k, p.beta);
      for (std::size_t i = 0; i < n; ++i) {
        ++checked;
        const double diff = std::abs(got.pairs[i].score - want[i].score);
        worst = std::max(worst, diff);
        if (got.pairs[i].tgt_idx != want[i].j || diff > 1e-6) ++mismatches;
      }
    }
  }
  const double secs = seconds_since(t0);
  return {mismatches == 0 && secs < 30.0,
          std::to_string(checked) + " rows, " + std::to_string(mismatches) +
              " mismatches, max score diff " + sci(worst) + ", " +
              fmt(secs, 2) + " s (< 30 s)"};
}

Verdict hand_computed_fixtures() {
  const auto src = normalize_rows(EmbeddingMatrix::from_rows({{1, 0}, {0, 1}}, 2));
  const auto tgt =
      normalize_rows(EmbeddingMatrix::from_rows({{0.8f, 0.6f}, {0.6f, 0.8f}}, 2));
  AlignmentParams csls;
  csls.method = Method::kCsls;
  csls.csls_k = 1;
  AlignmentParams inv;
  inv.method = Method::kInvSoftmax;
  inv.beta = 1;
  const auto c = score_table(src, tgt, csls);
  const auto s = score_table(src, tgt, inv);
  const bool ok = std::abs(c[0] - 0.0) <= 1e-4 && std::abs(c[1] + 0.4) <= 1e-4 &&
                  std::abs(s[0] - 0.5498) <= 1e-4;
  return {ok, "CSLS(x1,y1)=" + fmt(c[0]) + " CSLS(x1,y2)=" + fmt(c[1]) +
                  " invsoftmax(x1,y1)=" + fmt(s[0])};
}

Verdict f1_harness() {
  std::vector<AlignmentPair> pred;
  for (std::size_t i = 0; i < 10; ++i) pred.push_back({i, i < 7 ? i : (i + 1) % 10, 0, Method::kNn});
  const auto gold = gold_from_parallel(10, 10);
  const double a = evaluate_f1(pred, gold).f1;
  pred.resize(8);
  const double b = evaluate_f1(pred, gold).f1;
  const bool ok = std::abs(a - 0.7) <= 1e-9 && std::abs(b - 0.7777777777777778) <= 1e-9;
  return {ok, "7-of-10 F1=" + fmt(a, 12) + ", thresholded 7-of-8 F1=" + fmt(b, 12)};
}

class RecordingProvider final : public EmbeddingProvider {
 public:
  RecordingProvider(bitext::Clock& clock, std::size_t dim) : clock_(clock), inner_(dim, 42) {}
  std::vector<std::vector<float>> embed(std::span<const std::string> texts, Side side) override {
    calls.emplace_back(clock_.now(), texts.size());
    return inner_.embed(texts, side);
  }
  std::vector<std::pair<double, std::size_t>> calls;

 private:
  bitext::Clock& clock_;
  HashMockProvider inner_;
};

Verdict rate_limiter_schedule() {
  Scratch s;
  std::vector<std::string> src, tgt;
  for (int i = 0; i < 13560; ++i) src.push_back("ha " + std::to_string(i));
  for (int i = 0; i < 22671; ++i) tgt.push_back("en " + std::to_string(i));
  ProviderConfig cfg;
  cfg.dim = 4;
  const RateLimiterConfig rate;
  SimulatedClock clock;
  RecordingProvider provider(clock, cfg.dim);
  const auto out = embed_corpora(src, tgt, provider, cfg, rate, s.path("rate.cache"), clock);

  std::size_t worst = 0;
  for (const auto& [t0, _] : provider.calls) {
    std::size_t sum = 0;
    for (const auto& [t, n] : provider.calls) {
      if (t >= t0 && t < t0 + rate.window_seconds) sum += n;
    }
    worst = std::max(worst, sum);
  }
  bool sleeps_ok = clock.sleeps().size() == 9;
  for (double d : clock.sleeps()) sleeps_ok = sleeps_ok && d == 61.0;
  const auto& plan = out.stats.plan;
  const bool ok = plan.chunks.size() == 19 && plan.windows.size() == 10 &&
                  sleeps_ok && provider.calls.size() == 19 && worst <= 4000;
  return {ok, std::to_string(plan.chunks.size()) + " chunks, " +
                  std::to_string(plan.windows.size()) + " windows, " +
                  std::to_string(clock.sleeps().size()) + " sleeps, max " +
                  std::to_string(worst) + " texts in any 61 s interval"};
}

Verdict cache_contract() {
  Scratch s;
  std::mt19937_64 rng(7);
  std::normal_distribution<float> g(0.0f, 3.0f);
  const std::vector<float> specials = {0.0f, -0.0f, std::numeric_limits<float>::denorm_min(),
                                       std::numeric_limits<float>::max(),
                                       -std::numeric_limits<float>::min(), 1e-30f};
  std::vector<CacheRecord> records;
  for (int i = 0; i < 10000; ++i) {
    std::vector<float> v(1 + rng() % 64);
    for (auto& x : v) x = g(rng);
    v[rng() % v.size()] = specials[rng() % specials.size()];
    records.push_back({cache_key("m", "search_document", "text " + std::to_string(i)), v});
  }
  {
    EmbeddingCache cache(s.path("rt.cache"));
    cache.put_batch(records);
  }
  EmbeddingCache reloaded(s.path("rt.cache"));
  std::size_t exact = 0;
  for (const auto& r : records) {
    const auto got = reloaded.get(r.key);
    if (got && got->vector.size() == r.vector.size() &&
        std::memcmp(got->vector.data(), r.vector.data(), r.vector.size() * 4) == 0) {
      ++exact;
    }
  }

  ProviderConfig cfg;
  cfg.dim = 32;
  std::vector<std::string> src, tgt;
  for (int i = 0; i < 500; ++i) {
    src.push_back("s " + std::to_string(i));
    tgt.push_back("t " + std::to_string(i));
  }
  SimulatedClock clock;
  RecordingProvider first(clock, cfg.dim), second(clock, cfg.dim);
  const auto a = embed_corpora(src, tgt, first, cfg, {}, s.path("e.cache"), clock);
  const auto b = embed_corpora(src, tgt, second, cfg, {}, s.path("e.cache"), clock);
  const bool rerun_ok = !first.calls.empty() && second.calls.empty() &&
                        a.source == b.source && a.target == b.target;

  std::string text = io::read_file(s.path("e.cache"));
  text.resize(text.size() - 7);
  io::write_file(s.path("e.cache"), text);
  bool torn = false;
  try {
    EmbeddingCache broken(s.path("e.cache"));
  } catch (const CacheCorruption& e) {
    torn = e.line() == 1000;
  }
  return {exact == records.size() && rerun_ok && torn,
          std::to_string(exact) + "/10000 bit-exact, rerun calls " +
              std::to_string(second.calls.size()) + (rerun_ok ? " identical" : " DIFFERENT") +
              ", torn final line " + (torn ? "detected at line 1000" : "NOT detected")};
}

Verdict determinism() {
  std::mt19937_64 rng(99);
  const auto src = testing_ref::random_unit_matrix(rng, 300, 24);
  const auto tgt = testing_ref::random_unit_matrix(rng, 280, 24);
  std::vector<std::string> st, tt;
  for (int i = 0; i < 300; ++i) st.push_back("s" + std::to_string(i));
  for (int i = 0; i < 280; ++i) tt.push_back("t" + std::to_string(i));
  std::size_t compared = 0, differing = 0;
  for (Method method : {Method::kNn, Method::kInvNn, Method::kInvSoftmax, Method::kCsls}) {
    AlignmentParams p;
    p.method = method;
    p.block_size = 4096;
    p.threads = 1;
    const auto ref = alignment_tsv(align(src, tgt, p), st, tt);
    for (auto [block, threads] : std::vector<std::pair<std::size_t, unsigned>>{{1, 1}, {1, 4}, {4096, 4}, {37, 3}}) {
      p.block_size = block;
      p.threads = threads;
      ++compared;
      differing += alignment_tsv(align(src, tgt, p), st, tt) != ref;
    }
  }
  return {differing == 0, std::to_string(compared) + " configurations vs block 4096 / 1 thread, " +
                              std::to_string(differing) + " differ"};
}

Verdict cleaning_rule() {
  std::mt19937_64 rng(1000);
  std::vector<std::string> raw;
  std::size_t empty = 0, shorter = 0, longer = 0;
  std::vector<std::size_t> kept_counts;
  for (int i = 0; i < 1000; ++i) {
    const std::size_t n = rng() % 100;  // 0 means an empty line
    std::string text;
    if (n == 0) {
      text = rng() % 2 ? "" : "  \t ";
      ++empty;
    } else {
      // n tokens: n - 1 words and a closing full stop.
      for (std::size_t w = 0; w + 1 < n; ++w) text += (w ? "  kalma" : "Kalma") + std::to_string(w);
      text += ".";
      if (n < 5) {
        ++shorter;
      } else if (n > 80) {
        ++longer;
      } else {
        kept_counts.push_back(n);
      }
    }
    raw.push_back(text);
  }
  const auto result = clean_corpus(raw);
  const auto& r = result.report;
  bool ok = r.n_raw == 1000 && r.n_dropped_empty == empty && r.n_dropped_short == shorter &&
            r.n_dropped_long == longer && r.n_kept == kept_counts.size() &&
            result.corpus.size() == kept_counts.size();
  for (std::size_t k = 0; ok && k < kept_counts.size(); ++k) {
    const auto& sent = result.corpus.sentences[k];
    ok = sent.token_count == kept_counts[k] && sent.token_count >= 5 && sent.token_count <= 80;
  }
  return {ok, "kept " + std::to_string(r.n_kept) + "/" + std::to_string(kept_counts.size()) +
                  ", short " + std::to_string(r.n_dropped_short) + "/" + std::to_string(shorter) +
                  ", long " + std::to_string(r.n_dropped_long) + "/" + std::to_string(longer) +
                  ", empty " + std::to_string(r.n_dropped_empty) + "/" + std::to_string(empty)};
}

Verdict annotation_round_trip() {
  std::vector<AlignedRow> rows;
  for (std::size_t i = 0; i < 13560; ++i) {
    rows.push_back({{i, i, 0.5, Method::kNn}, "ha " + std::to_string(i), "en " + std::to_string(i)});
  }
  const auto sample = sample_for_annotation(rows, 150, 42);
  const auto lines = io::split_lines(annotation_tsv(sample));
  const std::array<int, 5> counts = {111, 22, 8, 3, 6};
  std::string filled = lines[0] + "\n";
  std::size_t row = 0;
  for (int label = 1; label <= 5; ++label) {
    for (int c = 0; c < counts[label - 1]; ++c) filled += lines[1 + row++] + std::to_string(label) + "\n";
  }
  const auto d = summarize_annotations(filled);
  const std::array<double, 5> expected = {74.0, 14.67, 5.33, 2.0, 4.0};
  bool ok = sample.size() == 150 && row == 150 && d.n_labeled == 150 && d.n_blank == 0;
  std::string detail = "percentages";
  for (int l = 0; l < 5; ++l) {
    const double pct = 100.0 * d.fractions[l];
    ok = ok && std::abs(pct - expected[l]) < 0.005;
    detail += " " + std::to_string(l + 1) + ":" + fmt(pct, 2);
  }
  return {ok, detail};
}

}  // namespace

int main() {
  const std::vector<std::pair<std::string, std::function<Verdict()>>> criteria = {
      {"oracle end-to-end F1", oracle_end_to_end},
      {"noise monotonicity", noise_monotonicity},
      {"brute-force equivalence", brute_force_equivalence},
      {"hand-computed CSLS and inverted softmax", hand_computed_fixtures},
      {"F1 harness fixtures", f1_harness},
      {"rate-limited batch schedule", rate_limiter_schedule},
      {"cache round trip, rerun, torn line", cache_contract},
      {"block-size and thread determinism", determinism},
      {"cleaning rule counts", cleaning_rule},
      {"annotation round trip", annotation_round_trip},
  };
  int failures = 0;
  for (std::size_t i = 0; i < criteria.size(); ++i) {
    Verdict v;
    try {
      v = criteria[i].second();
    } catch (const std::exception& e) {
      v = {false, std::string("exception: ") + e.what()};
    }
    failures += !v.pass;
    std::cout << (v.pass ? "PASS" : "FAIL") << "  " << (i + 1) << ". " << criteria[i].first
              << ": " << v.detail << std::endl;
  }
  std::cout << (criteria.size() - failures) << "/" << criteria.size() << " criteria passed"
            << std::endl;
  return failures == 0 ? 0 : 1;
}
