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

// Cache-first embedding of a source/target corpus pair under the batch and
// rate-window schedule.

#include <cstddef>
#include <filesystem>
#include <span>
#include <string>
#include <unordered_set>
#include <vector>

#include "bitext/cache.hpp"
#include "bitext/clock.hpp"
#include "bitext/corpus_prep.hpp"
#include "bitext/error.hpp"
#include "bitext/matrix.hpp"
#include "bitext/provider.hpp"
#include "bitext/rate.hpp"

namespace bitext {

struct RetryPolicy {
  std::size_t max_rate_limit_retries = 5;
  std::vector<double> transport_backoff_seconds = {1, 2, 4, 8, 16};
};

struct EmbedStats {
  std::size_t cache_hits = 0;      // distinct texts already in the cache
  std::size_t requested_texts = 0; // distinct texts fetched from the provider
  std::size_t provider_calls = 0;  // attempts, including retried ones
  std::size_t window_sleeps = 0;
  BatchPlan plan;
};

struct EmbeddedCorpora {
  EmbeddingMatrix source;
  EmbeddingMatrix target;
  EmbedStats stats;
};

/// One provider request with the retry policy applied. Every attempt goes
/// through the limiter first.
inline std::vector<std::vector<float>> request_with_retry(
    EmbeddingProvider& provider, std::span<const std::string> texts, Side side,
    std::size_t dim, SlidingWindowLimiter& limiter, Clock& clock,
    const RateLimiterConfig& rate, const RetryPolicy& retry,
    std::size_t* attempts = nullptr) {
  std::size_t rate_limited = 0;
  std::size_t transport_failures = 0;
  for (;;) {
    limiter.acquire(texts.size());
    if (attempts) ++*attempts;
    try {
      return request_embeddings(provider, texts, side, dim);
    } catch (const RateLimitError&) {
      if (rate_limited >= retry.max_rate_limit_retries) throw;
      ++rate_limited;
      clock.sleep_for(rate.window_seconds);
    } catch (const TransportError&) {
      if (transport_failures >= retry.transport_backoff_seconds.size()) throw;
      clock.sleep_for(retry.transport_backoff_seconds[transport_failures++]);
    }
  }
}

namespace detail {

inline EmbeddingMatrix assemble(std::span<const std::string> texts,
                                const std::vector<std::string>& keys,
                                const EmbeddingCache& cache, std::size_t dim) {
  EmbeddingMatrix m(texts.size(), dim);
  for (std::size_t i = 0; i < texts.size(); ++i) {
    const auto record = cache.get(keys[i]);
    if (!record) {
      throw ValidationError("cache lost record for row " + std::to_string(i));
    }
    if (record->dim() != dim) {
      throw DimensionMismatch("cached vector for row " + std::to_string(i) +
                              " has dim " + std::to_string(record->dim()) +
                              ", configured dim is " + std::to_string(dim));
    }
    std::copy(record->vector.begin(), record->vector.end(),
              m.mutable_row(i).begin());
  }
  return normalize_rows(std::move(m));
}

}  // namespace detail

/// Embeds both sides. Cached texts are never re-requested; the remaining
/// distinct texts are chunked and packed into rate windows, with a
/// window_seconds sleep between windows (none after the last). Each chunk is
/// persisted to the cache as soon as it arrives.
inline EmbeddedCorpora embed_corpora(std::span<const std::string> source,
                                     std::span<const std::string> target,
                                     EmbeddingProvider& provider,
                                     const ProviderConfig& cfg,
                                     const RateLimiterConfig& rate,
                                     EmbeddingCache& cache, Clock& clock,
                                     const RetryPolicy& retry = {}) {
  cfg.validate();
  rate.validate();
  const std::string model = cfg.effective_model_id();
  auto keys_of = [&](std::span<const std::string> texts) {
    std::vector<std::string> keys;
    keys.reserve(texts.size());
    for (const auto& t : texts) keys.push_back(cache_key(model, cfg.input_type, t));
    return keys;
  };
  const auto src_keys = keys_of(source);
  const auto tgt_keys = keys_of(target);

  EmbeddedCorpora out;
  std::unordered_set<std::string> scheduled;
  std::unordered_set<std::string> hits;
  std::vector<std::string> pending[2];  // texts, per side
  std::vector<std::string> pending_keys[2];
  auto collect = [&](std::span<const std::string> texts,
                     const std::vector<std::string>& keys, int side) {
    for (std::size_t i = 0; i < texts.size(); ++i) {
      if (cache.contains(keys[i])) {
        hits.insert(keys[i]);
        continue;
      }
      if (!scheduled.insert(keys[i]).second) continue;
      pending[side].push_back(texts[i]);
      pending_keys[side].push_back(keys[i]);
    }
  };
  collect(source, src_keys, 0);
  collect(target, tgt_keys, 1);
  out.stats.cache_hits = hits.size();

  out.stats.plan = plan_batches(pending[0].size(), pending[1].size(), rate);
  const BatchPlan& plan = out.stats.plan;
  SlidingWindowLimiter limiter(clock, rate);
  for (std::size_t w = 0; w < plan.windows.size(); ++w) {
    if (w > 0) {
      clock.sleep_for(rate.window_seconds);
      ++out.stats.window_sleeps;
    }
    for (std::size_t c : plan.windows[w]) {
      const Chunk& chunk = plan.chunks[c];
      const int s = chunk.side == Side::kSource ? 0 : 1;
      const std::span<const std::string> texts(pending[s].data() + chunk.start,
                                               chunk.length);
      auto vectors = request_with_retry(provider, texts, chunk.side, cfg.dim,
                                        limiter, clock, rate, retry,
                                        &out.stats.provider_calls);
      std::vector<CacheRecord> records;
      records.reserve(vectors.size());
      for (std::size_t i = 0; i < vectors.size(); ++i) {
        records.push_back({pending_keys[s][chunk.start + i], std::move(vectors[i])});
      }
      cache.put_batch(records);
      out.stats.requested_texts += chunk.length;
    }
  }

  out.source = detail::assemble(source, src_keys, cache, cfg.dim);
  out.target = detail::assemble(target, tgt_keys, cache, cfg.dim);
  return out;
}

inline EmbeddedCorpora embed_corpora(std::span<const std::string> source,
                                     std::span<const std::string> target,
                                     EmbeddingProvider& provider,
                                     const ProviderConfig& cfg,
                                     const RateLimiterConfig& rate,
                                     const std::filesystem::path& cache_path,
                                     Clock& clock,
                                     const RetryPolicy& retry = {}) {
  EmbeddingCache cache(cache_path);
  return embed_corpora(source, target, provider, cfg, rate, cache, clock, retry);
}

/// Single-corpus form; the corpus is scheduled as the source side.
inline EmbeddingMatrix embed_corpus(const CleanCorpus& corpus,
                                    EmbeddingProvider& provider,
                                    const ProviderConfig& cfg,
                                    const RateLimiterConfig& rate,
                                    const std::filesystem::path& cache_path,
                                    Clock& clock,
                                    const RetryPolicy& retry = {}) {
  const auto texts = corpus.texts();
  return embed_corpora(texts, {}, provider, cfg, rate, cache_path, clock, retry)
      .source;
}

}  // namespace bitext
