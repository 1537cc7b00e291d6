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

// Request scheduling for rate-limited embedding APIs: fixed-size chunks of
// source and target texts, greedily packed into rate windows, plus a
// sliding-window guard that every provider attempt passes through.

#include <cstddef>
#include <algorithm>
#include <deque>
#include <string>
#include <utility>
#include <vector>

#include "bitext/clock.hpp"
#include "bitext/error.hpp"

namespace bitext {

struct RateLimiterConfig {
  double window_seconds = 61.0;
  std::size_t max_texts_per_window = 4000;
  std::size_t chunk_size = 2000;

  void validate() const {
    if (!(window_seconds > 0)) throw ConfigError("window_seconds must be > 0");
    if (max_texts_per_window < 1) {
      throw ConfigError("max_texts_per_window must be >= 1");
    }
    if (chunk_size < 1) throw ConfigError("chunk_size must be >= 1");
    if (chunk_size > max_texts_per_window) {
      throw ConfigError("chunk_size must not exceed max_texts_per_window");
    }
  }
};

enum class Side { kSource, kTarget };

inline const char* to_string(Side side) {
  return side == Side::kSource ? "source" : "target";
}

struct Chunk {
  Side side = Side::kSource;
  std::size_t start = 0;
  std::size_t length = 0;

  friend bool operator==(const Chunk&, const Chunk&) = default;
};

struct BatchPlan {
  std::vector<Chunk> chunks;
  std::vector<std::vector<std::size_t>> windows;  // indices into chunks

  /// Sleeps between consecutive windows; none after the last one.
  std::size_t n_sleeps() const noexcept {
    return windows.empty() ? 0 : windows.size() - 1;
  }
  std::size_t window_texts(std::size_t w) const {
    std::size_t total = 0;
    for (std::size_t c : windows[w]) total += chunks[c].length;
    return total;
  }
};

inline BatchPlan plan_batches(std::size_t n_src, std::size_t n_tgt,
                              const RateLimiterConfig& cfg = {}) {
  cfg.validate();
  BatchPlan plan;
  auto add_side = [&](Side side, std::size_t n) {
    for (std::size_t start = 0; start < n; start += cfg.chunk_size) {
      plan.chunks.push_back({side, start, std::min(cfg.chunk_size, n - start)});
    }
  };
  add_side(Side::kSource, n_src);
  add_side(Side::kTarget, n_tgt);

  std::size_t in_window = 0;
  for (std::size_t c = 0; c < plan.chunks.size(); ++c) {
    const std::size_t len = plan.chunks[c].length;
    if (plan.windows.empty() || in_window + len > cfg.max_texts_per_window) {
      plan.windows.emplace_back();
      in_window = 0;
    }
    plan.windows.back().push_back(c);
    in_window += len;
  }
  return plan;
}

/// Blocks (on the injected clock) until `n` more texts fit in the trailing
/// window, then records them. Every attempt counts, successful or not.
class SlidingWindowLimiter {
 public:
  SlidingWindowLimiter(Clock& clock, RateLimiterConfig cfg)
      : clock_(clock), cfg_(std::move(cfg)) {}

  void acquire(std::size_t n) {
    if (n > cfg_.max_texts_per_window) {
      throw ConfigError("request of " + std::to_string(n) +
                        " texts exceeds max_texts_per_window");
    }
    for (;;) {
      const double now = clock_.now();
      while (!log_.empty() && log_.front().first <= now - cfg_.window_seconds) {
        in_window_ -= log_.front().second;
        log_.pop_front();
      }
      if (in_window_ + n <= cfg_.max_texts_per_window) {
        log_.emplace_back(now, n);
        in_window_ += n;
        return;
      }
      clock_.sleep_for(log_.front().first + cfg_.window_seconds - now);
    }
  }

 private:
  Clock& clock_;
  RateLimiterConfig cfg_;
  std::deque<std::pair<double, std::size_t>> log_;
  std::size_t in_window_ = 0;
};

}  // namespace bitext
