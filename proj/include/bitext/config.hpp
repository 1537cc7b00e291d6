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

// Run configuration: a JSON file with one flat section per concern.
//
//   {
//     "provider": {"kind": "remote", "endpoint_url": "...", "model_id": "...",
//                  "input_type": "search_document", "dim": 768,
//                  "api_key_env": "EMBED_API_KEY", "noise_sigma": 0.01,
//                  "timeout_seconds": 60,
//                  "fields": {"model": "model", "input_type": "input_type",
//                             "texts": "texts", "embeddings": "embeddings"}},
//     "rate": {"window_seconds": 61, "max_texts_per_window": 4000,
//              "chunk_size": 2000},
//     "align": {"method": "nn", "csls_k": 10, "beta": 30, "threshold": null,
//               "block_size": 1024, "threads": 1},
//     "cache_path": "embeddings.cache",
//     "seed": 42
//   }

#include <cstdint>
#include <filesystem>
#include <initializer_list>
#include <string>
#include <string_view>

#include "bitext/alignment.hpp"
#include "bitext/error.hpp"
#include "bitext/io.hpp"
#include "bitext/provider.hpp"
#include "bitext/rate.hpp"
#include "json.hpp"

namespace bitext {

struct RunConfig {
  ProviderConfig provider;
  RateLimiterConfig rate;
  AlignmentParams align;
  std::filesystem::path cache_path = "embeddings.cache";
  std::uint64_t seed = 42;
};

namespace detail {

inline void reject_unknown(const nlohmann::json& j, std::string_view section,
                           std::initializer_list<std::string_view> known) {
  if (!j.is_object()) {
    throw ConfigError("config section '" + std::string(section) +
                      "' must be an object");
  }
  for (const auto& [key, _] : j.items()) {
    bool ok = false;
    for (auto k : known) ok = ok || key == k;
    if (!ok) {
      throw ConfigError("unknown key '" + key + "' in config section '" +
                        std::string(section) + "'");
    }
  }
}

template <typename T>
void read_field(const nlohmann::json& j, const char* key, T& out) {
  if (!j.contains(key)) return;
  try {
    out = j.at(key).get<T>();
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(std::string("config field '") + key + "': " + e.what());
  }
}

}  // namespace detail

inline RunConfig parse_run_config(const nlohmann::json& j) {
  RunConfig cfg;
  detail::reject_unknown(j, "<root>",
                         {"provider", "rate", "align", "cache_path", "seed"});
  if (j.contains("provider")) {
    const auto& p = j.at("provider");
    detail::reject_unknown(p, "provider",
                           {"kind", "endpoint_url", "model_id", "input_type",
                            "dim", "api_key_env", "noise_sigma",
                            "timeout_seconds", "fields"});
    std::string kind = to_string(cfg.provider.kind);
    detail::read_field(p, "kind", kind);
    cfg.provider.kind = parse_provider_kind(kind);
    detail::read_field(p, "endpoint_url", cfg.provider.endpoint_url);
    detail::read_field(p, "model_id", cfg.provider.model_id);
    detail::read_field(p, "input_type", cfg.provider.input_type);
    detail::read_field(p, "dim", cfg.provider.dim);
    detail::read_field(p, "api_key_env", cfg.provider.api_key_env);
    detail::read_field(p, "noise_sigma", cfg.provider.noise_sigma);
    detail::read_field(p, "timeout_seconds", cfg.provider.timeout_seconds);
    if (p.contains("fields")) {
      const auto& f = p.at("fields");
      detail::reject_unknown(f, "provider.fields",
                             {"model", "input_type", "texts", "embeddings"});
      detail::read_field(f, "model", cfg.provider.fields.model);
      detail::read_field(f, "input_type", cfg.provider.fields.input_type);
      detail::read_field(f, "texts", cfg.provider.fields.texts);
      detail::read_field(f, "embeddings", cfg.provider.fields.embeddings);
    }
  }
  if (j.contains("rate")) {
    const auto& r = j.at("rate");
    detail::reject_unknown(r, "rate", {"window_seconds", "max_texts_per_window",
                                       "chunk_size"});
    detail::read_field(r, "window_seconds", cfg.rate.window_seconds);
    detail::read_field(r, "max_texts_per_window", cfg.rate.max_texts_per_window);
    detail::read_field(r, "chunk_size", cfg.rate.chunk_size);
  }
  if (j.contains("align")) {
    const auto& a = j.at("align");
    detail::reject_unknown(a, "align", {"method", "csls_k", "beta", "threshold",
                                        "block_size", "threads"});
    std::string method = to_string(cfg.align.method);
    detail::read_field(a, "method", method);
    cfg.align.method = parse_method(method);
    detail::read_field(a, "csls_k", cfg.align.csls_k);
    detail::read_field(a, "beta", cfg.align.beta);
    if (a.contains("threshold") && !a.at("threshold").is_null()) {
      double t = 0;
      detail::read_field(a, "threshold", t);
      cfg.align.threshold = t;
    }
    detail::read_field(a, "block_size", cfg.align.block_size);
    detail::read_field(a, "threads", cfg.align.threads);
  }
  if (j.contains("cache_path")) {
    std::string path;
    detail::read_field(j, "cache_path", path);
    cfg.cache_path = path;
  }
  detail::read_field(j, "seed", cfg.seed);
  return cfg;
}

inline RunConfig load_run_config(const std::filesystem::path& path) {
  const auto doc = nlohmann::json::parse(io::read_file(path), nullptr, false);
  if (doc.is_discarded()) {
    throw ConfigError("config file " + path.string() + " is not valid JSON");
  }
  return parse_run_config(doc);
}

}  // namespace bitext
