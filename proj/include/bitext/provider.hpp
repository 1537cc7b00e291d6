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

// Embedding provider interface and the two offline providers: a
// deterministic hash-expansion mock and a ground-truth "oracle" whose
// source/target vectors for the same pair id are near each other.

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdio>
#include <cstdint>
#include <numbers>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "bitext/digest.hpp"
#include "bitext/error.hpp"
#include "bitext/rate.hpp"

namespace bitext {

enum class ProviderKind { kRemote, kHashMock, kOracle };

inline const char* to_string(ProviderKind kind) {
  switch (kind) {
    case ProviderKind::kRemote: return "remote";
    case ProviderKind::kHashMock: return "hash_mock";
    case ProviderKind::kOracle: return "oracle";
  }
  return "unknown";
}

inline ProviderKind parse_provider_kind(std::string_view name) {
  if (name == "remote") return ProviderKind::kRemote;
  if (name == "hash_mock") return ProviderKind::kHashMock;
  if (name == "oracle") return ProviderKind::kOracle;
  throw ConfigError("unknown provider kind '" + std::string(name) + "'");
}

/// JSON field names used by the remote request/response, so other vendors
/// can be wired without code changes.
struct FieldMapping {
  std::string model = "model";
  std::string input_type = "input_type";
  std::string texts = "texts";
  std::string embeddings = "embeddings";
};

struct ProviderConfig {
  ProviderKind kind = ProviderKind::kHashMock;
  std::string endpoint_url;
  std::string model_id;
  std::string input_type = "search_document";
  std::size_t dim = 768;
  std::string api_key_env = "EMBED_API_KEY";
  std::uint64_t seed = 42;     // hash_mock and oracle
  double noise_sigma = 0.01;   // oracle only
  double timeout_seconds = 60;  // remote only
  FieldMapping fields;

  void validate() const {
    if (dim < 1) throw ConfigError("provider dim must be >= 1");
    if (kind == ProviderKind::kRemote &&
        (endpoint_url.empty() || model_id.empty())) {
      throw ConfigError("remote provider requires endpoint_url and model_id");
    }
    if (!(noise_sigma >= 0)) throw ConfigError("noise_sigma must be >= 0");
  }

  /// Model identity used in cache keys. Offline providers fold their
  /// parameters in so differently-seeded runs never share cache entries.
  std::string effective_model_id() const {
    if (!model_id.empty()) return model_id;
    switch (kind) {
      case ProviderKind::kHashMock:
        return "hash-mock/seed=" + std::to_string(seed);
      case ProviderKind::kOracle: {
        char sigma[32];
        std::snprintf(sigma, sizeof sigma, "%.17g", noise_sigma);
        return "oracle/seed=" + std::to_string(seed) + "/sigma=" + sigma;
      }
      case ProviderKind::kRemote:
        break;
    }
    return model_id;
  }
};

class EmbeddingProvider {
 public:
  virtual ~EmbeddingProvider() = default;
  /// One raw (un-normalized) vector per input text, in input order.
  virtual std::vector<std::vector<float>> embed(
      std::span<const std::string> texts, Side side) = 0;
};

/// Calls the provider once and checks the response shape.
inline std::vector<std::vector<float>> request_embeddings(
    EmbeddingProvider& provider, std::span<const std::string> texts, Side side,
    std::size_t dim) {
  auto vectors = provider.embed(texts, side);
  if (vectors.size() != texts.size()) {
    throw DimensionMismatch("provider returned " +
                            std::to_string(vectors.size()) + " vectors for " +
                            std::to_string(texts.size()) + " texts");
  }
  for (std::size_t i = 0; i < vectors.size(); ++i) {
    if (vectors[i].size() != dim) {
      throw DimensionMismatch("provider returned a vector of length " +
                              std::to_string(vectors[i].size()) +
                              " for text " + std::to_string(i) +
                              ", expected " + std::to_string(dim));
    }
  }
  return vectors;
}

namespace detail {

inline void append_le64(std::string& out, std::uint64_t v) {
  for (int b = 0; b < 8; ++b) out.push_back(static_cast<char>((v >> (8 * b)) & 0xFF));
}

/// SHA-256 counter-mode expansion: block c = SHA256(h0 || le32(c)).
inline std::vector<std::uint8_t> expand_bytes(const digest::Sha256& h0,
                                              std::size_t n_bytes) {
  std::vector<std::uint8_t> out;
  out.reserve(n_bytes + 32);
  std::array<std::uint8_t, 36> block{};
  std::copy(h0.begin(), h0.end(), block.begin());
  for (std::uint32_t counter = 0; out.size() < n_bytes; ++counter) {
    for (int b = 0; b < 4; ++b) block[32 + b] = (counter >> (8 * b)) & 0xFF;
    const auto h = digest::sha256(block);
    out.insert(out.end(), h.begin(), h.end());
  }
  out.resize(n_bytes);
  return out;
}

inline std::uint32_t load_le32(const std::uint8_t* p) {
  return static_cast<std::uint32_t>(p[0]) |
         (static_cast<std::uint32_t>(p[1]) << 8) |
         (static_cast<std::uint32_t>(p[2]) << 16) |
         (static_cast<std::uint32_t>(p[3]) << 24);
}

}  // namespace detail

/// Deterministic mock embedding: SHA-256(le64(seed) || text), expanded in
/// counter mode to 4*dim bytes; each little-endian u32 maps to
/// u / 2^31 - 1 in [-1, 1).
inline std::vector<float> hash_embed(std::string_view text, std::size_t dim,
                                     std::uint64_t seed) {
  if (dim < 1) throw ConfigError("hash_embed dim must be >= 1");
  std::string material;
  detail::append_le64(material, seed);
  material.append(text);
  const auto bytes = detail::expand_bytes(digest::sha256(material), 4 * dim);
  std::vector<float> out(dim);
  constexpr float kBelowOne = 0.99999994f;  // largest float < 1
  for (std::size_t i = 0; i < dim; ++i) {
    const double u = detail::load_le32(bytes.data() + 4 * i);
    const auto v = static_cast<float>(u / 2147483648.0 - 1.0);
    out[i] = v < 1.0f ? v : kBelowOne;
  }
  return out;
}

/// Ground-truth embedding for synthetic parallel data. Both sides share
/// hash_embed(decimal(pair_id)); the target side adds seeded pseudo-Gaussian
/// noise of standard deviation `noise_sigma` per component.
inline std::vector<float> oracle_embed(std::uint64_t pair_id, Side side,
                                       double noise_sigma, std::size_t dim,
                                       std::uint64_t seed) {
  if (!(noise_sigma >= 0)) throw ConfigError("noise_sigma must be >= 0");
  auto base = hash_embed(std::to_string(pair_id), dim, seed);
  if (side == Side::kSource || noise_sigma == 0) return base;

  std::string material;
  detail::append_le64(material, seed);
  material.append("oracle-noise");
  detail::append_le64(material, pair_id);
  material.push_back(side == Side::kSource ? 's' : 't');
  const std::size_t n_pairs = (dim + 1) / 2;
  const auto bytes =
      detail::expand_bytes(digest::sha256(material), 8 * n_pairs);
  for (std::size_t p = 0; p < n_pairs; ++p) {
    // Box-Muller on two uniforms in (0, 1).
    const double u1 = (detail::load_le32(bytes.data() + 8 * p) + 0.5) / 4294967296.0;
    const double u2 = (detail::load_le32(bytes.data() + 8 * p + 4) + 0.5) / 4294967296.0;
    const double r = std::sqrt(-2.0 * std::log(u1));
    const double theta = 2.0 * std::numbers::pi * u2;
    const std::size_t i = 2 * p;
    base[i] = static_cast<float>(base[i] + noise_sigma * r * std::cos(theta));
    if (i + 1 < dim) {
      base[i + 1] =
          static_cast<float>(base[i + 1] + noise_sigma * r * std::sin(theta));
    }
  }
  return base;
}

class HashMockProvider final : public EmbeddingProvider {
 public:
  HashMockProvider(std::size_t dim, std::uint64_t seed) : dim_(dim), seed_(seed) {}

  std::vector<std::vector<float>> embed(std::span<const std::string> texts,
                                        Side) override {
    std::vector<std::vector<float>> out;
    out.reserve(texts.size());
    for (const auto& t : texts) out.push_back(hash_embed(t, dim_, seed_));
    return out;
  }

 private:
  std::size_t dim_;
  std::uint64_t seed_;
};

/// Reads the pair id from the leading decimal token of each text.
inline std::uint64_t parse_pair_id(std::string_view text) {
  std::size_t pos = 0;
  while (pos < text.size() && text[pos] == ' ') ++pos;
  const std::size_t start = pos;
  std::uint64_t id = 0;
  while (pos < text.size() && text[pos] >= '0' && text[pos] <= '9') {
    if (pos - start >= 19) break;
    id = id * 10 + static_cast<std::uint64_t>(text[pos] - '0');
    ++pos;
  }
  const bool terminated = pos == text.size() || text[pos] == ' ';
  if (pos == start || !terminated) {
    throw ValidationError("oracle provider expects text to start with a "
                          "numeric pair id: '" + std::string(text.substr(0, 40)) +
                          "'");
  }
  return id;
}

class OracleProvider final : public EmbeddingProvider {
 public:
  OracleProvider(std::size_t dim, std::uint64_t seed, double noise_sigma)
      : dim_(dim), seed_(seed), noise_sigma_(noise_sigma) {}

  std::vector<std::vector<float>> embed(std::span<const std::string> texts,
                                        Side side) override {
    std::vector<std::vector<float>> out;
    out.reserve(texts.size());
    for (const auto& t : texts) {
      out.push_back(oracle_embed(parse_pair_id(t), side, noise_sigma_, dim_, seed_));
    }
    return out;
  }

 private:
  std::size_t dim_;
  std::uint64_t seed_;
  double noise_sigma_;
};

}  // namespace bitext
