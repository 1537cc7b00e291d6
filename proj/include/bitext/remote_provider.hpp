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

// JSON-over-HTTP(S) embedding provider plus the provider factory.

#ifndef CPPHTTPLIB_OPENSSL_SUPPORT
#define CPPHTTPLIB_OPENSSL_SUPPORT
#endif

#include <cstdlib>
#include <memory>
#include <regex>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "bitext/error.hpp"
#include "bitext/provider.hpp"
#include "httplib.h"
#include "json.hpp"

namespace bitext {

struct HttpResponse {
  int status = 0;
  std::string body;
};

using HttpHeaders = std::vector<std::pair<std::string, std::string>>;

class HttpTransport {
 public:
  virtual ~HttpTransport() = default;
  /// Throws TransportError when no HTTP response was received.
  virtual HttpResponse post(const std::string& url, const std::string& body,
                            const HttpHeaders& headers,
                            double timeout_seconds) = 0;
};

class HttplibTransport final : public HttpTransport {
 public:
  HttpResponse post(const std::string& url, const std::string& body,
                    const HttpHeaders& headers,
                    double timeout_seconds) override {
    static const std::regex kUrl(R"(^(https?://[^/]+)(/.*)?$)");
    std::smatch m;
    if (!std::regex_match(url, m, kUrl)) {
      throw ConfigError("malformed endpoint url '" + url + "'");
    }
    httplib::Client client(m[1].str());
    const auto timeout = std::chrono::duration<double>(timeout_seconds);
    client.set_connection_timeout(
        std::chrono::duration_cast<std::chrono::microseconds>(timeout));
    client.set_read_timeout(
        std::chrono::duration_cast<std::chrono::microseconds>(timeout));
    httplib::Headers h;
    for (const auto& [k, v] : headers) h.emplace(k, v);
    const std::string path = m[2].matched ? m[2].str() : "/";
    auto res = client.Post(path, h, body, "application/json");
    if (!res) {
      throw TransportError("request to " + m[1].str() + " failed: " +
                           httplib::to_string(res.error()));
    }
    return {res->status, res->body};
  }
};

/// Remote provider. The credential is read from the environment variable
/// named in the config when the provider is constructed, so a missing key
/// fails before any network traffic. The key is never logged.
class RemoteProvider final : public EmbeddingProvider {
 public:
  RemoteProvider(ProviderConfig cfg, std::shared_ptr<HttpTransport> transport)
      : cfg_(std::move(cfg)), transport_(std::move(transport)) {
    cfg_.validate();
    const char* key = std::getenv(cfg_.api_key_env.c_str());
    if (key == nullptr || *key == '\0') {
      throw AuthError("credential environment variable " + cfg_.api_key_env +
                      " is not set");
    }
    api_key_ = key;
  }

  std::vector<std::vector<float>> embed(std::span<const std::string> texts,
                                        Side) override {
    nlohmann::json body;
    body[cfg_.fields.model] = cfg_.model_id;
    if (!cfg_.fields.input_type.empty()) {
      body[cfg_.fields.input_type] = cfg_.input_type;
    }
    body[cfg_.fields.texts] = std::vector<std::string>(texts.begin(), texts.end());
    const HttpHeaders headers = {{"Authorization", "Bearer " + api_key_},
                                 {"Accept", "application/json"}};
    const auto res = transport_->post(
        cfg_.endpoint_url,
        body.dump(-1, ' ', false, nlohmann::json::error_handler_t::replace),
        headers, cfg_.timeout_seconds);

    if (res.status == 401 || res.status == 403) {
      throw AuthError("provider rejected the credential (HTTP " +
                      std::to_string(res.status) + ")");
    }
    if (res.status == 429) throw RateLimitError("provider rate limit (HTTP 429)");
    if (res.status >= 500) {
      throw TransportError("provider server error (HTTP " +
                           std::to_string(res.status) + ")");
    }
    if (res.status != 200) {
      throw ProviderError("unexpected provider status HTTP " +
                          std::to_string(res.status));
    }
    return parse_response(res.body);
  }

 private:
  std::vector<std::vector<float>> parse_response(const std::string& text) const {
    const auto doc = nlohmann::json::parse(text, nullptr, false);
    if (doc.is_discarded()) throw ProviderError("provider response is not JSON");
    const nlohmann::json* arr = nullptr;
    const std::string& field = cfg_.fields.embeddings;
    if (!field.empty() && field.front() == '/') {
      const nlohmann::json::json_pointer ptr(field);
      if (doc.contains(ptr)) arr = &doc.at(ptr);
    } else if (doc.is_object() && doc.contains(field)) {
      arr = &doc.at(field);
    }
    if (arr == nullptr || !arr->is_array()) {
      throw ProviderError("provider response lacks array field '" + field + "'");
    }
    std::vector<std::vector<float>> out;
    out.reserve(arr->size());
    for (const auto& row : *arr) {
      if (!row.is_array()) throw ProviderError("embedding is not an array");
      std::vector<float> v;
      v.reserve(row.size());
      for (const auto& x : row) {
        if (!x.is_number()) throw ProviderError("embedding value is not a number");
        v.push_back(x.get<float>());
      }
      out.push_back(std::move(v));
    }
    return out;
  }

  ProviderConfig cfg_;
  std::shared_ptr<HttpTransport> transport_;
  std::string api_key_;
};

inline std::unique_ptr<EmbeddingProvider> make_provider(
    const ProviderConfig& cfg,
    std::shared_ptr<HttpTransport> transport = nullptr) {
  cfg.validate();
  switch (cfg.kind) {
    case ProviderKind::kHashMock:
      return std::make_unique<HashMockProvider>(cfg.dim, cfg.seed);
    case ProviderKind::kOracle:
      return std::make_unique<OracleProvider>(cfg.dim, cfg.seed, cfg.noise_sigma);
    case ProviderKind::kRemote:
      if (!transport) transport = std::make_shared<HttplibTransport>();
      return std::make_unique<RemoteProvider>(cfg, std::move(transport));
  }
  throw ConfigError("unknown provider kind");
}

}  // namespace bitext
