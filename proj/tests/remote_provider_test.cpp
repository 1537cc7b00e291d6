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

#include "bitext/remote_provider.hpp"

#include <gtest/gtest.h>
#include <stdlib.h>

#include <memory>
#include <string>
#include <thread>
#include <vector>

#include "bitext/embed.hpp"

namespace bitext {
namespace {

using nlohmann::json;

class FakeTransport final : public HttpTransport {
 public:
  HttpResponse post(const std::string& url, const std::string& body,
                    const HttpHeaders& headers, double timeout) override {
    last_url = url;
    last_body = body;
    last_headers = headers;
    last_timeout = timeout;
    ++n_calls;
    return response;
  }

  HttpResponse response{200, R"({"embeddings": [[1, 2, 3]]})"};
  std::string last_url, last_body;
  HttpHeaders last_headers;
  double last_timeout = 0;
  int n_calls = 0;
};

class RemoteProviderTest : public ::testing::Test {
 protected:
  void SetUp() override {
    cfg_.kind = ProviderKind::kRemote;
    cfg_.endpoint_url = "https://example.invalid/v1/embed";
    cfg_.model_id = "m-1";
    cfg_.dim = 3;
    cfg_.api_key_env = "BITEXT_TEST_KEY";
    setenv("BITEXT_TEST_KEY", "sk-test", 1);
    transport_ = std::make_shared<FakeTransport>();
  }
  void TearDown() override { unsetenv("BITEXT_TEST_KEY"); }

  std::vector<std::vector<float>> call(const std::vector<std::string>& texts) {
    RemoteProvider p(cfg_, transport_);
    return p.embed(texts, Side::kSource);
  }

  ProviderConfig cfg_;
  std::shared_ptr<FakeTransport> transport_;
};

TEST_F(RemoteProviderTest, MissingCredentialFailsBeforeNetwork) {
  unsetenv("BITEXT_TEST_KEY");
  EXPECT_THROW(RemoteProvider(cfg_, transport_), AuthError);
  EXPECT_EQ(transport_->n_calls, 0);
  setenv("BITEXT_TEST_KEY", "", 1);
  EXPECT_THROW(RemoteProvider(cfg_, transport_), AuthError);
  EXPECT_EQ(transport_->n_calls, 0);
}

TEST_F(RemoteProviderTest, RequestCarriesModelTextsAndBearer) {
  const auto out = call({"Sannu"});
  ASSERT_EQ(out.size(), 1u);
  EXPECT_EQ(out[0], (std::vector<float>{1, 2, 3}));
  EXPECT_EQ(transport_->last_url, cfg_.endpoint_url);
  const auto body = json::parse(transport_->last_body);
  EXPECT_EQ(body["model"], "m-1");
  EXPECT_EQ(body["input_type"], "search_document");
  EXPECT_EQ(body["texts"], json::array({"Sannu"}));
  bool bearer = false;
  for (const auto& [k, v] : transport_->last_headers) {
    if (k == "Authorization") bearer = v == "Bearer sk-test";
  }
  EXPECT_TRUE(bearer);
  EXPECT_DOUBLE_EQ(transport_->last_timeout, 60.0);
}

TEST_F(RemoteProviderTest, FieldMappingRenamesRequestAndResponse) {
  cfg_.fields = {"model_name", "", "input", "/data/vectors"};
  transport_->response = {200, R"({"data": {"vectors": [[0.5, 0.25, 0]]}})"};
  const auto out = call({"x"});
  EXPECT_EQ(out[0], (std::vector<float>{0.5f, 0.25f, 0.0f}));
  const auto body = json::parse(transport_->last_body);
  EXPECT_EQ(body["model_name"], "m-1");
  EXPECT_EQ(body["input"], json::array({"x"}));
  EXPECT_FALSE(body.contains("input_type"));
}

TEST_F(RemoteProviderTest, StatusCodesMapToErrors) {
  transport_->response = {401, ""};
  EXPECT_THROW(call({"x"}), AuthError);
  transport_->response = {403, ""};
  EXPECT_THROW(call({"x"}), AuthError);
  transport_->response = {429, ""};
  EXPECT_THROW(call({"x"}), RateLimitError);
  transport_->response = {503, ""};
  EXPECT_THROW(call({"x"}), TransportError);
  transport_->response = {400, ""};
  try {
    call({"x"});
    FAIL();
  } catch (const RateLimitError&) {
    FAIL() << "400 is not a rate limit";
  } catch (const ProviderError& e) {
    EXPECT_EQ(static_cast<int>(e.exit_code()), 3);
  }
}

TEST_F(RemoteProviderTest, MalformedResponsesAreProviderErrors) {
  for (const char* body : {"not json", R"({"other": []})", R"({"embeddings": [1]})",
                           R"({"embeddings": [["a"]]})"}) {
    transport_->response = {200, body};
    EXPECT_THROW(call({"x"}), ProviderError) << body;
  }
}

TEST_F(RemoteProviderTest, WrongDimensionIsDimensionMismatch) {
  transport_->response = {200, R"({"embeddings": [[1, 2]]})"};
  RemoteProvider p(cfg_, transport_);
  const std::vector<std::string> texts = {"x"};
  EXPECT_THROW(request_embeddings(p, texts, Side::kSource, 3), DimensionMismatch);
  transport_->response = {200, R"({"embeddings": [[1, 2, 3], [1, 2, 3]]})"};
  EXPECT_THROW(request_embeddings(p, texts, Side::kSource, 3), DimensionMismatch);
}

TEST_F(RemoteProviderTest, FactoryBuildsEachKind) {
  EXPECT_NE(dynamic_cast<RemoteProvider*>(make_provider(cfg_, transport_).get()),
            nullptr);
  ProviderConfig mock;
  EXPECT_NE(dynamic_cast<HashMockProvider*>(make_provider(mock).get()), nullptr);
  mock.kind = ProviderKind::kOracle;
  EXPECT_NE(dynamic_cast<OracleProvider*>(make_provider(mock).get()), nullptr);
  cfg_.endpoint_url.clear();
  EXPECT_THROW(make_provider(cfg_, transport_), ConfigError);
}

TEST_F(RemoteProviderTest, HttplibTransportTalksToLocalServer) {
  httplib::Server server;
  std::string seen_auth;
  server.Post("/embed", [&](const httplib::Request& req, httplib::Response& res) {
    seen_auth = req.get_header_value("Authorization");
    const auto body = json::parse(req.body);
    json rows = json::array();
    for (std::size_t i = 0; i < body["texts"].size(); ++i) {
      rows.push_back({static_cast<double>(i), 1.0, 2.0});
    }
    res.set_content(json{{"embeddings", rows}}.dump(), "application/json");
  });
  server.Post("/busy", [](const httplib::Request&, httplib::Response& res) {
    res.status = 429;
  });
  const int port = server.bind_to_any_port("127.0.0.1");
  std::thread th([&] { server.listen_after_bind(); });
  server.wait_until_ready();

  cfg_.endpoint_url = "http://127.0.0.1:" + std::to_string(port) + "/embed";
  cfg_.timeout_seconds = 5;
  RemoteProvider p(cfg_, std::make_shared<HttplibTransport>());
  const std::vector<std::string> texts = {"a", "b"};
  const auto out = p.embed(texts, Side::kTarget);
  ASSERT_EQ(out.size(), 2u);
  EXPECT_EQ(out[1], (std::vector<float>{1, 1, 2}));
  EXPECT_EQ(seen_auth, "Bearer sk-test");

  cfg_.endpoint_url = "http://127.0.0.1:" + std::to_string(port) + "/busy";
  RemoteProvider busy(cfg_, std::make_shared<HttplibTransport>());
  EXPECT_THROW(busy.embed(texts, Side::kSource), RateLimitError);

  server.stop();
  th.join();

  // Nothing listens any more: no response at all.
  EXPECT_THROW(p.embed(texts, Side::kSource), TransportError);
}

TEST_F(RemoteProviderTest, MalformedUrlIsConfigError) {
  HttplibTransport t;
  EXPECT_THROW(t.post("ftp://x", "{}", {}, 1), ConfigError);
}

}  // namespace
}  // namespace bitext
