#include <gtest/gtest.h>

#include <atomic>
#include <chrono>
#include <fstream>
#include <thread>

#include "homeassist/errors.hpp"
#include "homeassist/lm_client.hpp"
#include "httplib.h"
#include "test_support.hpp"

using namespace homeassist;
using namespace homeassist::lm;

namespace {

std::string completion(const std::string& text) {
  return nlohmann::json{{"choices", {{{"message", {{"role", "assistant"}, {"content", text}}}}}}}.dump();
}

std::vector<ChatExchange> one_prompt(const std::string& text) { return {ChatExchange::make(Role::Agent, text)}; }

BackendConfig fast_http(const std::string& endpoint) {
  BackendConfig c;
  c.kind = "http";
  c.endpoint = endpoint;
  c.backoff_ms = 1;
  c.timeout_ms = 2000;
  c.max_retries = 2;
  return c;
}

// Local chat-completions stub whose status sequence is scripted.
class StubServer {
 public:
  explicit StubServer(std::vector<int> statuses) : statuses_(std::move(statuses)) {
    server_.Post("/v1/chat/completions", [this](const httplib::Request& req, httplib::Response& res) {
      const auto n = hits_++;
      last_body_ = req.body;
      last_auth_ = req.get_header_value("Authorization");
      const int status = n < statuses_.size() ? statuses_[n] : 200;
      res.status = status;
      res.set_content(status == 200 ? completion("pong") : "{\"error\":\"busy\"}", "application/json");
    });
    port_ = server_.bind_to_any_port("127.0.0.1");
    thread_ = std::thread([this] { server_.listen_after_bind(); });
    server_.wait_until_ready();
  }
  ~StubServer() {
    server_.stop();
    thread_.join();
  }
  [[nodiscard]] std::string endpoint() const {
    return "http://127.0.0.1:" + std::to_string(port_) + "/v1/chat/completions";
  }
  [[nodiscard]] std::size_t hits() const { return hits_; }
  [[nodiscard]] const std::string& last_body() const { return last_body_; }
  [[nodiscard]] const std::string& last_auth() const { return last_auth_; }

 private:
  httplib::Server server_;
  std::vector<int> statuses_;
  std::atomic<std::size_t> hits_{0};
  std::string last_body_;
  std::string last_auth_;
  int port_ = 0;
  std::thread thread_;
};

}  // namespace

TEST(Tokens, WordCountProxy) {
  EXPECT_EQ(count_tokens(""), 0);
  EXPECT_EQ(count_tokens("   \n"), 0);
  EXPECT_EQ(count_tokens("Is juice what you want?"), 5);
  const std::vector<std::string> samples{"", "a", "two words", " padded  text ", "line\nbreak\ttab"};
  for (const auto& a : samples) {
    for (const auto& b : samples) EXPECT_EQ(count_tokens(a + " " + b), count_tokens(a) + count_tokens(b));
  }
  EXPECT_EQ(ChatExchange::make(Role::User, "Yes, juice is right.").token_count, 4);
  EXPECT_EQ(ChatExchange::make(Role::User, "abc", [](std::string_view s) { return static_cast<int>(s.size()); })
                .token_count,
            3);
}

TEST(Roles, RoundTrip) {
  for (auto r : {Role::Agent, Role::User, Role::System}) EXPECT_EQ(parse_role(to_string(r)), r);
  EXPECT_THROW(parse_role("bot"), ConfigurationError);
}

TEST(MockBackend, PureFunctionOfSeedAndMessages) {
  const auto msgs = one_prompt("Select 2 objects as the goal set.\nPotential Goals: a, b, c, d, e\n");
  MockChatBackend a(5);
  MockChatBackend b(5);
  EXPECT_EQ(a.chat(msgs), b.chat(msgs));
  EXPECT_EQ(a.chat(msgs), b.chat(msgs));
  EXPECT_EQ(a.calls(), 2);
  bool any_difference = false;
  for (std::uint64_t s = 0; s < 20 && !any_difference; ++s) any_difference = MockChatBackend(s).chat(msgs) != a.chat(msgs);
  EXPECT_TRUE(any_difference);
}

TEST(MockBackend, ScriptByCallIndex) {
  MockChatBackend m(0, {{0, "first"}, {2, "third"}});
  const auto msgs = one_prompt("anything");
  EXPECT_EQ(m.chat(msgs), "first");
  EXPECT_EQ(m.chat(msgs), "OK.");
  EXPECT_EQ(m.chat(msgs), "third");

  testing_support::TempDir dir("script");
  const auto path = (dir.path() / "script.json").string();
  std::ofstream(path) << R"({"responses": ["x", "y"]})";
  const auto script = MockChatBackend::load_script(path);
  ASSERT_EQ(script.size(), 2u);
  EXPECT_EQ(script.at(1), "y");
  std::ofstream(path) << "not json";
  EXPECT_THROW(MockChatBackend::load_script(path), ConfigurationError);
}

TEST(ChatBackend, Preconditions) {
  MockChatBackend m;
  EXPECT_THROW(m.chat({}), ContractViolation);
  const std::vector<ChatExchange> ends_with_user{ChatExchange::make(Role::User, "hi")};
  EXPECT_THROW(m.chat(ends_with_user), ContractViolation);
}

TEST(BackendConfig, Validation) {
  BackendConfig c;
  EXPECT_NO_THROW(c.validate());
  c.kind = "grpc";
  EXPECT_THROW(c.validate(), ConfigurationError);
  c = {};
  c.max_retries = -1;
  EXPECT_THROW(c.validate(), ConfigurationError);
  c = {};
  c.kind = "http";
  c.endpoint.clear();
  EXPECT_THROW(c.validate(), ConfigurationError);
  EXPECT_NE(dynamic_cast<MockChatBackend*>(make_backend(BackendConfig{}).get()), nullptr);
}

TEST(HttpBackend, RequestBodyAndResponseParsing) {
  BackendConfig c;
  c.model = "test-model";
  const std::vector<ChatExchange> msgs{ChatExchange::make(Role::System, "sys"), ChatExchange::make(Role::Agent, "q"),
                                       ChatExchange::make(Role::User, "a"), ChatExchange::make(Role::Agent, "q2")};
  const auto body = HttpChatBackend::request_body(c, msgs);
  EXPECT_EQ(body.at("model"), "test-model");
  ASSERT_EQ(body.at("messages").size(), 4u);
  EXPECT_EQ(body["messages"][0]["role"], "system");
  EXPECT_EQ(body["messages"][1]["role"], "user");
  EXPECT_EQ(body["messages"][2]["role"], "assistant");
  EXPECT_EQ(HttpChatBackend::parse_response(completion("hello")), "hello");
  EXPECT_THROW(HttpChatBackend::parse_response("{\"choices\": []}"), BackendProtocolError);
  EXPECT_THROW(HttpChatBackend::parse_response("<html>"), BackendProtocolError);
}

TEST(HttpBackend, RetriesTransientFailuresThroughSeam) {
  std::vector<int> statuses{0, 503, 200};
  std::size_t calls = 0;
  HttpChatBackend b(fast_http("http://unused/v1"), [&](const std::string&) {
    const int s = statuses[calls++];
    return HttpReply{s, s == 200 ? completion("ok") : "down"};
  });
  EXPECT_EQ(b.chat(one_prompt("ping")), "ok");
  EXPECT_EQ(calls, 3u);

  calls = 0;
  HttpChatBackend never(fast_http("http://unused/v1"), [&](const std::string&) {
    ++calls;
    return HttpReply{500, "down"};
  });
  EXPECT_THROW(never.chat(one_prompt("ping")), BackendUnavailable);
  EXPECT_EQ(calls, 3u);

  calls = 0;
  HttpChatBackend fatal(fast_http("http://unused/v1"), [&](const std::string&) {
    ++calls;
    return HttpReply{401, "no"};
  });
  EXPECT_THROW(fatal.chat(one_prompt("ping")), BackendProtocolError);
  EXPECT_EQ(calls, 1u);
}

TEST(HttpBackend, BackoffDoublesBetweenAttempts) {
  auto c = fast_http("http://unused/v1");
  c.backoff_ms = 20;
  c.max_retries = 2;
  std::vector<std::chrono::steady_clock::time_point> at;
  HttpChatBackend b(c, [&](const std::string&) {
    at.push_back(std::chrono::steady_clock::now());
    return HttpReply{429, ""};
  });
  EXPECT_THROW(b.chat(one_prompt("ping")), BackendUnavailable);
  ASSERT_EQ(at.size(), 3u);
  EXPECT_GE(at[1] - at[0], std::chrono::milliseconds(20));
  EXPECT_GE(at[2] - at[1], std::chrono::milliseconds(40));
}

TEST(HttpBackend, StubServerFailsThenSucceeds) {
  StubServer server({500});
  ::setenv("HOMEASSIST_TEST_KEY", "sk-test-secret", 1);
  auto c = fast_http(server.endpoint());
  c.api_key_env = "HOMEASSIST_TEST_KEY";
  testing_support::TempDir dir("audit");
  c.audit_log = (dir.path() / "audit.jsonl").string();
  HttpChatBackend b(c);
  EXPECT_EQ(b.chat(one_prompt("ping")), "pong");
  EXPECT_EQ(server.hits(), 2u);
  EXPECT_EQ(server.last_auth(), "Bearer sk-test-secret");
  EXPECT_EQ(nlohmann::json::parse(server.last_body()).at("messages").at(0).at("content"), "ping");

  std::ifstream audit(c.audit_log);
  std::string line;
  int lines = 0;
  while (std::getline(audit, line)) {
    ++lines;
    EXPECT_EQ(line.find("sk-test-secret"), std::string::npos);
  }
  EXPECT_EQ(lines, 2);
}

TEST(HttpBackend, UnreachableServerIsUnavailable) {
  int port = 0;
  {
    httplib::Server probe;
    port = probe.bind_to_any_port("127.0.0.1");
  }
  auto c = fast_http("http://127.0.0.1:" + std::to_string(port) + "/v1/chat/completions");
  c.max_retries = 1;
  HttpChatBackend b(c);
  EXPECT_THROW(b.chat(one_prompt("ping")), BackendUnavailable);
}

TEST(RateLimiter, SpacesAcquisitions) {
  RateLimiter limiter(std::chrono::milliseconds(15));
  const auto start = std::chrono::steady_clock::now();
  for (int i = 0; i < 4; ++i) limiter.acquire();
  EXPECT_GE(std::chrono::steady_clock::now() - start, std::chrono::milliseconds(45));
}
