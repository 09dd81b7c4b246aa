#pragma once

// Chat-model backends: an OpenAI-compatible HTTP transport, a deterministic
// mock, and the token counter behind the communication-cost metric.

#include <chrono>
#include <cstdint>
#include <functional>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "json.hpp"

namespace homeassist::lm {

// Word-count proxy: number of whitespace-separated words.
int count_tokens(std::string_view text);

using Tokenizer = std::function<int(std::string_view)>;

enum class Role { Agent, User, System };
std::string_view to_string(Role role);
Role parse_role(std::string_view name);

struct ChatExchange {
  Role role = Role::Agent;
  std::string content;
  int token_count = 0;

  static ChatExchange make(Role role, std::string content, const Tokenizer& tokenizer = count_tokens);
  friend bool operator==(const ChatExchange&, const ChatExchange&) = default;
};

struct BackendConfig {
  std::string kind = "mock";  // "mock" | "http"
  std::string endpoint = "https://api.openai.com/v1/chat/completions";
  std::string model = "gpt-4o";
  double temperature = 0.0;
  int max_retries = 3;
  int timeout_ms = 30000;
  int backoff_ms = 500;      // first retry delay; doubles per attempt
  int min_interval_ms = 0;   // >0 serializes outbound requests process-wide
  std::uint64_t seed = 0;    // mock only
  std::string script_path;   // mock only: canned responses by call index
  std::string api_key_env = "OPENAI_API_KEY";
  std::string audit_log;     // JSONL of request/response bodies, key redacted

  // Throws ConfigurationError.
  void validate() const;
};

class ChatBackend {
 public:
  virtual ~ChatBackend() = default;

  // Returns the assistant text for `messages`. The list must be non-empty and
  // end with an agent or system message (ContractViolation otherwise).
  std::string chat(std::span<const ChatExchange> messages);

 protected:
  virtual std::string do_chat(std::span<const ChatExchange> messages) = 0;
};

// Serializes outbound requests with a minimum spacing.
class RateLimiter {
 public:
  explicit RateLimiter(std::chrono::milliseconds min_interval) : min_interval_(min_interval) {}
  void acquire();
  static RateLimiter& shared(std::chrono::milliseconds min_interval);

 private:
  std::mutex mutex_;
  std::chrono::milliseconds min_interval_;
  std::optional<std::chrono::steady_clock::time_point> last_;
};

// Transport seam so retry logic can be tested without sockets.
struct HttpReply {
  int status = 0;  // 0 = connection failure
  std::string body;
};
using HttpPost = std::function<HttpReply(const std::string& body)>;

class HttpChatBackend : public ChatBackend {
 public:
  explicit HttpChatBackend(BackendConfig config);
  HttpChatBackend(BackendConfig config, HttpPost transport);

  [[nodiscard]] static nlohmann::json request_body(const BackendConfig& config,
                                                   std::span<const ChatExchange> messages);
  // Throws BackendProtocolError when choices[0].message.content is absent.
  [[nodiscard]] static std::string parse_response(const std::string& body);

 protected:
  std::string do_chat(std::span<const ChatExchange> messages) override;

 private:
  void audit(const std::string& request, const HttpReply& reply);

  BackendConfig config_;
  HttpPost transport_;
  std::string api_key_;
  std::mutex audit_mutex_;
};

// Deterministic stand-in for a chat model. With a script, call k returns
// the k-th scripted response; otherwise the reply is a pure function of
// (seed, messages), produced by prompt-shape heuristics.
class MockChatBackend : public ChatBackend {
 public:
  explicit MockChatBackend(std::uint64_t seed = 0, std::map<int, std::string> script = {});
  static std::map<int, std::string> load_script(const std::string& path);

  [[nodiscard]] int calls() const;

 protected:
  std::string do_chat(std::span<const ChatExchange> messages) override;

 private:
  std::uint64_t seed_;
  std::map<int, std::string> script_;
  mutable std::mutex mutex_;
  int calls_ = 0;
};

std::unique_ptr<ChatBackend> make_backend(const BackendConfig& config);

}  // namespace homeassist::lm
