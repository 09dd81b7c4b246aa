#include "homeassist/lm_client.hpp"

#include <sstream>
#include <thread>

#include "homeassist/errors.hpp"

namespace homeassist::lm {

int count_tokens(std::string_view text) {
  int words = 0;
  bool in_word = false;
  for (char c : text) {
    const bool space = c == ' ' || c == '\t' || c == '\n' || c == '\r' || c == '\f' || c == '\v';
    if (!space && !in_word) ++words;
    in_word = !space;
  }
  return words;
}

std::string_view to_string(Role role) {
  switch (role) {
    case Role::Agent: return "agent";
    case Role::User: return "user";
    case Role::System: return "system";
  }
  return "?";
}

Role parse_role(std::string_view name) {
  for (auto r : {Role::Agent, Role::User, Role::System}) {
    if (to_string(r) == name) return r;
  }
  throw ConfigurationError("unknown chat role '" + std::string(name) + "'");
}

ChatExchange ChatExchange::make(Role role, std::string content, const Tokenizer& tokenizer) {
  const int tokens = tokenizer(content);
  return {role, std::move(content), tokens};
}

void BackendConfig::validate() const {
  if (kind != "mock" && kind != "http") throw ConfigurationError("backend kind must be mock or http, got '" + kind + "'");
  if (max_retries < 0) throw ConfigurationError("backend max_retries must be >= 0");
  if (timeout_ms <= 0) throw ConfigurationError("backend timeout must be > 0");
  if (backoff_ms < 0 || min_interval_ms < 0) throw ConfigurationError("backend delays must be >= 0");
  if (kind == "http" && endpoint.empty()) throw ConfigurationError("http backend needs an endpoint");
}

std::string ChatBackend::chat(std::span<const ChatExchange> messages) {
  if (messages.empty()) throw ContractViolation("chat: empty message list");
  if (messages.back().role == Role::User) {
    throw ContractViolation("chat: last message must come from the agent or system");
  }
  return do_chat(messages);
}

void RateLimiter::acquire() {
  std::lock_guard lock(mutex_);
  const auto now = std::chrono::steady_clock::now();
  if (last_ && now - *last_ < min_interval_) {
    std::this_thread::sleep_for(min_interval_ - (now - *last_));
  }
  last_ = std::chrono::steady_clock::now();
}

RateLimiter& RateLimiter::shared(std::chrono::milliseconds min_interval) {
  static RateLimiter limiter(min_interval);
  return limiter;
}

std::unique_ptr<ChatBackend> make_backend(const BackendConfig& config) {
  config.validate();
  if (config.kind == "http") return std::make_unique<HttpChatBackend>(config);
  std::map<int, std::string> script;
  if (!config.script_path.empty()) script = MockChatBackend::load_script(config.script_path);
  return std::make_unique<MockChatBackend>(config.seed, std::move(script));
}

}  // namespace homeassist::lm
