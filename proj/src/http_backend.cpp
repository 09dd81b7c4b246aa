#include <cstdlib>
#include <fstream>
#include <thread>

#include "homeassist/errors.hpp"
#include "homeassist/lm_client.hpp"
#include "httplib.h"
#include <spdlog/spdlog.h>

namespace homeassist::lm {

namespace {

// OpenAI chat roles: the caller speaks as "user", the model as "assistant".
std::string_view wire_role(Role role) {
  switch (role) {
    case Role::System: return "system";
    case Role::Agent: return "user";
    case Role::User: return "assistant";
  }
  return "user";
}

bool transient(int status) { return status == 0 || status == 408 || status == 429 || status >= 500; }

HttpPost default_transport(const BackendConfig& config, std::string api_key) {
  // Split "scheme://host[:port]/path".
  const auto scheme_end = config.endpoint.find("://");
  const auto path_start =
      config.endpoint.find('/', scheme_end == std::string::npos ? 0 : scheme_end + 3);
  std::string origin = config.endpoint.substr(0, path_start);
  std::string path = path_start == std::string::npos ? "/" : config.endpoint.substr(path_start);
  const auto timeout = std::chrono::milliseconds(config.timeout_ms);
  return [origin, path, timeout, api_key = std::move(api_key)](const std::string& body) {
    httplib::Client client(origin);
    client.set_connection_timeout(timeout);
    client.set_read_timeout(timeout);
    client.set_write_timeout(timeout);
    httplib::Headers headers;
    if (!api_key.empty()) headers.emplace("Authorization", "Bearer " + api_key);
    auto res = client.Post(path, headers, body, "application/json");
    if (!res) return HttpReply{0, httplib::to_string(res.error())};
    return HttpReply{res->status, res->body};
  };
}

std::string redact(std::string text, const std::string& secret) {
  if (secret.empty()) return text;
  for (auto pos = text.find(secret); pos != std::string::npos; pos = text.find(secret, pos)) {
    text.replace(pos, secret.size(), "<redacted>");
  }
  return text;
}

}  // namespace

HttpChatBackend::HttpChatBackend(BackendConfig config) : HttpChatBackend(config, nullptr) {}

HttpChatBackend::HttpChatBackend(BackendConfig config, HttpPost transport)
    : config_(std::move(config)), transport_(std::move(transport)) {
  config_.validate();
  if (const char* key = std::getenv(config_.api_key_env.c_str())) api_key_ = key;
  if (!transport_) transport_ = default_transport(config_, api_key_);
}

nlohmann::json HttpChatBackend::request_body(const BackendConfig& config, std::span<const ChatExchange> messages) {
  nlohmann::json msgs = nlohmann::json::array();
  for (const auto& m : messages) msgs.push_back({{"role", wire_role(m.role)}, {"content", m.content}});
  return {{"model", config.model}, {"messages", msgs}, {"temperature", config.temperature}};
}

std::string HttpChatBackend::parse_response(const std::string& body) {
  try {
    const auto doc = nlohmann::json::parse(body);
    return doc.at("choices").at(0).at("message").at("content").get<std::string>();
  } catch (const nlohmann::json::exception& e) {
    throw BackendProtocolError(std::string("chat completion response is malformed: ") + e.what());
  }
}

void HttpChatBackend::audit(const std::string& request, const HttpReply& reply) {
  if (config_.audit_log.empty()) return;
  std::lock_guard lock(audit_mutex_);
  std::ofstream out(config_.audit_log, std::ios::app);
  nlohmann::json rec{{"endpoint", config_.endpoint},
                     {"request", redact(request, api_key_)},
                     {"status", reply.status},
                     {"response", redact(reply.body, api_key_)}};
  out << rec.dump() << '\n';
}

std::string HttpChatBackend::do_chat(std::span<const ChatExchange> messages) {
  const std::string body = request_body(config_, messages).dump();
  std::string last_error;
  for (int attempt = 0; attempt <= config_.max_retries; ++attempt) {
    if (attempt > 0) {
      std::this_thread::sleep_for(std::chrono::milliseconds(config_.backoff_ms) * (1 << (attempt - 1)));
    }
    if (config_.min_interval_ms > 0) {
      RateLimiter::shared(std::chrono::milliseconds(config_.min_interval_ms)).acquire();
    }
    const HttpReply reply = transport_(body);
    audit(body, reply);
    if (reply.status == 200) return parse_response(reply.body);
    if (!transient(reply.status)) {
      throw BackendProtocolError("chat completion failed with HTTP " + std::to_string(reply.status));
    }
    last_error = reply.status == 0 ? reply.body : "HTTP " + std::to_string(reply.status);
    spdlog::warn("chat backend attempt {} failed: {}", attempt + 1, last_error);
  }
  throw BackendUnavailable("chat backend unavailable after " + std::to_string(config_.max_retries + 1) +
                           " attempts: " + last_error);
}

}  // namespace homeassist::lm
