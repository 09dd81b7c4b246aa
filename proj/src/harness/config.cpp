#include <algorithm>
#include <charconv>
#include <fstream>
#include <sstream>

#include "homeassist/errors.hpp"
#include "homeassist/harness.hpp"

namespace homeassist::harness {

namespace {

[[noreturn]] void fail(int line, const std::string& what) {
  throw ConfigurationError("config line " + std::to_string(line) + ": " + what);
}

class TomlReader {
 public:
  TomlReader(std::string_view text, int line) : text_(text), line_(line) {}

  void skip_space() {
    while (pos_ < text_.size() && (text_[pos_] == ' ' || text_[pos_] == '\t')) ++pos_;
  }
  [[nodiscard]] bool done() {
    skip_space();
    return pos_ >= text_.size() || text_[pos_] == '#';
  }
  [[nodiscard]] char peek() const { return pos_ < text_.size() ? text_[pos_] : '\0'; }
  void expect(char c) {
    skip_space();
    if (peek() != c) fail(line_, std::string("expected '") + c + "'");
    ++pos_;
  }

  std::string key() {
    skip_space();
    if (peek() == '"' || peek() == '\'') return string_value();
    const auto start = pos_;
    while (pos_ < text_.size() && (std::isalnum(static_cast<unsigned char>(text_[pos_])) || text_[pos_] == '_' ||
                                   text_[pos_] == '-')) {
      ++pos_;
    }
    if (start == pos_) fail(line_, "expected a key");
    return std::string(text_.substr(start, pos_ - start));
  }

  // Dotted key path, as in table headers.
  std::vector<std::string> key_path() {
    std::vector<std::string> path{key()};
    skip_space();
    while (peek() == '.') {
      ++pos_;
      path.push_back(key());
      skip_space();
    }
    return path;
  }

  nlohmann::json value() {
    skip_space();
    const char c = peek();
    if (c == '"' || c == '\'') return string_value();
    if (c == '[') return array();
    if (text_.substr(pos_).starts_with("true")) {
      pos_ += 4;
      return true;
    }
    if (text_.substr(pos_).starts_with("false")) {
      pos_ += 5;
      return false;
    }
    return number();
  }

 private:
  std::string string_value() {
    const char quote = text_[pos_++];
    std::string out;
    while (pos_ < text_.size() && text_[pos_] != quote) {
      char c = text_[pos_++];
      if (c == '\\' && quote == '"') {
        if (pos_ >= text_.size()) break;
        const char e = text_[pos_++];
        switch (e) {
          case 'n': c = '\n'; break;
          case 't': c = '\t'; break;
          case '"': c = '"'; break;
          case '\\': c = '\\'; break;
          default: fail(line_, std::string("unsupported escape \\") + e);
        }
      }
      out += c;
    }
    if (pos_ >= text_.size()) fail(line_, "unterminated string");
    ++pos_;
    return out;
  }

  nlohmann::json array() {
    ++pos_;
    nlohmann::json out = nlohmann::json::array();
    skip_space();
    while (peek() != ']') {
      out.push_back(value());
      skip_space();
      if (peek() == ',') {
        ++pos_;
        skip_space();
      } else if (peek() != ']') {
        fail(line_, "expected ',' or ']' in array");
      }
    }
    ++pos_;
    return out;
  }

  nlohmann::json number() {
    const auto start = pos_;
    while (pos_ < text_.size() && (std::isalnum(static_cast<unsigned char>(text_[pos_])) || text_[pos_] == '.' ||
                                   text_[pos_] == '+' || text_[pos_] == '-' || text_[pos_] == '_')) {
      ++pos_;
    }
    std::string token(text_.substr(start, pos_ - start));
    std::erase(token, '_');
    if (token.empty()) fail(line_, "expected a value");
    const bool is_float = token.find_first_of(".eE") != std::string::npos;
    try {
      std::size_t used = 0;
      if (is_float) {
        const double d = std::stod(token, &used);
        if (used == token.size()) return d;
      } else {
        const long long v = std::stoll(token, &used, 10);
        if (used == token.size()) return v;
      }
    } catch (const std::exception&) {
    }
    fail(line_, "bad value '" + token + "'");
  }

  std::string_view text_;
  std::size_t pos_ = 0;
  int line_;
};

std::uint64_t as_u64(const nlohmann::json& v, const std::string& key) {
  if (!v.is_number_integer() || v.get<long long>() < 0) throw ConfigurationError(key + " must be a non-negative integer");
  return v.get<std::uint64_t>();
}

int as_int(const nlohmann::json& v, const std::string& key) {
  if (!v.is_number_integer()) throw ConfigurationError(key + " must be an integer");
  return v.get<int>();
}

std::string as_string(const nlohmann::json& v, const std::string& key) {
  if (!v.is_string()) throw ConfigurationError(key + " must be a string");
  return v.get<std::string>();
}

}  // namespace

nlohmann::json parse_toml(std::string_view text) {
  nlohmann::json root = nlohmann::json::object();
  nlohmann::json* table = &root;
  std::istringstream in{std::string(text)};
  std::string raw;
  int line = 0;
  while (std::getline(in, raw)) {
    ++line;
    TomlReader r(raw, line);
    if (r.done()) continue;
    if (r.peek() == '[') {
      r.expect('[');
      if (r.peek() == '[') fail(line, "arrays of tables are not supported");
      const auto path = r.key_path();
      r.expect(']');
      if (!r.done()) fail(line, "trailing text after table header");
      table = &root;
      for (const auto& part : path) {
        auto& next = (*table)[part];
        if (next.is_null()) next = nlohmann::json::object();
        if (!next.is_object()) fail(line, "'" + part + "' is not a table");
        table = &next;
      }
      continue;
    }
    const auto path = r.key_path();
    r.expect('=');
    auto value = r.value();
    if (!r.done()) fail(line, "trailing text after value");
    nlohmann::json* slot = table;
    for (std::size_t i = 0; i + 1 < path.size(); ++i) {
      auto& next = (*slot)[path[i]];
      if (next.is_null()) next = nlohmann::json::object();
      slot = &next;
    }
    if (slot->contains(path.back())) fail(line, "duplicate key '" + path.back() + "'");
    (*slot)[path.back()] = std::move(value);
  }
  return root;
}

SessionConfig config_from_toml(std::string_view text) {
  const auto doc = parse_toml(text);
  SessionConfig c;
  for (const auto& [section, body] : doc.items()) {
    if (!body.is_object()) throw ConfigurationError("top-level key '" + section + "' must be a table");
    for (const auto& [key, v] : body.items()) {
      const std::string name = section + "." + key;
      if (section == "session") {
        if (key == "task") c.task = as_string(v, name);
        else if (key == "task_file") c.task_file = as_string(v, name);
        else if (key == "agent") c.agent = as_string(v, name);
        else if (key == "episodes") c.episodes = as_int(v, name);
        else if (key == "sessions") c.sessions = as_int(v, name);
        else if (key == "workers") c.workers = as_int(v, name);
        else if (key == "output") c.output_dir = as_string(v, name);
        else throw ConfigurationError("unknown config key '" + name + "'");
      } else if (section == "seeds") {
        if (key == "scene") c.seeds.scene = as_u64(v, name);
        else if (key == "values") c.seeds.values = as_u64(v, name);
        else if (key == "agent") c.seeds.agent = as_u64(v, name);
        else throw ConfigurationError("unknown config key '" + name + "'");
      } else if (section == "backend") {
        auto& b = c.backend;
        if (key == "kind") b.kind = as_string(v, name);
        else if (key == "endpoint") b.endpoint = as_string(v, name);
        else if (key == "model") b.model = as_string(v, name);
        else if (key == "temperature") {
          if (!v.is_number()) throw ConfigurationError(name + " must be a number");
          b.temperature = v.get<double>();
        } else if (key == "max_retries") b.max_retries = as_int(v, name);
        else if (key == "timeout_ms") b.timeout_ms = as_int(v, name);
        else if (key == "backoff_ms") b.backoff_ms = as_int(v, name);
        else if (key == "min_interval_ms") b.min_interval_ms = as_int(v, name);
        else if (key == "seed") b.seed = as_u64(v, name);
        else if (key == "script") b.script_path = as_string(v, name);
        else if (key == "api_key_env") b.api_key_env = as_string(v, name);
        else if (key == "audit_log") b.audit_log = as_string(v, name);
        else throw ConfigurationError("unknown config key '" + name + "'");
      } else if (section == "user") {
        if (key == "mode") c.user_mode = as_string(v, name);
        else throw ConfigurationError("unknown config key '" + name + "'");
      } else if (section == "mhp") {
        if (key == "playouts") c.mhp_playouts = as_int(v, name);
        else if (key == "depth") c.mhp_depth = as_int(v, name);
        else throw ConfigurationError("unknown config key '" + name + "'");
      } else {
        throw ConfigurationError("unknown config table '" + section + "'");
      }
    }
  }
  c.validate();
  return c;
}

SessionConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigurationError("cannot open config '" + path + "'");
  std::stringstream buf;
  buf << in.rdbuf();
  return config_from_toml(buf.str());
}

void SessionConfig::validate() const {
  if (episodes < 1) throw ConfigurationError("episodes must be >= 1");
  if (sessions < 1) throw ConfigurationError("sessions must be >= 1");
  if (workers < 1) throw ConfigurationError("workers must be >= 1");
  if (std::find(kAgentKinds.begin(), kAgentKinds.end(), agent) == kAgentKinds.end()) {
    throw ConfigurationError("unknown agent '" + agent + "'");
  }
  if (user_mode != "scripted" && user_mode != "chat") throw ConfigurationError("user mode must be scripted or chat");
  if (mhp_playouts < 1 || mhp_depth < 1) throw ConfigurationError("mhp playouts and depth must be >= 1");
  backend.validate();
  (void)resolve_task();
}

tasks::TaskSpec SessionConfig::resolve_task() const {
  if (!task_file.empty()) {
    for (auto& t : tasks::load_task_file(task_file)) {
      std::string a = t.id;
      std::string b = task;
      std::transform(a.begin(), a.end(), a.begin(), [](unsigned char ch) { return std::tolower(ch); });
      std::transform(b.begin(), b.end(), b.begin(), [](unsigned char ch) { return std::tolower(ch); });
      if (a == b) {
        t.validate();
        return t;
      }
    }
  }
  return tasks::builtin_task(task);
}

}  // namespace homeassist::harness
