#include <algorithm>
#include <fstream>
#include <sstream>

#include "homeassist/errors.hpp"
#include "homeassist/lm_client.hpp"
#include "homeassist/rng.hpp"

namespace homeassist::lm {

namespace {

std::string trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r\n");
  return std::string(s.substr(b, e - b + 1));
}

std::vector<std::string> split_list(std::string_view s) {
  std::vector<std::string> out;
  std::string item;
  std::istringstream in{std::string(s)};
  while (std::getline(in, item, ',')) {
    auto t = trim(item);
    if (!t.empty()) out.push_back(t);
  }
  return out;
}

// Rest of the line following `marker`, or empty.
std::string line_after(const std::string& text, std::string_view marker) {
  const auto pos = text.find(marker);
  if (pos == std::string::npos) return {};
  const auto start = pos + marker.size();
  const auto end = text.find('\n', start);
  return trim(std::string_view(text).substr(start, end == std::string::npos ? std::string::npos : end - start));
}

std::vector<std::string> action_menu(const std::string& prompt) {
  std::vector<std::string> lines;
  const auto pos = prompt.find("Available actions:");
  std::istringstream in(prompt.substr(pos + std::string_view("Available actions:").size()));
  std::string line;
  while (std::getline(in, line)) {
    auto t = trim(line);
    if (t.empty()) {
      if (lines.empty()) continue;
      break;
    }
    if (t.starts_with("Answer:") || t.starts_with("Required Output Format")) break;
    lines.push_back(t);
  }
  return lines;
}

// Crude but steady policy: prefer delivering to the target, then grabbing,
// then opening and moving.
std::string pick_action(const std::string& prompt, Rng& rng) {
  const auto menu = action_menu(prompt);
  if (menu.empty()) return "[wait]";
  std::string target;
  if (auto pos = prompt.find("Put them on the "); pos != std::string::npos) {
    auto rest = prompt.substr(pos + 16);
    target = "<" + rest.substr(0, rest.find_first_of(" .\n")) + ">";
  }
  std::vector<double> weights;
  for (const auto& a : menu) {
    double w = 1.0;
    if (a.starts_with("[putback]")) w = (!target.empty() && a.find("on " + target) != std::string::npos) ? 6.0 : 0.2;
    else if (a.starts_with("[grab]")) w = 3.0;
    else if (a.starts_with("[open]")) w = 2.0;
    else if (a.starts_with("[gotoroom]")) w = 1.5;
    else if (a.starts_with("[send_message]")) w = 0.5;
    else if (a.starts_with("[wait]")) w = 0.1;
    weights.push_back(w);
  }
  double total = 0;
  for (double w : weights) total += w;
  double r = uniform01(rng) * total;
  for (std::size_t i = 0; i < menu.size(); ++i) {
    r -= weights[i];
    if (r <= 0) return menu[i];
  }
  return menu.back();
}

}  // namespace

MockChatBackend::MockChatBackend(std::uint64_t seed, std::map<int, std::string> script)
    : seed_(seed), script_(std::move(script)) {}

std::map<int, std::string> MockChatBackend::load_script(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigurationError("cannot open mock script '" + path + "'");
  try {
    const auto doc = nlohmann::json::parse(in);
    const auto& responses = doc.contains("responses") ? doc.at("responses") : doc;
    std::map<int, std::string> script;
    if (responses.is_array()) {
      for (std::size_t i = 0; i < responses.size(); ++i) script[static_cast<int>(i)] = responses[i].get<std::string>();
    } else {
      for (const auto& [k, v] : responses.items()) script[std::stoi(k)] = v.get<std::string>();
    }
    return script;
  } catch (const std::exception& e) {
    throw ConfigurationError("mock script '" + path + "': " + e.what());
  }
}

int MockChatBackend::calls() const {
  std::lock_guard lock(mutex_);
  return calls_;
}

std::string MockChatBackend::do_chat(std::span<const ChatExchange> messages) {
  int call = 0;
  {
    std::lock_guard lock(mutex_);
    call = calls_++;
  }
  if (auto it = script_.find(call); it != script_.end()) return it->second;

  std::uint64_t h = seed_;
  for (const auto& m : messages) h = mix64(h ^ stable_hash(m.content) ^ static_cast<std::uint64_t>(m.role));
  Rng rng(h);
  const std::string& prompt = messages.back().content;

  if (prompt.find("Available actions:") != std::string::npos) return pick_action(prompt, rng);

  if (prompt.find("generate a short message") != std::string::npos) {
    auto pos = prompt.find("from the set [");
    if (pos != std::string::npos) {
      auto rest = prompt.substr(pos + 14);
      auto names = split_list(rest.substr(0, rest.find(']')));
      if (!names.empty()) return "Is " + names[uniform_index(rng, names.size())] + " what you want?";
    }
    return "What would you like me to bring?";
  }

  if (prompt.find("as the goal set") != std::string::npos) {
    auto names = split_list(line_after(prompt, "Potential Goals:"));
    int count = 1;
    if (auto pos = prompt.find("Select "); pos != std::string::npos) count = std::atoi(prompt.c_str() + pos + 7);
    stable_shuffle(names, rng);
    names.resize(std::min<std::size_t>(names.size(), static_cast<std::size_t>(std::max(count, 0))));
    std::string out;
    for (const auto& n : names) out += (out.empty() ? "" : ", ") + n;
    return "Let me think. My answer is:\n" + out;
  }

  if (auto pos = prompt.find("Alice asks this time:"); pos != std::string::npos) {
    const auto goals = split_list(line_after(prompt, "\nGoal:"));
    const std::string question = line_after(prompt, "Alice asks this time:");
    std::vector<std::string> hits;
    for (const auto& g : goals) {
      if (question.find(g) != std::string::npos) hits.push_back(g);
    }
    if (hits.empty()) return "Not quite. Keep looking around.";
    std::string out = "Yes, " + hits.front();
    for (std::size_t i = 1; i < hits.size(); ++i) out += " and " + hits[i];
    return out + (hits.size() > 1 ? " are right." : " is right.");
  }
  return "OK.";
}

}  // namespace homeassist::lm
