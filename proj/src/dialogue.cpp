#include "homeassist/dialogue.hpp"

#include <cctype>

namespace homeassist::dialogue {

std::vector<std::string> words(std::string_view text) {
  std::vector<std::string> out;
  std::string cur;
  auto flush = [&] {
    while (!cur.empty() && cur.back() == '\'') cur.pop_back();
    while (!cur.empty() && cur.front() == '\'') cur.erase(cur.begin());
    if (!cur.empty()) out.push_back(cur);
    cur.clear();
  };
  for (char c : text) {
    const auto u = static_cast<unsigned char>(c);
    if (std::isalnum(u) || c == '_' || c == '-' || c == '\'') {
      cur += static_cast<char>(std::tolower(u));
    } else {
      flush();
    }
  }
  flush();
  return out;
}

std::vector<std::string> sentences(std::string_view text) {
  std::vector<std::string> out;
  std::string cur;
  auto flush = [&] {
    if (cur.find_first_not_of(" \t\r") != std::string::npos) out.push_back(cur);
    cur.clear();
  };
  for (char c : text) {
    if (c == '.' || c == '!' || c == '?' || c == '\n' || c == ';') {
      flush();
    } else {
      cur += c;
    }
  }
  flush();
  return out;
}

std::set<std::string> mentioned(std::string_view text, const std::vector<std::string>& vocabulary) {
  std::set<std::string> found;
  const auto ws = words(text);
  const std::set<std::string> present(ws.begin(), ws.end());
  for (const auto& v : vocabulary) {
    if (present.contains(v)) found.insert(v);
  }
  return found;
}

std::set<std::string> mentioned(std::string_view text, const std::set<std::string>& vocabulary) {
  return mentioned(text, std::vector<std::string>(vocabulary.begin(), vocabulary.end()));
}

std::string join_names(const std::vector<std::string>& names, std::string_view conjunction) {
  std::string out;
  for (std::size_t i = 0; i < names.size(); ++i) {
    if (i > 0) out += (i + 1 == names.size()) ? " " + std::string(conjunction) + " " : ", ";
    out += names[i];
  }
  return out;
}

std::string normalize(std::string_view text) {
  std::string out;
  for (const auto& w : words(text)) out += (out.empty() ? "" : " ") + w;
  return out;
}

}  // namespace homeassist::dialogue
