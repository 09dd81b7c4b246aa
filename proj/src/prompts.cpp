#include "homeassist/prompts.hpp"

#include <algorithm>
#include <cctype>

#include "homeassist/errors.hpp"

namespace homeassist::prompts {

namespace detail {
const std::map<std::string, std::string>& embedded_templates();
}

const std::string& template_text(std::string_view name) {
  const auto& all = detail::embedded_templates();
  auto it = all.find(std::string(name));
  if (it == all.end()) throw ConfigurationError("unknown prompt template '" + std::string(name) + "'");
  return it->second;
}

namespace {

bool slot_char(char c) { return std::isalnum(static_cast<unsigned char>(c)) || c == '_'; }

// Length of the slot name starting after a '$' at `pos`, or 0.
std::size_t slot_length(std::string_view tmpl, std::size_t pos) {
  std::size_t i = pos + 1;
  while (i < tmpl.size() && slot_char(tmpl[i])) ++i;
  if (i == pos + 1 || i >= tmpl.size() || tmpl[i] != '$') return 0;
  return i - pos - 1;
}

}  // namespace

std::vector<std::string> placeholders(std::string_view tmpl) {
  std::vector<std::string> out;
  for (std::size_t pos = tmpl.find('$'); pos != std::string_view::npos;) {
    const auto len = slot_length(tmpl, pos);
    if (len == 0) {
      pos = tmpl.find('$', pos + 1);
      continue;
    }
    std::string name(tmpl.substr(pos + 1, len));
    if (std::find(out.begin(), out.end(), name) == out.end()) out.push_back(name);
    pos = tmpl.find('$', pos + len + 2);
  }
  return out;
}

std::string render(std::string_view tmpl, const std::map<std::string, std::string>& vars) {
  std::string out;
  out.reserve(tmpl.size());
  std::size_t i = 0;
  while (i < tmpl.size()) {
    if (tmpl[i] == '$') {
      if (const auto len = slot_length(tmpl, i); len > 0) {
        const std::string name(tmpl.substr(i + 1, len));
        auto it = vars.find(name);
        if (it == vars.end()) throw ConfigurationError("prompt slot $" + name + "$ has no value");
        out += it->second;
        i += len + 2;
        continue;
      }
    }
    out += tmpl[i++];
  }
  return out;
}

}  // namespace homeassist::prompts
