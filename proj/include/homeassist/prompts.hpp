#pragma once

#include <map>
#include <string>
#include <string_view>
#include <vector>

namespace homeassist::prompts {

// Template names: user_goal_generation, user_communication, coela_planning,
// coela_communication, proagent. Throws ConfigurationError for others.
const std::string& template_text(std::string_view name);

// $NAME$ slots in order of first appearance.
std::vector<std::string> placeholders(std::string_view tmpl);

// Single-pass substitution of $NAME$ slots; substituted text is not rescanned.
// Throws ConfigurationError when a slot has no value.
std::string render(std::string_view tmpl, const std::map<std::string, std::string>& vars);

}  // namespace homeassist::prompts
