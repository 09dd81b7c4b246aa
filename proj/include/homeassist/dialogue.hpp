#pragma once

// Small text helpers shared by the user, the agents and transcript checks.

#include <set>
#include <string>
#include <string_view>
#include <vector>

namespace homeassist::dialogue {

// Lowercased words with surrounding punctuation stripped; inner apostrophes
// are kept ("isn't").
std::vector<std::string> words(std::string_view text);

// Sentences split on . ! ? and newlines; empty pieces dropped.
std::vector<std::string> sentences(std::string_view text);

// Vocabulary entries that appear as whole words in `text`.
std::set<std::string> mentioned(std::string_view text, const std::vector<std::string>& vocabulary);
std::set<std::string> mentioned(std::string_view text, const std::set<std::string>& vocabulary);

// "a", "a and b", "a, b and c".
std::string join_names(const std::vector<std::string>& names, std::string_view conjunction = "and");

// Lowercase, punctuation-free, single-spaced form for comparing messages.
std::string normalize(std::string_view text);

}  // namespace homeassist::dialogue
