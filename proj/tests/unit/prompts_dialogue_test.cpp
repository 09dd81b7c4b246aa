#include <gtest/gtest.h>

#include "homeassist/dialogue.hpp"
#include "homeassist/errors.hpp"
#include "homeassist/prompts.hpp"

using namespace homeassist;

TEST(Prompts, TemplatesCarryTheirSlots) {
  const std::map<std::string, std::vector<std::string>> required{
      {"user_goal_generation", {"GOAL", "GOAL_CNT"}},
      {"user_communication", {"EPISODE", "GOAL", "PROGRESS", "DIALOGUE_HISTORY", "ACTION_HISTORY", "QUESTION"}},
      {"coela_planning", {"GOAL", "GOAL_CNT", "AVAILABLE_ACTIONS", "DIALOGUE_HISTORY", "ACTION_HISTORY"}},
      {"coela_communication", {"GOAL", "GOAL_CNT", "DIALOGUE_HISTORY"}},
      {"proagent", {"HISTORY_OF_SUCCESSFUL_SUBGOALS", "BELIEF_STATE", "AVAILABLE_ACTIONS"}},
  };
  for (const auto& [name, slots] : required) {
    const auto found = prompts::placeholders(prompts::template_text(name));
    for (const auto& s : slots) {
      EXPECT_NE(std::find(found.begin(), found.end(), s), found.end()) << name << " lacks $" << s << "$";
    }
  }
  EXPECT_THROW(prompts::template_text("haiku"), ConfigurationError);
}

TEST(Prompts, RenderIsSinglePass) {
  EXPECT_EQ(prompts::render("Hi $A$, $B$ and $A$.", {{"A", "x"}, {"B", "$A$"}}), "Hi x, $A$ and x.");
  EXPECT_THROW(prompts::render("$MISSING$", {}), ConfigurationError);
  EXPECT_EQ(prompts::placeholders("$B$ $A$ $B$"), (std::vector<std::string>{"B", "A"}));
  EXPECT_EQ(prompts::render("costs $5 and $6", {}), "costs $5 and $6");
}

TEST(Prompts, RenderedTemplatesLeaveNoSlots) {
  for (const char* name :
       {"user_goal_generation", "user_communication", "coela_planning", "coela_communication", "proagent"}) {
    const auto& t = prompts::template_text(name);
    std::map<std::string, std::string> vars;
    for (const auto& p : prompts::placeholders(t)) vars[p] = "v";
    const auto out = prompts::render(t, vars);
    EXPECT_TRUE(prompts::placeholders(out).empty()) << name;
  }
}

TEST(Dialogue, WordsAndSentences) {
  EXPECT_EQ(dialogue::words("Chips isn't what I want!"),
            (std::vector<std::string>{"chips", "isn't", "what", "i", "want"}));
  EXPECT_EQ(dialogue::words("'quoted'"), (std::vector<std::string>{"quoted"}));
  EXPECT_EQ(dialogue::sentences("Yes. No! Maybe?\nFine").size(), 4u);
  EXPECT_TRUE(dialogue::sentences("  . !").empty());
}

TEST(Dialogue, MentionedIsWholeWord) {
  const std::vector<std::string> vocab{"milk", "chips", "cupcake"};
  EXPECT_EQ(dialogue::mentioned("Is milk or CHIPS ok?", vocab), (std::set<std::string>{"chips", "milk"}));
  EXPECT_TRUE(dialogue::mentioned("milkshake and cupcakes", vocab).empty());
}

TEST(Dialogue, JoinAndNormalize) {
  EXPECT_EQ(dialogue::join_names({}), "");
  EXPECT_EQ(dialogue::join_names({"a"}), "a");
  EXPECT_EQ(dialogue::join_names({"a", "b"}, "or"), "a or b");
  EXPECT_EQ(dialogue::join_names({"a", "b", "c"}), "a, b and c");
  EXPECT_EQ(dialogue::normalize("  Is   Juice, what you WANT? "), "is juice what you want");
}
