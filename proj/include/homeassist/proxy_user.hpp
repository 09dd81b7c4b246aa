#pragma once

// The value-driven simulated user. Goals are drawn from fixed value
// attributes; replies confirm correct guesses and otherwise only hint at
// properties, never naming an unconfirmed goal or where anything is.

#include <cstdint>
#include <set>
#include <string>
#include <vector>

#include "homeassist/lm_client.hpp"
#include "homeassist/tasks.hpp"

namespace homeassist::user {

struct UserReply {
  std::string text;
  std::set<std::string> confirmed;
  std::set<std::string> denied;
  std::set<std::string> hinted_properties;
  friend bool operator==(const UserReply&, const UserReply&) = default;
};

struct UserState {
  tasks::ValueProfile values;
  tasks::GoalSet goal;
  int episode_index = 1;
  std::vector<lm::ChatExchange> dialogue;  // this episode, both directions
  std::string progress;
  std::vector<std::string> agent_action_log;
  std::set<std::string> confirmed;  // goals already confirmed to the agent this episode
  int turn = 0;
};

// Scripted backend when `backend` is null. Chat replies are validated:
// N distinct in-vocabulary names, one retry, then GoalSamplingFailed.
tasks::GoalSet generate_goal_set(const tasks::TaskSpec& spec, const tasks::ValueProfile& values,
                                 lm::ChatBackend* backend, std::uint64_t seed);

// Affinity score per goal class: sum over dimensions of level weight.
int affinity_score(const tasks::TaskSpec& spec, const tasks::ValueProfile& values, const std::string& cls);

// Deterministic reply rules, see proxy_user.cpp. Pure in (state, guessed, seed).
UserReply scripted_respond(const UserState& state, const tasks::TaskSpec& spec,
                           const std::set<std::string>& guessed, std::uint64_t seed);

// Answers one agent message and appends both sides to state.dialogue.
// Throws ContractViolation for an empty message and
// CommunicationBackendError when the chat backend cannot be reached.
UserReply respond(UserState& state, const tasks::TaskSpec& spec, const std::string& agent_message,
                  lm::ChatBackend* backend, std::uint64_t seed);

std::string progress_note(const UserState& state);

// Reads confirmations, denials and property hints out of free reply text by
// vocabulary matching and a small confirmation/negation lexicon. Only names
// in `guessed` can be confirmed or denied.
UserReply read_reply(const std::string& text, const std::set<std::string>& guessed, const tasks::TaskSpec& spec);

// Canonical reply text for the given facts; used by the scripted backend
// and to rewrite chat replies whose claims could not be verified.
std::string render_reply(const UserState& state, const tasks::TaskSpec& spec, const std::set<std::string>& guessed,
                         const std::set<std::string>& confirmed, const std::set<std::string>& denied,
                         const std::vector<std::string>& hints, bool too_many);

// Prompt builders for the chat backend.
std::string goal_prompt(const tasks::TaskSpec& spec, const tasks::ValueProfile& values);
std::string communication_prompt(const UserState& state, const tasks::TaskSpec& spec, const std::string& question);

}  // namespace homeassist::user
