#pragma once

// Comparison agents: a goal-sampling rollout planner that never talks, and
// two prompt-driven chat agents.

#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "homeassist/agent.hpp"
#include "homeassist/lm_client.hpp"
#include "homeassist/rng.hpp"

namespace homeassist::baselines {

struct SuccessEntry {
  int episode = 0;
  std::string subgoal;
  bool achieved = false;
  friend bool operator==(const SuccessEntry&, const SuccessEntry&) = default;
};

// Append-only log of placement outcomes across a session.
class SuccessMemory {
 public:
  void record(int episode, std::string subgoal, bool achieved);
  [[nodiscard]] const std::vector<SuccessEntry>& entries() const { return entries_; }
  [[nodiscard]] bool empty() const { return entries_.empty(); }

  // Laplace-smoothed hit rate (hits + 1) / (attempts + 2).
  [[nodiscard]] double hit_rate(const std::string& subgoal) const;
  // Achieved subgoals grouped by episode, e.g. "Episode 1: cupcake, wine".
  [[nodiscard]] std::string achieved_summary() const;

  [[nodiscard]] nlohmann::json to_json() const;
  static SuccessMemory from_json(const nlohmann::json& doc);

 private:
  std::vector<SuccessEntry> entries_;
};

// Draws `count` distinct classes from `pool` minus `exclude`, each draw
// weighted by hit rate. With an empty memory every subset is equally likely.
std::vector<std::string> sample_candidate(const SuccessMemory& memory, const std::vector<std::string>& pool,
                                          const std::set<std::string>& exclude, std::size_t count, Rng& rng);

struct MhpOptions {
  int playouts = 64;
  int depth = 20;
  double discount = 0.95;
  double explore = 0.2;  // chance a playout step ignores the greedy move
  std::uint64_t seed = 0;
};

class MhpAgent : public agent::Agent {
 public:
  explicit MhpAgent(MhpOptions options = {});

  [[nodiscard]] std::string_view kind() const override { return "mhp"; }
  [[nodiscard]] bool communicates() const override { return false; }

  void begin_episode(const tasks::TaskSpec& spec, int episode) override;
  world::Action act(const world::Observation& obs) override;
  void observe_outcome(const world::Action& action, const world::TransitionEvent& event,
                       const Rational& delta) override;
  void sync_world_model(const world::SceneState& state) override { model_ = state; }
  [[nodiscard]] nlohmann::json memory_document() const override;

  [[nodiscard]] const std::vector<std::string>& candidate() const { return candidate_; }
  [[nodiscard]] const SuccessMemory& success_memory() const { return memory_; }

 private:
  double playout(world::SceneState state, const world::Action& first, Rng& rng) const;

  MhpOptions options_;
  SuccessMemory memory_;
  tasks::TaskSpec spec_;
  int episode_ = 0;
  Rng rng_;
  std::optional<world::SceneState> model_;
  std::vector<std::string> candidate_;
  std::set<std::string> placed_;
};

// One entry of the action menu shown to a chat agent.
struct MenuEntry {
  world::Action action;
  std::string text;  // "[grab] <chips> (112)"
};

// Finds the menu entry a free-text reply names. Exact menu lines win; then a
// verb plus "<name> (id)" or "<name>" references. Only menu entries can be
// returned, so the result is always legal.
std::optional<world::Action> parse_action_reply(const std::string& reply, const std::vector<MenuEntry>& menu);

struct ChatAgentOptions {
  std::string agent_name = "Alice";
  std::string user_name = "Bob";
  std::size_t history_limit = 20;  // previous actions shown in the prompt
};

// Single-prompt planner with a companion message prompt.
class NaiveChatAgent : public agent::Agent {
 public:
  NaiveChatAgent(lm::ChatBackend& backend, ChatAgentOptions options = {});

  [[nodiscard]] std::string_view kind() const override { return "coela"; }
  [[nodiscard]] bool communicates() const override { return true; }

  void begin_episode(const tasks::TaskSpec& spec, int episode) override;
  world::Action act(const world::Observation& obs) override;
  void observe_outcome(const world::Action& action, const world::TransitionEvent& event,
                       const Rational& delta) override;

  [[nodiscard]] std::string planning_prompt(const world::Observation& obs) const;
  [[nodiscard]] std::string message_prompt() const;

 private:
  lm::ChatBackend& backend_;
  ChatAgentOptions options_;
  tasks::TaskSpec spec_;
  int episode_ = 0;
  std::vector<std::string> actions_;
  std::vector<std::string> dialogue_;
  std::set<std::string> placed_;
  std::string progress_;
};

// Chat planner with success-history injection; never sends.
class ProAgent : public agent::Agent {
 public:
  ProAgent(lm::ChatBackend& backend, ChatAgentOptions options = {});

  [[nodiscard]] std::string_view kind() const override { return "proagent"; }
  [[nodiscard]] bool communicates() const override { return false; }

  void begin_episode(const tasks::TaskSpec& spec, int episode) override;
  world::Action act(const world::Observation& obs) override;
  void observe_outcome(const world::Action& action, const world::TransitionEvent& event,
                       const Rational& delta) override;
  [[nodiscard]] nlohmann::json memory_document() const override;

  [[nodiscard]] std::string prompt(const world::Observation& obs) const;
  [[nodiscard]] const SuccessMemory& success_memory() const { return memory_; }

 private:
  lm::ChatBackend& backend_;
  ChatAgentOptions options_;
  SuccessMemory memory_;
  tasks::TaskSpec spec_;
  int episode_ = 0;
  std::vector<std::string> actions_;
  std::set<std::string> placed_;
  std::map<std::string, std::string> last_seen_;  // class -> where, for the belief state
};

}  // namespace homeassist::baselines
