#pragma once

// The desire-alignment agent: key-information memory, goal confirmation,
// desire inference, goal-relevant action filtering, reflection-gated
// questions and a priority planner. Ablations switch single stages off.

#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "homeassist/agent.hpp"
#include "homeassist/agent_memory.hpp"
#include "homeassist/mental_model.hpp"

namespace homeassist::agent {

struct AlignmentOptions {
  bool desire = true;          // confirmation, desire inference, action filtering
  bool efficient_comm = true;  // reflection, budget and spacing of questions
  bool key_info = true;        // object-location memory
  std::size_t filter_top_k = 3;
  int send_budget = 8;         // per episode
  int send_gap = 10;           // environment steps between questions
  int unreflective_gap = 3;    // spacing used when efficient_comm is off
  std::uint64_t seed = 0;
};

// Options for a CLI agent name: famer, famer_wo_desire, famer_wo_ec,
// famer_wo_keyinfo. Throws ConfigurationError for anything else.
AlignmentOptions alignment_variant(std::string_view kind, std::uint64_t seed);

struct CommContext {
  int episode = 1;
  int step = 0;
  int sends_this_episode = 0;
  std::optional<int> last_send_step;
};

struct CommPolicy {
  bool reflect = true;
  int budget = 8;
  int gap = 10;
};

// Drops Grab/PutOn on objects outside confirmed and the members of the
// top-k hypotheses. Other actions always pass.
std::vector<world::Action> filter_actions(const std::vector<world::Action>& actions, const world::Observation& obs,
                                          const MentalModel& mental, std::size_t top_k);

// Names up to min(3, N+1) unresolved classes from the ranked hypotheses.
// With reflection off, confirmed names may be repeated and nothing is
// suppressed except by spacing.
std::optional<std::string> decide_communication(const MentalModel& mental, const std::vector<DialogueEntry>& dialogue_log,
                                                const tasks::TaskSpec& spec, const CommContext& context,
                                                const CommPolicy& policy);

// "Is cupcake what you want?" / "Are a, b and c what you want?"
std::string question_text(const std::vector<std::string>& names);

struct PlannerState {
  std::vector<Room> room_order;  // seeded exploration order
  std::map<Room, int> last_visit;
  std::set<std::string> placed;  // classes put on the target this episode
  CommContext comm;
  CommPolicy policy;
  bool use_confirmed_targets = true;
};

// Objects the planner is trying to deliver.
std::vector<std::string> planning_targets(const MentalModel& mental, const PlannerState& planner,
                                          const tasks::TaskSpec& spec);

// Deliver, fetch, ask, explore; falls back to Wait.
world::Action plan_next(const world::Observation& obs, const MentalModel& mental, const AgentMemory& memory,
                        const tasks::TaskSpec& spec, const PlannerState& planner);

class AlignmentAgent : public Agent {
 public:
  explicit AlignmentAgent(AlignmentOptions options = {});

  [[nodiscard]] std::string_view kind() const override;
  [[nodiscard]] bool communicates() const override { return true; }

  void begin_episode(const tasks::TaskSpec& spec, int episode) override;
  world::Action act(const world::Observation& obs) override;
  void observe_outcome(const world::Action& action, const world::TransitionEvent& event,
                       const Rational& delta) override;
  void end_episode() override;
  [[nodiscard]] nlohmann::json memory_document() const override;

  [[nodiscard]] const AgentMemory& memory() const { return memory_; }
  [[nodiscard]] const MentalModel& mental() const { return memory_.mental; }
  [[nodiscard]] const AlignmentOptions& options() const { return options_; }
  // Replaces the memory, e.g. with a document from an earlier session.
  void load(AgentMemory memory);

 private:
  void read_incoming(const world::Observation& obs);

  AlignmentOptions options_;
  AgentMemory memory_;
  tasks::TaskSpec spec_;
  int episode_ = 0;
  PlannerState planner_;
  std::set<std::string> pending_guess_;
};

}  // namespace homeassist::agent
