#pragma once

// Belief over the user's goal set: exact enumeration of N-subsets of the
// potential goals, pruned by confirmations and denials and re-weighted by
// property hints and value estimates.

#include <cstdint>
#include <map>
#include <set>
#include <string>
#include <vector>

#include "homeassist/proxy_user.hpp"
#include "homeassist/tasks.hpp"
#include "json.hpp"

namespace homeassist::agent {

struct Hint {
  std::string tag;
  int turn = 0;
  friend bool operator==(const Hint&, const Hint&) = default;
};

struct Hypothesis {
  std::vector<std::string> members;  // sorted
  double weight = 0.0;
  friend bool operator==(const Hypothesis&, const Hypothesis&) = default;
};

struct MentalModel {
  std::set<std::string> confirmed;
  std::set<std::string> denied;
  std::map<std::string, int> confirmed_turn;
  std::vector<Hint> hints;
  std::vector<Hypothesis> hypotheses;  // best first
  std::map<std::string, tasks::ValueLevel> inferred_values;
  std::vector<std::set<std::string>> past_episode_goals;
  int turn = 0;
  bool hint_conflict = false;
  std::uint64_t tie_seed = 0;

  friend bool operator==(const MentalModel&, const MentalModel&) = default;
};

inline constexpr double kHintMismatch = 0.1;
// confirmed_turn of a goal the agent worked out from hints on its own. The
// user never confirmed it, so later hints may still be about it.
inline constexpr int kDeducedTurn = 1 << 30;
// Subset counts above this switch to per-object marginals.
inline constexpr std::uint64_t kMaxEnumerated = 100000;

// Clears per-episode evidence, keeps past goals and value estimates, and
// re-ranks from the value prior.
void reset_for_episode(MentalModel& mental, const tasks::TaskSpec& spec);

// Folds one user reply in, then marks as confirmed any goal that is the only
// possible carrier of an unexplained hint. Throws ContradictionError when the
// reply confirms something already denied (or denies something the user
// confirmed); a denied deduction is simply withdrawn.
void confirm_goals(const user::UserReply& reply, MentalModel& mental, const tasks::TaskSpec& spec);

// Recomputes inferred values and hypothesis weights from the evidence.
void infer_desires(MentalModel& mental, const tasks::TaskSpec& spec);

// Value levels that best explain the given goal observations: a dimension
// seen once per episode on average is Very, seen at all is Somewhat.
std::map<std::string, tasks::ValueLevel> estimate_values(const tasks::TaskSpec& spec,
                                                         const std::vector<std::set<std::string>>& observed);

// Prior factor of one goal class under the estimated values.
double value_prior(const tasks::TaskSpec& spec, const std::map<std::string, tasks::ValueLevel>& values,
                   const std::string& cls);

// Union of the members of the first k hypotheses.
std::set<std::string> top_members(const MentalModel& mental, std::size_t k);

// Shannon entropy (nats) of the hypothesis weights; a diagnostic only.
double hypothesis_entropy(const MentalModel& mental);

nlohmann::json to_json(const MentalModel& mental);
MentalModel mental_from_json(const nlohmann::json& doc);

}  // namespace homeassist::agent
