#pragma once

#include <cstdint>
#include <map>
#include <set>
#include <string>
#include <string_view>
#include <vector>

#include "homeassist/rational.hpp"
#include "homeassist/room.hpp"
#include "json.hpp"

namespace homeassist::world {
struct TransitionEvent;
}

namespace homeassist::tasks {

enum class ValueLevel { Not, Somewhat, Very };

std::string_view to_string(ValueLevel level);
ValueLevel parse_value_level(std::string_view name);

// Not=0, Somewhat=1, Very=2.
constexpr int level_weight(ValueLevel level) { return static_cast<int>(level); }

struct ValueDimension {
  std::string name;
  std::vector<std::string> affected;  // goal classes this dimension draws toward
  friend bool operator==(const ValueDimension&, const ValueDimension&) = default;
};

// A fixed piece of furniture: a container (openable) or a surface.
struct Fixture {
  std::string class_name;
  Room room = Room::Kitchen;
  friend bool operator==(const Fixture&, const Fixture&) = default;
};

struct TaskSpec {
  std::string id;    // "snack-m"
  std::string name;  // "Prepare Afternoon Snack"
  std::string description;
  std::vector<std::string> potential_goals;
  int goal_count = 0;
  int max_steps = 0;
  std::vector<ValueDimension> value_dims;
  std::string target_surface;
  std::map<std::string, std::set<std::string>> property_table;
  std::vector<std::string> distractors;
  std::vector<Fixture> containers;
  std::vector<Fixture> surfaces;  // includes the target surface

  // Throws ConfigurationError describing the first broken invariant.
  void validate() const;

  [[nodiscard]] bool is_potential_goal(std::string_view cls) const;
  [[nodiscard]] Room target_room() const;
  [[nodiscard]] std::set<std::string> property_vocabulary() const;
  [[nodiscard]] const std::set<std::string>& properties_of(const std::string& cls) const;
  // Names of the value dimensions whose affinity list contains `cls`.
  [[nodiscard]] std::vector<std::string> dimensions_of(std::string_view cls) const;

  friend bool operator==(const TaskSpec&, const TaskSpec&) = default;
};

struct ValueProfile {
  std::map<std::string, ValueLevel> levels;
  friend bool operator==(const ValueProfile&, const ValueProfile&) = default;
};

struct GoalSet {
  std::set<std::string> goals;
  std::set<std::string> placed_correct;
  std::vector<std::string> placed_wrong;  // multiset: one entry per penalized placement

  [[nodiscard]] bool complete() const { return placed_correct == goals; }
  friend bool operator==(const GoalSet&, const GoalSet&) = default;
};

struct ScoreCard {
  Rational score;
  int steps = 0;
  int comm_tokens = 0;
};

// Snack-M, Snack-L, Table-M, Table-L.
std::vector<TaskSpec> builtin_tasks();
// Looks up a builtin by id (case-insensitive); throws ConfigurationError.
TaskSpec builtin_task(std::string_view id);

ValueProfile sample_values(const TaskSpec& spec, std::uint64_t seed);

std::uint64_t binomial(std::uint64_t n, std::uint64_t k);
std::uint64_t goal_hypothesis_count(const TaskSpec& spec);

// Score change caused by one placement; updates the goal set's bookkeeping.
// Throws ContractViolation for anything but a Placed event.
Rational on_placement(GoalSet& goal, const TaskSpec& spec, const world::TransitionEvent& event);
Rational on_placement(GoalSet& goal, const TaskSpec& spec, const std::string& object_class,
                      const std::string& surface_class);

Rational episode_score(const GoalSet& goal, const TaskSpec& spec);

// Structured config (JSON). A task file holds one task object or an array.
nlohmann::json to_json(const TaskSpec& spec);
TaskSpec task_from_json(const nlohmann::json& doc);
std::vector<TaskSpec> load_task_file(const std::string& path);

nlohmann::json to_json(const ValueProfile& values);
ValueProfile values_from_json(const nlohmann::json& doc);

}  // namespace homeassist::tasks
