#include "homeassist/tasks.hpp"

#include <algorithm>
#include <cctype>
#include <fstream>

#include "homeassist/errors.hpp"
#include "homeassist/rng.hpp"
#include "homeassist/world.hpp"

namespace homeassist::tasks {

std::string_view to_string(ValueLevel level) {
  switch (level) {
    case ValueLevel::Not: return "Not";
    case ValueLevel::Somewhat: return "Somewhat";
    case ValueLevel::Very: return "Very";
  }
  return "?";
}

ValueLevel parse_value_level(std::string_view name) {
  for (auto l : {ValueLevel::Not, ValueLevel::Somewhat, ValueLevel::Very}) {
    if (to_string(l) == name) return l;
  }
  throw ConfigurationError("unknown value level '" + std::string(name) + "'");
}

// ---------------------------------------------------------------------------
// TaskSpec

void TaskSpec::validate() const {
  auto fail = [&](const std::string& what) { throw ConfigurationError("task '" + id + "': " + what); };
  if (id.empty()) fail("empty id");
  if (potential_goals.empty()) fail("empty goal vocabulary");
  if (goal_count <= 0) fail("goal_count must be positive");
  if (static_cast<std::size_t>(goal_count) > potential_goals.size()) fail("goal_count exceeds |potential_goals|");
  if (max_steps <= 0) fail("max_steps must be positive");
  std::set<std::string> seen;
  for (const auto& g : potential_goals) {
    if (g.empty()) fail("empty goal class name");
    if (!seen.insert(g).second) fail("duplicate goal '" + g + "'");
    auto it = property_table.find(g);
    if (it == property_table.end() || it->second.empty()) fail("goal '" + g + "' has no property tag");
  }
  for (const auto& d : distractors) {
    if (seen.contains(d)) fail("distractor '" + d + "' is also a potential goal");
    if (!seen.insert(d).second) fail("duplicate distractor '" + d + "'");
  }
  for (const auto& dim : value_dims) {
    if (dim.affected.empty()) fail("value dimension '" + dim.name + "' affects nothing");
    for (const auto& a : dim.affected) {
      if (!is_potential_goal(a)) fail("value dimension '" + dim.name + "' names unknown goal '" + a + "'");
    }
  }
  if (containers.empty()) fail("no containers");
  bool has_target = false;
  std::set<std::string> fixtures;
  for (const auto& f : containers) {
    if (seen.contains(f.class_name) || !fixtures.insert(f.class_name).second) fail("duplicate fixture name");
  }
  for (const auto& f : surfaces) {
    if (seen.contains(f.class_name) || !fixtures.insert(f.class_name).second) fail("duplicate fixture name");
    has_target = has_target || f.class_name == target_surface;
  }
  if (!has_target) fail("target surface '" + target_surface + "' is not among the surfaces");
}

bool TaskSpec::is_potential_goal(std::string_view cls) const {
  return std::find(potential_goals.begin(), potential_goals.end(), cls) != potential_goals.end();
}

Room TaskSpec::target_room() const {
  for (const auto& s : surfaces) {
    if (s.class_name == target_surface) return s.room;
  }
  throw ConfigurationError("task '" + id + "': target surface missing");
}

std::set<std::string> TaskSpec::property_vocabulary() const {
  std::set<std::string> vocab;
  for (const auto& [cls, tags] : property_table) vocab.insert(tags.begin(), tags.end());
  return vocab;
}

const std::set<std::string>& TaskSpec::properties_of(const std::string& cls) const {
  static const std::set<std::string> kNone;
  auto it = property_table.find(cls);
  return it == property_table.end() ? kNone : it->second;
}

std::vector<std::string> TaskSpec::dimensions_of(std::string_view cls) const {
  std::vector<std::string> out;
  for (const auto& dim : value_dims) {
    if (std::find(dim.affected.begin(), dim.affected.end(), cls) != dim.affected.end()) out.push_back(dim.name);
  }
  return out;
}

// ---------------------------------------------------------------------------
// Builtins

namespace {

std::vector<Fixture> household_containers() {
  return {{"fridge", Room::Kitchen},
          {"kitchencabinet", Room::Kitchen},
          {"cabinet", Room::LivingRoom},
          {"nightstand", Room::Bedroom},
          {"bathroomcabinet", Room::Bathroom}};
}

TaskSpec snack_base() {
  TaskSpec t;
  t.name = "Prepare Afternoon Snack";
  t.description = "Prepare an afternoon snack for me and put it on the coffeetable.";
  t.potential_goals = {"cupcake", "wine",  "milk",    "cereal",     "chips",
                       "apple",   "juice", "pudding", "creamybuns", "chocolatesyrup"};
  t.value_dims = {
      {"Hungry", {"chips", "cereal"}},
      {"Thirsty", {"juice", "milk"}},
      {"SweetTooth", {"cupcake", "pudding", "creamybuns", "chocolatesyrup"}},
      {"Fruitarian", {"apple"}},
      {"Alcoholic", {"wine"}},
  };
  t.target_surface = "coffeetable";
  t.property_table = {
      {"cupcake", {"sweet", "baked"}},
      {"wine", {"alcoholic"}},
      {"milk", {"creamy", "nourishing"}},
      {"cereal", {"crunchy", "filling"}},
      {"chips", {"crunchy"}},
      {"apple", {"fruity", "healthy"}},
      {"juice", {"refreshing"}},
      {"pudding", {"sweet", "creamy"}},
      {"creamybuns", {"sweet", "soft"}},
      {"chocolatesyrup", {"sweet", "rich"}},
      {"toothbrush", {"hygienic"}},
      {"candle", {"fragrant"}},
  };
  t.distractors = {"toothbrush", "candle"};
  t.containers = household_containers();
  t.surfaces = {{"coffeetable", Room::LivingRoom},
                {"kitchencounter", Room::Kitchen},
                {"desk", Room::Bedroom},
                {"bathroomcounter", Room::Bathroom}};
  return t;
}

TaskSpec table_base() {
  TaskSpec t;
  t.name = "Set Up Dinner Table";
  t.description = "Set up the dinner table for me.";
  t.potential_goals = {"coffeepot", "breadslice", "cutleryknife", "mug",
                       "plate",     "wineglass",  "cutleryfork",  "waterglass"};
  t.value_dims = {
      {"NeedRefresh", {"breadslice"}},
      {"Thirsty", {"waterglass", "mug"}},
      {"MeatLove", {"cutleryknife", "cutleryfork", "plate"}},
      {"CaffeinTolerable", {"coffeepot"}},
      {"Alcoholic", {"wineglass"}},
  };
  t.target_surface = "dinnertable";
  t.property_table = {
      {"coffeepot", {"caffeinated", "hot"}},
      {"breadslice", {"light", "baked"}},
      {"cutleryknife", {"sharp", "metal"}},
      {"mug", {"ceramic", "hot"}},
      {"plate", {"flat", "ceramic"}},
      {"wineglass", {"alcoholic", "glass"}},
      {"cutleryfork", {"pronged", "metal"}},
      {"waterglass", {"refreshing", "glass"}},
      {"toothbrush", {"hygienic"}},
      {"candle", {"fragrant"}},
  };
  t.distractors = {"toothbrush", "candle"};
  t.containers = household_containers();
  t.surfaces = {{"dinnertable", Room::Kitchen},
                {"coffeetable", Room::LivingRoom},
                {"desk", Room::Bedroom},
                {"bathroomcounter", Room::Bathroom}};
  return t;
}

TaskSpec sized(TaskSpec t, std::string id, int goals, int steps) {
  t.id = std::move(id);
  t.goal_count = goals;
  t.max_steps = steps;
  return t;
}

}  // namespace

std::vector<TaskSpec> builtin_tasks() {
  return {sized(snack_base(), "snack-m", 2, 200), sized(snack_base(), "snack-l", 4, 300),
          sized(table_base(), "table-m", 2, 200), sized(table_base(), "table-l", 4, 300)};
}

TaskSpec builtin_task(std::string_view id) {
  std::string lowered(id);
  std::transform(lowered.begin(), lowered.end(), lowered.begin(),
                 [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  for (auto& t : builtin_tasks()) {
    if (t.id == lowered) return t;
  }
  throw ConfigurationError("unknown task '" + std::string(id) + "'");
}

// ---------------------------------------------------------------------------
// Values and hypotheses

ValueProfile sample_values(const TaskSpec& spec, std::uint64_t seed) {
  Rng rng(derive_seed({seed, 0xa1e5}));
  ValueProfile profile;
  for (const auto& dim : spec.value_dims) {
    profile.levels[dim.name] = static_cast<ValueLevel>(uniform_index(rng, 3));
  }
  return profile;
}

std::uint64_t binomial(std::uint64_t n, std::uint64_t k) {
  if (k > n) return 0;
  k = std::min(k, n - k);
  std::uint64_t r = 1;
  for (std::uint64_t i = 1; i <= k; ++i) r = r * (n - k + i) / i;
  return r;
}

std::uint64_t goal_hypothesis_count(const TaskSpec& spec) {
  return binomial(spec.potential_goals.size(), static_cast<std::uint64_t>(spec.goal_count));
}

// ---------------------------------------------------------------------------
// Scoring

Rational on_placement(GoalSet& goal, const TaskSpec& spec, const std::string& object_class,
                      const std::string& surface_class) {
  if (surface_class != spec.target_surface) return Rational(0);
  const std::int64_t n = spec.goal_count;
  if (goal.goals.contains(object_class)) {
    return goal.placed_correct.insert(object_class).second ? Rational(1, n) : Rational(0);
  }
  goal.placed_wrong.push_back(object_class);
  return Rational(-1, 2 * n);
}

Rational on_placement(GoalSet& goal, const TaskSpec& spec, const world::TransitionEvent& event) {
  const auto* placed = event.placed();
  if (placed == nullptr) {
    throw ContractViolation("on_placement: expected a Placed event, got " + world::describe(event));
  }
  return on_placement(goal, spec, placed->object_class, placed->surface_class);
}

Rational episode_score(const GoalSet& goal, const TaskSpec& spec) {
  const std::int64_t n = spec.goal_count;
  return Rational(static_cast<std::int64_t>(goal.placed_correct.size()), n) -
         Rational(static_cast<std::int64_t>(goal.placed_wrong.size()), 2 * n);
}

// ---------------------------------------------------------------------------
// JSON

nlohmann::json to_json(const TaskSpec& spec) {
  auto fixtures = [](const std::vector<Fixture>& fs) {
    nlohmann::json out = nlohmann::json::array();
    for (const auto& f : fs) out.push_back({{"class", f.class_name}, {"room", to_string(f.room)}});
    return out;
  };
  nlohmann::json dims = nlohmann::json::array();
  for (const auto& d : spec.value_dims) dims.push_back({{"name", d.name}, {"affected", d.affected}});
  return {{"id", spec.id},
          {"name", spec.name},
          {"description", spec.description},
          {"potential_goals", spec.potential_goals},
          {"goal_count", spec.goal_count},
          {"max_steps", spec.max_steps},
          {"value_dims", dims},
          {"target_surface", spec.target_surface},
          {"property_table", spec.property_table},
          {"distractors", spec.distractors},
          {"containers", fixtures(spec.containers)},
          {"surfaces", fixtures(spec.surfaces)}};
}

TaskSpec task_from_json(const nlohmann::json& doc) {
  try {
    auto fixtures = [](const nlohmann::json& arr) {
      std::vector<Fixture> out;
      for (const auto& f : arr) {
        auto room = parse_room(f.at("room").get<std::string>());
        if (!room) throw ConfigurationError("task: unknown room " + f.at("room").dump());
        out.push_back({f.at("class").get<std::string>(), *room});
      }
      return out;
    };
    TaskSpec t;
    t.id = doc.at("id").get<std::string>();
    t.name = doc.value("name", t.id);
    t.description = doc.value("description", std::string{});
    t.potential_goals = doc.at("potential_goals").get<std::vector<std::string>>();
    t.goal_count = doc.at("goal_count").get<int>();
    t.max_steps = doc.at("max_steps").get<int>();
    for (const auto& d : doc.at("value_dims")) {
      t.value_dims.push_back({d.at("name").get<std::string>(), d.at("affected").get<std::vector<std::string>>()});
    }
    t.target_surface = doc.at("target_surface").get<std::string>();
    t.property_table = doc.at("property_table").get<std::map<std::string, std::set<std::string>>>();
    t.distractors = doc.value("distractors", std::vector<std::string>{});
    t.containers = fixtures(doc.at("containers"));
    t.surfaces = fixtures(doc.at("surfaces"));
    t.validate();
    return t;
  } catch (const nlohmann::json::exception& e) {
    throw ConfigurationError(std::string("task: malformed document: ") + e.what());
  }
}

std::vector<TaskSpec> load_task_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigurationError("cannot open task file '" + path + "'");
  nlohmann::json doc;
  try {
    doc = nlohmann::json::parse(in);
  } catch (const nlohmann::json::parse_error& e) {
    throw ConfigurationError("task file '" + path + "': " + e.what());
  }
  std::vector<TaskSpec> out;
  if (doc.is_array()) {
    for (const auto& t : doc) out.push_back(task_from_json(t));
  } else {
    out.push_back(task_from_json(doc));
  }
  return out;
}

nlohmann::json to_json(const ValueProfile& values) {
  nlohmann::json out = nlohmann::json::object();
  for (const auto& [dim, level] : values.levels) out[dim] = to_string(level);
  return out;
}

ValueProfile values_from_json(const nlohmann::json& doc) {
  ValueProfile v;
  for (const auto& [dim, level] : doc.items()) v.levels[dim] = parse_value_level(level.get<std::string>());
  return v;
}

}  // namespace homeassist::tasks
