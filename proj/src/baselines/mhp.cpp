#include <algorithm>

#include "homeassist/baselines.hpp"
#include "homeassist/errors.hpp"

namespace homeassist::baselines {

using world::Action;
using world::LocationKind;
using world::ObjectId;
using world::SceneState;

namespace {

// Ids the rollout cares about, resolved once per decision.
struct RolloutFrame {
  ObjectId target;
  Room target_room;
  std::vector<ObjectId> wanted;  // candidate members not yet on the target
};

bool on_target(const SceneState& s, ObjectId obj, ObjectId target) {
  const auto& loc = s.location(obj);
  return loc.kind == LocationKind::On && loc.holder == target;
}

bool held(const SceneState& s, ObjectId obj) { return s.location(obj).kind == LocationKind::Held; }

Action random_move(const SceneState& s, Rng& rng) {
  std::vector<Action> moves;
  for (Room r : kAllRooms) {
    if (r != s.agent_room()) moves.emplace_back(world::GoToRoom{r});
  }
  for (auto id : s.object_ids()) {
    if (s.kind(id) == world::ObjectKind::Container && !s.is_open(id) && s.room_of(id) == s.agent_room()) {
      moves.emplace_back(world::Open{id});
    }
  }
  return moves[uniform_index(rng, moves.size())];
}

// Greedy fetch-and-deliver move for the rollout frame.
Action greedy_move(const SceneState& s, const RolloutFrame& f, Rng& rng) {
  const bool hands_full = s.agent_hands().size() >= static_cast<std::size_t>(world::kMaxHeld);
  bool holding_wanted = false;
  for (auto id : f.wanted) {
    if (held(s, id)) holding_wanted = true;
  }
  if (holding_wanted && s.agent_room() == f.target_room) {
    for (auto id : f.wanted) {
      if (held(s, id)) return world::PutOn{id, f.target};
    }
  }
  if (!hands_full) {
    for (auto id : f.wanted) {
      if (!held(s, id) && !on_target(s, id, f.target) && s.is_visible(id)) return world::Grab{id};
    }
  }
  if (holding_wanted) return world::GoToRoom{f.target_room};
  for (auto id : f.wanted) {
    if (held(s, id) || on_target(s, id, f.target)) continue;
    if (s.room_of(id) != s.agent_room()) return world::GoToRoom{s.room_of(id)};
    const auto& loc = s.location(id);
    if (loc.kind == LocationKind::Inside && !s.is_open(loc.holder)) return world::Open{loc.holder};
  }
  return random_move(s, rng);
}

}  // namespace

MhpAgent::MhpAgent(MhpOptions options) : options_(options), rng_(options.seed) {
  if (options_.playouts < 1 || options_.depth < 1) throw ConfigurationError("mhp playouts and depth must be >= 1");
}

void MhpAgent::begin_episode(const tasks::TaskSpec& spec, int episode) {
  spec.validate();
  spec_ = spec;
  episode_ = episode;
  rng_.seed(derive_seed({options_.seed, static_cast<std::uint64_t>(episode), 0x3c75}));
  placed_.clear();
  model_.reset();
  candidate_ = sample_candidate(memory_, spec_.potential_goals, {}, static_cast<std::size_t>(spec_.goal_count), rng_);
}

double MhpAgent::playout(SceneState state, const Action& first, Rng& rng) const {
  const auto target = *state.find(spec_.target_surface);
  RolloutFrame frame{target, spec_.target_room(), {}};
  for (const auto& cls : candidate_) {
    auto id = state.find(cls);
    if (id && !on_target(state, *id, target)) frame.wanted.push_back(*id);
  }
  double total = 0.0;
  double discount = 1.0;
  Action action = first;
  for (int d = 0; d < options_.depth; ++d) {
    const auto event = world::apply_action_in_place(state, action);
    if (const auto* p = event.placed(); p != nullptr && p->surface == target) {
      auto it = std::find(frame.wanted.begin(), frame.wanted.end(), p->object);
      if (it != frame.wanted.end()) {
        total += discount;
        frame.wanted.erase(it);
      } else {
        total -= 0.5 * discount;
      }
    }
    if (frame.wanted.empty()) break;
    discount *= options_.discount;
    action = uniform01(rng) < options_.explore ? random_move(state, rng) : greedy_move(state, frame, rng);
  }
  return total;
}

Action MhpAgent::act(const world::Observation& obs) {
  if (!model_) throw ContractViolation("mhp agent needs the world model before acting");
  (void)obs;
  const SceneState& state = *model_;
  const auto target = state.find(spec_.target_surface);
  if (!target) throw ContractViolation("scene has no target surface '" + spec_.target_surface + "'");
  const std::set<std::string> wanted(candidate_.begin(), candidate_.end());

  // Relevant moves: navigation, opening, and handling candidate members.
  std::vector<Action> options;
  for (const auto& a : world::legal_actions(state)) {
    if (std::holds_alternative<world::Send>(a) || std::holds_alternative<world::Wait>(a)) continue;
    if (const auto* g = std::get_if<world::Grab>(&a)) {
      const auto& cls = state.class_name(g->object);
      if (!wanted.contains(cls) || placed_.contains(cls)) continue;
    }
    if (const auto* p = std::get_if<world::PutOn>(&a)) {
      if (!(p->surface == *target) || !wanted.contains(state.class_name(p->object))) continue;
    }
    options.push_back(a);
  }
  if (options.empty()) return world::Wait{};
  if (options.size() == 1) return options.front();

  std::vector<double> sum(options.size(), 0.0);
  std::vector<int> count(options.size(), 0);
  const int rounds = std::max<int>(options_.playouts, static_cast<int>(options.size()));
  for (int i = 0; i < rounds; ++i) {
    const auto k = static_cast<std::size_t>(i) % options.size();
    sum[k] += playout(state, options[k], rng_);
    ++count[k];
  }
  std::size_t best = 0;
  for (std::size_t k = 1; k < options.size(); ++k) {
    if (sum[k] / count[k] > sum[best] / count[best] + 1e-12) best = k;
  }
  return options[best];
}

void MhpAgent::observe_outcome(const Action& action, const world::TransitionEvent& event, const Rational& delta) {
  (void)action;
  const auto* p = event.placed();
  if (p == nullptr || p->surface_class != spec_.target_surface) return;
  const bool achieved = delta > Rational(0);
  memory_.record(episode_, p->object_class, achieved);
  placed_.insert(p->object_class);
  auto it = std::find(candidate_.begin(), candidate_.end(), p->object_class);
  if (!achieved && it != candidate_.end()) {
    // The guess was wrong: swap in another member.
    candidate_.erase(it);
    std::set<std::string> exclude = placed_;
    exclude.insert(candidate_.begin(), candidate_.end());
    auto extra = sample_candidate(memory_, spec_.potential_goals, exclude, 1, rng_);
    candidate_.insert(candidate_.end(), extra.begin(), extra.end());
  }
}

nlohmann::json MhpAgent::memory_document() const { return memory_.to_json(); }

}  // namespace homeassist::baselines
