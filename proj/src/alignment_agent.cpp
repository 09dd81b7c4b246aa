#include "homeassist/alignment_agent.hpp"

#include <algorithm>

#include <spdlog/spdlog.h>

#include "homeassist/dialogue.hpp"
#include "homeassist/errors.hpp"
#include "homeassist/proxy_user.hpp"
#include "homeassist/rng.hpp"

namespace homeassist::agent {

using world::Action;
using world::LocationKind;
using world::ObjectId;
using world::ObjectKind;
using world::Observation;
using world::SeenObject;

AlignmentOptions alignment_variant(std::string_view kind, std::uint64_t seed) {
  AlignmentOptions o;
  o.seed = seed;
  if (kind == "famer") return o;
  if (kind == "famer_wo_desire") {
    o.desire = false;
  } else if (kind == "famer_wo_ec") {
    o.efficient_comm = false;
  } else if (kind == "famer_wo_keyinfo") {
    o.key_info = false;
  } else {
    throw ConfigurationError("unknown alignment agent variant '" + std::string(kind) + "'");
  }
  return o;
}

namespace {

const SeenObject* visible_by_id(const Observation& obs, ObjectId id) {
  for (const auto& s : obs.visible_objects) {
    if (s.id == id) return &s;
  }
  for (const auto& s : obs.held) {
    if (s.id == id) return &s;
  }
  return nullptr;
}

const SeenObject* visible_by_class(const Observation& obs, const std::string& cls) {
  for (const auto& s : obs.visible_objects) {
    if (s.class_name == cls) return &s;
  }
  return nullptr;
}

bool is_held(const Observation& obs, const std::string& cls) {
  return std::any_of(obs.held.begin(), obs.held.end(), [&](const auto& s) { return s.class_name == cls; });
}

}  // namespace

// ---------------------------------------------------------------------------
// Filtering and questions

std::vector<Action> filter_actions(const std::vector<Action>& actions, const Observation& obs,
                                   const MentalModel& mental, std::size_t top_k) {
  std::set<std::string> relevant = top_members(mental, top_k);
  relevant.insert(mental.confirmed.begin(), mental.confirmed.end());
  std::vector<Action> out;
  for (const auto& a : actions) {
    std::optional<ObjectId> object;
    if (const auto* g = std::get_if<world::Grab>(&a)) object = g->object;
    if (const auto* p = std::get_if<world::PutOn>(&a)) object = p->object;
    if (object) {
      const auto* seen = visible_by_id(obs, *object);
      if (seen == nullptr || !relevant.contains(seen->class_name)) continue;
    }
    out.push_back(a);
  }
  return out;
}

std::string question_text(const std::vector<std::string>& names) {
  if (names.size() == 1) return "Is " + names.front() + " what you want?";
  return "Are " + dialogue::join_names(names) + " what you want?";
}

std::optional<std::string> decide_communication(const MentalModel& mental, const std::vector<DialogueEntry>& dialogue_log,
                                                const tasks::TaskSpec& spec, const CommContext& context,
                                                const CommPolicy& policy) {
  const auto n = static_cast<std::size_t>(spec.goal_count);
  if (policy.reflect) {
    if (mental.confirmed.size() >= n) return std::nullopt;
    if (context.sends_this_episode >= policy.budget) return std::nullopt;
  }
  if (context.last_send_step && context.step - *context.last_send_step < policy.gap) return std::nullopt;

  const std::size_t limit = std::min<std::size_t>(3, n + 1);
  std::vector<std::string> names;
  for (const auto& h : mental.hypotheses) {
    for (const auto& m : h.members) {
      if (names.size() >= limit) break;
      if (policy.reflect && (mental.confirmed.contains(m) || mental.denied.contains(m))) continue;
      if (std::find(names.begin(), names.end(), m) == names.end()) names.push_back(m);
    }
    if (names.size() >= limit) break;
    // Without reflection the agent just repeats its best guess.
    if (!policy.reflect && !names.empty()) break;
  }
  if (names.empty()) return std::nullopt;
  std::string question = question_text(names);

  if (policy.reflect) {
    const auto key = dialogue::normalize(question);
    for (std::size_t i = 0; i + 1 < dialogue_log.size(); ++i) {
      const auto& asked = dialogue_log[i];
      if (asked.episode != context.episode || asked.role != lm::Role::Agent) continue;
      if (dialogue_log[i + 1].role == lm::Role::User && dialogue::normalize(asked.content) == key) {
        return std::nullopt;
      }
    }
  }
  return question;
}

// ---------------------------------------------------------------------------
// Planning

std::vector<std::string> planning_targets(const MentalModel& mental, const PlannerState& planner,
                                          const tasks::TaskSpec& spec) {
  std::vector<std::string> out;
  if (planner.use_confirmed_targets) {
    for (const auto& c : mental.confirmed) {
      if (!planner.placed.contains(c)) out.push_back(c);
    }
    return out;
  }
  // Without confirmation the best guesses are treated as the goal.
  const auto n = static_cast<std::size_t>(spec.goal_count);
  for (const auto& h : mental.hypotheses) {
    for (const auto& m : h.members) {
      if (out.size() >= n) return out;
      if (!planner.placed.contains(m) && std::find(out.begin(), out.end(), m) == out.end()) out.push_back(m);
    }
  }
  return out;
}

Action plan_next(const Observation& obs, const MentalModel& mental, const AgentMemory& memory,
                 const tasks::TaskSpec& spec, const PlannerState& planner) {
  const Room target_room = spec.target_room();
  const auto targets = planning_targets(mental, planner, spec);
  const std::set<std::string> target_set(targets.begin(), targets.end());
  const SeenObject* surface = visible_by_class(obs, spec.target_surface);
  const bool hands_full = obs.held.size() >= static_cast<std::size_t>(world::kMaxHeld);

  // Where each undelivered target can be picked up.
  std::vector<const SeenObject*> in_view;
  std::vector<const KeyFact*> remembered;
  for (const auto& cls : targets) {
    if (is_held(obs, cls)) continue;
    const auto* seen = visible_by_class(obs, cls);
    if (seen != nullptr && seen->kind == ObjectKind::Graspable && seen->location.kind != LocationKind::On) {
      in_view.push_back(seen);
      continue;
    }
    if (memory.keeps_key_facts) {
      if (const auto* fact = memory.fact_for(cls); fact != nullptr && fact->valid) remembered.push_back(fact);
    }
  }
  const bool fetchable = !in_view.empty() || !remembered.empty();

  // (1) Deliver.
  std::vector<const SeenObject*> held_targets;
  for (const auto& h : obs.held) {
    if (target_set.contains(h.class_name)) held_targets.push_back(&h);
  }
  if (!held_targets.empty()) {
    if (obs.room == target_room && surface != nullptr) return world::PutOn{held_targets.front()->id, surface->id};
    if (hands_full || !fetchable) return world::GoToRoom{target_room};
  }
  if (hands_full && held_targets.empty()) {
    // Holding things that are no longer wanted; set one down anywhere but the target.
    for (const auto& s : obs.visible_objects) {
      if (s.kind == ObjectKind::Surface && s.class_name != spec.target_surface) {
        return world::PutOn{obs.held.front().id, s.id};
      }
    }
  }

  // Without goal confirmation the targets are guesses; still open each
  // episode with the question before acting on them.
  if (!planner.use_confirmed_targets) {
    if (auto question = decide_communication(mental, memory.dialogue_log, spec, planner.comm, planner.policy)) {
      return world::Send(*question);
    }
  }

  // (2) Fetch what is known.
  if (!hands_full) {
    if (!in_view.empty()) return world::Grab{in_view.front()->id};
    for (const auto* fact : remembered) {
      if (fact->room != obs.room || fact->container == kOpenSpace) continue;
      const auto* box = visible_by_class(obs, fact->container);
      if (box != nullptr && !box->open) return world::Open{box->id};
    }
    for (const auto* fact : remembered) {
      if (fact->room != obs.room) return world::GoToRoom{fact->room};
    }
  }

  // (3) Ask.
  if (auto question = decide_communication(mental, memory.dialogue_log, spec, planner.comm, planner.policy)) {
    return world::Send(*question);
  }

  // (4) Explore: closed containers here, then unvisited rooms, then the
  // least recently visited room.
  for (const auto& s : obs.visible_objects) {
    if (s.kind == ObjectKind::Container && !s.open) return world::Open{s.id};
  }
  for (Room r : planner.room_order) {
    if (r != obs.room && !planner.last_visit.contains(r)) return world::GoToRoom{r};
  }
  std::optional<Room> oldest;
  for (Room r : planner.room_order) {
    if (r == obs.room) continue;
    if (!oldest || planner.last_visit.at(r) < planner.last_visit.at(*oldest)) oldest = r;
  }
  if (oldest) return world::GoToRoom{*oldest};
  return world::Wait{};
}

// ---------------------------------------------------------------------------
// Agent

AlignmentAgent::AlignmentAgent(AlignmentOptions options) : options_(options) {
  memory_.keeps_key_facts = options_.key_info;
}

std::string_view AlignmentAgent::kind() const {
  if (!options_.desire) return "famer_wo_desire";
  if (!options_.efficient_comm) return "famer_wo_ec";
  if (!options_.key_info) return "famer_wo_keyinfo";
  return "famer";
}

void AlignmentAgent::load(AgentMemory memory) {
  memory_ = std::move(memory);
  memory_.keeps_key_facts = options_.key_info;
  if (!options_.key_info) memory_.key_facts.clear();
}

void AlignmentAgent::begin_episode(const tasks::TaskSpec& spec, int episode) {
  spec.validate();
  spec_ = spec;
  episode_ = episode;
  if (options_.key_info) revalidate_facts(memory_);
  memory_.mental.tie_seed = derive_seed({options_.seed, static_cast<std::uint64_t>(episode), 0x7e5});
  reset_for_episode(memory_.mental, spec_);

  planner_ = PlannerState{};
  planner_.room_order.assign(kAllRooms.begin(), kAllRooms.end());
  Rng rng(derive_seed({options_.seed, static_cast<std::uint64_t>(episode), 0x900}));
  stable_shuffle(planner_.room_order, rng);
  planner_.comm.episode = episode;
  planner_.policy = options_.efficient_comm ? CommPolicy{true, options_.send_budget, options_.send_gap}
                                            : CommPolicy{false, 0, options_.unreflective_gap};
  planner_.use_confirmed_targets = options_.desire;
  pending_guess_.clear();
}

void AlignmentAgent::read_incoming(const Observation& obs) {
  if (!obs.incoming_message) return;
  const auto& text = *obs.incoming_message;
  memory_.dialogue_log.push_back({episode_, obs.step_count, lm::Role::User, text, lm::count_tokens(text)});
  if (options_.desire) {
    const auto reply = user::read_reply(text, pending_guess_, spec_);
    try {
      confirm_goals(reply, memory_.mental, spec_);
    } catch (const ContradictionError& e) {
      spdlog::warn("ignoring contradictory reply: {}", e.what());
      memory_.mental.hint_conflict = true;
    }
    infer_desires(memory_.mental, spec_);
    memory_.confirmed_by_episode[episode_] = memory_.mental.confirmed;
  }
  pending_guess_.clear();
}

Action AlignmentAgent::act(const Observation& obs) {
  if (episode_ == 0) throw ContractViolation("act called before begin_episode");
  planner_.comm.step = obs.step_count;
  planner_.last_visit[obs.room] = obs.step_count;
  read_incoming(obs);
  if (options_.key_info) {
    invalidate_missing(obs, memory_);
    extract_keyinfo(obs, spec_, episode_, memory_);
  }

  auto allowed = world::available_actions(obs);
  if (options_.desire) allowed = filter_actions(allowed, obs, memory_.mental, options_.filter_top_k);
  Action action = plan_next(obs, memory_.mental, memory_, spec_, planner_);
  const bool is_send = std::holds_alternative<world::Send>(action);
  if (!is_send && std::find(allowed.begin(), allowed.end(), action) == allowed.end()) {
    spdlog::debug("planner proposed a filtered action; waiting instead");
    action = world::Wait{};
  }

  const int step = obs.step_count + 1;
  if (const auto* send = std::get_if<world::Send>(&action)) {
    pending_guess_ = dialogue::mentioned(send->text(), spec_.potential_goals);
    ++planner_.comm.sends_this_episode;
    planner_.comm.last_send_step = obs.step_count;
    memory_.dialogue_log.push_back({episode_, step, lm::Role::Agent, send->text(), lm::count_tokens(send->text())});
  }
  memory_.action_log.push_back({episode_, step, world::describe(action, world::names_of(obs))});
  return action;
}

void AlignmentAgent::observe_outcome(const Action& action, const world::TransitionEvent& event, const Rational& delta) {
  (void)action;
  (void)delta;
  if (const auto* placed = event.placed(); placed != nullptr && placed->surface_class == spec_.target_surface) {
    planner_.placed.insert(placed->object_class);
  }
}

void AlignmentAgent::end_episode() {
  if (!options_.desire) return;
  const auto& confirmed = memory_.mental.confirmed;
  memory_.confirmed_by_episode[episode_] = confirmed;
  if (!confirmed.empty()) memory_.mental.past_episode_goals.push_back(confirmed);
}

nlohmann::json AlignmentAgent::memory_document() const { return persist_memory(memory_); }

}  // namespace homeassist::agent
