#include "homeassist/agent_memory.hpp"

#include <algorithm>

#include "homeassist/errors.hpp"

namespace homeassist::agent {

using world::LocationKind;
using world::ObjectKind;

std::string describe(const KeyFact& fact) {
  const std::string where = fact.container == kOpenSpace ? "open space" : fact.container;
  return fact.object + " in " + where + " in " + std::string(to_string(fact.room));
}

const KeyFact* AgentMemory::fact_for(const std::string& object) const {
  for (const auto& f : key_facts) {
    if (f.object == object) return &f;
  }
  return nullptr;
}

namespace {

const world::SeenObject* seen(const world::Observation& obs, world::ObjectId id) {
  for (const auto& s : obs.visible_objects) {
    if (s.id == id) return &s;
  }
  return nullptr;
}

const world::SeenObject* seen(const world::Observation& obs, const std::string& cls) {
  for (const auto& s : obs.visible_objects) {
    if (s.class_name == cls) return &s;
  }
  return nullptr;
}

bool holding(const world::Observation& obs, const std::string& cls) {
  return std::any_of(obs.held.begin(), obs.held.end(), [&](const auto& s) { return s.class_name == cls; });
}

}  // namespace

bool extract_keyinfo(const world::Observation& obs, const tasks::TaskSpec& spec, int episode, AgentMemory& memory) {
  if (!memory.keeps_key_facts) return false;
  std::set<std::string> relevant = memory.mental.confirmed;
  for (const auto& h : memory.mental.hypotheses) {
    if (h.weight > 0.0) relevant.insert(h.members.begin(), h.members.end());
  }
  bool changed = false;
  for (const auto& s : obs.visible_objects) {
    if (s.kind != ObjectKind::Graspable || !spec.is_potential_goal(s.class_name)) continue;
    if (!relevant.contains(s.class_name)) continue;
    std::string container;
    if (s.location.kind == LocationKind::InRoom) {
      container = kOpenSpace;
    } else if (s.location.kind == LocationKind::Inside) {
      const auto* holder = seen(obs, s.location.holder);
      if (holder == nullptr) continue;
      container = holder->class_name;
    } else {
      continue;
    }
    auto it = std::find_if(memory.key_facts.begin(), memory.key_facts.end(),
                           [&](const KeyFact& f) { return f.object == s.class_name; });
    if (it != memory.key_facts.end()) {
      if (it->container == container && it->room == obs.room) {
        if (!it->valid) {
          it->valid = true;
          changed = true;
        }
        continue;
      }
      memory.key_facts.erase(it);
    }
    memory.key_facts.push_back({s.class_name, container, obs.room, episode, true});
    changed = true;
  }
  return changed;
}

void invalidate_missing(const world::Observation& obs, AgentMemory& memory) {
  for (auto& f : memory.key_facts) {
    if (!f.valid || f.room != obs.room || holding(obs, f.object)) continue;
    const auto* obj = seen(obs, f.object);
    if (f.container == kOpenSpace) {
      if (obj == nullptr || obj->location.kind != LocationKind::InRoom) f.valid = false;
      continue;
    }
    const auto* box = seen(obs, f.container);
    if (box == nullptr) {
      f.valid = false;
    } else if (box->open) {
      if (obj == nullptr || obj->location.kind != LocationKind::Inside || !(obj->location.holder == box->id)) {
        f.valid = false;
      }
    }
  }
}

void revalidate_facts(AgentMemory& memory) {
  for (auto& f : memory.key_facts) f.valid = true;
}

// ---------------------------------------------------------------------------
// Persistence

namespace {

std::vector<std::string> dialogue_summary(const AgentMemory& memory) {
  std::map<int, int> questions;
  for (const auto& d : memory.dialogue_log) {
    if (d.role == lm::Role::Agent) ++questions[d.episode];
  }
  std::set<int> episodes;
  for (const auto& [e, _] : questions) episodes.insert(e);
  for (const auto& [e, _] : memory.confirmed_by_episode) episodes.insert(e);
  std::vector<std::string> out;
  for (int e : episodes) {
    std::string line = "episode " + std::to_string(e) + ": " + std::to_string(questions[e]) + " question(s)";
    auto it = memory.confirmed_by_episode.find(e);
    if (it != memory.confirmed_by_episode.end() && !it->second.empty()) {
      std::string names;
      for (const auto& c : it->second) names += (names.empty() ? "" : ", ") + c;
      line += ", confirmed " + names;
    }
    out.push_back(line);
  }
  return out;
}

}  // namespace

nlohmann::json persist_memory(const AgentMemory& memory) {
  nlohmann::json doc;
  doc["format"] = kMemoryFormat;
  if (memory.keeps_key_facts) {
    nlohmann::json facts = nlohmann::json::array();
    for (const auto& f : memory.key_facts) {
      facts.push_back({{"object", f.object},
                       {"container", f.container},
                       {"room", to_string(f.room)},
                       {"episode", f.episode},
                       {"valid", f.valid},
                       {"text", describe(f)}});
    }
    doc["key_facts"] = facts;
  }
  nlohmann::json confirmed = nlohmann::json::object();
  for (const auto& [e, names] : memory.confirmed_by_episode) confirmed[std::to_string(e)] = names;
  doc["confirmed_by_episode"] = confirmed;
  nlohmann::json values = nlohmann::json::object();
  for (const auto& [dim, level] : memory.mental.inferred_values) values[dim] = tasks::to_string(level);
  doc["inferred_values"] = values;
  doc["past_episode_goals"] = memory.mental.past_episode_goals;
  doc["dialogue_summary"] = dialogue_summary(memory);
  doc["mental_model"] = to_json(memory.mental);
  nlohmann::json dialogue = nlohmann::json::array();
  for (const auto& d : memory.dialogue_log) {
    dialogue.push_back({{"episode", d.episode},
                        {"step", d.step},
                        {"role", lm::to_string(d.role)},
                        {"content", d.content},
                        {"tokens", d.tokens}});
  }
  doc["dialogue_log"] = dialogue;
  nlohmann::json actions = nlohmann::json::array();
  for (const auto& a : memory.action_log) {
    actions.push_back({{"episode", a.episode}, {"step", a.step}, {"action", a.text}});
  }
  doc["action_log"] = actions;
  return doc;
}

AgentMemory load_memory(const nlohmann::json& doc) {
  try {
    if (!doc.is_object() || doc.value("format", "") != kMemoryFormat) {
      throw MemoryFormatError("agent memory: missing or unknown format tag");
    }
    AgentMemory memory;
    memory.keeps_key_facts = doc.contains("key_facts");
    if (memory.keeps_key_facts) {
      for (const auto& f : doc.at("key_facts")) {
        const auto room = parse_room(f.at("room").get<std::string>());
        if (!room) throw MemoryFormatError("agent memory: unknown room in key fact");
        memory.key_facts.push_back({f.at("object").get<std::string>(), f.at("container").get<std::string>(), *room,
                                    f.at("episode").get<int>(), f.at("valid").get<bool>()});
      }
    }
    for (const auto& [e, names] : doc.at("confirmed_by_episode").items()) {
      memory.confirmed_by_episode[std::stoi(e)] = names.get<std::set<std::string>>();
    }
    memory.mental = mental_from_json(doc.at("mental_model"));
    for (const auto& d : doc.at("dialogue_log")) {
      memory.dialogue_log.push_back({d.at("episode").get<int>(), d.at("step").get<int>(),
                                     lm::parse_role(d.at("role").get<std::string>()),
                                     d.at("content").get<std::string>(), d.at("tokens").get<int>()});
    }
    for (const auto& a : doc.at("action_log")) {
      memory.action_log.push_back({a.at("episode").get<int>(), a.at("step").get<int>(), a.at("action").get<std::string>()});
    }
    return memory;
  } catch (const MemoryFormatError&) {
    throw;
  } catch (const std::exception& e) {
    throw MemoryFormatError(std::string("agent memory: ") + e.what());
  }
}

}  // namespace homeassist::agent
