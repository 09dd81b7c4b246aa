#pragma once

// Cross-episode memory of the alignment agent: object locations learned from
// observations, the mental model, and the dialogue/action logs.

#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "homeassist/lm_client.hpp"
#include "homeassist/mental_model.hpp"
#include "homeassist/world.hpp"
#include "json.hpp"

namespace homeassist::agent {

inline constexpr std::string_view kOpenSpace = "open space";
inline constexpr std::string_view kMemoryFormat = "homeassist.agent-memory/1";

// "juice in fridge in kitchen".
struct KeyFact {
  std::string object;
  std::string container;  // kOpenSpace when lying in the room
  Room room = Room::Kitchen;
  int episode = 0;
  bool valid = true;
  friend bool operator==(const KeyFact&, const KeyFact&) = default;
};
std::string describe(const KeyFact& fact);

struct DialogueEntry {
  int episode = 0;
  int step = 0;
  lm::Role role = lm::Role::Agent;
  std::string content;
  int tokens = 0;
  friend bool operator==(const DialogueEntry&, const DialogueEntry&) = default;
};

struct ActionEntry {
  int episode = 0;
  int step = 0;
  std::string text;
  friend bool operator==(const ActionEntry&, const ActionEntry&) = default;
};

struct AgentMemory {
  std::vector<KeyFact> key_facts;
  MentalModel mental;
  std::vector<DialogueEntry> dialogue_log;
  std::vector<ActionEntry> action_log;
  std::map<int, std::set<std::string>> confirmed_by_episode;
  bool keeps_key_facts = true;  // false for the w/o KeyInfo ablation

  [[nodiscard]] const KeyFact* fact_for(const std::string& object) const;
  friend bool operator==(const AgentMemory&, const AgentMemory&) = default;
};

// Records where goal-relevant objects are: potential goals still carried by a
// live hypothesis or confirmed. Objects on surfaces or in hand are skipped.
// Returns true when memory changed.
bool extract_keyinfo(const world::Observation& obs, const tasks::TaskSpec& spec, int episode,
                     AgentMemory& memory);

// Marks facts stale whose location is in view without the object.
void invalidate_missing(const world::Observation& obs, AgentMemory& memory);

// Facts from earlier episodes become usable again when the scene resets.
void revalidate_facts(AgentMemory& memory);

nlohmann::json persist_memory(const AgentMemory& memory);
// Throws MemoryFormatError.
AgentMemory load_memory(const nlohmann::json& doc);

}  // namespace homeassist::agent
