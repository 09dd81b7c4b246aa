#pragma once

// What the harness needs from an assistant agent.

#include <string>
#include <string_view>

#include "homeassist/rational.hpp"
#include "homeassist/tasks.hpp"
#include "homeassist/world.hpp"
#include "json.hpp"

namespace homeassist::agent {

class Agent {
 public:
  virtual ~Agent() = default;

  [[nodiscard]] virtual std::string_view kind() const = 0;
  // True when the agent can emit Send.
  [[nodiscard]] virtual bool communicates() const = 0;

  virtual void begin_episode(const tasks::TaskSpec& spec, int episode) = 0;
  virtual world::Action act(const world::Observation& obs) = 0;
  // Result of the last action; `delta` is the score change it caused.
  virtual void observe_outcome(const world::Action& action, const world::TransitionEvent& event,
                               const Rational& delta) {
    (void)action;
    (void)event;
    (void)delta;
  }
  virtual void end_episode() {}

  // Planners that roll out on the true transition function get the current
  // state before every act(). Others ignore it.
  virtual void sync_world_model(const world::SceneState& state) { (void)state; }

  // Persistable cross-episode memory; null for memoryless agents.
  [[nodiscard]] virtual nlohmann::json memory_document() const { return nullptr; }
};

}  // namespace homeassist::agent
