#pragma once

// Shared fixtures for the unit tests.

#include <filesystem>
#include <random>
#include <string>

#include "homeassist/agent_memory.hpp"
#include "homeassist/tasks.hpp"
#include "homeassist/world.hpp"

namespace testing_support {

inline homeassist::tasks::TaskSpec snack_m() { return homeassist::tasks::builtin_task("snack-m"); }
inline homeassist::tasks::TaskSpec snack_l() { return homeassist::tasks::builtin_task("snack-l"); }
inline homeassist::tasks::TaskSpec table_m() { return homeassist::tasks::builtin_task("table-m"); }

// Fresh directory under the system temp dir, removed on destruction.
class TempDir {
 public:
  explicit TempDir(const std::string& tag) {
    std::random_device rd;
    path_ = std::filesystem::temp_directory_path() / ("homeassist-" + tag + "-" + std::to_string(rd()));
    std::filesystem::create_directories(path_);
  }
  ~TempDir() {
    std::error_code ec;
    std::filesystem::remove_all(path_, ec);
  }
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;
  [[nodiscard]] const std::filesystem::path& path() const { return path_; }

 private:
  std::filesystem::path path_;
};

inline homeassist::world::ObjectId id_of(const homeassist::world::SceneState& s, const std::string& cls) {
  return *s.find(cls);
}

// Arbitrary but well-formed agent memory for round-trip laws.
inline homeassist::agent::AgentMemory random_memory(std::mt19937_64& rng) {
  using namespace homeassist;
  const auto spec = snack_m();
  auto pick = [&](const std::vector<std::string>& v) { return v[rng() % v.size()]; };
  auto pick_set = [&](std::size_t max) {
    std::set<std::string> s;
    const auto n = rng() % (max + 1);
    for (std::size_t i = 0; i < n; ++i) s.insert(pick(spec.potential_goals));
    return s;
  };
  agent::AgentMemory m;
  m.keeps_key_facts = rng() % 4 != 0;
  if (m.keeps_key_facts) {
    const std::vector<std::string> holders{std::string(agent::kOpenSpace), "fridge", "cabinet", "nightstand"};
    for (auto n = rng() % 5; n > 0; --n) {
      m.key_facts.push_back({pick(spec.potential_goals), pick(holders), kAllRooms[rng() % 4],
                             static_cast<int>(rng() % 3) + 1, rng() % 2 == 0});
    }
  }
  m.mental.confirmed = pick_set(2);
  m.mental.denied = pick_set(3);
  for (const auto& c : m.mental.confirmed) m.mental.confirmed_turn[c] = static_cast<int>(rng() % 5);
  for (auto n = rng() % 4; n > 0; --n) m.mental.hints.push_back({pick({"sweet", "crunchy", "rich"}), static_cast<int>(rng() % 5)});
  for (auto n = rng() % 6; n > 0; --n) {
    auto s = pick_set(3);
    m.mental.hypotheses.push_back({{s.begin(), s.end()}, static_cast<double>(rng() % 1000003) / 7919.0});
  }
  for (const auto& d : spec.value_dims) {
    if (rng() % 2) m.mental.inferred_values[d.name] = static_cast<tasks::ValueLevel>(rng() % 3);
  }
  for (auto n = rng() % 3; n > 0; --n) m.mental.past_episode_goals.push_back(pick_set(2));
  m.mental.turn = static_cast<int>(rng() % 9);
  m.mental.hint_conflict = rng() % 2 == 0;
  m.mental.tie_seed = rng();
  for (auto n = rng() % 5; n > 0; --n) {
    const std::string text = rng() % 2 ? "Is " + pick(spec.potential_goals) + " what you want?" : "Not \"that\", sorry.";
    m.dialogue_log.push_back({static_cast<int>(rng() % 3) + 1, static_cast<int>(rng() % 200),
                              rng() % 2 ? lm::Role::Agent : lm::Role::User, text, static_cast<int>(rng() % 20)});
  }
  for (auto n = rng() % 5; n > 0; --n) {
    m.action_log.push_back({static_cast<int>(rng() % 3) + 1, static_cast<int>(rng() % 200), "[wait]"});
  }
  for (auto n = rng() % 3; n > 0; --n) m.confirmed_by_episode[static_cast<int>(rng() % 3) + 1] = pick_set(2);
  return m;
}

}  // namespace testing_support
