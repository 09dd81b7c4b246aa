#include <algorithm>
#include <map>

#include "homeassist/baselines.hpp"
#include "homeassist/errors.hpp"

namespace homeassist::baselines {

void SuccessMemory::record(int episode, std::string subgoal, bool achieved) {
  entries_.push_back({episode, std::move(subgoal), achieved});
}

double SuccessMemory::hit_rate(const std::string& subgoal) const {
  int hits = 0;
  int attempts = 0;
  for (const auto& e : entries_) {
    if (e.subgoal != subgoal) continue;
    ++attempts;
    hits += e.achieved ? 1 : 0;
  }
  return (hits + 1.0) / (attempts + 2.0);
}

std::string SuccessMemory::achieved_summary() const {
  std::map<int, std::vector<std::string>> by_episode;
  for (const auto& e : entries_) {
    if (e.achieved) by_episode[e.episode].push_back(e.subgoal);
  }
  if (by_episode.empty()) return "None";
  std::string out;
  for (const auto& [episode, names] : by_episode) {
    out += (out.empty() ? "" : "\n") + std::string("Episode ") + std::to_string(episode) + ": ";
    for (std::size_t i = 0; i < names.size(); ++i) out += (i ? ", " : "") + names[i];
  }
  return out;
}

nlohmann::json SuccessMemory::to_json() const {
  nlohmann::json arr = nlohmann::json::array();
  for (const auto& e : entries_) arr.push_back({{"episode", e.episode}, {"subgoal", e.subgoal}, {"achieved", e.achieved}});
  return {{"success_memory", arr}};
}

SuccessMemory SuccessMemory::from_json(const nlohmann::json& doc) {
  try {
    SuccessMemory m;
    for (const auto& e : doc.at("success_memory")) {
      m.record(e.at("episode").get<int>(), e.at("subgoal").get<std::string>(), e.at("achieved").get<bool>());
    }
    return m;
  } catch (const nlohmann::json::exception& e) {
    throw MemoryFormatError(std::string("success memory: ") + e.what());
  }
}

std::vector<std::string> sample_candidate(const SuccessMemory& memory, const std::vector<std::string>& pool,
                                          const std::set<std::string>& exclude, std::size_t count, Rng& rng) {
  std::vector<std::string> remaining;
  std::vector<double> weights;
  for (const auto& cls : pool) {
    if (exclude.contains(cls)) continue;
    remaining.push_back(cls);
    weights.push_back(memory.hit_rate(cls));
  }
  std::vector<std::string> out;
  while (out.size() < count && !remaining.empty()) {
    double total = 0.0;
    for (double w : weights) total += w;
    double r = uniform01(rng) * total;
    std::size_t pick = remaining.size() - 1;
    for (std::size_t i = 0; i < remaining.size(); ++i) {
      r -= weights[i];
      if (r < 0.0) {
        pick = i;
        break;
      }
    }
    out.push_back(remaining[pick]);
    remaining.erase(remaining.begin() + static_cast<std::ptrdiff_t>(pick));
    weights.erase(weights.begin() + static_cast<std::ptrdiff_t>(pick));
  }
  return out;
}

}  // namespace homeassist::baselines
