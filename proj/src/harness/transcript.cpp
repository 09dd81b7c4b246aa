#include <fstream>
#include <map>
#include <sstream>

#include "homeassist/errors.hpp"
#include "homeassist/harness.hpp"

namespace homeassist::harness {

void write_transcript(const std::string& path, const SessionResult& result) {
  std::ofstream out(path);
  if (!out) throw ConfigurationError("cannot write transcript '" + path + "'");
  out << nlohmann::json{{"type", "session_start"},
                        {"task", result.task},
                        {"agent", result.agent},
                        {"seeds", {{"scene", result.seeds.scene}, {"values", result.seeds.values}, {"agent", result.seeds.agent}}},
                        {"values", tasks::to_json(result.values)}}
             .dump()
      << '\n';
  for (const auto& e : result.episodes) {
    for (const auto& rec : e.transcript) out << rec.dump() << '\n';
  }
}

std::vector<nlohmann::json> read_transcript(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigurationError("cannot open transcript '" + path + "'");
  std::vector<nlohmann::json> records;
  std::string line;
  int n = 0;
  while (std::getline(in, line)) {
    ++n;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    try {
      records.push_back(nlohmann::json::parse(line));
    } catch (const nlohmann::json::exception& e) {
      throw ConfigurationError(path + ":" + std::to_string(n) + ": " + e.what());
    }
  }
  return records;
}

std::vector<ReplayedEpisode> replay(const std::vector<nlohmann::json>& records) {
  std::vector<ReplayedEpisode> out;
  tasks::TaskSpec spec;
  tasks::GoalSet goal;
  ReplayedEpisode current;
  bool open = false;
  for (const auto& rec : records) {
    const auto type = rec.at("type").get<std::string>();
    if (type == "episode_start") {
      spec = tasks::TaskSpec{};
      spec.id = rec.at("task").get<std::string>();
      spec.goal_count = rec.at("goal_count").get<int>();
      spec.target_surface = rec.at("target_surface").get<std::string>();
      goal = tasks::GoalSet{};
      goal.goals = rec.at("goals").get<std::set<std::string>>();
      current = ReplayedEpisode{};
      current.episode = rec.at("episode").get<int>();
      open = true;
    } else if (type == "step" && open) {
      current.steps = std::max(current.steps, rec.at("step").get<int>());
      if (rec.contains("placed")) {
        const auto& p = rec.at("placed");
        tasks::on_placement(goal, spec, p.at("object_class").get<std::string>(), p.at("surface_class").get<std::string>());
      }
    } else if (type == "message" && open) {
      current.comm_tokens += lm::count_tokens(rec.at("content").get<std::string>());
    } else if (type == "episode_end") {
      if (!open) current.episode = rec.at("episode").get<int>();
      current.score = open ? tasks::episode_score(goal, spec) : Rational(0);
      current.matches_recorded = Rational::parse(rec.at("score").get<std::string>()) == current.score &&
                                 rec.at("steps").get<int>() == current.steps &&
                                 rec.at("comm_tokens").get<int>() == current.comm_tokens;
      out.push_back(current);
      open = false;
    }
  }
  return out;
}

std::string render_turn_log(const std::vector<nlohmann::json>& records) {
  std::ostringstream out;
  for (const auto& rec : records) {
    const auto type = rec.at("type").get<std::string>();
    if (type == "session_start") {
      out << "Session: " << rec.at("task").get<std::string>() << " / " << rec.at("agent").get<std::string>() << "\n";
      out << "Values:";
      for (const auto& [dim, level] : rec.at("values").items()) out << " " << dim << "=" << level.get<std::string>();
      out << "\n";
    } else if (type == "episode_start") {
      out << "\n=== Episode " << rec.at("episode").get<int>() << " (goal:";
      for (const auto& g : rec.at("goals")) out << " " << g.get<std::string>();
      out << ")\n";
    } else if (type == "step") {
      out << "[" << rec.at("step").get<int>() << "] Alice: " << rec.at("action").get<std::string>();
      const auto delta = rec.at("delta").get<std::string>();
      if (delta != "0") out << "  (score " << (delta.front() == '-' ? "" : "+") << delta << ")";
      if (rec.at("event").get<std::string>().starts_with("Rejected")) out << "  <" << rec.at("event").get<std::string>() << ">";
      out << "\n";
    } else if (type == "message") {
      const bool agent = rec.at("role").get<std::string>() == "agent";
      out << "    " << (agent ? "Alice" : "Bob") << " says: \"" << rec.at("content").get<std::string>() << "\"\n";
    } else if (type == "episode_end") {
      out << "--- score " << rec.at("score").get<std::string>() << ", steps " << rec.at("steps").get<int>()
          << ", communication " << rec.at("comm_tokens").get<int>() << " tokens"
          << (rec.at("success").get<bool>() ? ", success" : "")
          << (rec.at("aborted").get<bool>() ? ", aborted: " + rec.at("error").get<std::string>() : "") << "\n";
    }
  }
  return out.str();
}

}  // namespace homeassist::harness
