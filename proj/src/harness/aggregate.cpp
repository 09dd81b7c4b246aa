#include <cmath>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <map>
#include <sstream>
#include <tuple>

#include "homeassist/errors.hpp"
#include "homeassist/harness.hpp"

namespace homeassist::harness {

namespace fs = std::filesystem;

std::vector<SummaryRow> aggregate(const std::vector<SessionResult>& results) {
  using Key = std::tuple<std::string, std::string, int>;
  std::map<Key, std::map<std::string, std::vector<double>>> samples;
  for (const auto& s : results) {
    for (const auto& e : s.episodes) {
      auto& m = samples[{s.task, s.agent, e.episode}];
      m["score"].push_back(e.score.to_double());
      m["steps"].push_back(e.steps);
      m["comm_tokens"].push_back(e.comm_tokens);
    }
  }
  std::vector<SummaryRow> rows;
  for (const auto& [key, metrics] : samples) {
    for (const char* metric : {"score", "steps", "comm_tokens"}) {
      const auto& xs = metrics.at(metric);
      const auto n = static_cast<double>(xs.size());
      double mean = 0.0;
      for (double x : xs) mean += x;
      mean /= n;
      double var = 0.0;
      for (double x : xs) var += (x - mean) * (x - mean);
      const double sd = xs.size() > 1 ? std::sqrt(var / (n - 1.0)) : 0.0;
      rows.push_back({std::get<0>(key), std::get<1>(key), std::get<2>(key), metric, mean, sd, static_cast<int>(xs.size())});
    }
  }
  return rows;
}

std::string to_csv(const std::vector<SummaryRow>& rows) {
  std::ostringstream out;
  out << "task,agent,episode,metric,mean,std,n\n";
  out << std::setprecision(10);
  for (const auto& r : rows) {
    out << r.task << ',' << r.agent << ',' << r.episode << ',' << r.metric << ',' << r.mean << ',' << r.stddev << ','
        << r.n << '\n';
  }
  return out.str();
}

namespace {

std::vector<fs::path> session_files(const std::string& dir) {
  if (!fs::is_directory(dir)) throw ConfigurationError("not a directory: '" + dir + "'");
  std::vector<fs::path> files;
  for (const auto& entry : fs::recursive_directory_iterator(dir)) {
    if (entry.is_regular_file() && entry.path().filename() == "session.json") files.push_back(entry.path());
  }
  std::sort(files.begin(), files.end());
  return files;
}

SessionResult read_session(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigurationError("cannot open '" + path.string() + "'");
  try {
    return session_from_json(nlohmann::json::parse(in));
  } catch (const nlohmann::json::exception& e) {
    throw ConfigurationError(path.string() + ": " + e.what());
  }
}

}  // namespace

std::vector<SessionResult> load_results(const std::string& dir) {
  std::vector<SessionResult> out;
  for (const auto& f : session_files(dir)) out.push_back(read_session(f));
  return out;
}

std::vector<SessionResult> load_replayed_results(const std::string& dir) {
  std::vector<SessionResult> out;
  for (const auto& f : session_files(dir)) {
    SessionResult s = read_session(f);
    const auto replayed = replay(read_transcript((f.parent_path() / "transcript.jsonl").string()));
    if (replayed.size() != s.episodes.size()) {
      throw ConfigurationError(f.string() + ": transcript has a different number of episodes");
    }
    for (std::size_t i = 0; i < replayed.size(); ++i) {
      s.episodes[i].score = replayed[i].score;
      s.episodes[i].steps = replayed[i].steps;
      s.episodes[i].comm_tokens = replayed[i].comm_tokens;
    }
    out.push_back(std::move(s));
  }
  return out;
}

}  // namespace homeassist::harness
