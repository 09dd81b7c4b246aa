#pragma once

// Sessions and episodes: wiring agent, world, scorer and user together,
// persisting transcripts, and summarising metrics.

#include <cstdint>
#include <memory>
#include <set>
#include <string>
#include <string_view>
#include <vector>

#include "homeassist/agent.hpp"
#include "homeassist/lm_client.hpp"
#include "homeassist/proxy_user.hpp"
#include "homeassist/rational.hpp"
#include "homeassist/tasks.hpp"
#include "json.hpp"

namespace homeassist::harness {

inline const std::vector<std::string> kAgentKinds{"famer",  "famer_wo_desire", "famer_wo_ec", "famer_wo_keyinfo",
                                                  "mhp",    "coela",           "proagent"};

struct Seeds {
  std::uint64_t scene = 0;
  std::uint64_t values = 0;
  std::uint64_t agent = 0;
  friend bool operator==(const Seeds&, const Seeds&) = default;
};

struct SessionConfig {
  std::string task = "snack-m";
  std::string task_file;  // optional JSON file with extra task definitions
  std::string agent = "famer";
  int episodes = 3;
  Seeds seeds;
  lm::BackendConfig backend;
  std::string user_mode = "scripted";  // scripted | chat
  std::string output_dir;              // empty: nothing written
  int sessions = 1;
  int workers = 1;
  int mhp_playouts = 64;
  int mhp_depth = 20;

  // Throws ConfigurationError.
  void validate() const;
  [[nodiscard]] tasks::TaskSpec resolve_task() const;
};

// Minimal TOML reader: tables, dotted table headers, strings, integers,
// floats, booleans and single-line arrays. Throws ConfigurationError.
nlohmann::json parse_toml(std::string_view text);
SessionConfig config_from_toml(std::string_view text);
SessionConfig load_config(const std::string& path);

struct EpisodeResult {
  int episode = 0;
  Rational score;
  int steps = 0;
  int comm_tokens = 0;
  bool success = false;
  bool aborted = false;
  std::string error;
  std::set<std::string> goals;             // ground truth, for evaluation only
  std::vector<nlohmann::json> transcript;  // JSONL records of this episode
};

struct SessionResult {
  std::string task;
  std::string agent;
  Seeds seeds;
  tasks::ValueProfile values;
  std::vector<EpisodeResult> episodes;
  std::vector<Rational> deltas;  // score change from the previous episode; first is 0
  nlohmann::json memory;         // final agent memory document (null if none)
};

nlohmann::json to_json(const EpisodeResult& result, bool with_transcript = true);
nlohmann::json to_json(const SessionResult& result, bool with_transcript = true);
SessionResult session_from_json(const nlohmann::json& doc);

// Agent for `config.agent`. Chat agents talk through `backend`, which must
// outlive the agent.
std::unique_ptr<agent::Agent> make_agent(const SessionConfig& config, lm::ChatBackend* backend);

// One bounded episode on a fresh scene. Agent exceptions abort the episode,
// which is then reported with partial metrics.
EpisodeResult run_episode(const SessionConfig& config, const tasks::TaskSpec& spec, agent::Agent& agent,
                          user::UserState& user_state, lm::ChatBackend* user_backend);

// Values once, goals per episode, one agent across all episodes. Writes
// session.json, transcript.jsonl and memory.json when output_dir is set.
SessionResult run_session(const SessionConfig& config);

// config.sessions sessions with every seed offset by the session index, run
// on config.workers threads. Results come back in session order.
std::vector<SessionResult> run_sessions(const SessionConfig& config);

// Directory name for a session's artefacts.
std::string session_dir_name(const SessionConfig& config);

// ---------------------------------------------------------------------------
// Transcripts

void write_transcript(const std::string& path, const SessionResult& result);
std::vector<nlohmann::json> read_transcript(const std::string& path);

struct ReplayedEpisode {
  int episode = 0;
  Rational score;
  int steps = 0;
  int comm_tokens = 0;
  bool matches_recorded = false;  // agrees with the episode_end record
};

// Re-scores placements and re-counts message tokens from the records alone.
std::vector<ReplayedEpisode> replay(const std::vector<nlohmann::json>& records);

// Human-readable turn log.
std::string render_turn_log(const std::vector<nlohmann::json>& records);

// ---------------------------------------------------------------------------
// Aggregation

struct SummaryRow {
  std::string task;
  std::string agent;
  int episode = 0;
  std::string metric;  // score | steps | comm_tokens
  double mean = 0.0;
  double stddev = 0.0;  // sample standard deviation, 0 for a single session
  int n = 0;
  friend bool operator==(const SummaryRow&, const SummaryRow&) = default;
};

std::vector<SummaryRow> aggregate(const std::vector<SessionResult>& results);
std::string to_csv(const std::vector<SummaryRow>& rows);

// Every session.json below `dir`.
std::vector<SessionResult> load_results(const std::string& dir);
// Same sessions with metrics recomputed from their transcript.jsonl files.
std::vector<SessionResult> load_replayed_results(const std::string& dir);

}  // namespace homeassist::harness
