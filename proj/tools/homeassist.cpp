// Command-line entry point: run sessions, aggregate results, replay
// transcripts and dump scenes.

#include <fstream>
#include <iostream>

#include <spdlog/spdlog.h>

#include "CLI11.hpp"
#include "homeassist/errors.hpp"
#include "homeassist/harness.hpp"
#include "homeassist/world.hpp"

using namespace homeassist;

namespace {

int run_command(harness::SessionConfig config) {
  config.validate();
  const auto results = harness::run_sessions(config);
  const auto rows = harness::aggregate(results);
  std::cout << harness::to_csv(rows);
  if (!config.output_dir.empty()) spdlog::info("wrote {} session(s) under {}", results.size(), config.output_dir);
  return 0;
}

int aggregate_command(const std::string& in, const std::string& csv, bool from_transcripts) {
  const auto results = from_transcripts ? harness::load_replayed_results(in) : harness::load_results(in);
  if (results.empty()) throw ConfigurationError("no session.json found under '" + in + "'");
  const auto text = harness::to_csv(harness::aggregate(results));
  if (csv.empty() || csv == "-") {
    std::cout << text;
  } else {
    std::ofstream out(csv);
    if (!out) throw ConfigurationError("cannot write '" + csv + "'");
    out << text;
  }
  return 0;
}

int replay_command(const std::string& path, bool check) {
  const auto records = harness::read_transcript(path);
  std::cout << harness::render_turn_log(records);
  if (!check) return 0;
  bool ok = true;
  for (const auto& e : harness::replay(records)) {
    std::cout << "episode " << e.episode << ": recomputed score " << e.score.str() << ", steps " << e.steps
              << ", tokens " << e.comm_tokens << (e.matches_recorded ? " (matches)" : " (MISMATCH)") << "\n";
    ok = ok && e.matches_recorded;
  }
  return ok ? 0 : 1;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Home-assistance simulation with a value-driven simulated user"};
  app.require_subcommand(1);
  std::string log_level = "warn";
  app.add_option("--log-level", log_level, "trace|debug|info|warn|error|off")->capture_default_str();

  harness::SessionConfig config;
  std::string config_path;
  std::uint64_t seed = 0;
  std::string backend_kind;
  std::string endpoint;
  std::string model;
  std::string script;
  auto* run = app.add_subcommand("run", "Run one or more sessions");
  run->add_option("--config", config_path, "TOML config; command-line flags override it");
  run->add_option("--task", config.task, "snack-m, snack-l, table-m, table-l or an id from --task-file");
  run->add_option("--task-file", config.task_file, "JSON file with extra task definitions");
  run->add_option("--agent", config.agent, "famer, famer_wo_desire, famer_wo_ec, famer_wo_keyinfo, mhp, coela, proagent");
  run->add_option("--episodes", config.episodes, "Episodes per session");
  run->add_option("--seed", seed, "Sets the scene, values and agent seeds");
  run->add_option("--scene-seed", config.seeds.scene);
  run->add_option("--values-seed", config.seeds.values);
  run->add_option("--agent-seed", config.seeds.agent);
  run->add_option("--backend", backend_kind, "mock or http");
  run->add_option("--endpoint", endpoint, "Chat completions URL for the http backend");
  run->add_option("--model", model, "Model name for the http backend");
  run->add_option("--script", script, "Canned responses for the mock backend (JSON)");
  run->add_option("--user", config.user_mode, "scripted or chat");
  run->add_option("--sessions", config.sessions, "Number of sessions (seeds offset by session index)");
  run->add_option("--workers", config.workers, "Sessions run in parallel");
  run->add_option("--playouts", config.mhp_playouts, "MHP rollouts per decision");
  run->add_option("--depth", config.mhp_depth, "MHP rollout depth");
  run->add_option("--out", config.output_dir, "Output directory");

  std::string in_dir;
  std::string csv;
  bool from_transcripts = false;
  auto* agg = app.add_subcommand("aggregate", "Summarise session results as CSV");
  agg->add_option("--in", in_dir, "Directory searched for session.json files")->required();
  agg->add_option("--csv", csv, "Output CSV file (stdout when omitted)");
  agg->add_flag("--from-transcripts", from_transcripts, "Recompute metrics from transcript.jsonl");

  std::string transcript;
  bool check = false;
  auto* rep = app.add_subcommand("replay", "Pretty-print a transcript");
  rep->add_option("--transcript", transcript, "transcript.jsonl")->required();
  rep->add_flag("--check", check, "Recompute metrics and compare with the recorded ones");

  std::string scene_task = "snack-m";
  std::uint64_t scene_seed = 0;
  auto* scene = app.add_subcommand("scene", "Print a scene as JSON");
  scene->add_option("--task", scene_task);
  scene->add_option("--seed", scene_seed);

  CLI11_PARSE(app, argc, argv);
  spdlog::set_level(spdlog::level::from_str(log_level));

  try {
    if (run->parsed()) {
      harness::SessionConfig merged = config;
      if (!config_path.empty()) {
        // Start from the file and re-apply the flags that were given.
        merged = harness::load_config(config_path);
        if (run->count("--task")) merged.task = config.task;
        if (run->count("--task-file")) merged.task_file = config.task_file;
        if (run->count("--agent")) merged.agent = config.agent;
        if (run->count("--episodes")) merged.episodes = config.episodes;
        if (run->count("--user")) merged.user_mode = config.user_mode;
        if (run->count("--sessions")) merged.sessions = config.sessions;
        if (run->count("--workers")) merged.workers = config.workers;
        if (run->count("--playouts")) merged.mhp_playouts = config.mhp_playouts;
        if (run->count("--depth")) merged.mhp_depth = config.mhp_depth;
        if (run->count("--out")) merged.output_dir = config.output_dir;
        if (run->count("--scene-seed")) merged.seeds.scene = config.seeds.scene;
        if (run->count("--values-seed")) merged.seeds.values = config.seeds.values;
        if (run->count("--agent-seed")) merged.seeds.agent = config.seeds.agent;
      }
      if (run->count("--seed")) merged.seeds = {seed, seed, seed};
      if (run->count("--backend")) merged.backend.kind = backend_kind;
      if (run->count("--endpoint")) merged.backend.endpoint = endpoint;
      if (run->count("--model")) merged.backend.model = model;
      if (run->count("--script")) merged.backend.script_path = script;
      return run_command(merged);
    }
    if (agg->parsed()) return aggregate_command(in_dir, csv, from_transcripts);
    if (rep->parsed()) return replay_command(transcript, check);
    if (scene->parsed()) {
      std::cout << world::scene_to_json(world::build_scene(tasks::builtin_task(scene_task), scene_seed)).dump(2) << "\n";
      return 0;
    }
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
  return 0;
}
