#include <filesystem>
#include <fstream>
#include <mutex>
#include <thread>

#include <spdlog/spdlog.h>

#include "homeassist/alignment_agent.hpp"
#include "homeassist/baselines.hpp"
#include "homeassist/errors.hpp"
#include "homeassist/harness.hpp"
#include "homeassist/rng.hpp"
#include "homeassist/world.hpp"

namespace homeassist::harness {

namespace fs = std::filesystem;

std::unique_ptr<agent::Agent> make_agent(const SessionConfig& config, lm::ChatBackend* backend) {
  const auto& kind = config.agent;
  if (kind.starts_with("famer")) {
    return std::make_unique<agent::AlignmentAgent>(agent::alignment_variant(kind, config.seeds.agent));
  }
  if (kind == "mhp") {
    baselines::MhpOptions o;
    o.playouts = config.mhp_playouts;
    o.depth = config.mhp_depth;
    o.seed = config.seeds.agent;
    return std::make_unique<baselines::MhpAgent>(o);
  }
  if (backend == nullptr) throw ConfigurationError("agent '" + kind + "' needs a chat backend");
  if (kind == "coela") return std::make_unique<baselines::NaiveChatAgent>(*backend);
  if (kind == "proagent") return std::make_unique<baselines::ProAgent>(*backend);
  throw ConfigurationError("unknown agent '" + kind + "'");
}

std::string session_dir_name(const SessionConfig& config) {
  return config.task + "-" + config.agent + "-seed" + std::to_string(config.seeds.scene);
}

EpisodeResult run_episode(const SessionConfig& config, const tasks::TaskSpec& spec, agent::Agent& agent,
                          user::UserState& user_state, lm::ChatBackend* user_backend) {
  EpisodeResult result;
  const int episode = user_state.episode_index;
  result.episode = episode;
  result.goals = user_state.goal.goals;

  // The layout depends on the scene seed only, so every episode of a session
  // starts from the same household.
  auto state = world::build_scene(spec, config.seeds.scene);
  auto& records = result.transcript;
  records.push_back({{"type", "episode_start"},
                     {"episode", episode},
                     {"task", spec.id},
                     {"goal_count", spec.goal_count},
                     {"target_surface", spec.target_surface},
                     {"max_steps", spec.max_steps},
                     {"goals", user_state.goal.goals},
                     {"values", tasks::to_json(user_state.values)}});

  auto record_message = [&](lm::Role role, const std::string& text, int step) {
    const int tokens = lm::count_tokens(text);
    result.comm_tokens += tokens;
    records.push_back({{"type", "message"},
                       {"episode", episode},
                       {"step", step},
                       {"role", lm::to_string(role)},
                       {"content", text},
                       {"tokens", tokens}});
  };

  std::optional<std::string> pending_reply;
  try {
    agent.begin_episode(spec, episode);
    while (state.step_count() < spec.max_steps && !user_state.goal.complete()) {
      auto obs = world::observe(state);
      obs.incoming_message = std::exchange(pending_reply, std::nullopt);
      agent.sync_world_model(state);
      const auto action = agent.act(obs);
      const auto names = world::names_of(state);
      const std::string action_text = world::describe(action, names);
      const auto event = world::apply_action_in_place(state, action);
      const int step = state.step_count();

      Rational delta;
      nlohmann::json rec{{"type", "step"},
                         {"episode", episode},
                         {"step", step},
                         {"action", action_text},
                         {"event", world::describe(event)}};
      if (const auto* placed = event.placed()) {
        delta = tasks::on_placement(user_state.goal, spec, event);
        rec["placed"] = {{"object_class", placed->object_class}, {"surface_class", placed->surface_class}};
      }
      rec["delta"] = delta.str();
      records.push_back(std::move(rec));
      user_state.agent_action_log.push_back(action_text);

      if (const auto* sent = std::get_if<world::MessageSent>(&event.value)) {
        record_message(lm::Role::Agent, sent->text, step);
        user_state.progress = user::progress_note(user_state);
        const auto seed = derive_seed({config.seeds.values, static_cast<std::uint64_t>(episode), 0x5e9d});
        const auto reply = user::respond(user_state, spec, sent->text, user_backend, seed);
        record_message(lm::Role::User, reply.text, step);
        pending_reply = reply.text;
      }
      agent.observe_outcome(action, event, delta);
    }
    agent.end_episode();
  } catch (const std::exception& e) {
    spdlog::error("episode {} aborted: {}", episode, e.what());
    result.aborted = true;
    result.error = e.what();
  }

  result.steps = state.step_count();
  result.score = tasks::episode_score(user_state.goal, spec);
  result.success = !result.aborted && user_state.goal.complete();
  records.push_back({{"type", "episode_end"},
                     {"episode", episode},
                     {"score", result.score.str()},
                     {"steps", result.steps},
                     {"comm_tokens", result.comm_tokens},
                     {"success", result.success},
                     {"aborted", result.aborted},
                     {"error", result.error}});
  return result;
}

namespace {

void write_json(const fs::path& path, const nlohmann::json& doc) {
  std::ofstream out(path);
  if (!out) throw ConfigurationError("cannot write '" + path.string() + "'");
  out << doc.dump(2) << '\n';
}

}  // namespace

SessionResult run_session(const SessionConfig& config) {
  config.validate();
  const auto spec = config.resolve_task();

  std::unique_ptr<lm::ChatBackend> agent_backend;
  if (config.agent == "coela" || config.agent == "proagent") {
    auto b = config.backend;
    b.seed = derive_seed({config.backend.seed, config.seeds.agent, 0xa6e7});
    agent_backend = lm::make_backend(b);
  }
  std::unique_ptr<lm::ChatBackend> user_backend;
  if (config.user_mode == "chat") {
    auto b = config.backend;
    b.seed = derive_seed({config.backend.seed, config.seeds.values, 0x05e2});
    user_backend = lm::make_backend(b);
  }
  auto agent = make_agent(config, agent_backend.get());

  fs::path dir;
  if (!config.output_dir.empty()) {
    dir = fs::path(config.output_dir) / session_dir_name(config);
    fs::create_directories(dir);
  }

  SessionResult result;
  result.task = spec.id;
  result.agent = config.agent;
  result.seeds = config.seeds;
  result.values = tasks::sample_values(spec, config.seeds.values);

  for (int episode = 1; episode <= config.episodes; ++episode) {
    user::UserState user_state;
    user_state.values = result.values;
    user_state.episode_index = episode;
    EpisodeResult er;
    try {
      const auto goal_seed = derive_seed({config.seeds.values, static_cast<std::uint64_t>(episode), 0x60a1});
      user_state.goal = user::generate_goal_set(spec, result.values, user_backend.get(), goal_seed);
      er = run_episode(config, spec, *agent, user_state, user_backend.get());
    } catch (const std::exception& e) {
      spdlog::error("episode {} could not start: {}", episode, e.what());
      er.episode = episode;
      er.aborted = true;
      er.error = e.what();
      er.transcript.push_back({{"type", "episode_end"},
                               {"episode", episode},
                               {"score", er.score.str()},
                               {"steps", 0},
                               {"comm_tokens", 0},
                               {"success", false},
                               {"aborted", true},
                               {"error", er.error}});
    }
    result.deltas.push_back(result.episodes.empty() ? Rational(0) : er.score - result.episodes.back().score);
    result.episodes.push_back(std::move(er));
    if (!dir.empty() && !agent->memory_document().is_null()) write_json(dir / "memory.json", agent->memory_document());
  }
  result.memory = agent->memory_document();

  if (!dir.empty()) {
    write_json(dir / "session.json", to_json(result, false));
    write_transcript((dir / "transcript.jsonl").string(), result);
  }
  return result;
}

std::vector<SessionResult> run_sessions(const SessionConfig& config) {
  config.validate();
  const auto count = static_cast<std::size_t>(config.sessions);
  std::vector<SessionConfig> configs;
  for (std::size_t k = 0; k < count; ++k) {
    auto c = config;
    c.sessions = 1;
    c.seeds.scene += k;
    c.seeds.values += k;
    c.seeds.agent += k;
    configs.push_back(std::move(c));
  }
  std::vector<SessionResult> results(count);
  std::vector<std::string> errors(count);
  std::mutex next_mutex;
  std::size_t next = 0;
  auto worker = [&] {
    while (true) {
      std::size_t k = 0;
      {
        std::lock_guard lock(next_mutex);
        if (next >= count) return;
        k = next++;
      }
      try {
        results[k] = run_session(configs[k]);
      } catch (const std::exception& e) {
        errors[k] = e.what();
      }
    }
  };
  const auto threads = std::min<std::size_t>(static_cast<std::size_t>(config.workers), count);
  std::vector<std::thread> pool;
  for (std::size_t i = 1; i < threads; ++i) pool.emplace_back(worker);
  worker();
  for (auto& t : pool) t.join();
  for (std::size_t k = 0; k < count; ++k) {
    if (!errors[k].empty()) throw ConfigurationError("session " + std::to_string(k) + " failed: " + errors[k]);
  }
  return results;
}

// ---------------------------------------------------------------------------
// JSON

nlohmann::json to_json(const EpisodeResult& r, bool with_transcript) {
  nlohmann::json doc{{"episode", r.episode},
                     {"score", r.score.str()},
                     {"steps", r.steps},
                     {"comm_tokens", r.comm_tokens},
                     {"success", r.success},
                     {"aborted", r.aborted},
                     {"error", r.error},
                     {"goals", r.goals}};
  if (with_transcript) doc["transcript"] = r.transcript;
  return doc;
}

nlohmann::json to_json(const SessionResult& r, bool with_transcript) {
  nlohmann::json episodes = nlohmann::json::array();
  for (const auto& e : r.episodes) episodes.push_back(to_json(e, with_transcript));
  nlohmann::json deltas = nlohmann::json::array();
  for (const auto& d : r.deltas) deltas.push_back(d.str());
  return {{"task", r.task},
          {"agent", r.agent},
          {"seeds", {{"scene", r.seeds.scene}, {"values", r.seeds.values}, {"agent", r.seeds.agent}}},
          {"values", tasks::to_json(r.values)},
          {"episodes", episodes},
          {"deltas", deltas},
          {"memory", r.memory}};
}

SessionResult session_from_json(const nlohmann::json& doc) {
  try {
    SessionResult r;
    r.task = doc.at("task").get<std::string>();
    r.agent = doc.at("agent").get<std::string>();
    const auto& s = doc.at("seeds");
    r.seeds = {s.at("scene").get<std::uint64_t>(), s.at("values").get<std::uint64_t>(), s.at("agent").get<std::uint64_t>()};
    r.values = tasks::values_from_json(doc.at("values"));
    for (const auto& e : doc.at("episodes")) {
      EpisodeResult er;
      er.episode = e.at("episode").get<int>();
      er.score = Rational::parse(e.at("score").get<std::string>());
      er.steps = e.at("steps").get<int>();
      er.comm_tokens = e.at("comm_tokens").get<int>();
      er.success = e.at("success").get<bool>();
      er.aborted = e.at("aborted").get<bool>();
      er.error = e.at("error").get<std::string>();
      er.goals = e.at("goals").get<std::set<std::string>>();
      if (e.contains("transcript")) er.transcript = e.at("transcript").get<std::vector<nlohmann::json>>();
      r.episodes.push_back(std::move(er));
    }
    for (const auto& d : doc.at("deltas")) r.deltas.push_back(Rational::parse(d.get<std::string>()));
    r.memory = doc.value("memory", nlohmann::json());
    return r;
  } catch (const nlohmann::json::exception& e) {
    throw ConfigurationError(std::string("session result is malformed: ") + e.what());
  }
}

}  // namespace homeassist::harness
