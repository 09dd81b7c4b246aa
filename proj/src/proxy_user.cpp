#include "homeassist/proxy_user.hpp"

#include <algorithm>
#include <cctype>
#include <sstream>

#include "homeassist/dialogue.hpp"
#include "homeassist/errors.hpp"
#include "homeassist/prompts.hpp"
#include "homeassist/rng.hpp"

namespace homeassist::user {

using tasks::GoalSet;
using tasks::TaskSpec;
using tasks::ValueProfile;

namespace {

const std::set<std::string> kNegations{"not",  "no",    "isn't", "aren't", "don't",   "doesn't", "nope",
                                       "wrong", "never", "can't", "cannot", "neither", "nor",     "incorrect"};
const std::set<std::string> kAffirmations{"yes",   "right", "correct", "exactly", "want", "good",
                                          "great", "perfect", "indeed", "love",  "like", "yep"};

std::string trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r\n\"'");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r\n\"'");
  return std::string(s.substr(b, e - b + 1));
}

std::vector<std::string> non_empty_lines(const std::string& text) {
  std::vector<std::string> lines;
  std::istringstream in(text);
  std::string line;
  while (std::getline(in, line)) {
    if (!trim(line).empty()) lines.push_back(line);
  }
  return lines;
}

std::string join_list(const std::vector<std::string>& items) {
  std::string out;
  for (const auto& i : items) out += (out.empty() ? "" : ", ") + i;
  return out;
}

std::vector<std::string> sorted(const std::set<std::string>& s) { return {s.begin(), s.end()}; }

// Parses a comma-separated goal answer; nullopt on any off-vocabulary name or
// wrong count.
std::optional<std::set<std::string>> parse_goal_answer(const std::string& raw, const TaskSpec& spec) {
  const auto lines = non_empty_lines(raw);
  if (lines.empty()) return std::nullopt;
  std::string line = trim(lines.back());
  if (auto colon = line.rfind(':'); colon != std::string::npos) line = line.substr(colon + 1);
  std::set<std::string> names;
  std::istringstream in(line);
  std::string item;
  while (std::getline(in, item, ',')) {
    auto ws = dialogue::words(item);
    if (ws.size() != 1 || !spec.is_potential_goal(ws.front())) return std::nullopt;
    names.insert(ws.front());
  }
  if (names.size() != static_cast<std::size_t>(spec.goal_count)) return std::nullopt;
  return names;
}

std::string extract_message(const std::string& raw) {
  const auto lines = non_empty_lines(raw);
  if (lines.empty()) return {};
  std::string msg = trim(lines.back());
  for (std::string_view prefix : {"Bob:", "Message:", "Answer:", "Reply:"}) {
    if (msg.starts_with(prefix)) msg = trim(msg.substr(prefix.size()));
  }
  return msg;
}

// Replaces every word of `text` that is in `banned` with `replacement`.
std::string scrub(const std::string& text, const std::set<std::string>& banned, std::string_view replacement) {
  std::string out;
  std::string word;
  auto flush = [&] {
    std::string lower = word;
    std::transform(lower.begin(), lower.end(), lower.begin(), [](unsigned char c) { return std::tolower(c); });
    out += banned.contains(lower) ? std::string(replacement) : word;
    word.clear();
  };
  for (char c : text) {
    if (std::isalnum(static_cast<unsigned char>(c)) || c == '_') {
      word += c;
    } else {
      flush();
      out += c;
    }
  }
  flush();
  return out;
}

}  // namespace

// ---------------------------------------------------------------------------
// Goal sampling

int affinity_score(const TaskSpec& spec, const ValueProfile& values, const std::string& cls) {
  int score = 0;
  for (const auto& dim : spec.value_dims) {
    if (std::find(dim.affected.begin(), dim.affected.end(), cls) == dim.affected.end()) continue;
    auto it = values.levels.find(dim.name);
    if (it != values.levels.end()) score += tasks::level_weight(it->second);
  }
  return score;
}

std::string goal_prompt(const TaskSpec& spec, const ValueProfile& values) {
  std::string value_text;
  for (const auto& dim : spec.value_dims) {
    auto it = values.levels.find(dim.name);
    const auto level = it == values.levels.end() ? tasks::ValueLevel::Not : it->second;
    value_text += (value_text.empty() ? "" : ", ") + std::string(tasks::to_string(level)) + " " + dim.name;
  }
  return prompts::render(prompts::template_text("user_goal_generation"),
                         {{"GOAL_CNT", std::to_string(spec.goal_count)},
                          {"Value", value_text},
                          {"Task", spec.name + ". " + spec.description},
                          {"GOAL", join_list(spec.potential_goals)}});
}

GoalSet generate_goal_set(const TaskSpec& spec, const ValueProfile& values, lm::ChatBackend* backend,
                          std::uint64_t seed) {
  spec.validate();
  GoalSet goal;
  if (backend == nullptr) {
    // Top-N by affinity; the random key only orders ties.
    Rng rng(derive_seed({seed, 0x90a1}));
    struct Ranked {
      int score;
      std::uint64_t key;
      std::string cls;
    };
    std::vector<Ranked> ranked;
    for (const auto& g : spec.potential_goals) ranked.push_back({affinity_score(spec, values, g), rng(), g});
    std::sort(ranked.begin(), ranked.end(), [](const Ranked& a, const Ranked& b) {
      return a.score != b.score ? a.score > b.score : a.key < b.key;
    });
    for (int i = 0; i < spec.goal_count; ++i) goal.goals.insert(ranked[static_cast<std::size_t>(i)].cls);
    return goal;
  }

  const auto prompt = goal_prompt(spec, values);
  std::vector<lm::ChatExchange> messages{lm::ChatExchange::make(lm::Role::System, prompt)};
  for (int attempt = 0; attempt < 2; ++attempt) {
    if (auto names = parse_goal_answer(backend->chat(messages), spec)) {
      goal.goals = std::move(*names);
      return goal;
    }
  }
  throw GoalSamplingFailed("goal sampling for '" + spec.id + "' returned an invalid goal set twice");
}

// ---------------------------------------------------------------------------
// Replies

std::string render_reply(const UserState& state, const TaskSpec& spec, const std::set<std::string>& guessed,
                         const std::set<std::string>& confirmed, const std::set<std::string>& denied,
                         const std::vector<std::string>& hints, bool too_many) {
  // Willingness drops with every episode: full sentences first, clipped
  // phrases in the second, bare words from the third on.
  const int terse = std::clamp(state.episode_index - 1, 0, 2);
  const bool first_episode = terse == 0;
  std::vector<std::string> parts;
  const bool exact = !too_many && !guessed.empty() && guessed == state.goal.goals;
  const auto be = [](const std::set<std::string>& s) { return s.size() > 1 ? " are" : " is"; };
  if (too_many) {
    parts.push_back(first_episode ? "That's too many things at once, so I can't confirm any of them."
                                  : terse == 1 ? "Too many guesses." : "Too many.");
  } else if (guessed.empty()) {
    parts.push_back(first_episode ? "I'm not sure what you mean." : "Hmm.");
  } else {
    if (exact) {
      parts.push_back(terse == 2 ? "Yes, " + dialogue::join_names(sorted(confirmed)) + "."
                                 : dialogue::join_names(sorted(confirmed)) + be(confirmed) + " exactly what I want!");
    } else if (!confirmed.empty()) {
      parts.push_back("Yes, " + dialogue::join_names(sorted(confirmed)) + (terse == 2 ? "." : std::string(be(confirmed)) + " right."));
    }
    if (!denied.empty()) {
      if (first_episode) {
        parts.push_back(dialogue::join_names(sorted(denied)) + be(denied) + " not what I want.");
      } else {
        parts.push_back("Not " + dialogue::join_names(sorted(denied), "or") + ".");
      }
    }
  }
  std::set<std::string> all_confirmed = state.confirmed;
  all_confirmed.insert(confirmed.begin(), confirmed.end());
  if (!hints.empty()) {
    if (first_episode) {
      parts.push_back("Try to look for something " + dialogue::join_names(hints, "or") + ".");
    } else {
      parts.push_back(terse == 1 ? "Something " + hints.front() + "." : hints.front() + ".");
    }
  } else if (!exact && all_confirmed == state.goal.goals) {
    parts.push_back(terse == 2 ? "That's all." : "That's everything I need.");
  }
  (void)spec;
  std::string text;
  for (auto p : parts) {
    p.front() = static_cast<char>(std::toupper(static_cast<unsigned char>(p.front())));
    text += (text.empty() ? "" : " ") + p;
  }
  return text;
}

// Rules, in order:
//  a. more than N+2 guessed names: confirm nothing, only hint;
//  b. otherwise confirm guessed goals and deny the rest of the guess;
//  c. nothing left to hint: say everything is confirmed;
//  d. else hint one property of a seeded unconfirmed goal;
//  e. from the second episode on, at most one property per reply.
UserReply scripted_respond(const UserState& state, const TaskSpec& spec, const std::set<std::string>& guessed_in,
                           std::uint64_t seed) {
  std::set<std::string> guessed;
  for (const auto& g : guessed_in) {
    if (spec.is_potential_goal(g)) guessed.insert(g);
  }
  const auto& goals = state.goal.goals;
  const bool too_many = guessed.size() > static_cast<std::size_t>(spec.goal_count + 2);

  UserReply reply;
  if (!too_many) {
    for (const auto& g : guessed) (goals.contains(g) ? reply.confirmed : reply.denied).insert(g);
  }
  std::vector<std::string> remaining;
  for (const auto& g : goals) {
    if (!state.confirmed.contains(g) && !reply.confirmed.contains(g)) remaining.push_back(g);
  }

  std::vector<std::string> hints;
  if (!remaining.empty()) {
    Rng rng(derive_seed({seed, static_cast<std::uint64_t>(state.episode_index), static_cast<std::uint64_t>(state.turn)}));
    stable_shuffle(remaining, rng);
    const std::size_t max_tags = state.episode_index <= 1 ? 2 : 1;
    for (std::size_t i = 0; i < max_tags; ++i) {
      const auto& cls = remaining[i % remaining.size()];
      std::vector<std::string> tags;
      for (const auto& t : spec.properties_of(cls)) {
        if (std::find(hints.begin(), hints.end(), t) == hints.end()) tags.push_back(t);
      }
      if (tags.empty()) continue;
      hints.push_back(tags[uniform_index(rng, tags.size())]);
    }
  }
  reply.hinted_properties.insert(hints.begin(), hints.end());
  reply.text = render_reply(state, spec, guessed, reply.confirmed, reply.denied, hints, too_many);
  return reply;
}

UserReply read_reply(const std::string& text, const std::set<std::string>& guessed, const TaskSpec& spec) {
  UserReply reply;
  reply.text = text;
  const auto vocab = spec.property_vocabulary();
  for (const auto& sentence : dialogue::sentences(text)) {
    const auto ws = dialogue::words(sentence);
    bool negated = false;
    bool affirmed = false;
    std::set<std::string> names;
    std::set<std::string> props;
    for (const auto& w : ws) {
      negated = negated || kNegations.contains(w);
      affirmed = affirmed || kAffirmations.contains(w);
      if (guessed.contains(w) && spec.is_potential_goal(w)) names.insert(w);
      if (vocab.contains(w)) props.insert(w);
    }
    if (!names.empty()) {
      if (negated) {
        reply.denied.insert(names.begin(), names.end());
      } else if (affirmed) {
        reply.confirmed.insert(names.begin(), names.end());
      }
    } else if (!negated) {
      reply.hinted_properties.insert(props.begin(), props.end());
    }
  }
  // A name both confirmed and denied is ambiguous; keep neither.
  for (auto it = reply.confirmed.begin(); it != reply.confirmed.end();) {
    if (reply.denied.erase(*it) > 0) {
      it = reply.confirmed.erase(it);
    } else {
      ++it;
    }
  }
  return reply;
}

std::string progress_note(const UserState& state) {
  const auto done = state.goal.placed_correct.size();
  const auto wrong = state.goal.placed_wrong.size();
  if (done == 0 && wrong == 0) return "no subgoals completed";
  std::string note = std::to_string(done) + " of " + std::to_string(state.goal.goals.size()) + " subgoals completed";
  if (wrong > 0) note += "; " + std::to_string(wrong) + " incorrect item" + (wrong > 1 ? "s" : "") + " present";
  return note;
}

std::string communication_prompt(const UserState& state, const TaskSpec& spec, const std::string& question) {
  std::string history;
  for (const auto& m : state.dialogue) {
    history += (m.role == lm::Role::Agent ? "Alice: \"" : "Bob: \"") + m.content + "\"\n";
  }
  std::string actions;
  for (const auto& a : state.agent_action_log) actions += (actions.empty() ? "" : ", ") + a;
  return prompts::render(prompts::template_text("user_communication"),
                         {{"Task", spec.name + ". " + spec.description},
                          {"EPISODE", std::to_string(state.episode_index)},
                          {"GOAL", join_list(sorted(state.goal.goals))},
                          {"PROGRESS", progress_note(state)},
                          {"ACTION_HISTORY", actions.empty() ? "None" : actions},
                          {"DIALOGUE_HISTORY", history},
                          {"QUESTION", question}});
}

namespace {

UserReply chat_respond(const UserState& state, const TaskSpec& spec, const std::set<std::string>& guessed,
                       const std::string& question, lm::ChatBackend& backend) {
  const auto prompt = communication_prompt(state, spec, question);
  std::vector<lm::ChatExchange> messages{lm::ChatExchange::make(lm::Role::System, prompt)};
  const std::string message = extract_message(backend.chat(messages));

  const auto& goals = state.goal.goals;
  const auto parsed = read_reply(message, guessed, spec);
  const bool too_many = guessed.size() > static_cast<std::size_t>(spec.goal_count + 2);

  // Claims are checked against the true goals rather than trusted.
  UserReply verified;
  // A name the reply addressed gets its true status.
  if (!too_many) {
    for (const auto* side : {&parsed.confirmed, &parsed.denied}) {
      for (const auto& name : *side) (goals.contains(name) ? verified.confirmed : verified.denied).insert(name);
    }
  }
  std::set<std::string> open_props;
  for (const auto& g : goals) {
    if (state.confirmed.contains(g) || verified.confirmed.contains(g)) continue;
    const auto& tags = spec.properties_of(g);
    open_props.insert(tags.begin(), tags.end());
  }
  for (const auto& h : parsed.hinted_properties) {
    if (open_props.contains(h)) verified.hinted_properties.insert(h);
  }

  const bool honest = verified.confirmed == parsed.confirmed && verified.denied == parsed.denied &&
                      verified.hinted_properties == parsed.hinted_properties && !message.empty();
  std::string text = honest ? message
                            : render_reply(state, spec, guessed, verified.confirmed, verified.denied,
                                           sorted(verified.hinted_properties), too_many);

  std::set<std::string> unconfirmed;
  for (const auto& g : goals) {
    if (!state.confirmed.contains(g) && !verified.confirmed.contains(g)) unconfirmed.insert(g);
  }
  text = scrub(text, unconfirmed, "something");
  std::set<std::string> places;
  for (Room r : kAllRooms) places.insert(std::string(to_string(r)));
  for (const auto& f : spec.containers) places.insert(f.class_name);
  for (const auto& f : spec.surfaces) {
    if (f.class_name != spec.target_surface) places.insert(f.class_name);
  }
  text = scrub(text, places, "somewhere");
  verified.text = text;
  return verified;
}

}  // namespace

UserReply respond(UserState& state, const TaskSpec& spec, const std::string& agent_message, lm::ChatBackend* backend,
                  std::uint64_t seed) {
  if (trim(agent_message).empty()) throw ContractViolation("respond: empty agent message");
  const auto guessed = dialogue::mentioned(agent_message, spec.potential_goals);
  UserReply reply = backend == nullptr ? scripted_respond(state, spec, guessed, seed)
                                       : chat_respond(state, spec, guessed, agent_message, *backend);
  state.dialogue.push_back(lm::ChatExchange::make(lm::Role::Agent, agent_message));
  state.dialogue.push_back(lm::ChatExchange::make(lm::Role::User, reply.text));
  state.confirmed.insert(reply.confirmed.begin(), reply.confirmed.end());
  ++state.turn;
  return reply;
}

}  // namespace homeassist::user
