#include <algorithm>
#include <regex>
#include <sstream>

#include <spdlog/spdlog.h>

#include "homeassist/baselines.hpp"
#include "homeassist/errors.hpp"
#include "homeassist/prompts.hpp"

namespace homeassist::baselines {

using world::Action;
using world::Observation;

namespace {

std::string lower(std::string s) {
  std::transform(s.begin(), s.end(), s.begin(), [](unsigned char c) { return std::tolower(c); });
  return s;
}

std::string trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r\n\"'");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r\n\"'");
  return std::string(s.substr(b, e - b + 1));
}

template <class... Ts>
struct Overloaded : Ts... {
  using Ts::operator()...;
};
template <class... Ts>
Overloaded(Ts...) -> Overloaded<Ts...>;

std::string_view verb_of(const Action& a) {
  return std::visit(Overloaded{
                        [](const world::GoToRoom&) { return std::string_view("gotoroom"); },
                        [](const world::Open&) { return std::string_view("open"); },
                        [](const world::Grab&) { return std::string_view("grab"); },
                        [](const world::PutOn&) { return std::string_view("putback"); },
                        [](const world::Send&) { return std::string_view("send_message"); },
                        [](const world::Wait&) { return std::string_view("wait"); },
                    },
                    a);
}

// First verb named in `text`, mapped onto the menu vocabulary.
std::optional<std::string_view> find_verb(const std::string& text) {
  static const std::vector<std::pair<std::string_view, std::string_view>> kVerbs{
      {"gotoroom", "gotoroom"}, {"go to", "gotoroom"},        {"open", "open"},  {"grab", "grab"},
      {"putback", "putback"},   {"put", "putback"},          {"place", "putback"},
      {"send_message", "send_message"}, {"send", "send_message"}, {"wait", "wait"}};
  std::size_t best = std::string::npos;
  std::optional<std::string_view> verb;
  for (const auto& [word, mapped] : kVerbs) {
    auto pos = text.find(word);
    if (pos != std::string::npos && (best == std::string::npos || pos < best)) {
      best = pos;
      verb = mapped;
    }
  }
  return verb;
}

std::string menu_text(const std::vector<MenuEntry>& menu) {
  std::string out;
  for (const auto& m : menu) out += (out.empty() ? "" : "\n") + m.text;
  return out;
}

std::vector<MenuEntry> make_menu(const Observation& obs, bool allow_send) {
  std::vector<MenuEntry> menu;
  const auto names = world::names_of(obs);
  for (auto& a : world::available_actions(obs)) {
    if (!allow_send && std::holds_alternative<world::Send>(a)) continue;
    menu.push_back({a, world::describe(a, names)});
  }
  return menu;
}

std::string where(const world::SeenObject& s, const Observation& obs) {
  const auto room = std::string(to_string(obs.room));
  switch (s.location.kind) {
    case world::LocationKind::InRoom: return "in the " + room;
    case world::LocationKind::Held: return "in my hand";
    case world::LocationKind::Inside:
    case world::LocationKind::On: {
      std::string holder = "something";
      for (const auto& o : obs.visible_objects) {
        if (o.id == s.location.holder) holder = o.class_name;
      }
      return std::string(s.location.kind == world::LocationKind::Inside ? "inside the " : "on the ") + holder +
             " in the " + room;
    }
  }
  return room;
}

std::string describe_progress(const Observation& obs, const std::set<std::string>& placed, const std::string& target) {
  std::string out = "I'm in the " + std::string(to_string(obs.room)) + ". ";
  if (obs.held.empty()) {
    out += "I'm holding nothing. ";
  } else {
    out += "I'm holding ";
    for (std::size_t i = 0; i < obs.held.size(); ++i) {
      out += (i ? " and " : "") + std::string("<") + obs.held[i].class_name + "> (" + std::to_string(obs.held[i].id.value) + ")";
    }
    out += ". ";
  }
  if (!placed.empty()) {
    out += "I've put ";
    std::size_t i = 0;
    for (const auto& p : placed) out += (i++ ? ", " : "") + p;
    out += " on the " + target + ". ";
  }
  std::vector<std::string> seen;
  for (const auto& o : obs.visible_objects) {
    std::string item = "<" + o.class_name + "> (" + std::to_string(o.id.value) + ")";
    if (o.kind == world::ObjectKind::Container) item += o.open ? " (open)" : " (closed)";
    seen.push_back(item);
  }
  out += "I see: ";
  for (std::size_t i = 0; i < seen.size(); ++i) out += (i ? ", " : "") + seen[i];
  out += ".";
  return out;
}

std::string bracketed_goals(const tasks::TaskSpec& spec) {
  std::string out = "[";
  for (std::size_t i = 0; i < spec.potential_goals.size(); ++i) out += (i ? ", " : "") + spec.potential_goals[i];
  return out + "]";
}

std::string recent(const std::vector<std::string>& items, std::size_t limit, std::string_view sep) {
  if (items.empty()) return "None";
  const auto start = items.size() > limit ? items.size() - limit : 0;
  std::string out;
  for (auto i = start; i < items.size(); ++i) out += (i > start ? std::string(sep) : "") + items[i];
  return out;
}

// Last non-empty line with speaker prefixes and quotes removed.
std::string message_from(const std::string& reply) {
  std::istringstream in(reply);
  std::string line;
  std::string last;
  while (std::getline(in, line)) {
    if (!trim(line).empty()) last = trim(line);
  }
  for (std::string_view prefix : {"Alice:", "Message:"}) {
    if (last.starts_with(prefix)) last = trim(last.substr(prefix.size()));
  }
  return last;
}

// Asks for an action twice at most; Wait when nothing legal comes back or the
// backend is down.
Action choose(lm::ChatBackend& backend, const std::string& prompt, const std::vector<MenuEntry>& menu,
              std::string_view who) {
  const std::vector<lm::ChatExchange> messages{lm::ChatExchange::make(lm::Role::System, prompt)};
  for (int attempt = 0; attempt < 2; ++attempt) {
    std::string reply;
    try {
      reply = backend.chat(messages);
    } catch (const CommunicationBackendError& e) {
      spdlog::warn("{}: backend failure, waiting: {}", who, e.what());
      return world::Wait{};
    }
    if (auto action = parse_action_reply(reply, menu)) return *action;
    spdlog::debug("{}: could not parse reply (attempt {})", who, attempt + 1);
  }
  return world::Wait{};
}

}  // namespace

std::optional<Action> parse_action_reply(const std::string& reply, const std::vector<MenuEntry>& menu) {
  std::string text = reply;
  if (auto pos = text.find("Best Next Action"); pos != std::string::npos) {
    auto end = text.find('\n', pos);
    auto line = text.substr(pos, end == std::string::npos ? std::string::npos : end - pos);
    if (line.find('[') != std::string::npos || line.find('<') != std::string::npos) text = line;
  }

  // Exact menu lines; the earliest (then longest) mention wins.
  std::optional<std::size_t> best;
  std::size_t best_pos = std::string::npos;
  for (std::size_t i = 0; i < menu.size(); ++i) {
    const auto pos = text.find(menu[i].text);
    if (pos == std::string::npos) continue;
    if (!best || pos < best_pos || (pos == best_pos && menu[i].text.size() > menu[*best].text.size())) {
      best = i;
      best_pos = pos;
    }
  }
  if (best) return menu[*best].action;

  const std::string low = lower(text);
  const auto verb = find_verb(low);
  if (!verb) return std::nullopt;

  struct Ref {
    std::string name;
    std::optional<int> id;
  };
  std::vector<Ref> refs;
  static const std::regex kRef(R"(<\s*([a-z0-9_ \-]+?)\s*>\s*(?:\(\s*([0-9]+|[a-z]+)\s*\))?)");
  for (std::sregex_iterator it(low.begin(), low.end(), kRef), end; it != end; ++it) {
    Ref r{(*it)[1].str(), std::nullopt};
    const auto id = (*it)[2].str();
    if (!id.empty() && std::isdigit(static_cast<unsigned char>(id.front()))) r.id = std::stoi(id);
    refs.push_back(r);
  }
  for (const auto& entry : menu) {
    if (verb_of(entry.action) != *verb) continue;
    const std::string entry_low = lower(entry.text);
    const bool all = std::all_of(refs.begin(), refs.end(), [&](const Ref& r) {
      const std::string tag = "<" + r.name + ">";
      if (entry_low.find(tag) == std::string::npos) return false;
      return !r.id || entry_low.find(tag + " (" + std::to_string(*r.id) + ")") != std::string::npos;
    });
    if (!all) continue;
    const bool needs_ref = *verb != "wait" && *verb != "send_message";
    if (needs_ref && refs.empty()) continue;
    return entry.action;
  }
  return std::nullopt;
}

// ---------------------------------------------------------------------------
// Naive chat agent

NaiveChatAgent::NaiveChatAgent(lm::ChatBackend& backend, ChatAgentOptions options)
    : backend_(backend), options_(std::move(options)) {}

void NaiveChatAgent::begin_episode(const tasks::TaskSpec& spec, int episode) {
  spec.validate();
  spec_ = spec;
  episode_ = episode;
  actions_.clear();
  dialogue_.clear();
  placed_.clear();
  progress_.clear();
}

std::string NaiveChatAgent::planning_prompt(const Observation& obs) const {
  const auto menu = make_menu(obs, true);
  std::string dialogue;
  for (const auto& d : dialogue_) dialogue += d + "\n";
  return prompts::render(prompts::template_text("coela_planning"),
                         {{"AGENT_NAME", options_.agent_name},
                          {"OPPO_NAME", options_.user_name},
                          {"Task", spec_.name},
                          {"GOAL_CNT", std::to_string(spec_.goal_count)},
                          {"GOAL", bracketed_goals(spec_)},
                          {"REL_TARGET", "on the " + spec_.target_surface + "."},
                          {"PROGRESS", describe_progress(obs, placed_, spec_.target_surface)},
                          {"DIALOGUE_HISTORY", dialogue},
                          {"ACTION_HISTORY", recent(actions_, options_.history_limit, ", ")},
                          {"AVAILABLE_ACTIONS", menu_text(menu)}});
}

std::string NaiveChatAgent::message_prompt() const {
  std::string dialogue;
  for (const auto& d : dialogue_) dialogue += d + "\n";
  return prompts::render(prompts::template_text("coela_communication"),
                         {{"AGENT_NAME", options_.agent_name},
                          {"OPPO_NAME", options_.user_name},
                          {"GOAL_CNT", std::to_string(spec_.goal_count)},
                          {"GOAL", bracketed_goals(spec_)},
                          {"REL_TARGET", "on the " + spec_.target_surface + "."},
                          {"PROGRESS", progress_},
                          {"ACTION_HISTORY", recent(actions_, options_.history_limit, ", ")},
                          {"DIALOGUE_HISTORY", dialogue}});
}

Action NaiveChatAgent::act(const Observation& obs) {
  if (episode_ == 0) throw ContractViolation("act called before begin_episode");
  if (obs.incoming_message) dialogue_.push_back(options_.user_name + ": \"" + *obs.incoming_message + "\"");
  progress_ = describe_progress(obs, placed_, spec_.target_surface);
  const auto menu = make_menu(obs, true);
  Action action = choose(backend_, planning_prompt(obs), menu, "coela");

  if (std::holds_alternative<world::Send>(action)) {
    const std::vector<lm::ChatExchange> messages{lm::ChatExchange::make(lm::Role::System, message_prompt())};
    std::string text;
    try {
      text = message_from(backend_.chat(messages));
    } catch (const CommunicationBackendError& e) {
      spdlog::warn("coela: backend failure while composing a message: {}", e.what());
    }
    if (text.empty()) {
      action = world::Wait{};
    } else {
      action = world::Send(text);
      dialogue_.push_back(options_.agent_name + ": \"" + text + "\"");
    }
  }
  actions_.push_back(world::describe(action, world::names_of(obs)));
  return action;
}

void NaiveChatAgent::observe_outcome(const Action& action, const world::TransitionEvent& event, const Rational& delta) {
  (void)action;
  (void)delta;
  if (const auto* p = event.placed(); p != nullptr && p->surface_class == spec_.target_surface) {
    placed_.insert(p->object_class);
  }
}

// ---------------------------------------------------------------------------
// ProAgent

ProAgent::ProAgent(lm::ChatBackend& backend, ChatAgentOptions options)
    : backend_(backend), options_(std::move(options)) {}

void ProAgent::begin_episode(const tasks::TaskSpec& spec, int episode) {
  spec.validate();
  spec_ = spec;
  episode_ = episode;
  actions_.clear();
  placed_.clear();
  last_seen_.clear();
}

std::string ProAgent::prompt(const Observation& obs) const {
  std::string belief;
  for (const auto& [cls, place] : last_seen_) belief += (belief.empty() ? "" : "; ") + cls + " " + place;
  return prompts::render(prompts::template_text("proagent"),
                         {{"AGENT_NAME", options_.agent_name},
                          {"OPPO_NAME", options_.user_name},
                          {"GOAL_CNT", std::to_string(spec_.goal_count)},
                          {"GOAL", bracketed_goals(spec_)},
                          {"REL_TARGET", "on the " + spec_.target_surface},
                          {"HISTORY_OF_SUCCESSFUL_SUBGOALS", memory_.achieved_summary()},
                          {"PROGRESS", describe_progress(obs, placed_, spec_.target_surface)},
                          {"ACTION_HISTORY", recent(actions_, options_.history_limit, ", ")},
                          {"BELIEF_STATE", belief.empty() ? "Nothing observed yet." : belief},
                          {"AVAILABLE_ACTIONS", menu_text(make_menu(obs, false))}});
}

Action ProAgent::act(const Observation& obs) {
  if (episode_ == 0) throw ContractViolation("act called before begin_episode");
  for (const auto& s : obs.visible_objects) {
    if (s.kind == world::ObjectKind::Graspable) last_seen_[s.class_name] = where(s, obs);
  }
  const Action action = choose(backend_, prompt(obs), make_menu(obs, false), "proagent");
  actions_.push_back(world::describe(action, world::names_of(obs)));
  return action;
}

void ProAgent::observe_outcome(const Action& action, const world::TransitionEvent& event, const Rational& delta) {
  (void)action;
  const auto* p = event.placed();
  if (p == nullptr || p->surface_class != spec_.target_surface) return;
  placed_.insert(p->object_class);
  memory_.record(episode_, p->object_class, delta > Rational(0));
}

nlohmann::json ProAgent::memory_document() const { return memory_.to_json(); }

}  // namespace homeassist::baselines
