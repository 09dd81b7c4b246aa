#include "homeassist/mental_model.hpp"

#include <algorithm>
#include <cmath>

#include "homeassist/errors.hpp"
#include "homeassist/rng.hpp"

namespace homeassist::agent {

using tasks::TaskSpec;
using tasks::ValueLevel;

namespace {

bool consistent(const std::vector<std::string>& members, const MentalModel& mental) {
  for (const auto& c : mental.confirmed) {
    if (!std::binary_search(members.begin(), members.end(), c)) return false;
  }
  for (const auto& m : members) {
    if (mental.denied.contains(m)) return false;
  }
  return true;
}

template <typename Keep>
std::vector<std::vector<std::string>> enumerate_subsets(const TaskSpec& spec, Keep keep) {
  std::vector<std::string> pool = spec.potential_goals;
  std::sort(pool.begin(), pool.end());
  const auto n = pool.size();
  const auto k = static_cast<std::size_t>(spec.goal_count);
  std::vector<std::vector<std::string>> out;
  if (k > n) return out;
  std::vector<std::size_t> idx(k);
  for (std::size_t i = 0; i < k; ++i) idx[i] = i;
  while (true) {
    std::vector<std::string> members;
    members.reserve(k);
    for (auto i : idx) members.push_back(pool[i]);
    if (keep(members)) out.push_back(std::move(members));
    // Advance to the next combination in lexicographic order.
    std::size_t i = k;
    while (i > 0 && idx[i - 1] == n - k + i - 1) --i;
    if (i == 0) break;
    ++idx[i - 1];
    for (std::size_t j = i; j < k; ++j) idx[j] = idx[j - 1] + 1;
  }
  return out;
}

std::uint64_t tie_key(std::uint64_t seed, const std::vector<std::string>& members) {
  std::uint64_t h = mix64(seed);
  for (const auto& m : members) h = mix64(h ^ stable_hash(m));
  return h;
}

void normalize_and_rank(MentalModel& mental) {
  double total = 0.0;
  for (const auto& h : mental.hypotheses) total += h.weight;
  if (!(total > 0.0)) {
    mental.hint_conflict = true;
    for (auto& h : mental.hypotheses) h.weight = 1.0;
    total = static_cast<double>(mental.hypotheses.size());
  }
  for (auto& h : mental.hypotheses) h.weight /= total;
  const auto seed = mental.tie_seed;
  // Weights are products of a few discrete factors; treat near-equal as tied
  // so float rounding cannot decide the order.
  std::stable_sort(mental.hypotheses.begin(), mental.hypotheses.end(), [seed](const Hypothesis& a, const Hypothesis& b) {
    const double scale = std::max(a.weight, b.weight);
    if (std::abs(a.weight - b.weight) > 1e-9 * scale) return a.weight > b.weight;
    return tie_key(seed, a.members) < tie_key(seed, b.members);
  });
}

bool unconfirmed_at(const MentalModel& mental, const std::string& cls, int turn) {
  auto it = mental.confirmed_turn.find(cls);
  return it == mental.confirmed_turn.end() || it->second > turn;
}

double hint_likelihood(const MentalModel& mental, const TaskSpec& spec, const std::vector<std::string>& members) {
  double w = 1.0;
  for (const auto& hint : mental.hints) {
    bool carried = false;
    for (const auto& m : members) {
      if (unconfirmed_at(mental, m, hint.turn) && spec.properties_of(m).contains(hint.tag)) {
        carried = true;
        break;
      }
    }
    if (!carried) w *= kHintMismatch;
  }
  return w;
}

bool deduced(const MentalModel& mental, const std::string& cls) {
  auto it = mental.confirmed_turn.find(cls);
  return it != mental.confirmed_turn.end() && it->second == kDeducedTurn;
}

// A hint names a property of some goal the user had not confirmed by then.
// When nothing known explains it and only one undenied object carries the
// tag, that object must be a goal.
void deduce_from_hints(MentalModel& mental, const TaskSpec& spec) {
  bool changed = true;
  while (changed && mental.confirmed.size() < static_cast<std::size_t>(spec.goal_count)) {
    changed = false;
    for (const auto& hint : mental.hints) {
      std::vector<std::string> carriers;
      bool explained = false;
      for (const auto& g : spec.potential_goals) {
        if (mental.denied.contains(g) || !unconfirmed_at(mental, g, hint.turn)) continue;
        if (!spec.properties_of(g).contains(hint.tag)) continue;
        if (mental.confirmed.contains(g)) explained = true;
        carriers.push_back(g);
      }
      if (explained || carriers.size() != 1) continue;
      mental.confirmed.insert(carriers.front());
      mental.confirmed_turn[carriers.front()] = kDeducedTurn;
      changed = true;
    }
  }
}

// Too many subsets to enumerate: keep a single hypothesis built from the best
// per-object marginals.
std::vector<std::vector<std::string>> marginal_hypothesis(const MentalModel& mental, const TaskSpec& spec) {
  std::vector<std::pair<double, std::string>> scored;
  for (const auto& g : spec.potential_goals) {
    if (mental.denied.contains(g)) continue;
    double s = mental.confirmed.contains(g) ? 1e18 : value_prior(spec, mental.inferred_values, g);
    for (const auto& hint : mental.hints) {
      if (spec.properties_of(g).contains(hint.tag)) s *= 1.0 / kHintMismatch;
    }
    scored.emplace_back(s, g);
  }
  std::stable_sort(scored.begin(), scored.end(), [](const auto& a, const auto& b) { return a.first > b.first; });
  std::vector<std::string> members;
  for (std::size_t i = 0; i < scored.size() && members.size() < static_cast<std::size_t>(spec.goal_count); ++i) {
    members.push_back(scored[i].second);
  }
  std::sort(members.begin(), members.end());
  return {members};
}

}  // namespace

std::map<std::string, ValueLevel> estimate_values(const TaskSpec& spec,
                                                  const std::vector<std::set<std::string>>& observed) {
  std::map<std::string, ValueLevel> levels;
  const auto episodes = observed.size();
  for (const auto& dim : spec.value_dims) {
    std::size_t hits = 0;
    for (const auto& goals : observed) {
      for (const auto& cls : dim.affected) hits += goals.contains(cls) ? 1 : 0;
    }
    if (hits == 0) {
      levels[dim.name] = ValueLevel::Not;
    } else {
      levels[dim.name] = hits >= episodes ? ValueLevel::Very : ValueLevel::Somewhat;
    }
  }
  return levels;
}

double value_prior(const TaskSpec& spec, const std::map<std::string, ValueLevel>& values, const std::string& cls) {
  int affinity = 0;
  for (const auto& dim : spec.value_dims) {
    if (std::find(dim.affected.begin(), dim.affected.end(), cls) == dim.affected.end()) continue;
    auto it = values.find(dim.name);
    if (it != values.end()) affinity += tasks::level_weight(it->second);
  }
  return 1.0 + 3.0 * affinity;
}

void infer_desires(MentalModel& mental, const TaskSpec& spec) {
  std::vector<std::set<std::string>> observed = mental.past_episode_goals;
  if (!mental.confirmed.empty()) observed.push_back(mental.confirmed);
  mental.inferred_values = estimate_values(spec, observed);

  std::vector<std::vector<std::string>> sets;
  if (tasks::goal_hypothesis_count(spec) > kMaxEnumerated) {
    sets = marginal_hypothesis(mental, spec);
  } else {
    sets = enumerate_subsets(spec, [&](const auto& members) { return consistent(members, mental); });
    if (sets.empty()) {
      // Contradictory evidence: relax denials first, then everything.
      mental.hint_conflict = true;
      sets = enumerate_subsets(spec, [&](const auto& members) {
        return std::all_of(mental.confirmed.begin(), mental.confirmed.end(),
                           [&](const auto& c) { return std::binary_search(members.begin(), members.end(), c); });
      });
      if (sets.empty()) sets = enumerate_subsets(spec, [](const auto&) { return true; });
    }
  }

  mental.hypotheses.clear();
  for (auto& members : sets) {
    double w = hint_likelihood(mental, spec, members);
    for (const auto& m : members) {
      if (!mental.confirmed.contains(m)) w *= value_prior(spec, mental.inferred_values, m);
    }
    mental.hypotheses.push_back({std::move(members), w});
  }
  normalize_and_rank(mental);
}

void reset_for_episode(MentalModel& mental, const TaskSpec& spec) {
  mental.confirmed.clear();
  mental.denied.clear();
  mental.confirmed_turn.clear();
  mental.hints.clear();
  mental.turn = 0;
  mental.hint_conflict = false;
  infer_desires(mental, spec);
}

void confirm_goals(const user::UserReply& reply, MentalModel& mental, const TaskSpec& spec) {
  for (const auto& c : reply.confirmed) {
    if (mental.denied.contains(c) || reply.denied.contains(c)) {
      throw ContradictionError("'" + c + "' was confirmed after being denied");
    }
  }
  for (const auto& d : reply.denied) {
    if (!mental.confirmed.contains(d)) continue;
    if (!deduced(mental, d)) throw ContradictionError("'" + d + "' was denied after being confirmed");
    mental.confirmed.erase(d);
    mental.confirmed_turn.erase(d);
  }
  const int turn = ++mental.turn;
  for (const auto& c : reply.confirmed) {
    if (mental.confirmed.insert(c).second || deduced(mental, c)) mental.confirmed_turn[c] = turn;
  }
  mental.denied.insert(reply.denied.begin(), reply.denied.end());
  for (const auto& tag : reply.hinted_properties) mental.hints.push_back({tag, turn});
  deduce_from_hints(mental, spec);

  std::erase_if(mental.hypotheses, [&](const Hypothesis& h) { return !consistent(h.members, mental); });
  if (mental.hypotheses.empty()) {
    infer_desires(mental, spec);
    return;
  }
  normalize_and_rank(mental);
}

std::set<std::string> top_members(const MentalModel& mental, std::size_t k) {
  std::set<std::string> out;
  for (std::size_t i = 0; i < k && i < mental.hypotheses.size(); ++i) {
    out.insert(mental.hypotheses[i].members.begin(), mental.hypotheses[i].members.end());
  }
  return out;
}

double hypothesis_entropy(const MentalModel& mental) {
  double h = 0.0;
  for (const auto& hyp : mental.hypotheses) {
    if (hyp.weight > 0.0) h -= hyp.weight * std::log(hyp.weight);
  }
  return h;
}

// ---------------------------------------------------------------------------
// JSON

nlohmann::json to_json(const MentalModel& mental) {
  nlohmann::json hints = nlohmann::json::array();
  for (const auto& h : mental.hints) hints.push_back({{"tag", h.tag}, {"turn", h.turn}});
  nlohmann::json hyps = nlohmann::json::array();
  for (const auto& h : mental.hypotheses) hyps.push_back({{"members", h.members}, {"weight", h.weight}});
  nlohmann::json values = nlohmann::json::object();
  for (const auto& [dim, level] : mental.inferred_values) values[dim] = tasks::to_string(level);
  return {{"confirmed", mental.confirmed},
          {"denied", mental.denied},
          {"confirmed_turn", mental.confirmed_turn},
          {"hints", hints},
          {"hypotheses", hyps},
          {"inferred_values", values},
          {"past_episode_goals", mental.past_episode_goals},
          {"turn", mental.turn},
          {"hint_conflict", mental.hint_conflict},
          {"tie_seed", mental.tie_seed}};
}

MentalModel mental_from_json(const nlohmann::json& doc) {
  MentalModel m;
  m.confirmed = doc.at("confirmed").get<std::set<std::string>>();
  m.denied = doc.at("denied").get<std::set<std::string>>();
  m.confirmed_turn = doc.at("confirmed_turn").get<std::map<std::string, int>>();
  for (const auto& h : doc.at("hints")) m.hints.push_back({h.at("tag").get<std::string>(), h.at("turn").get<int>()});
  for (const auto& h : doc.at("hypotheses")) {
    m.hypotheses.push_back({h.at("members").get<std::vector<std::string>>(), h.at("weight").get<double>()});
  }
  for (const auto& [dim, level] : doc.at("inferred_values").items()) {
    m.inferred_values[dim] = tasks::parse_value_level(level.get<std::string>());
  }
  m.past_episode_goals = doc.at("past_episode_goals").get<std::vector<std::set<std::string>>>();
  m.turn = doc.at("turn").get<int>();
  m.hint_conflict = doc.at("hint_conflict").get<bool>();
  m.tie_seed = doc.at("tie_seed").get<std::uint64_t>();
  return m;
}

}  // namespace homeassist::agent
