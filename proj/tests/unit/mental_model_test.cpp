#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>

#include "homeassist/errors.hpp"
#include "homeassist/mental_model.hpp"
#include "test_support.hpp"

using namespace homeassist;
using namespace homeassist::agent;

namespace {

user::UserReply reply(std::set<std::string> confirmed, std::set<std::string> denied = {},
                      std::set<std::string> hints = {}) {
  return {"", std::move(confirmed), std::move(denied), std::move(hints)};
}

MentalModel fresh(const tasks::TaskSpec& spec, std::uint64_t tie_seed = 0) {
  MentalModel m;
  m.tie_seed = tie_seed;
  reset_for_episode(m, spec);
  return m;
}

double weight_sum(const MentalModel& m) {
  return std::accumulate(m.hypotheses.begin(), m.hypotheses.end(), 0.0,
                         [](double s, const Hypothesis& h) { return s + h.weight; });
}

bool contains(const Hypothesis& h, const std::string& cls) {
  return std::find(h.members.begin(), h.members.end(), cls) != h.members.end();
}

const Hypothesis* find_set(const MentalModel& m, std::vector<std::string> members) {
  std::sort(members.begin(), members.end());
  for (const auto& h : m.hypotheses) {
    if (h.members == members) return &h;
  }
  return nullptr;
}

}  // namespace

TEST(MentalModel, UninformedPriorIsUniformOverAllSubsets) {
  const auto spec = testing_support::snack_m();
  const auto m = fresh(spec);
  ASSERT_EQ(m.hypotheses.size(), 45u);
  std::set<std::vector<std::string>> distinct;
  for (const auto& h : m.hypotheses) {
    EXPECT_NEAR(h.weight, 1.0 / 45.0, 1e-12);
    EXPECT_TRUE(std::is_sorted(h.members.begin(), h.members.end()));
    distinct.insert(h.members);
  }
  EXPECT_EQ(distinct.size(), 45u);
  EXPECT_NEAR(hypothesis_entropy(m), std::log(45.0), 1e-9);
  EXPECT_EQ(fresh(testing_support::snack_l()).hypotheses.size(), 210u);
}

TEST(MentalModel, ConfirmationPrunesToSubsetFilter) {
  const auto spec = testing_support::snack_m();
  auto m = fresh(spec);
  const auto before = m.hypotheses;
  confirm_goals(reply({"juice"}, {"wine"}), m, spec);
  // Oracle: filter the original 45 by the predicate directly.
  std::set<std::vector<std::string>> expected;
  for (const auto& h : before) {
    if (contains(h, "juice") && !contains(h, "wine")) expected.insert(h.members);
  }
  std::set<std::vector<std::string>> got;
  for (const auto& h : m.hypotheses) got.insert(h.members);
  EXPECT_EQ(got, expected);
  EXPECT_EQ(got.size(), 8u);
  EXPECT_NEAR(weight_sum(m), 1.0, 1e-12);
  EXPECT_EQ(m.confirmed_turn.at("juice"), 1);
}

TEST(MentalModel, EmptyReplyOnlyLogsHints) {
  const auto spec = testing_support::snack_m();
  auto m = fresh(spec);
  const auto before = m;
  confirm_goals(reply({}, {}, {"sweet"}), m, spec);
  EXPECT_EQ(m.confirmed, before.confirmed);
  EXPECT_EQ(m.denied, before.denied);
  EXPECT_EQ(m.hypotheses.size(), before.hypotheses.size());
  ASSERT_EQ(m.hints.size(), 1u);
  EXPECT_EQ(m.hints[0], (Hint{"sweet", 1}));
}

TEST(MentalModel, ContradictionsThrow) {
  const auto spec = testing_support::snack_m();
  auto m = fresh(spec);
  confirm_goals(reply({"juice"}, {"wine"}), m, spec);
  EXPECT_THROW(confirm_goals(reply({"wine"}), m, spec), ContradictionError);
  EXPECT_THROW(confirm_goals(reply({}, {"juice"}), m, spec), ContradictionError);
  EXPECT_THROW(confirm_goals(reply({"milk"}, {"milk"}), m, spec), ContradictionError);
}

TEST(MentalModel, HintsRankCarriersFirst) {
  const auto spec = testing_support::snack_m();
  auto m = fresh(spec);
  confirm_goals(reply({}, {}, {"crunchy", "refreshing"}), m, spec);
  infer_desires(m, spec);
  // Oracle: exhaustive score = product over hints of (carried ? 1 : eps).
  auto oracle = [&](const Hypothesis& h) {
    double w = 1.0;
    for (const char* tag : {"crunchy", "refreshing"}) {
      bool carried = false;
      for (const auto& x : h.members) carried = carried || spec.properties_of(x).contains(tag);
      if (!carried) w *= kHintMismatch;
    }
    return w;
  };
  const auto* best = find_set(m, {"chips", "juice"});
  ASSERT_NE(best, nullptr);
  for (const auto& h : m.hypotheses) {
    if (!contains(h, "chips") && !contains(h, "juice")) {
      EXPECT_GT(best->weight, h.weight);
    }
    for (const auto& g : m.hypotheses) {
      if (oracle(h) > oracle(g) * 1.5) {
        EXPECT_GT(h.weight, g.weight);
      }
    }
  }
  EXPECT_NEAR(m.hypotheses.front().weight, best->weight, 1e-12);
}

TEST(MentalModel, HintsAreJudgedAtTheTurnTheyWereGiven) {
  const auto spec = testing_support::snack_m();
  auto ratio = [&](bool hint_first) {
    auto m = fresh(spec);
    if (hint_first) confirm_goals(reply({}, {}, {"sweet"}), m, spec);
    confirm_goals(reply({"cupcake"}), m, spec);
    if (!hint_first) confirm_goals(reply({}, {}, {"sweet"}), m, spec);
    infer_desires(m, spec);
    const auto prior = value_prior(spec, m.inferred_values, "pudding") / value_prior(spec, m.inferred_values, "chips");
    return find_set(m, {"cupcake", "pudding"})->weight / find_set(m, {"cupcake", "chips"})->weight / prior;
  };
  // Before confirmation cupcake itself explains the hint; afterwards only an
  // unconfirmed member can.
  EXPECT_NEAR(ratio(true), 1.0, 1e-9);
  EXPECT_NEAR(ratio(false), 1.0 / kHintMismatch, 1e-6);
}

TEST(MentalModel, UniqueHintCarrierIsDeduced) {
  const auto spec = testing_support::snack_m();
  auto m = fresh(spec);
  // Only wine is alcoholic.
  confirm_goals(reply({"chips"}, {}, {"alcoholic"}), m, spec);
  EXPECT_EQ(m.confirmed, (std::set<std::string>{"chips", "wine"}));
  EXPECT_EQ(m.confirmed_turn.at("wine"), kDeducedTurn);
  ASSERT_EQ(m.hypotheses.size(), 1u);
  EXPECT_EQ(m.hypotheses[0].members, (std::vector<std::string>{"chips", "wine"}));

  // Crunchy fits cereal and chips; denying chips leaves cereal.
  auto n = fresh(spec);
  confirm_goals(reply({}, {}, {"crunchy"}), n, spec);
  EXPECT_TRUE(n.confirmed.empty());
  confirm_goals(reply({}, {"chips"}), n, spec);
  EXPECT_EQ(n.confirmed, std::set<std::string>{"cereal"});
}

TEST(MentalModel, ExplainedHintsDeduceNothing) {
  const auto spec = testing_support::snack_m();
  auto m = fresh(spec);
  // Sweet before pudding was confirmed: pudding may be the carrier.
  confirm_goals(reply({}, {"cupcake", "creamybuns"}, {"sweet"}), m, spec);
  confirm_goals(reply({"pudding"}), m, spec);
  EXPECT_EQ(m.confirmed, std::set<std::string>{"pudding"});
  // Sweet in the same reply that confirms pudding is about another goal.
  auto n = fresh(spec);
  confirm_goals(reply({"pudding"}, {"cupcake", "creamybuns"}, {"sweet"}), n, spec);
  EXPECT_EQ(n.confirmed, (std::set<std::string>{"chocolatesyrup", "pudding"}));
}

TEST(MentalModel, DeductionsStayOpenToLaterHints) {
  const auto spec = testing_support::snack_l();
  auto m = fresh(spec);
  confirm_goals(reply({}, {}, {"rich"}), m, spec);
  ASSERT_TRUE(m.confirmed.contains("chocolatesyrup"));
  // The user never confirmed chocolatesyrup, so a later sweet hint may still
  // be about it; cupcake must not be concluded.
  confirm_goals(reply({}, {"pudding", "creamybuns"}, {"sweet"}), m, spec);
  EXPECT_EQ(m.confirmed, std::set<std::string>{"chocolatesyrup"});
  // A denial withdraws a deduction instead of contradicting it.
  EXPECT_NO_THROW(confirm_goals(reply({}, {"chocolatesyrup"}), m, spec));
  EXPECT_FALSE(m.confirmed.contains("chocolatesyrup"));
  EXPECT_FALSE(m.confirmed_turn.contains("chocolatesyrup"));
  // A later explicit confirmation replaces the sentinel turn.
  auto n = fresh(spec);
  confirm_goals(reply({}, {}, {"rich"}), n, spec);
  confirm_goals(reply({"chocolatesyrup"}), n, spec);
  EXPECT_EQ(n.confirmed_turn.at("chocolatesyrup"), 2);
}

TEST(MentalModel, PastGoalsBoostAffineClasses) {
  const auto spec = testing_support::snack_m();
  MentalModel with_past;
  with_past.past_episode_goals = {{"wine", "chips"}};
  reset_for_episode(with_past, spec);
  const auto plain = fresh(spec);
  EXPECT_EQ(with_past.inferred_values.at("Alcoholic"), tasks::ValueLevel::Very);
  EXPECT_EQ(with_past.inferred_values.at("Fruitarian"), tasks::ValueLevel::Not);
  // Oracle: re-score every subset by the product of priors.
  auto oracle = [&](const Hypothesis& h) {
    double w = 1.0;
    for (const auto& x : h.members) w *= value_prior(spec, with_past.inferred_values, x);
    return w;
  };
  for (std::size_t i = 1; i < with_past.hypotheses.size(); ++i) {
    EXPECT_GE(oracle(with_past.hypotheses[i - 1]) * (1 + 1e-9), oracle(with_past.hypotheses[i]));
  }
  EXPECT_TRUE(contains(with_past.hypotheses.front(), "wine"));
  double wine_mass = 0.0;
  double plain_wine_mass = 0.0;
  for (const auto& h : with_past.hypotheses) wine_mass += contains(h, "wine") ? h.weight : 0.0;
  for (const auto& h : plain.hypotheses) plain_wine_mass += contains(h, "wine") ? h.weight : 0.0;
  EXPECT_GT(wine_mass, plain_wine_mass);
}

TEST(MentalModel, EstimateValuesThresholds) {
  const auto spec = testing_support::snack_m();
  const auto v = estimate_values(spec, {{"wine", "apple"}, {"wine", "chips"}});
  EXPECT_EQ(v.at("Alcoholic"), tasks::ValueLevel::Very);
  EXPECT_EQ(v.at("Fruitarian"), tasks::ValueLevel::Somewhat);
  EXPECT_EQ(v.at("Hungry"), tasks::ValueLevel::Somewhat);
  EXPECT_EQ(v.at("Thirsty"), tasks::ValueLevel::Not);
  EXPECT_DOUBLE_EQ(value_prior(spec, v, "wine"), 7.0);
  EXPECT_DOUBLE_EQ(value_prior(spec, v, "milk"), 1.0);
  EXPECT_TRUE(estimate_values(spec, {}).size() == 5u);
}

TEST(MentalModel, TieOrderDependsOnSeedOnly) {
  const auto spec = testing_support::snack_m();
  EXPECT_EQ(fresh(spec, 4).hypotheses, fresh(spec, 4).hypotheses);
  EXPECT_NE(fresh(spec, 4).hypotheses.front().members, fresh(spec, 5).hypotheses.front().members);
}

TEST(MentalModel, TopMembers) {
  const auto spec = testing_support::snack_m();
  auto m = fresh(spec);
  confirm_goals(reply({"juice"}), m, spec);
  const auto top = top_members(m, 3);
  EXPECT_TRUE(top.contains("juice"));
  EXPECT_LE(top.size(), 4u);
  EXPECT_EQ(top_members(m, 0).size(), 0u);
}

TEST(MentalModel, LargeVocabularyUsesMarginals) {
  auto spec = testing_support::snack_m();
  spec.id = "big";
  for (int i = 0; i < 20; ++i) {
    spec.potential_goals.push_back("item" + std::to_string(i));
    spec.property_table["item" + std::to_string(i)] = {"plain"};
  }
  spec.goal_count = 6;
  ASSERT_GT(tasks::goal_hypothesis_count(spec), kMaxEnumerated);
  auto m = fresh(spec);
  ASSERT_EQ(m.hypotheses.size(), 1u);
  EXPECT_EQ(m.hypotheses[0].members.size(), 6u);
  confirm_goals(reply({"item3"}, {"wine"}, {"crunchy"}), m, spec);
  infer_desires(m, spec);
  ASSERT_EQ(m.hypotheses.size(), 1u);
  EXPECT_TRUE(contains(m.hypotheses[0], "item3"));
  EXPECT_FALSE(contains(m.hypotheses[0], "wine"));
  EXPECT_TRUE(contains(m.hypotheses[0], "chips") || contains(m.hypotheses[0], "cereal"));
}

// Soundness: answering with the truthful scripted user never prunes the true
// set, and weights always sum to one.
TEST(MentalModel, TrueSetSurvivesRandomDialoguesProperty) {
  std::mt19937_64 rng(99);
  for (const auto& spec : {testing_support::snack_m(), testing_support::table_m(), testing_support::snack_l()}) {
    for (int trial = 0; trial < 150; ++trial) {
      auto pool = spec.potential_goals;
      std::shuffle(pool.begin(), pool.end(), rng);
      user::UserState user;
      user.goal.goals = {pool.begin(), pool.begin() + spec.goal_count};
      user.episode_index = 1 + static_cast<int>(rng() % 3);
      const std::vector<std::string> truth(user.goal.goals.begin(), user.goal.goals.end());
      auto m = fresh(spec, rng());
      for (int turn = 0; turn < 6; ++turn) {
        std::shuffle(pool.begin(), pool.end(), rng);
        const std::set<std::string> guess(pool.begin(), pool.begin() + 1 + static_cast<long>(rng() % 5));
        auto r = user::scripted_respond(user, spec, guess, rng());
        user.confirmed.insert(r.confirmed.begin(), r.confirmed.end());
        ++user.turn;
        confirm_goals(r, m, spec);
        if (rng() % 2) infer_desires(m, spec);
        ASSERT_NE(find_set(m, truth), nullptr);
        for (const auto& c : m.confirmed) ASSERT_TRUE(user.goal.goals.contains(c)) << c;
        ASSERT_NEAR(weight_sum(m), 1.0, 1e-9);
        ASSERT_FALSE(m.hint_conflict);
      }
    }
  }
}

TEST(MentalModel, JsonRoundTrip) {
  const auto spec = testing_support::snack_m();
  auto m = fresh(spec, 77);
  m.past_episode_goals = {{"wine", "milk"}};
  confirm_goals(reply({"juice"}, {"cereal"}, {"sweet"}), m, spec);
  infer_desires(m, spec);
  const auto back = mental_from_json(nlohmann::json::parse(to_json(m).dump()));
  EXPECT_EQ(back, m);
}
