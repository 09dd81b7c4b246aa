#include <gtest/gtest.h>

#include <map>

#include "homeassist/baselines.hpp"
#include "homeassist/errors.hpp"
#include "homeassist/harness.hpp"
#include "test_support.hpp"

using namespace homeassist;
using namespace homeassist::baselines;

namespace {

std::vector<MenuEntry> menu_for(const world::SceneState& s) {
  const auto obs = world::observe(s);
  const auto names = world::names_of(obs);
  std::vector<MenuEntry> menu;
  for (const auto& a : world::available_actions(obs)) menu.push_back({a, world::describe(a, names)});
  return menu;
}

bool in_menu(const std::vector<MenuEntry>& menu, const world::Action& a) {
  if (std::holds_alternative<world::Send>(a)) {
    return std::any_of(menu.begin(), menu.end(), [](const auto& m) { return std::holds_alternative<world::Send>(m.action); });
  }
  return std::any_of(menu.begin(), menu.end(), [&](const auto& m) { return m.action == a; });
}

// Drives an agent for `steps` actions on a scene, checking every action
// against the legal menu of the state it was chosen in.
void drive_and_check_legal(agent::Agent& agent, const tasks::TaskSpec& spec, std::uint64_t seed, int steps) {
  auto state = world::build_scene(spec, seed);
  agent.begin_episode(spec, 1);
  for (int i = 0; i < steps; ++i) {
    const auto menu = menu_for(state);
    agent.sync_world_model(state);
    const auto a = agent.act(world::observe(state));
    ASSERT_TRUE(in_menu(menu, a)) << world::describe(a, world::names_of(state));
    const auto event = world::apply_action_in_place(state, a);
    EXPECT_FALSE(event.rejected());
    agent.observe_outcome(a, event, Rational(0));
  }
}

}  // namespace

TEST(SuccessMemory, HitRateIsLaplaceSmoothed) {
  SuccessMemory m;
  EXPECT_DOUBLE_EQ(m.hit_rate("wine"), 0.5);
  m.record(1, "wine", true);
  m.record(1, "chips", false);
  m.record(2, "wine", true);
  EXPECT_DOUBLE_EQ(m.hit_rate("wine"), 3.0 / 4.0);
  EXPECT_DOUBLE_EQ(m.hit_rate("chips"), 1.0 / 3.0);
  EXPECT_EQ(m.achieved_summary(), "Episode 1: wine\nEpisode 2: wine");
  EXPECT_EQ(SuccessMemory{}.achieved_summary(), "None");
  EXPECT_EQ(SuccessMemory::from_json(m.to_json()).entries(), m.entries());
  EXPECT_THROW(SuccessMemory::from_json({{"success_memory", {{{"episode", 1}}}}}), MemoryFormatError);
}

TEST(SuccessMemory, EmptyMemorySamplesSubsetsUniformly) {
  const auto pool = testing_support::snack_m().potential_goals;
  SuccessMemory empty;
  Rng rng(2024);
  std::map<std::set<std::string>, int> counts;
  constexpr int kDraws = 10000;
  for (int i = 0; i < kDraws; ++i) {
    const auto c = sample_candidate(empty, pool, {}, 2, rng);
    ASSERT_EQ(c.size(), 2u);
    ++counts[{c.begin(), c.end()}];
  }
  ASSERT_EQ(counts.size(), 45u);
  const double expected = kDraws / 45.0;
  double chi2 = 0.0;
  for (const auto& [_, n] : counts) chi2 += (n - expected) * (n - expected) / expected;
  // 44 degrees of freedom; 78.75 is the 0.999 quantile.
  EXPECT_LT(chi2, 78.75);
}

TEST(SuccessMemory, SuccessesRaiseSelectionOdds) {
  const auto pool = testing_support::snack_m().potential_goals;
  SuccessMemory m;
  for (int e = 1; e <= 3; ++e) m.record(e, "wine", true);
  Rng rng(7);
  int with_wine = 0;
  constexpr int kDraws = 4000;
  for (int i = 0; i < kDraws; ++i) {
    const auto c = sample_candidate(m, pool, {}, 2, rng);
    with_wine += std::count(c.begin(), c.end(), "wine");
  }
  // Oracle: wine (rate 4/5) drawn first, or second after one of the nine
  // others (rate 1/2 each).
  const double w = 0.8;
  const double total = w + 9 * 0.5;
  const double oracle = w / total + 9 * (0.5 / total) * (w / (total - 0.5));
  EXPECT_NEAR(with_wine / static_cast<double>(kDraws), oracle, 0.02);
  // Uniform draws include wine with probability 1/5.
  EXPECT_GT(oracle, 0.25);

  const auto excluded = sample_candidate(m, pool, {"wine"}, 9, rng);
  EXPECT_EQ(excluded.size(), 9u);
  EXPECT_EQ(std::count(excluded.begin(), excluded.end(), "wine"), 0);
}

TEST(Mhp, NeverSendsAndIsDeterministic) {
  const auto spec = testing_support::snack_m();
  MhpOptions o;
  o.playouts = 8;
  o.depth = 8;
  o.seed = 3;
  MhpAgent a(o);
  MhpAgent b(o);
  EXPECT_FALSE(a.communicates());
  auto sa = world::build_scene(spec, 3);
  auto sb = sa;
  a.begin_episode(spec, 1);
  b.begin_episode(spec, 1);
  EXPECT_EQ(a.candidate(), b.candidate());
  EXPECT_EQ(a.candidate().size(), 2u);
  for (int i = 0; i < 60; ++i) {
    a.sync_world_model(sa);
    b.sync_world_model(sb);
    const auto x = a.act(world::observe(sa));
    const auto y = b.act(world::observe(sb));
    ASSERT_EQ(x, y);
    EXPECT_FALSE(std::holds_alternative<world::Send>(x));
    world::apply_action_in_place(sa, x);
    world::apply_action_in_place(sb, y);
  }
  EXPECT_THROW(MhpAgent(MhpOptions{0, 1}), ConfigurationError);
  MhpAgent blind(o);
  blind.begin_episode(spec, 1);
  EXPECT_THROW(blind.act(world::observe(sa)), ContractViolation);
}

TEST(Mhp, ActionsAreLegal) {
  MhpOptions o;
  o.playouts = 4;
  o.depth = 6;
  for (std::uint64_t seed = 0; seed < 3; ++seed) {
    o.seed = seed;
    MhpAgent agent(o);
    drive_and_check_legal(agent, testing_support::snack_m(), seed, 40);
  }
}

TEST(Mhp, WrongPlacementSwapsTheGuess) {
  const auto spec = testing_support::snack_m();
  MhpAgent agent(MhpOptions{4, 4, 0.95, 0.2, 1});
  agent.begin_episode(spec, 1);
  const auto first = agent.candidate();
  world::TransitionEvent miss{world::Placed{world::ObjectId{200}, first.front(), world::ObjectId{100}, spec.target_surface}};
  agent.observe_outcome(world::Wait{}, miss, Rational(-1, 4));
  EXPECT_EQ(agent.candidate().size(), 2u);
  EXPECT_EQ(std::count(agent.candidate().begin(), agent.candidate().end(), first.front()), 0);
  ASSERT_EQ(agent.success_memory().entries().size(), 1u);
  EXPECT_FALSE(agent.success_memory().entries()[0].achieved);
}

TEST(ParseActionReply, Fixtures) {
  const auto s = world::build_scene(testing_support::snack_m(), 1);
  const auto menu = menu_for(s);
  ASSERT_FALSE(menu.empty());
  // Exact line.
  for (const auto& m : menu) {
    const auto parsed = parse_action_reply("Best Next Action: " + m.text, menu);
    ASSERT_TRUE(parsed.has_value()) << m.text;
    EXPECT_EQ(*parsed, m.action) << m.text;
  }
  EXPECT_EQ(parse_action_reply("I think I should go to <bedroom>.", menu),
            world::Action(world::GoToRoom{Room::Bedroom}));
  EXPECT_EQ(parse_action_reply("Let me wait here.", menu), world::Action(world::Wait{}));
  EXPECT_EQ(parse_action_reply("Answer: [gotoroom] <kitchen> (99)", menu), std::nullopt);
  EXPECT_EQ(parse_action_reply("Nothing to do really.", menu), std::nullopt);
  EXPECT_EQ(parse_action_reply("[grab] <unicorn> (5)", menu), std::nullopt);
}

TEST(ChatAgents, UnparseableTwiceMeansWait) {
  const auto spec = testing_support::snack_m();
  lm::MockChatBackend backend(0, {{0, "hmm"}, {1, "no idea"}});
  NaiveChatAgent agent(backend);
  agent.begin_episode(spec, 1);
  const auto s = world::build_scene(spec, 2);
  EXPECT_EQ(agent.act(world::observe(s)), world::Action(world::Wait{}));
  EXPECT_EQ(backend.calls(), 2);
}

TEST(ChatAgents, PromptsCarryTaskAndMenu) {
  const auto spec = testing_support::snack_m();
  lm::MockChatBackend backend(0);
  NaiveChatAgent coela(backend);
  coela.begin_episode(spec, 1);
  const auto obs = world::observe(world::build_scene(spec, 2));
  const auto p = coela.planning_prompt(obs);
  EXPECT_NE(p.find("2 object(s) determined by human user"), std::string::npos);
  EXPECT_NE(p.find("on the coffeetable"), std::string::npos);
  EXPECT_NE(p.find("[send_message]"), std::string::npos);
  EXPECT_EQ(p.find('$'), std::string::npos);

  ProAgent pro(backend);
  pro.begin_episode(spec, 1);
  const auto q = pro.prompt(obs);
  EXPECT_NE(q.find("object(s) determined by human user"), std::string::npos);
  EXPECT_EQ(q.find("[send_message]"), std::string::npos);
  EXPECT_NE(q.find("None"), std::string::npos);
}

TEST(ChatAgents, ProAgentShowsEarlierSuccesses) {
  const auto spec = testing_support::snack_m();
  lm::MockChatBackend backend(0);
  ProAgent pro(backend);
  pro.begin_episode(spec, 1);
  world::TransitionEvent hit{world::Placed{world::ObjectId{110}, "wine", world::ObjectId{100}, spec.target_surface}};
  pro.observe_outcome(world::Wait{}, hit, Rational(1, 2));
  pro.end_episode();
  pro.begin_episode(spec, 2);
  pro.begin_episode(spec, 3);
  const auto q = pro.prompt(world::observe(world::build_scene(spec, 2)));
  EXPECT_NE(q.find("Episode 1: wine"), std::string::npos);
  EXPECT_FALSE(pro.communicates());
  EXPECT_EQ(pro.memory_document(), pro.success_memory().to_json());
}

TEST(ChatAgents, ActionsAreAlwaysLegal) {
  const auto spec = testing_support::snack_m();
  for (std::uint64_t seed = 0; seed < 3; ++seed) {
    lm::MockChatBackend b1(seed);
    NaiveChatAgent coela(b1);
    drive_and_check_legal(coela, spec, seed, 30);
    lm::MockChatBackend b2(seed);
    ProAgent pro(b2);
    drive_and_check_legal(pro, spec, seed, 30);
  }
}

TEST(ChatAgents, BackendFailureMeansWait) {
  struct Down : lm::ChatBackend {
    std::string do_chat(std::span<const lm::ChatExchange>) override { throw BackendUnavailable("down"); }
  };
  Down down;
  ProAgent pro(down);
  const auto spec = testing_support::snack_m();
  pro.begin_episode(spec, 1);
  EXPECT_EQ(pro.act(world::observe(world::build_scene(spec, 1))), world::Action(world::Wait{}));
}
