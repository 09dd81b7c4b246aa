#include <gtest/gtest.h>

#include <algorithm>
#include <map>
#include <random>

#include "homeassist/errors.hpp"
#include "homeassist/world.hpp"
#include "test_support.hpp"

using namespace homeassist;
using namespace homeassist::world;
using testing_support::id_of;

namespace {

// Tiny kitchen: a closed fridge holding milk, juice on the floor, a counter
// in the kitchen and a table in the living room.
SceneState tiny_scene() {
  std::vector<ObjectRecord> objects{
      {ObjectId{1}, "fridge", ObjectKind::Container, Location::in_room(Room::Kitchen), {}},
      {ObjectId{2}, "counter", ObjectKind::Surface, Location::in_room(Room::Kitchen), {}},
      {ObjectId{3}, "table", ObjectKind::Surface, Location::in_room(Room::LivingRoom), {}},
      {ObjectId{4}, "milk", ObjectKind::Graspable, Location::inside(ObjectId{1}), {"creamy"}},
      {ObjectId{5}, "juice", ObjectKind::Graspable, Location::in_room(Room::Kitchen), {"refreshing"}},
      {ObjectId{6}, "apple", ObjectKind::Graspable, Location::in_room(Room::Kitchen), {"fruity"}},
      {ObjectId{7}, "cereal", ObjectKind::Graspable, Location::in_room(Room::Bedroom), {}},
  };
  return SceneState(std::move(objects), Room::Kitchen);
}

std::vector<Action> candidate_actions(const SceneState& s) {
  std::vector<Action> out;
  for (Room r : kAllRooms) out.emplace_back(GoToRoom{r});
  for (auto id : s.object_ids()) {
    out.emplace_back(Open{id});
    out.emplace_back(Grab{id});
    for (auto sid : s.object_ids()) out.emplace_back(PutOn{id, sid});
  }
  out.emplace_back(Grab{ObjectId{999}});
  out.emplace_back(Wait{});
  out.emplace_back(Send{"hello"});
  return out;
}

bool is_send(const Action& a) { return std::holds_alternative<Send>(a); }

bool listed(const std::vector<Action>& menu, const Action& a) {
  if (is_send(a)) return std::any_of(menu.begin(), menu.end(), is_send);
  return std::find(menu.begin(), menu.end(), a) != menu.end();
}

std::multiset<int> ids(const SceneState& s) {
  std::multiset<int> out;
  for (auto id : s.object_ids()) out.insert(id.value);
  return out;
}

}  // namespace

TEST(World, BuildSceneHasEveryGoalAndIsSeeded) {
  const auto spec = testing_support::snack_m();
  const auto a = build_scene(spec, 7);
  for (const auto& g : spec.potential_goals) EXPECT_TRUE(a.find(g).has_value()) << g;
  EXPECT_EQ(a, build_scene(spec, 7));
  const auto b = build_scene(spec, 8);
  bool differs = false;
  for (const auto& g : spec.potential_goals) differs = differs || !(a.location(*a.find(g)) == b.location(*b.find(g)));
  EXPECT_TRUE(differs);
  EXPECT_EQ(a.agent_room(), Room::Kitchen);
  EXPECT_EQ(a.step_count(), 0);
}

TEST(World, ClosedContainerHidesUntilOpened) {
  auto s = tiny_scene();
  auto [s1, e1] = apply_action(s, Grab{ObjectId{4}});
  ASSERT_TRUE(e1.rejected());
  EXPECT_EQ(std::get<Rejected>(e1.value).reason, RejectReason::NotVisible);
  auto obs = observe(s);
  EXPECT_TRUE(std::none_of(obs.visible_objects.begin(), obs.visible_objects.end(),
                           [](const SeenObject& o) { return o.class_name == "milk"; }));

  auto [s2, e2] = apply_action(s1, Open{ObjectId{1}});
  ASSERT_TRUE(std::holds_alternative<Opened>(e2.value));
  obs = observe(s2);
  auto milk = std::find_if(obs.visible_objects.begin(), obs.visible_objects.end(),
                           [](const SeenObject& o) { return o.class_name == "milk"; });
  ASSERT_NE(milk, obs.visible_objects.end());
  EXPECT_EQ(milk->location, Location::inside(ObjectId{1}));
  auto [s3, e3] = apply_action(s2, Grab{ObjectId{4}});
  EXPECT_TRUE(std::holds_alternative<Grabbed>(e3.value));
  EXPECT_EQ(s3.step_count(), 3);

  auto [s4, e4] = apply_action(s3, GoToRoom{Room::LivingRoom});
  obs = observe(s4);
  EXPECT_TRUE(std::none_of(obs.visible_objects.begin(), obs.visible_objects.end(),
                           [](const SeenObject& o) { return o.class_name == "juice"; }));
  ASSERT_EQ(obs.held.size(), 1u);
  EXPECT_EQ(obs.held.front().class_name, "milk");
}

TEST(World, RejectionReasons) {
  auto s = tiny_scene();
  auto reason = [](const TransitionEvent& e) { return std::get<Rejected>(e.value).reason; };
  EXPECT_EQ(reason(apply_action(s, GoToRoom{Room::Kitchen}).second), RejectReason::AlreadyThere);
  EXPECT_EQ(reason(apply_action(s, Grab{ObjectId{42}}).second), RejectReason::UnknownObject);
  EXPECT_EQ(reason(apply_action(s, Grab{ObjectId{1}}).second), RejectReason::NotGraspable);
  EXPECT_EQ(reason(apply_action(s, Open{ObjectId{5}}).second), RejectReason::NotAContainer);
  EXPECT_EQ(reason(apply_action(s, PutOn{ObjectId{5}, ObjectId{2}}).second), RejectReason::NotHeld);
  EXPECT_EQ(reason(apply_action(s, Grab{ObjectId{7}}).second), RejectReason::NotVisible);
  s = apply_action(s, Grab{ObjectId{5}}).first;
  EXPECT_EQ(reason(apply_action(s, Grab{ObjectId{5}}).second), RejectReason::AlreadyHeld);
  EXPECT_EQ(reason(apply_action(s, PutOn{ObjectId{5}, ObjectId{6}}).second), RejectReason::NotASurface);
  EXPECT_EQ(reason(apply_action(s, PutOn{ObjectId{5}, ObjectId{3}}).second), RejectReason::SurfaceNotHere);
  s = apply_action(s, Grab{ObjectId{6}}).first;
  s = apply_action(s, Open{ObjectId{1}}).first;
  EXPECT_EQ(reason(apply_action(s, Grab{ObjectId{4}}).second), RejectReason::HandsFull);
  EXPECT_EQ(reason(apply_action(s, Open{ObjectId{1}}).second), RejectReason::AlreadyOpen);
}

TEST(World, RejectedAndWaitOnlyAdvanceStep) {
  const auto s = tiny_scene();
  for (const Action& a : {Action{Wait{}}, Action{Grab{ObjectId{7}}}, Action{Send{"hi"}}}) {
    auto [next, event] = apply_action(s, a);
    EXPECT_EQ(next.step_count(), s.step_count() + 1);
    EXPECT_EQ(scene_to_json(next).dump(), [&] {
      auto j = scene_to_json(s);
      j["step_count"] = 1;
      return j.dump();
    }());
  }
  EXPECT_THROW(Send{"  "}, std::invalid_argument);
}

TEST(World, PutOnProducesPlacedEvent) {
  auto s = tiny_scene();
  s = apply_action(s, Grab{ObjectId{5}}).first;
  s = apply_action(s, GoToRoom{Room::LivingRoom}).first;
  auto [after, event] = apply_action(s, PutOn{ObjectId{5}, ObjectId{3}});
  const auto* p = event.placed();
  ASSERT_NE(p, nullptr);
  EXPECT_EQ(p->object_class, "juice");
  EXPECT_EQ(p->surface_class, "table");
  EXPECT_EQ(after.location(ObjectId{5}), Location::on(ObjectId{3}));
  EXPECT_TRUE(after.agent_hands().empty());
}

// legal_actions is exactly the set of non-rejected transitions, plus Send
// and Wait, checked over every state of random walks on the tiny scene and a
// builtin scene.
TEST(World, LegalActionsSoundAndCompleteProperty) {
  std::mt19937_64 rng(5);
  for (auto start : {tiny_scene(), build_scene(testing_support::snack_m(), 3)}) {
    for (int walk = 0; walk < 20; ++walk) {
      auto s = start;
      for (int step = 0; step < 25; ++step) {
        const auto menu = legal_actions(s);
        EXPECT_TRUE(std::any_of(menu.begin(), menu.end(), is_send));
        EXPECT_TRUE(listed(menu, Wait{}));
        for (const auto& a : candidate_actions(s)) {
          const bool ok = !apply_action(s, a).second.rejected();
          ASSERT_EQ(ok, listed(menu, a)) << describe(a, names_of(s));
        }
        auto [next, event] = apply_action(s, menu[rng() % menu.size()]);
        ASSERT_LE(next.agent_hands().size(), 2u);
        ASSERT_EQ(ids(next), ids(s));
        s = next;
      }
    }
  }
}

TEST(World, HoldingTwoMeansNoGrab) {
  auto s = tiny_scene();
  s = apply_action(s, Grab{ObjectId{5}}).first;
  s = apply_action(s, Grab{ObjectId{6}}).first;
  for (const auto& a : legal_actions(s)) EXPECT_FALSE(std::holds_alternative<Grab>(a));
  const auto fresh = legal_actions(tiny_scene());
  EXPECT_TRUE(listed(fresh, Open{ObjectId{1}}));
  EXPECT_FALSE(listed(fresh, Grab{ObjectId{1}}));
}

TEST(World, DescribeUsesNameIdConvention) {
  const auto s = tiny_scene();
  EXPECT_EQ(describe(Grab{ObjectId{5}}, names_of(s)), "[grab] <juice> (5)");
  EXPECT_EQ(describe(PutOn{ObjectId{5}, ObjectId{2}}, names_of(s)), "[putback] <juice> (5) on <counter> (2)");
  EXPECT_EQ(describe(GoToRoom{Room::Bedroom}, names_of(s)), "[gotoroom] <bedroom> (3)");
  EXPECT_EQ(describe(TransitionEvent{Rejected{RejectReason::HandsFull}}), "Rejected(HandsFull)");
}

TEST(World, SceneJsonRoundTrip) {
  auto s = build_scene(testing_support::snack_l(), 21);
  s = apply_action(s, Open{id_of(s, "fridge")}).first;
  const auto back = scene_from_json(scene_to_json(s));
  EXPECT_EQ(back, s);
  EXPECT_EQ(scene_to_json(back).dump(), scene_to_json(s).dump());
  auto broken = scene_to_json(s);
  broken["objects"][0]["id"] = 5000;
  EXPECT_THROW(scene_from_json(broken), ConfigurationError);
}

TEST(World, ConstructorRejectsDanglingContainment) {
  std::vector<ObjectRecord> objects{
      {ObjectId{1}, "milk", ObjectKind::Graspable, Location::inside(ObjectId{9}), {}},
  };
  EXPECT_THROW(SceneState(objects, Room::Kitchen), ConfigurationError);
}
