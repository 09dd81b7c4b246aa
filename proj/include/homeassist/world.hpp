#pragma once

// Symbolic household world: scene construction, the transition function and
// partial observations. Object articulation is limited to opening containers.

#include <array>
#include <compare>
#include <cstdint>
#include <functional>
#include <memory>
#include <optional>
#include <set>
#include <span>
#include <string>
#include <utility>
#include <variant>
#include <vector>

#include "homeassist/room.hpp"
#include "homeassist/tasks.hpp"
#include "json.hpp"

namespace homeassist::world {

struct ObjectId {
  int value = 0;
  friend auto operator<=>(const ObjectId&, const ObjectId&) = default;
};

enum class ObjectKind { Graspable, Container, Surface };
std::string_view to_string(ObjectKind kind);

enum class LocationKind { InRoom, Inside, On, Held };

// Exactly one of: open space of a room, inside a container, on a surface, or
// in the agent's hands. `holder` is meaningful for Inside/On only.
struct Location {
  LocationKind kind = LocationKind::InRoom;
  Room room = Room::Kitchen;
  ObjectId holder{};

  static Location in_room(Room r) { return {LocationKind::InRoom, r, {}}; }
  static Location inside(ObjectId c) { return {LocationKind::Inside, Room::Kitchen, c}; }
  static Location on(ObjectId s) { return {LocationKind::On, Room::Kitchen, s}; }
  static Location held() { return {LocationKind::Held, Room::Kitchen, {}}; }

  friend bool operator==(const Location& a, const Location& b) {
    if (a.kind != b.kind) return false;
    switch (a.kind) {
      case LocationKind::InRoom: return a.room == b.room;
      case LocationKind::Inside:
      case LocationKind::On: return a.holder == b.holder;
      case LocationKind::Held: return true;
    }
    return false;
  }
};

struct ObjectRecord {
  ObjectId id;
  std::string class_name;
  ObjectKind kind = ObjectKind::Graspable;
  Location location;
  std::set<std::string> properties;
  friend bool operator==(const ObjectRecord&, const ObjectRecord&) = default;
};

struct GoToRoom {
  Room room;
  friend bool operator==(const GoToRoom&, const GoToRoom&) = default;
};
struct Open {
  ObjectId container;
  friend bool operator==(const Open&, const Open&) = default;
};
struct Grab {
  ObjectId object;
  friend bool operator==(const Grab&, const Grab&) = default;
};
struct PutOn {
  ObjectId object;
  ObjectId surface;
  friend bool operator==(const PutOn&, const PutOn&) = default;
};
class Send {
 public:
  // Throws std::invalid_argument for blank text.
  explicit Send(std::string text);
  [[nodiscard]] const std::string& text() const { return text_; }
  friend bool operator==(const Send&, const Send&) = default;

 private:
  std::string text_;
};
struct Wait {
  friend bool operator==(const Wait&, const Wait&) = default;
};

using Action = std::variant<GoToRoom, Open, Grab, PutOn, Send, Wait>;

// Text used for the Send entry of an action menu.
inline constexpr std::string_view kSendPlaceholder = "<message>";

enum class RejectReason {
  UnknownObject,
  NotVisible,
  NotGraspable,
  AlreadyHeld,
  HandsFull,
  NotHeld,
  NotAContainer,
  AlreadyOpen,
  NotASurface,
  SurfaceNotHere,
  AlreadyThere,
};
std::string_view to_string(RejectReason reason);

struct Moved {
  Room from;
  Room to;
};
struct Opened {
  ObjectId container;
};
struct Grabbed {
  ObjectId object;
};
struct Placed {
  ObjectId object;
  std::string object_class;
  ObjectId surface;
  std::string surface_class;
};
struct MessageSent {
  std::string text;
};
struct Waited {};
struct Rejected {
  RejectReason reason;
};

struct TransitionEvent {
  std::variant<Moved, Opened, Grabbed, Placed, MessageSent, Waited, Rejected> value;

  [[nodiscard]] bool rejected() const { return std::holds_alternative<Rejected>(value); }
  [[nodiscard]] const Placed* placed() const { return std::get_if<Placed>(&value); }
};

std::string describe(const TransitionEvent& event);

// One entry of an observation. `open` is meaningful for containers only.
struct SeenObject {
  ObjectId id;
  std::string class_name;
  ObjectKind kind = ObjectKind::Graspable;
  Location location;
  bool open = false;
  friend bool operator==(const SeenObject&, const SeenObject&) = default;
};

struct Observation {
  Room room = Room::Kitchen;
  std::vector<SeenObject> visible_objects;
  std::vector<SeenObject> held;
  std::optional<std::string> incoming_message;
  int step_count = 0;
  friend bool operator==(const Observation&, const Observation&) = default;
};

class SceneState;

// Pure transition: the returned state reflects the action. Illegal actions
// leave everything but step_count untouched and yield Rejected.
std::pair<SceneState, TransitionEvent> apply_action(SceneState state, const Action& action);
// Same transition, mutating `state`. Used by rollouts.
TransitionEvent apply_action_in_place(SceneState& state, const Action& action);

class SceneState {
 public:
  // Objects must carry contiguous ids; containment must reference existing
  // containers/surfaces. `hand_order` lists held objects in grab order (id
  // order when empty). Throws ConfigurationError otherwise.
  SceneState(std::vector<ObjectRecord> objects, Room agent_room, std::set<ObjectId> opened = {},
             int step_count = 0, std::vector<ObjectId> hand_order = {});

  [[nodiscard]] std::span<const Room> rooms() const { return kAllRooms; }
  [[nodiscard]] std::size_t object_count() const { return dynamic_.size(); }
  [[nodiscard]] std::vector<ObjectId> object_ids() const;
  [[nodiscard]] bool contains(ObjectId id) const;

  [[nodiscard]] ObjectRecord object(ObjectId id) const;
  [[nodiscard]] const std::string& class_name(ObjectId id) const;
  [[nodiscard]] ObjectKind kind(ObjectId id) const;
  [[nodiscard]] const std::set<std::string>& properties(ObjectId id) const;
  [[nodiscard]] const Location& location(ObjectId id) const;
  // Room the object currently sits in; held objects are in the agent's room.
  [[nodiscard]] Room room_of(ObjectId id) const;
  [[nodiscard]] bool is_open(ObjectId id) const;
  [[nodiscard]] bool is_visible(ObjectId id) const;
  [[nodiscard]] std::optional<ObjectId> find(std::string_view class_name) const;

  [[nodiscard]] Room agent_room() const { return agent_room_; }
  [[nodiscard]] std::span<const ObjectId> agent_hands() const {
    return {hands_.data(), static_cast<std::size_t>(hand_count_)};
  }
  [[nodiscard]] std::set<ObjectId> opened_containers() const;
  [[nodiscard]] int step_count() const { return step_count_; }

  friend bool operator==(const SceneState& a, const SceneState& b);

 private:
  struct StaticInfo {
    ObjectId id;
    std::string class_name;
    ObjectKind kind;
    std::set<std::string> properties;
    friend bool operator==(const StaticInfo&, const StaticInfo&) = default;
  };
  struct Catalog {
    int first_id = 0;
    std::vector<StaticInfo> entries;
  };
  struct Dynamic {
    Location location;
    bool open = false;
    friend bool operator==(const Dynamic&, const Dynamic&) = default;
  };

  [[nodiscard]] std::size_t index_of(ObjectId id) const;

  friend TransitionEvent apply_action_in_place(SceneState& state, const Action& action);

  // Immutable per scene; copies of a state share it.
  std::shared_ptr<const Catalog> catalog_;
  std::vector<Dynamic> dynamic_;
  std::array<ObjectId, 2> hands_{};
  int hand_count_ = 0;
  Room agent_room_ = Room::Kitchen;
  int step_count_ = 0;
};

inline constexpr int kMaxHeld = 2;
inline constexpr int kFirstObjectId = 100;

// Every potential goal exactly once, the task's distractors, containers and
// surfaces. Goal and distractor placement is a pure function of `seed`.
SceneState build_scene(const tasks::TaskSpec& task, std::uint64_t seed);

Observation observe(const SceneState& state);

// Every action whose transition is not Rejected, plus Send and Wait.
std::vector<Action> legal_actions(const SceneState& state);
// The same menu, reconstructed from what the agent can see.
std::vector<Action> available_actions(const Observation& obs);

using NameLookup = std::function<std::string(ObjectId)>;
NameLookup names_of(const SceneState& state);
NameLookup names_of(const Observation& obs);

// "[grab] <juice> (107)" style rendering used in prompts and transcripts.
std::string describe(const Action& action, const NameLookup& names);

nlohmann::json scene_to_json(const SceneState& state);
SceneState scene_from_json(const nlohmann::json& doc);

}  // namespace homeassist::world
