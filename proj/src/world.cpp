#include "homeassist/world.hpp"

#include <algorithm>
#include <map>
#include <stdexcept>

#include "homeassist/errors.hpp"
#include "homeassist/rng.hpp"

namespace homeassist::world {

std::string_view to_string(ObjectKind kind) {
  switch (kind) {
    case ObjectKind::Graspable: return "graspable";
    case ObjectKind::Container: return "container";
    case ObjectKind::Surface: return "surface";
  }
  return "?";
}

std::string_view to_string(RejectReason reason) {
  switch (reason) {
    case RejectReason::UnknownObject: return "UnknownObject";
    case RejectReason::NotVisible: return "NotVisible";
    case RejectReason::NotGraspable: return "NotGraspable";
    case RejectReason::AlreadyHeld: return "AlreadyHeld";
    case RejectReason::HandsFull: return "HandsFull";
    case RejectReason::NotHeld: return "NotHeld";
    case RejectReason::NotAContainer: return "NotAContainer";
    case RejectReason::AlreadyOpen: return "AlreadyOpen";
    case RejectReason::NotASurface: return "NotASurface";
    case RejectReason::SurfaceNotHere: return "SurfaceNotHere";
    case RejectReason::AlreadyThere: return "AlreadyThere";
  }
  return "?";
}

Send::Send(std::string text) : text_(std::move(text)) {
  if (text_.find_first_not_of(" \t\r\n") == std::string::npos) {
    throw std::invalid_argument("Send: message text must be non-empty");
  }
}

// ---------------------------------------------------------------------------
// SceneState

SceneState::SceneState(std::vector<ObjectRecord> objects, Room agent_room,
                       std::set<ObjectId> opened, int step_count, std::vector<ObjectId> hand_order)
    : agent_room_(agent_room), step_count_(step_count) {
  if (step_count < 0) throw ConfigurationError("scene: negative step_count");
  std::sort(objects.begin(), objects.end(),
            [](const ObjectRecord& a, const ObjectRecord& b) { return a.id < b.id; });
  auto catalog = std::make_shared<Catalog>();
  catalog->first_id = objects.empty() ? kFirstObjectId : objects.front().id.value;
  for (std::size_t i = 0; i < objects.size(); ++i) {
    const auto& o = objects[i];
    if (o.id.value != catalog->first_id + static_cast<int>(i)) {
      throw ConfigurationError("scene: object ids must be contiguous");
    }
    if (o.class_name.empty()) throw ConfigurationError("scene: empty class name");
    catalog->entries.push_back({o.id, o.class_name, o.kind, o.properties});
    dynamic_.push_back({o.location, opened.contains(o.id)});
  }
  catalog_ = std::move(catalog);

  for (const auto& o : objects) {
    const auto& loc = o.location;
    if (loc.kind == LocationKind::Inside || loc.kind == LocationKind::On) {
      if (!contains(loc.holder)) throw ConfigurationError("scene: dangling holder id");
      const auto want = loc.kind == LocationKind::Inside ? ObjectKind::Container : ObjectKind::Surface;
      if (kind(loc.holder) != want) throw ConfigurationError("scene: holder has the wrong kind");
      if (location(loc.holder).kind != LocationKind::InRoom) {
        // Fixtures stand in rooms, which keeps containment one level deep
        // and therefore acyclic.
        throw ConfigurationError("scene: nested containment is not supported");
      }
    }
    if (o.kind != ObjectKind::Graspable && loc.kind != LocationKind::InRoom) {
      throw ConfigurationError("scene: containers and surfaces must stand in a room");
    }
    if (loc.kind == LocationKind::Held) {
      if (hand_count_ >= kMaxHeld) throw ConfigurationError("scene: more than two held objects");
      hands_[hand_count_++] = o.id;
    }
  }
  if (!hand_order.empty()) {
    auto sorted_order = hand_order;
    std::sort(sorted_order.begin(), sorted_order.end());
    std::vector<ObjectId> held(hands_.begin(), hands_.begin() + hand_count_);
    if (sorted_order != held) throw ConfigurationError("scene: hand order disagrees with held objects");
    std::copy(hand_order.begin(), hand_order.end(), hands_.begin());
  }
  for (ObjectId c : opened) {
    if (!contains(c) || kind(c) != ObjectKind::Container) {
      throw ConfigurationError("scene: opened id is not a container");
    }
  }
}

std::size_t SceneState::index_of(ObjectId id) const {
  const auto idx = static_cast<std::size_t>(id.value - catalog_->first_id);
  if (id.value < catalog_->first_id || idx >= dynamic_.size()) {
    throw std::out_of_range("scene: unknown object id " + std::to_string(id.value));
  }
  return idx;
}

bool SceneState::contains(ObjectId id) const {
  return id.value >= catalog_->first_id &&
         static_cast<std::size_t>(id.value - catalog_->first_id) < dynamic_.size();
}

std::vector<ObjectId> SceneState::object_ids() const {
  std::vector<ObjectId> ids;
  ids.reserve(dynamic_.size());
  for (const auto& e : catalog_->entries) ids.push_back(e.id);
  return ids;
}

ObjectRecord SceneState::object(ObjectId id) const {
  const auto i = index_of(id);
  const auto& s = catalog_->entries[i];
  return {s.id, s.class_name, s.kind, dynamic_[i].location, s.properties};
}

const std::string& SceneState::class_name(ObjectId id) const {
  return catalog_->entries[index_of(id)].class_name;
}

ObjectKind SceneState::kind(ObjectId id) const { return catalog_->entries[index_of(id)].kind; }

const std::set<std::string>& SceneState::properties(ObjectId id) const {
  return catalog_->entries[index_of(id)].properties;
}

const Location& SceneState::location(ObjectId id) const { return dynamic_[index_of(id)].location; }

bool SceneState::is_open(ObjectId id) const { return dynamic_[index_of(id)].open; }

Room SceneState::room_of(ObjectId id) const {
  const auto& loc = location(id);
  switch (loc.kind) {
    case LocationKind::InRoom: return loc.room;
    case LocationKind::Inside:
    case LocationKind::On: return room_of(loc.holder);
    case LocationKind::Held: return agent_room_;
  }
  return agent_room_;
}

bool SceneState::is_visible(ObjectId id) const {
  const auto& loc = location(id);
  switch (loc.kind) {
    case LocationKind::InRoom: return loc.room == agent_room_;
    case LocationKind::On: return room_of(loc.holder) == agent_room_;
    case LocationKind::Inside: return is_open(loc.holder) && room_of(loc.holder) == agent_room_;
    case LocationKind::Held: return false;
  }
  return false;
}

std::optional<ObjectId> SceneState::find(std::string_view name) const {
  for (const auto& e : catalog_->entries) {
    if (e.class_name == name) return e.id;
  }
  return std::nullopt;
}

std::set<ObjectId> SceneState::opened_containers() const {
  std::set<ObjectId> out;
  for (std::size_t i = 0; i < dynamic_.size(); ++i) {
    if (dynamic_[i].open) out.insert(catalog_->entries[i].id);
  }
  return out;
}

bool operator==(const SceneState& a, const SceneState& b) {
  if (a.catalog_ != b.catalog_ &&
      (a.catalog_->first_id != b.catalog_->first_id || a.catalog_->entries != b.catalog_->entries)) {
    return false;
  }
  return a.dynamic_ == b.dynamic_ && a.hand_count_ == b.hand_count_ &&
         std::equal(a.hands_.begin(), a.hands_.begin() + a.hand_count_, b.hands_.begin()) &&
         a.agent_room_ == b.agent_room_ && a.step_count_ == b.step_count_;
}

// ---------------------------------------------------------------------------
// Scene construction

SceneState build_scene(const tasks::TaskSpec& task, std::uint64_t seed) {
  if (task.potential_goals.empty()) {
    throw ConfigurationError("build_scene: task '" + task.id + "' has an empty goal vocabulary");
  }
  task.validate();

  std::vector<ObjectRecord> objects;
  int next_id = kFirstObjectId;
  auto props = [&](const std::string& cls) {
    auto it = task.property_table.find(cls);
    return it == task.property_table.end() ? std::set<std::string>{} : it->second;
  };

  for (const auto& s : task.surfaces) {
    objects.push_back({ObjectId{next_id++}, s.class_name, ObjectKind::Surface,
                       Location::in_room(s.room), props(s.class_name)});
  }
  std::vector<ObjectId> containers;
  for (const auto& c : task.containers) {
    containers.push_back(ObjectId{next_id});
    objects.push_back({ObjectId{next_id++}, c.class_name, ObjectKind::Container,
                       Location::in_room(c.room), props(c.class_name)});
  }

  Rng rng(derive_seed({seed, 0x5ce9e}));
  auto place = [&]() {
    // Half of the items are hidden in containers so memory of where things
    // were found pays off.
    if (!containers.empty() && uniform01(rng) < 0.5) {
      return Location::inside(containers[uniform_index(rng, containers.size())]);
    }
    return Location::in_room(kAllRooms[uniform_index(rng, kAllRooms.size())]);
  };
  for (const auto& g : task.potential_goals) {
    objects.push_back({ObjectId{next_id++}, g, ObjectKind::Graspable, place(), props(g)});
  }
  for (const auto& d : task.distractors) {
    objects.push_back({ObjectId{next_id++}, d, ObjectKind::Graspable, place(), props(d)});
  }
  return SceneState(std::move(objects), Room::Kitchen);
}

// ---------------------------------------------------------------------------
// Transitions

namespace {

template <class... Ts>
struct Overloaded : Ts... {
  using Ts::operator()...;
};
template <class... Ts>
Overloaded(Ts...) -> Overloaded<Ts...>;

}  // namespace

TransitionEvent apply_action_in_place(SceneState& s, const Action& action) {
  ++s.step_count_;
  auto reject = [](RejectReason r) { return TransitionEvent{Rejected{r}}; };

  return std::visit(
      Overloaded{
          [&](const GoToRoom& a) -> TransitionEvent {
            if (a.room == s.agent_room_) return reject(RejectReason::AlreadyThere);
            const Room from = s.agent_room_;
            s.agent_room_ = a.room;
            return {Moved{from, a.room}};
          },
          [&](const Open& a) -> TransitionEvent {
            if (!s.contains(a.container)) return reject(RejectReason::UnknownObject);
            if (s.kind(a.container) != ObjectKind::Container) return reject(RejectReason::NotAContainer);
            if (!s.is_visible(a.container)) return reject(RejectReason::NotVisible);
            auto& dyn = s.dynamic_[s.index_of(a.container)];
            if (dyn.open) return reject(RejectReason::AlreadyOpen);
            dyn.open = true;
            return {Opened{a.container}};
          },
          [&](const Grab& a) -> TransitionEvent {
            if (!s.contains(a.object)) return reject(RejectReason::UnknownObject);
            if (s.kind(a.object) != ObjectKind::Graspable) return reject(RejectReason::NotGraspable);
            auto& dyn = s.dynamic_[s.index_of(a.object)];
            if (dyn.location.kind == LocationKind::Held) return reject(RejectReason::AlreadyHeld);
            if (s.hand_count_ >= kMaxHeld) return reject(RejectReason::HandsFull);
            if (!s.is_visible(a.object)) return reject(RejectReason::NotVisible);
            dyn.location = Location::held();
            s.hands_[s.hand_count_++] = a.object;
            return {Grabbed{a.object}};
          },
          [&](const PutOn& a) -> TransitionEvent {
            if (!s.contains(a.object) || !s.contains(a.surface)) return reject(RejectReason::UnknownObject);
            auto& dyn = s.dynamic_[s.index_of(a.object)];
            if (dyn.location.kind != LocationKind::Held) return reject(RejectReason::NotHeld);
            if (s.kind(a.surface) != ObjectKind::Surface) return reject(RejectReason::NotASurface);
            if (s.room_of(a.surface) != s.agent_room_) return reject(RejectReason::SurfaceNotHere);
            dyn.location = Location::on(a.surface);
            auto* end = s.hands_.begin() + s.hand_count_;
            std::remove(s.hands_.begin(), end, a.object);
            --s.hand_count_;
            return {Placed{a.object, s.class_name(a.object), a.surface, s.class_name(a.surface)}};
          },
          [&](const Send& a) -> TransitionEvent { return {MessageSent{a.text()}}; },
          [&](const Wait&) -> TransitionEvent { return {Waited{}}; },
      },
      action);
}

std::pair<SceneState, TransitionEvent> apply_action(SceneState state, const Action& action) {
  auto event = apply_action_in_place(state, action);
  return {std::move(state), std::move(event)};
}

// ---------------------------------------------------------------------------
// Observation and action menus

Observation observe(const SceneState& state) {
  Observation obs;
  obs.room = state.agent_room();
  obs.step_count = state.step_count();
  for (ObjectId id : state.object_ids()) {
    const bool held = state.location(id).kind == LocationKind::Held;
    if (!held && !state.is_visible(id)) continue;
    SeenObject seen{id, state.class_name(id), state.kind(id), state.location(id), state.is_open(id)};
    (held ? obs.held : obs.visible_objects).push_back(std::move(seen));
  }
  // Hands keep grab order.
  std::vector<SeenObject> held;
  for (ObjectId id : state.agent_hands()) {
    for (const auto& h : obs.held) {
      if (h.id == id) held.push_back(h);
    }
  }
  obs.held = std::move(held);
  return obs;
}

std::vector<Action> available_actions(const Observation& obs) {
  std::vector<Action> out;
  for (Room r : kAllRooms) {
    if (r != obs.room) out.emplace_back(GoToRoom{r});
  }
  for (const auto& o : obs.visible_objects) {
    if (o.kind == ObjectKind::Container && !o.open) out.emplace_back(Open{o.id});
  }
  if (obs.held.size() < static_cast<std::size_t>(kMaxHeld)) {
    for (const auto& o : obs.visible_objects) {
      if (o.kind == ObjectKind::Graspable) out.emplace_back(Grab{o.id});
    }
  }
  for (const auto& h : obs.held) {
    for (const auto& o : obs.visible_objects) {
      if (o.kind == ObjectKind::Surface) out.emplace_back(PutOn{h.id, o.id});
    }
  }
  out.emplace_back(Send{std::string(kSendPlaceholder)});
  out.emplace_back(Wait{});
  return out;
}

std::vector<Action> legal_actions(const SceneState& state) { return available_actions(observe(state)); }

NameLookup names_of(const SceneState& state) {
  return [&state](ObjectId id) { return state.contains(id) ? state.class_name(id) : std::string("unknown"); };
}

NameLookup names_of(const Observation& obs) {
  std::map<int, std::string> names;
  for (const auto& o : obs.visible_objects) names[o.id.value] = o.class_name;
  for (const auto& o : obs.held) names[o.id.value] = o.class_name;
  return [names = std::move(names)](ObjectId id) {
    auto it = names.find(id.value);
    return it == names.end() ? std::string("unknown") : it->second;
  };
}

std::string describe(const Action& action, const NameLookup& names) {
  auto obj = [&](ObjectId id) { return "<" + names(id) + "> (" + std::to_string(id.value) + ")"; };
  return std::visit(
      Overloaded{
          [&](const GoToRoom& a) {
            return "[gotoroom] <" + std::string(to_string(a.room)) + "> (" + std::to_string(room_id(a.room)) + ")";
          },
          [&](const Open& a) { return "[open] " + obj(a.container); },
          [&](const Grab& a) { return "[grab] " + obj(a.object); },
          [&](const PutOn& a) { return "[putback] " + obj(a.object) + " on " + obj(a.surface); },
          [&](const Send& a) {
            return a.text() == kSendPlaceholder ? std::string("[send_message]") : "[send_message] " + a.text();
          },
          [&](const Wait&) { return std::string("[wait]"); },
      },
      action);
}

std::string describe(const TransitionEvent& event) {
  return std::visit(
      Overloaded{
          [](const Moved& e) { return "Moved(" + std::string(to_string(e.to)) + ")"; },
          [](const Opened& e) { return "Opened(" + std::to_string(e.container.value) + ")"; },
          [](const Grabbed& e) { return "Grabbed(" + std::to_string(e.object.value) + ")"; },
          [](const Placed& e) { return "Placed(" + e.object_class + ", " + e.surface_class + ")"; },
          [](const MessageSent&) { return std::string("MessageSent"); },
          [](const Waited&) { return std::string("Waited"); },
          [](const Rejected& e) { return "Rejected(" + std::string(to_string(e.reason)) + ")"; },
      },
      event.value);
}

// ---------------------------------------------------------------------------
// JSON dump/load

namespace {

nlohmann::json location_json(const Location& loc) {
  switch (loc.kind) {
    case LocationKind::InRoom: return {{"type", "room"}, {"room", to_string(loc.room)}};
    case LocationKind::Inside: return {{"type", "inside"}, {"holder", loc.holder.value}};
    case LocationKind::On: return {{"type", "on"}, {"holder", loc.holder.value}};
    case LocationKind::Held: return {{"type", "held"}};
  }
  return {};
}

Location location_from_json(const nlohmann::json& j) {
  const auto type = j.at("type").get<std::string>();
  if (type == "room") {
    auto r = parse_room(j.at("room").get<std::string>());
    if (!r) throw ConfigurationError("scene: unknown room " + j.at("room").dump());
    return Location::in_room(*r);
  }
  if (type == "inside") return Location::inside(ObjectId{j.at("holder").get<int>()});
  if (type == "on") return Location::on(ObjectId{j.at("holder").get<int>()});
  if (type == "held") return Location::held();
  throw ConfigurationError("scene: unknown location type '" + type + "'");
}

ObjectKind kind_from_string(const std::string& s) {
  for (auto k : {ObjectKind::Graspable, ObjectKind::Container, ObjectKind::Surface}) {
    if (to_string(k) == s) return k;
  }
  throw ConfigurationError("scene: unknown object kind '" + s + "'");
}

}  // namespace

nlohmann::json scene_to_json(const SceneState& state) {
  nlohmann::json rooms = nlohmann::json::array();
  for (Room r : state.rooms()) rooms.push_back(to_string(r));
  nlohmann::json objects = nlohmann::json::array();
  for (ObjectId id : state.object_ids()) {
    const auto rec = state.object(id);
    objects.push_back({{"id", id.value},
                       {"class", rec.class_name},
                       {"kind", to_string(rec.kind)},
                       {"location", location_json(rec.location)},
                       {"properties", rec.properties}});
  }
  nlohmann::json hands = nlohmann::json::array();
  for (ObjectId id : state.agent_hands()) hands.push_back(id.value);
  nlohmann::json opened = nlohmann::json::array();
  for (ObjectId id : state.opened_containers()) opened.push_back(id.value);
  return {{"rooms", rooms},
          {"objects", objects},
          {"agent_room", to_string(state.agent_room())},
          {"agent_hands", hands},
          {"opened_containers", opened},
          {"step_count", state.step_count()}};
}

SceneState scene_from_json(const nlohmann::json& doc) {
  try {
    std::vector<ObjectRecord> objects;
    for (const auto& o : doc.at("objects")) {
      objects.push_back({ObjectId{o.at("id").get<int>()}, o.at("class").get<std::string>(),
                         kind_from_string(o.at("kind").get<std::string>()),
                         location_from_json(o.at("location")),
                         o.value("properties", std::set<std::string>{})});
    }
    auto room = parse_room(doc.at("agent_room").get<std::string>());
    if (!room) throw ConfigurationError("scene: unknown agent room");
    std::set<ObjectId> opened;
    for (const auto& id : doc.value("opened_containers", nlohmann::json::array())) {
      opened.insert(ObjectId{id.get<int>()});
    }
    std::vector<ObjectId> hands;
    for (int id : doc.value("agent_hands", std::vector<int>{})) hands.push_back(ObjectId{id});
    return SceneState(std::move(objects), *room, std::move(opened), doc.value("step_count", 0),
                      std::move(hands));
  } catch (const nlohmann::json::exception& e) {
    throw ConfigurationError(std::string("scene: malformed document: ") + e.what());
  }
}

}  // namespace homeassist::world
