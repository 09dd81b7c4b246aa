#pragma once

#include <array>
#include <optional>
#include <string>
#include <string_view>

namespace homeassist {

enum class Room { Kitchen, LivingRoom, Bedroom, Bathroom };

inline constexpr std::array<Room, 4> kAllRooms{Room::Kitchen, Room::LivingRoom, Room::Bedroom,
                                               Room::Bathroom};

constexpr std::string_view to_string(Room r) {
  switch (r) {
    case Room::Kitchen: return "kitchen";
    case Room::LivingRoom: return "livingroom";
    case Room::Bedroom: return "bedroom";
    case Room::Bathroom: return "bathroom";
  }
  return "?";
}

inline std::optional<Room> parse_room(std::string_view name) {
  for (Room r : kAllRooms) {
    if (to_string(r) == name) return r;
  }
  return std::nullopt;
}

// Rooms carry small numeric ids in rendered action strings, "<kitchen> (1)".
constexpr int room_id(Room r) { return static_cast<int>(r) + 1; }

}  // namespace homeassist
