#pragma once

#include <compare>
#include <cstdint>
#include <functional>

namespace mym {

/// Simulation time in milliseconds.
using SimTime = std::int64_t;

/// Integer id that does not convert to ids of a different Tag.
template <typename Tag>
struct StrongId {
  std::uint64_t value = 0;

  friend auto operator<=>(const StrongId&, const StrongId&) = default;
};

}  // namespace mym

template <typename Tag>
struct std::hash<mym::StrongId<Tag>> {
  std::size_t operator()(const mym::StrongId<Tag>& id) const noexcept { return std::hash<std::uint64_t>{}(id.value); }
};
