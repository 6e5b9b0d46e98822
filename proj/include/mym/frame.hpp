#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace mym::protocol {

using NodeId = std::uint64_t;
inline constexpr NodeId kBroadcast = ~NodeId{0};

enum class FrameKind : std::uint8_t {
  BEACON = 1,
  PROFILE_REQ = 2,
  PROFILE_RESP = 3,
  FRIEND_SEARCH = 4,
  MATCH_RESULT = 5,
  CHAT = 6,
  GROUP_OP = 7,
  SYNC = 8,
  PLATFORM_REQ = 9,
  ACK = 10,
};

const char* to_string(FrameKind k);
std::optional<FrameKind> frame_kind_from_byte(std::uint8_t b);
bool may_broadcast(FrameKind k);

struct Frame {
  FrameKind kind = FrameKind::BEACON;
  NodeId src = 0;
  NodeId dst = kBroadcast;
  std::uint64_t seq = 0;
  std::string payload;

  friend bool operator==(const Frame&, const Frame&) = default;
};

/// kind(1) src(8) dst(8) seq(8) length(4), big-endian.
inline constexpr std::size_t kHeaderSize = 29;
inline constexpr std::size_t kDefaultMaxPayload = 4096;

using Bytes = std::vector<std::uint8_t>;

/// Throws InvalidFrame for oversized payloads or broadcast of a unicast kind.
Bytes encode_frame(const Frame& f, std::size_t max_payload = kDefaultMaxPayload);
/// Throws DecodeError on truncation, unknown kind, length mismatch or a
/// broadcast destination on a unicast kind.
Frame decode_frame(std::span<const std::uint8_t> bytes, std::size_t max_payload = kDefaultMaxPayload);

}  // namespace mym::protocol
