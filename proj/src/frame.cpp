#include "mym/frame.hpp"

#include "mym/error.hpp"

namespace mym::protocol {

const char* to_string(FrameKind k) {
  switch (k) {
    case FrameKind::BEACON: return "BEACON";
    case FrameKind::PROFILE_REQ: return "PROFILE_REQ";
    case FrameKind::PROFILE_RESP: return "PROFILE_RESP";
    case FrameKind::FRIEND_SEARCH: return "FRIEND_SEARCH";
    case FrameKind::MATCH_RESULT: return "MATCH_RESULT";
    case FrameKind::CHAT: return "CHAT";
    case FrameKind::GROUP_OP: return "GROUP_OP";
    case FrameKind::SYNC: return "SYNC";
    case FrameKind::PLATFORM_REQ: return "PLATFORM_REQ";
    case FrameKind::ACK: return "ACK";
  }
  return "?";
}

std::optional<FrameKind> frame_kind_from_byte(std::uint8_t b) {
  if (b < 1 || b > 10) return std::nullopt;
  return static_cast<FrameKind>(b);
}

bool may_broadcast(FrameKind k) { return k == FrameKind::BEACON || k == FrameKind::FRIEND_SEARCH; }

namespace {

void put_be(Bytes& out, std::uint64_t v, int width) {
  for (int i = width - 1; i >= 0; --i) out.push_back(static_cast<std::uint8_t>(v >> (8 * i)));
}

std::uint64_t get_be(std::span<const std::uint8_t> in, std::size_t offset, int width) {
  std::uint64_t v = 0;
  for (int i = 0; i < width; ++i) v = (v << 8) | in[offset + static_cast<std::size_t>(i)];
  return v;
}

}  // namespace

Bytes encode_frame(const Frame& f, std::size_t max_payload) {
  if (!frame_kind_from_byte(static_cast<std::uint8_t>(f.kind))) {
    throw Error(ErrorCode::InvalidFrame, "unknown kind");
  }
  if (f.payload.size() > max_payload) {
    throw Error(ErrorCode::InvalidFrame,
                "payload " + std::to_string(f.payload.size()) + " bytes exceeds " + std::to_string(max_payload));
  }
  if (f.dst == kBroadcast && !may_broadcast(f.kind)) {
    throw Error(ErrorCode::InvalidFrame, std::string(to_string(f.kind)) + " must be unicast");
  }
  Bytes out;
  out.reserve(kHeaderSize + f.payload.size());
  out.push_back(static_cast<std::uint8_t>(f.kind));
  put_be(out, f.src, 8);
  put_be(out, f.dst, 8);
  put_be(out, f.seq, 8);
  put_be(out, f.payload.size(), 4);
  out.insert(out.end(), f.payload.begin(), f.payload.end());
  return out;
}

Frame decode_frame(std::span<const std::uint8_t> bytes, std::size_t max_payload) {
  if (bytes.size() < kHeaderSize) {
    throw Error(ErrorCode::DecodeError, "truncated header: " + std::to_string(bytes.size()) + " bytes");
  }
  const auto kind = frame_kind_from_byte(bytes[0]);
  if (!kind) throw Error(ErrorCode::DecodeError, "bad kind byte " + std::to_string(bytes[0]));
  Frame f;
  f.kind = *kind;
  f.src = get_be(bytes, 1, 8);
  f.dst = get_be(bytes, 9, 8);
  f.seq = get_be(bytes, 17, 8);
  const std::uint64_t len = get_be(bytes, 25, 4);
  if (len > max_payload) throw Error(ErrorCode::DecodeError, "payload length " + std::to_string(len) + " exceeds limit");
  if (bytes.size() - kHeaderSize != len) {
    throw Error(ErrorCode::DecodeError, "length field " + std::to_string(len) + " but " +
                                            std::to_string(bytes.size() - kHeaderSize) + " payload bytes");
  }
  if (f.dst == kBroadcast && !may_broadcast(f.kind)) {
    throw Error(ErrorCode::DecodeError, std::string(to_string(f.kind)) + " addressed to broadcast");
  }
  f.payload.assign(bytes.begin() + kHeaderSize, bytes.end());
  return f;
}

}  // namespace mym::protocol
