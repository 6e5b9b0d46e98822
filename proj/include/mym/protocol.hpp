#pragma once

#include <cstdint>
#include <map>
#include <memory>
#include <optional>
#include <set>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "mym/contentstore.hpp"
#include "mym/frame.hpp"
#include "mym/matchmaking.hpp"
#include "mym/socialgraph.hpp"
#include "mym/types.hpp"

namespace mym::protocol {

using matchmaking::MatchClass;
using matchmaking::MatchParams;
using matchmaking::Position;
using matchmaking::Profile;
using matchmaking::RelevanceScore;

enum class Transport { short_range, wide_area, none };
const char* to_string(Transport t);

enum class SessionState { IDLE = 0, DISCOVERED = 1, PROFILE_EXCHANGED = 2, CONNECTED = 3 };
const char* to_string(SessionState s);

struct ProtocolParams {
  SimTime beacon_interval = 1000;
  SimTime session_timeout = 10000;
  std::size_t max_payload = kDefaultMaxPayload;
  int retry_limit = 5;

  void validate() const;
};

struct PeerSession {
  NodeId peer = 0;
  SessionState state = SessionState::IDLE;
  SimTime last_seen = 0;
  std::optional<Profile> peer_profile;
  std::optional<Position> peer_location;
  bool peer_online = false;  // peer announced a platform request
  bool ever_exchanged = false;
  // Reliable chat stream; survives session resets so dedup keeps working.
  std::uint64_t send_seq = 0;
  std::uint64_t recv_seq = 0;
  std::map<std::uint64_t, std::string> reorder;
  // Control frames (everything unicast except CHAT).
  std::uint64_t ctrl_seq = 0;
};

/// A frame plus the transport the engine would like it to take.
struct OutFrame {
  Frame frame;
  Transport via = Transport::short_range;
};

struct ChatMessage {
  NodeId from = 0;
  std::uint64_t seq = 0;
  std::string text;
  std::optional<std::string> group;
  SimTime sent_at = 0;
  SimTime delivered_at = 0;
};

struct MatchReport {
  NodeId peer = 0;
  Profile profile;
  RelevanceScore score;
  MatchClass classification = MatchClass::no_match;
};

struct SessionTransition {
  NodeId peer = 0;
  SessionState from = SessionState::IDLE;
  SessionState to = SessionState::IDLE;
};

/// Everything one engine call produced.
struct EngineOutput {
  std::vector<OutFrame> frames;
  std::vector<ChatMessage> delivered;
  std::vector<MatchReport> match_results;
  std::vector<contentstore::EntryId> evicted;
  std::vector<SessionTransition> transitions;

  void append(EngineOutput&& other);
};

struct EngineStats {
  std::uint64_t decode_errors = 0;
  std::uint64_t misaddressed = 0;
  std::uint64_t duplicate_chats = 0;
  std::uint64_t chats_sent = 0;
  std::uint64_t retransmissions = 0;
};

struct EngineConfig {
  ProtocolParams protocol;
  MatchParams match;
  contentstore::StoreParams store;
  socialgraph::GraphParams graph;
};

/// Protocol state machine for one device. Pure in the sense that outputs
/// depend only on prior state, the call and its arguments.
class NodeEngine {
 public:
  NodeEngine(NodeId id, Profile profile, std::shared_ptr<const ontology::Taxonomy> taxonomy,
             EngineConfig config = {});

  NodeId id() const noexcept { return id_; }
  const Profile& profile() const noexcept { return profile_; }
  SimTime clock() const noexcept { return clock_; }
  const EngineConfig& config() const noexcept { return config_; }

  void set_location(const Position& p) { profile_.context.location = p; }

  EngineOutput on_tick(SimTime now);
  EngineOutput on_frame(const Frame& frame, SimTime now);
  /// Decodes then dispatches; undecodable input is counted and dropped.
  EngineOutput on_bytes(std::span<const std::uint8_t> bytes, SimTime now);

  EngineOutput send_chat(NodeId peer, const std::string& text, SimTime now);
  EngineOutput friend_search(SimTime now);
  EngineOutput platform_request(SimTime now);

  EngineOutput form_group(const std::string& name, SimTime now);
  EngineOutput invite(NodeId peer, const std::string& group, SimTime now);
  EngineOutput send_group_chat(const std::string& group, const std::string& text, SimTime now);

  /// Feedback from the link layer: `preferred` is what the frame asked for,
  /// `used` what carried it (none: nothing could).
  void on_transport_report(const OutFrame& sent, Transport used, SimTime now);

  const std::map<NodeId, PeerSession>& sessions() const noexcept { return sessions_; }
  const PeerSession* session(NodeId peer) const;
  const std::vector<ChatMessage>& inbox() const noexcept { return inbox_; }
  const std::map<NodeId, MatchReport>& match_reports() const noexcept { return match_reports_; }
  /// Friend-search replies ranked by the matchmaking ordering.
  std::vector<matchmaking::RankedCandidate> search_results() const;
  const std::map<std::string, std::set<NodeId>>& groups() const noexcept { return groups_; }

  const contentstore::ContentStore& store() const noexcept { return store_; }
  const contentstore::SyncState& sync() const noexcept { return sync_; }
  const socialgraph::SocialGraph& graph() const noexcept { return graph_; }
  const EngineStats& stats() const noexcept { return stats_; }

  bool wide_area_requested() const noexcept { return wide_requested_; }
  Transport preferred_transport() const;

 private:
  struct Outstanding {
    std::optional<SimTime> last_sent;
    int attempts = 0;
  };

  void advance(SimTime now);
  PeerSession& session_for(NodeId peer);
  void transition(PeerSession& s, SessionState to, EngineOutput& out);
  bool reachable(const PeerSession& s) const;

  OutFrame control(PeerSession& s, FrameKind kind, std::string payload);
  OutFrame broadcast(FrameKind kind, std::string payload);
  std::string beacon_payload() const;

  void on_exchanged(PeerSession& s, EngineOutput& out);
  void handle_ack(PeerSession& s, std::uint64_t acked, EngineOutput& out);
  void reset_attempts(NodeId peer);
  void retry_pass(PeerSession& s, SimTime now, EngineOutput& out);
  EngineOutput queue_chat(NodeId peer, const std::string& text, const std::optional<std::string>& group, SimTime now);

  NodeId id_;
  Profile profile_;
  std::shared_ptr<const ontology::Taxonomy> taxonomy_;
  EngineConfig config_;

  SimTime clock_ = 0;
  std::optional<SimTime> last_beacon_;
  std::uint64_t broadcast_seq_ = 0;
  std::uint64_t next_entry_ = 1;

  bool wide_requested_ = false;
  bool wide_believed_up_ = true;
  SimTime wide_down_since_ = 0;

  std::map<NodeId, PeerSession> sessions_;
  std::map<std::pair<NodeId, std::uint64_t>, Outstanding> outstanding_;
  std::map<std::pair<NodeId, std::uint64_t>, contentstore::EntryId> entry_of_;
  std::vector<ChatMessage> inbox_;
  std::map<NodeId, MatchReport> match_reports_;
  std::map<std::string, std::set<NodeId>> groups_;

  contentstore::ContentStore store_;
  contentstore::SyncState sync_;
  socialgraph::SocialGraph graph_;
  socialgraph::ProsumerId self_prosumer_;
  EngineStats stats_;
};

}  // namespace mym::protocol
