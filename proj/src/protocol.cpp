#include "mym/protocol.hpp"

#include <algorithm>

#include <json.hpp>

#include "mym/error.hpp"
#include "mym/profile_io.hpp"

namespace mym::protocol {

using nlohmann::json;

const char* to_string(Transport t) {
  switch (t) {
    case Transport::short_range: return "short_range";
    case Transport::wide_area: return "wide_area";
    case Transport::none: return "none";
  }
  return "none";
}

const char* to_string(SessionState s) {
  switch (s) {
    case SessionState::IDLE: return "IDLE";
    case SessionState::DISCOVERED: return "DISCOVERED";
    case SessionState::PROFILE_EXCHANGED: return "PROFILE_EXCHANGED";
    case SessionState::CONNECTED: return "CONNECTED";
  }
  return "IDLE";
}

void ProtocolParams::validate() const {
  if (beacon_interval <= 0) throw Error(ErrorCode::InvalidParams, "beacon_interval must be positive");
  if (session_timeout <= 0) throw Error(ErrorCode::InvalidParams, "session_timeout must be positive");
  if (max_payload == 0) throw Error(ErrorCode::InvalidParams, "max_payload must be positive");
  if (retry_limit < 0) throw Error(ErrorCode::InvalidParams, "retry_limit must be non-negative");
}

void EngineOutput::append(EngineOutput&& other) {
  auto move_into = [](auto& dst, auto& src) {
    dst.insert(dst.end(), std::make_move_iterator(src.begin()), std::make_move_iterator(src.end()));
  };
  move_into(frames, other.frames);
  move_into(delivered, other.delivered);
  move_into(match_results, other.match_results);
  move_into(evicted, other.evicted);
  move_into(transitions, other.transitions);
}

NodeEngine::NodeEngine(NodeId id, Profile profile, std::shared_ptr<const ontology::Taxonomy> taxonomy,
                       EngineConfig config)
    : id_(id),
      profile_(std::move(profile)),
      taxonomy_(std::move(taxonomy)),
      config_(config),
      store_(config.store),
      graph_(config.graph) {
  if (id_ == kBroadcast) throw Error(ErrorCode::InvalidParams, "node id collides with the broadcast address");
  if (!taxonomy_) throw Error(ErrorCode::InvalidParams, "engine needs a taxonomy");
  config_.protocol.validate();
  config_.match.validate();
  matchmaking::validate(profile_, *taxonomy_);
  self_prosumer_ = graph_.incarnate(profile_);
}

void NodeEngine::advance(SimTime now) {
  if (now < clock_) {
    throw Error(ErrorCode::DomainError, "time went backwards: " + std::to_string(now) + " < " + std::to_string(clock_));
  }
  clock_ = now;
  graph_.advance_clock(now);
}

const PeerSession* NodeEngine::session(NodeId peer) const {
  auto it = sessions_.find(peer);
  return it == sessions_.end() ? nullptr : &it->second;
}

PeerSession& NodeEngine::session_for(NodeId peer) {
  auto [it, inserted] = sessions_.try_emplace(peer);
  if (inserted) it->second.peer = peer;
  return it->second;
}

void NodeEngine::transition(PeerSession& s, SessionState to, EngineOutput& out) {
  if (s.state == to) return;
  out.transitions.push_back({s.peer, s.state, to});
  s.state = to;
  if (to < SessionState::PROFILE_EXCHANGED) s.peer_profile.reset();
}

Transport NodeEngine::preferred_transport() const {
  return wide_requested_ && wide_believed_up_ ? Transport::wide_area : Transport::short_range;
}

bool NodeEngine::reachable(const PeerSession& s) const {
  if (s.state >= SessionState::PROFILE_EXCHANGED) return true;
  return wide_requested_ && wide_believed_up_ && s.ever_exchanged;
}

OutFrame NodeEngine::control(PeerSession& s, FrameKind kind, std::string payload) {
  return OutFrame{Frame{kind, id_, s.peer, ++s.ctrl_seq, std::move(payload)}, preferred_transport()};
}

OutFrame NodeEngine::broadcast(FrameKind kind, std::string payload) {
  return OutFrame{Frame{kind, id_, kBroadcast, ++broadcast_seq_, std::move(payload)}, Transport::short_range};
}

std::string NodeEngine::beacon_payload() const {
  json j{{"person_id", profile_.person_id}, {"name", profile_.name}};
  const auto& loc = profile_.context.location;
  j["location"] = loc ? json::array({loc->x, loc->y}) : json(nullptr);
  return j.dump();
}

namespace {

std::optional<Position> parse_location(const json& j) {
  if (!j.contains("location") || j.at("location").is_null()) return std::nullopt;
  const auto& loc = j.at("location");
  return Position{loc.at(0).get<double>(), loc.at(1).get<double>()};
}

}  // namespace

EngineOutput NodeEngine::on_tick(SimTime now) {
  advance(now);
  EngineOutput out;
  if (!last_beacon_ || now - *last_beacon_ >= config_.protocol.beacon_interval) {
    out.frames.push_back(broadcast(FrameKind::BEACON, beacon_payload()));
    last_beacon_ = now;
  }
  for (auto& [peer, s] : sessions_) {
    if (s.state != SessionState::IDLE && now - s.last_seen > config_.protocol.session_timeout) {
      transition(s, SessionState::IDLE, out);
    }
  }
  if (wide_requested_ && !wide_believed_up_ && now - wide_down_since_ >= config_.protocol.beacon_interval) {
    // Probe the wide-area link again; the next unicast frame finds out.
    wide_believed_up_ = true;
    for (auto& [key, o] : outstanding_) o.attempts = 0;
  }
  for (const contentstore::EntryId id : store_.expire(now)) {
    for (auto it = entry_of_.begin(); it != entry_of_.end();) {
      if (it->second == id) {
        outstanding_.erase(it->first);
        it = entry_of_.erase(it);
      } else {
        ++it;
      }
    }
  }
  for (auto& [peer, s] : sessions_) retry_pass(s, now, out);
  return out;
}

EngineOutput NodeEngine::on_bytes(std::span<const std::uint8_t> bytes, SimTime now) {
  Frame f;
  try {
    f = decode_frame(bytes, config_.protocol.max_payload);
  } catch (const Error&) {
    ++stats_.decode_errors;
    advance(now);
    return {};
  }
  return on_frame(f, now);
}

void NodeEngine::reset_attempts(NodeId peer) {
  for (auto it = outstanding_.lower_bound({peer, 0}); it != outstanding_.end() && it->first.first == peer; ++it) {
    it->second.attempts = 0;
  }
}

void NodeEngine::retry_pass(PeerSession& s, SimTime now, EngineOutput& out) {
  if (!reachable(s)) return;
  for (const auto& entry : store_.pending_for(s.peer, sync_)) {
    Outstanding& o = outstanding_[{s.peer, entry.seq}];
    if (o.last_sent && now - *o.last_sent < config_.protocol.beacon_interval) continue;
    if (o.last_sent && o.attempts >= config_.protocol.retry_limit) {
      // Link considered dead: drop the session and start a fresh burst on the
      // next contact.
      transition(s, SessionState::IDLE, out);
      reset_attempts(s.peer);
      if (!reachable(s)) return;
      continue;
    }
    if (o.last_sent) {
      ++o.attempts;
      ++stats_.retransmissions;
    }
    o.last_sent = now;
    out.frames.push_back(OutFrame{Frame{FrameKind::CHAT, id_, s.peer, entry.seq, entry.payload}, preferred_transport()});
  }
}

void NodeEngine::on_exchanged(PeerSession& s, EngineOutput& out) {
  s.ever_exchanged = true;
  if (s.peer_profile && !graph_.find_prosumer(s.peer_profile->person_id) && !s.peer_profile->name.empty()) {
    graph_.incarnate(*s.peer_profile);
  }
  out.frames.push_back(control(s, FrameKind::SYNC, json{{"ack", s.recv_seq}}.dump()));
  reset_attempts(s.peer);
  for (auto& [key, o] : outstanding_) {
    if (key.first == s.peer) o.last_sent.reset();
  }
  retry_pass(s, clock_, out);
}

void NodeEngine::handle_ack(PeerSession& s, std::uint64_t acked, EngineOutput& out) {
  acked = std::min(acked, s.send_seq);
  sync_.acknowledge(s.peer, acked);
  for (auto it = entry_of_.lower_bound({s.peer, 0}); it != entry_of_.end() && it->first.first == s.peer;) {
    if (it->first.second > acked) break;
    store_.erase(it->second);
    outstanding_.erase(it->first);
    it = entry_of_.erase(it);
  }
  if (acked > 0 && s.state == SessionState::PROFILE_EXCHANGED) transition(s, SessionState::CONNECTED, out);
}

EngineOutput NodeEngine::on_frame(const Frame& frame, SimTime now) {
  advance(now);
  EngineOutput out;
  if (frame.src == id_) return out;
  if (frame.dst != id_ && frame.dst != kBroadcast) {
    ++stats_.misaddressed;
    return out;
  }
  json body;
  if (!frame.payload.empty()) {
    body = json::parse(frame.payload, nullptr, false);
    if (body.is_discarded() || !body.is_object()) {
      ++stats_.decode_errors;
      return out;
    }
  } else {
    body = json::object();
  }

  PeerSession& s = session_for(frame.src);
  s.last_seen = now;

  auto discover = [&] {
    if (s.state == SessionState::IDLE) transition(s, SessionState::DISCOVERED, out);
    if (s.state == SessionState::DISCOVERED) out.frames.push_back(control(s, FrameKind::PROFILE_REQ, "{}"));
  };

  try {
    switch (frame.kind) {
      case FrameKind::BEACON:
        if (auto loc = parse_location(body)) s.peer_location = loc;
        discover();
        break;

      case FrameKind::PROFILE_REQ: {
        if (s.state == SessionState::IDLE) transition(s, SessionState::DISCOVERED, out);
        out.frames.push_back(control(s, FrameKind::PROFILE_RESP, matchmaking::profile_to_wire(profile_).dump()));
        break;
      }

      case FrameKind::PROFILE_RESP: {
        Profile peer = matchmaking::profile_from_wire(body);
        if (peer.context.location) s.peer_location = peer.context.location;
        if (s.state == SessionState::IDLE) {
          transition(s, SessionState::DISCOVERED, out);
        } else if (s.state == SessionState::DISCOVERED) {
          s.peer_profile = std::move(peer);
          transition(s, SessionState::PROFILE_EXCHANGED, out);
          on_exchanged(s, out);
        } else {
          s.peer_profile = std::move(peer);
        }
        break;
      }

      case FrameKind::FRIEND_SEARCH: {
        Profile query = matchmaking::profile_from_wire(body.at("profile"));
        if (query.context.location) s.peer_location = query.context.location;
        discover();
        if (profile_.interests.empty()) break;
        // Unknown positions are treated as co-located: the query arrived over
        // the short-range link.
        double meters = 0.0;
        if (profile_.context.location && query.context.location) {
          meters = matchmaking::distance(*profile_.context.location, *query.context.location);
        }
        const auto score = matchmaking::relevance(profile_, query, meters, *taxonomy_, config_.match);
        json reply{{"score", matchmaking::score_to_json(score)},
                   {"class", matchmaking::to_string(matchmaking::is_match(score, config_.match))},
                   {"profile", matchmaking::profile_to_wire(profile_)},
                   {"search", frame.seq}};
        out.frames.push_back(control(s, FrameKind::MATCH_RESULT, reply.dump()));
        break;
      }

      case FrameKind::MATCH_RESULT: {
        MatchReport r;
        r.peer = frame.src;
        r.profile = matchmaking::profile_from_wire(body.at("profile"));
        r.score = matchmaking::score_from_json(body.at("score"));
        r.classification = matchmaking::is_match(r.score, config_.match);
        if (r.classification != MatchClass::no_match) {
          auto other = graph_.find_prosumer(r.profile.person_id);
          if (!other && !r.profile.name.empty()) other = graph_.incarnate(r.profile);
          if (other && *other != self_prosumer_ && !graph_.neighbors(self_prosumer_).count(*other)) {
            graph_.befriend(self_prosumer_, *other);
          }
        }
        match_reports_[frame.src] = r;
        out.match_results.push_back(std::move(r));
        break;
      }

      case FrameKind::CHAT: {
        const std::uint64_t seq = frame.seq;
        if (seq == 0 || seq <= s.recv_seq || s.reorder.count(seq)) {
          ++stats_.duplicate_chats;
        } else {
          s.reorder.emplace(seq, frame.payload);
          while (!s.reorder.empty() && s.reorder.begin()->first == s.recv_seq + 1) {
            const json msg = json::parse(s.reorder.begin()->second);
            ChatMessage m;
            m.from = frame.src;
            m.seq = s.reorder.begin()->first;
            m.text = msg.at("text").get<std::string>();
            if (msg.contains("group")) m.group = msg.at("group").get<std::string>();
            m.sent_at = msg.value("sent_at", SimTime{0});
            m.delivered_at = now;
            inbox_.push_back(m);
            out.delivered.push_back(std::move(m));
            s.recv_seq = s.reorder.begin()->first;
            s.reorder.erase(s.reorder.begin());
          }
        }
        out.frames.push_back(control(s, FrameKind::ACK, json{{"ack", s.recv_seq}}.dump()));
        if (s.state == SessionState::PROFILE_EXCHANGED) {
          transition(s, SessionState::CONNECTED, out);
        } else {
          discover();
        }
        break;
      }

      case FrameKind::ACK:
        handle_ack(s, body.at("ack").get<std::uint64_t>(), out);
        break;

      case FrameKind::SYNC:
        handle_ack(s, body.at("ack").get<std::uint64_t>(), out);
        reset_attempts(s.peer);
        retry_pass(s, now, out);
        break;

      case FrameKind::GROUP_OP: {
        const std::string op = body.at("op").get<std::string>();
        const std::string name = body.at("group").get<std::string>();
        if (op == "invite") {
          auto& roster = groups_[name];
          for (const auto& m : body.at("members")) roster.insert(m.get<NodeId>());
          roster.insert(id_);
          roster.insert(frame.src);
          out.frames.push_back(control(s, FrameKind::GROUP_OP, json{{"op", "join"}, {"group", name}}.dump()));
        } else if (op == "join") {
          auto it = groups_.find(name);
          if (it != groups_.end()) it->second.insert(frame.src);
        }
        break;
      }

      case FrameKind::PLATFORM_REQ:
        s.peer_online = true;
        break;
    }
  } catch (const json::exception&) {
    ++stats_.decode_errors;
  } catch (const Error& e) {
    if (e.code() != ErrorCode::DecodeError && e.code() != ErrorCode::ParseError) throw;
    ++stats_.decode_errors;
  }
  return out;
}

EngineOutput NodeEngine::queue_chat(NodeId peer, const std::string& text, const std::optional<std::string>& group,
                                    SimTime now) {
  if (text.empty()) throw Error(ErrorCode::EmptyMessage, "chat text is empty");
  if (peer == id_ || peer == kBroadcast) throw Error(ErrorCode::UnknownPeer, "cannot chat with node " + std::to_string(peer));
  json msg{{"text", text}, {"sent_at", now}};
  if (group) msg["group"] = *group;
  std::string payload = msg.dump();
  if (payload.size() > config_.protocol.max_payload) {
    throw Error(ErrorCode::PayloadTooLarge, std::to_string(payload.size()) + " byte payload exceeds " +
                                                std::to_string(config_.protocol.max_payload));
  }
  advance(now);
  EngineOutput out;
  PeerSession& s = session_for(peer);
  const std::uint64_t seq = ++s.send_seq;
  contentstore::StoreEntry entry;
  entry.entry_id = contentstore::EntryId{next_entry_++};
  entry.payload = payload;
  entry.created_at = now;
  entry.origin = profile_.person_id;
  entry.dest = peer;
  entry.seq = seq;
  out.evicted = store_.put(entry);
  for (const auto& victim : out.evicted) {
    for (auto it = entry_of_.begin(); it != entry_of_.end(); ++it) {
      if (it->second == victim) {
        outstanding_.erase(it->first);
        entry_of_.erase(it);
        break;
      }
    }
  }
  entry_of_[{peer, seq}] = entry.entry_id;
  Outstanding& o = outstanding_[{peer, seq}];
  ++stats_.chats_sent;
  if (reachable(s)) {
    o.last_sent = now;
    out.frames.push_back(OutFrame{Frame{FrameKind::CHAT, id_, peer, seq, std::move(payload)}, preferred_transport()});
  }
  return out;
}

EngineOutput NodeEngine::send_chat(NodeId peer, const std::string& text, SimTime now) {
  return queue_chat(peer, text, std::nullopt, now);
}

EngineOutput NodeEngine::friend_search(SimTime now) {
  if (profile_.interests.empty()) throw Error(ErrorCode::EmptyInterests, "own profile has no interests");
  advance(now);
  match_reports_.clear();
  Profile summary;
  summary.person_id = profile_.person_id;
  summary.name = profile_.name;
  summary.interests = profile_.interests;
  summary.context.location = profile_.context.location;
  EngineOutput out;
  out.frames.push_back(
      broadcast(FrameKind::FRIEND_SEARCH, json{{"profile", matchmaking::profile_to_wire(summary)}}.dump()));
  return out;
}

std::vector<matchmaking::RankedCandidate> NodeEngine::search_results() const {
  std::vector<matchmaking::Candidate> candidates;
  for (const auto& [peer, r] : match_reports_) candidates.push_back({r.profile, r.score.observer_distance});
  return matchmaking::rank_candidates(profile_, candidates, *taxonomy_, config_.match);
}

EngineOutput NodeEngine::platform_request(SimTime now) {
  advance(now);
  wide_requested_ = true;
  wide_believed_up_ = true;
  EngineOutput out;
  for (auto& [peer, s] : sessions_) {
    if (s.state >= SessionState::PROFILE_EXCHANGED) {
      out.frames.push_back(control(s, FrameKind::PLATFORM_REQ, json{{"transport", "wide_area"}}.dump()));
    }
  }
  for (auto& [peer, s] : sessions_) retry_pass(s, now, out);
  return out;
}

void NodeEngine::on_transport_report(const OutFrame& sent, Transport used, SimTime now) {
  if (sent.via == Transport::wide_area && used != Transport::wide_area && wide_believed_up_) {
    wide_believed_up_ = false;
    wide_down_since_ = std::max(now, clock_);
  }
}

EngineOutput NodeEngine::form_group(const std::string& name, SimTime now) {
  if (groups_.count(name)) throw Error(ErrorCode::DuplicateGroupName, "group '" + name + "'");
  advance(now);
  graph_.form_group(self_prosumer_, name);
  groups_[name] = {id_};
  return {};
}

EngineOutput NodeEngine::invite(NodeId peer, const std::string& group, SimTime now) {
  auto it = groups_.find(group);
  if (it == groups_.end()) throw Error(ErrorCode::UnknownGroup, "group '" + group + "'");
  if (peer == id_ || peer == kBroadcast) throw Error(ErrorCode::UnknownPeer, "cannot invite node " + std::to_string(peer));
  advance(now);
  EngineOutput out;
  PeerSession& s = session_for(peer);
  json members = json::array();
  for (NodeId m : it->second) members.push_back(m);
  out.frames.push_back(
      control(s, FrameKind::GROUP_OP, json{{"op", "invite"}, {"group", group}, {"members", members}}.dump()));
  return out;
}

EngineOutput NodeEngine::send_group_chat(const std::string& group, const std::string& text, SimTime now) {
  auto it = groups_.find(group);
  if (it == groups_.end()) throw Error(ErrorCode::UnknownGroup, "group '" + group + "'");
  EngineOutput out;
  for (NodeId member : it->second) {
    if (member != id_) out.append(queue_chat(member, text, group, now));
  }
  return out;
}

}  // namespace mym::protocol
