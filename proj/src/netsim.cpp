#include "mym/netsim.hpp"

#include <algorithm>
#include <cmath>
#include <exception>
#include <istream>
#include <limits>
#include <ostream>
#include <queue>
#include <variant>

#include "mym/error.hpp"
#include "mym/profile_io.hpp"

namespace mym::netsim {

using nlohmann::json;
using protocol::EngineOutput;
using protocol::NodeEngine;
using protocol::OutFrame;

const char* to_string(ActionKind k) {
  switch (k) {
    case ActionKind::chat: return "chat";
    case ActionKind::group_chat: return "group_chat";
    case ActionKind::friend_search: return "friend_search";
    case ActionKind::platform_request: return "platform_request";
    case ActionKind::form_group: return "form_group";
    case ActionKind::invite: return "invite";
  }
  return "chat";
}

const char* to_string(EventKind k) {
  switch (k) {
    case EventKind::FrameSent: return "FrameSent";
    case EventKind::FrameDelivered: return "FrameDelivered";
    case EventKind::FrameDropped: return "FrameDropped";
    case EventKind::NodeMoved: return "NodeMoved";
    case EventKind::OutageStart: return "OutageStart";
    case EventKind::OutageEnd: return "OutageEnd";
    case EventKind::MatchFound: return "MatchFound";
    case EventKind::ChatDelivered: return "ChatDelivered";
    case EventKind::StoreEvicted: return "StoreEvicted";
    case EventKind::ActionFailed: return "ActionFailed";
  }
  return "?";
}

namespace {

std::optional<EventKind> event_kind_from_string(const std::string& s) {
  for (int i = 0; i <= static_cast<int>(EventKind::ActionFailed); ++i) {
    if (s == to_string(static_cast<EventKind>(i))) return static_cast<EventKind>(i);
  }
  return std::nullopt;
}

Transport transport_from_string(const std::string& s) {
  if (s == "short_range") return Transport::short_range;
  if (s == "wide_area") return Transport::wide_area;
  return Transport::none;
}

}  // namespace

std::string to_jsonl(const SimEvent& e) {
  json j = e.details.is_object() ? e.details : json::object();
  j["t"] = e.time;
  j["seq"] = e.seq;
  j["kind"] = to_string(e.kind);
  return j.dump(-1, ' ', false, json::error_handler_t::replace);
}

void write_event_log(const EventLog& log, std::ostream& out) {
  for (const SimEvent& e : log) out << to_jsonl(e) << '\n';
}

EventLog read_event_log(std::istream& in) {
  EventLog log;
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    json j = json::parse(line);
    SimEvent e;
    e.time = j.at("t").get<SimTime>();
    e.seq = j.at("seq").get<std::uint64_t>();
    const auto kind = event_kind_from_string(j.at("kind").get<std::string>());
    if (!kind) throw Error(ErrorCode::ParseError, "unknown event kind in log");
    e.kind = *kind;
    j.erase("t");
    j.erase("seq");
    j.erase("kind");
    e.details = std::move(j);
    log.push_back(std::move(e));
  }
  return log;
}

Position move_node(const NodeConfig& node, SimTime t) {
  SimTime t0 = 0;
  Position p0 = node.initial;
  for (const Waypoint& w : node.waypoints) {
    if (t < w.t) {
      if (t <= t0) return p0;
      const double f = static_cast<double>(t - t0) / static_cast<double>(w.t - t0);
      return Position{p0.x + f * (w.position.x - p0.x), p0.y + f * (w.position.y - p0.y)};
    }
    t0 = w.t;
    p0 = w.position;
  }
  return p0;
}

std::map<NodeId, Position> positions_at(const ScenarioConfig& cfg, SimTime t) {
  std::map<NodeId, Position> out;
  for (const NodeConfig& n : cfg.nodes) out.emplace(n.id, move_node(n, t));
  return out;
}

bool wide_area_up(const ScenarioConfig& cfg, SimTime t) {
  return std::none_of(cfg.wide_area_outages.begin(), cfg.wide_area_outages.end(),
                      [t](const Outage& o) { return t >= o.start && t < o.end; });
}

Transport deliverable(const ScenarioConfig& cfg, const std::map<NodeId, Position>& positions, NodeId src, NodeId dst,
                      SimTime t, Transport preferred) {
  auto a = positions.find(src);
  auto b = positions.find(dst);
  if (a == positions.end()) throw Error(ErrorCode::UnknownNode, "node " + std::to_string(src));
  if (b == positions.end()) throw Error(ErrorCode::UnknownNode, "node " + std::to_string(dst));
  const bool short_ok = matchmaking::distance(a->second, b->second) <= cfg.radio_range;
  const bool wide_ok = wide_area_up(cfg, t);
  if (preferred == Transport::wide_area) {
    if (wide_ok) return Transport::wide_area;
    return short_ok ? Transport::short_range : Transport::none;
  }
  if (short_ok) return Transport::short_range;
  return wide_ok ? Transport::wide_area : Transport::none;
}

MetricsReport metrics(const EventLog& log) {
  MetricsReport m;
  for (Transport t : {Transport::short_range, Transport::wide_area, Transport::none}) m.frames[t];
  SimTime lat_sum = 0;
  for (const SimEvent& e : log) {
    switch (e.kind) {
      case EventKind::FrameSent:
        ++m.frames[transport_from_string(e.details.at("transport").get<std::string>())].sent;
        break;
      case EventKind::FrameDelivered:
        ++m.frames[transport_from_string(e.details.at("transport").get<std::string>())].delivered;
        break;
      case EventKind::FrameDropped:
        ++m.frames[transport_from_string(e.details.at("transport").get<std::string>())].dropped;
        break;
      case EventKind::ChatDelivered: {
        const SimTime lat = e.details.at("latency_ms").get<SimTime>();
        if (m.chats_delivered == 0) {
          m.chat_latency_min = m.chat_latency_max = lat;
        } else {
          m.chat_latency_min = std::min(m.chat_latency_min, lat);
          m.chat_latency_max = std::max(m.chat_latency_max, lat);
        }
        lat_sum += lat;
        ++m.chats_delivered;
        break;
      }
      case EventKind::MatchFound:
        m.match_relevance.push_back(e.details.at("relevance").get<double>());
        break;
      case EventKind::StoreEvicted:
        ++m.store_evictions;
        break;
      case EventKind::ActionFailed:
        ++m.actions_failed;
        break;
      default:
        break;
    }
  }
  if (m.chats_delivered > 0) m.chat_latency_mean = static_cast<double>(lat_sum) / static_cast<double>(m.chats_delivered);
  return m;
}

void write_metrics_csv(const MetricsReport& m, std::size_t nodes, std::ostream& out) {
  char buf[64];
  auto fixed = [&](double v) {
    std::snprintf(buf, sizeof buf, "%.6f", v);
    return std::string(buf);
  };
  out << "metric,value\n";
  out << "nodes," << nodes << '\n';
  for (Transport t : {Transport::short_range, Transport::wide_area, Transport::none}) {
    const TransportCounts& c = m.frames.at(t);
    const std::string name = protocol::to_string(t);
    out << "frames_sent_" << name << ',' << c.sent << '\n';
    out << "frames_delivered_" << name << ',' << c.delivered << '\n';
    out << "frames_dropped_" << name << ',' << c.dropped << '\n';
    out << "frames_in_flight_" << name << ',' << c.in_flight() << '\n';
  }
  out << "chats_delivered," << m.chats_delivered << '\n';
  out << "chat_latency_min_ms," << m.chat_latency_min << '\n';
  out << "chat_latency_mean_ms," << fixed(m.chat_latency_mean) << '\n';
  out << "chat_latency_max_ms," << m.chat_latency_max << '\n';
  out << "matches_found," << m.match_relevance.size() << '\n';
  out << "store_evictions," << m.store_evictions << '\n';
  out << "actions_failed," << m.actions_failed << '\n';
  for (double r : m.match_relevance) out << "match_relevance," << fixed(r) << '\n';
}

// ---------------------------------------------------------------------------
// Event loop

namespace {

// Same-time events run in phase order: link state, movement, arrivals,
// scripted actions, then node ticks.
enum Phase : int { kOutage = 0, kMove = 1, kArrival = 2, kAction = 3, kTick = 4 };

struct Arrival {
  NodeId src;
  NodeId dst;
  Transport transport;
  protocol::Bytes bytes;
  bool duplicate;
};

struct OutageEdge {
  bool start;
  std::size_t index;
};

struct MoveMark {
  NodeId node;
  std::size_t waypoint;
};

struct Tick {};

struct Scheduled {
  SimTime t;
  int phase;
  NodeId actor;
  std::uint64_t counter;
  std::variant<Arrival, OutageEdge, MoveMark, std::size_t, Tick> what;  // size_t: script index
};

struct Later {
  bool operator()(const Scheduled& a, const Scheduled& b) const {
    return std::tie(a.t, a.phase, a.actor, a.counter) > std::tie(b.t, b.phase, b.actor, b.counter);
  }
};

double uniform01(std::mt19937_64& rng) { return static_cast<double>(rng() >> 11) * 0x1.0p-53; }

}  // namespace

struct Simulator::Impl {
  ScenarioConfig cfg;
  std::map<NodeId, NodeEngine> engines;
  std::map<NodeId, std::uint64_t> emissions;  // per-sender emission counter
  std::priority_queue<Scheduled, std::vector<Scheduled>, Later> queue;
  std::mt19937_64 rng;
  std::mt19937_64 jitter_rng;
  EventLog log;
  SimTime now = 0;
  bool ran = false;

  explicit Impl(ScenarioConfig c) : cfg(std::move(c)), rng(cfg.seed), jitter_rng(cfg.seed ^ 0x9e3779b97f4a7c15ULL) {
    validate(cfg);
    for (const NodeConfig& n : cfg.nodes) {
      Profile p = n.profile;
      p.context.location = n.initial;
      engines.emplace(std::piecewise_construct, std::forward_as_tuple(n.id),
                      std::forward_as_tuple(n.id, std::move(p), cfg.taxonomy, cfg.engine));
    }
  }

  void emit(EventKind kind, json details) {
    log.push_back(SimEvent{now, log.size() + 1, kind, std::move(details)});
  }

  void place_nodes() {
    for (const NodeConfig& n : cfg.nodes) engines.at(n.id).set_location(move_node(n, now));
  }

  void transmit(NodeId src, NodeId dst, Transport via, const protocol::Frame& f, const protocol::Bytes& bytes) {
    json base{{"src", src},
              {"dst", dst},
              {"transport", protocol::to_string(via)},
              {"frame_kind", protocol::to_string(f.kind)},
              {"frame_seq", f.seq},
              {"bytes", bytes.size()}};
    emit(EventKind::FrameSent, base);
    const double loss_draw = uniform01(rng);
    const double dup_draw = uniform01(rng);
    const SimTime latency = via == Transport::wide_area ? cfg.wide_latency : cfg.short_latency;
    auto schedule = [&](bool duplicate) {
      SimTime extra = 0;
      if (cfg.jitter > 0) extra = static_cast<SimTime>(jitter_rng() % static_cast<std::uint64_t>(cfg.jitter + 1));
      queue.push(Scheduled{now + latency + extra, kArrival, src, emissions[src]++,
                           Arrival{src, dst, via, bytes, duplicate}});
    };
    if (loss_draw < cfg.loss_prob) {
      json d = base;
      d["reason"] = "loss";
      emit(EventKind::FrameDropped, std::move(d));
    } else {
      schedule(false);
    }
    if (dup_draw < cfg.dup_prob) {
      json d = base;
      d["duplicate"] = true;
      emit(EventKind::FrameSent, std::move(d));
      schedule(true);
    }
  }

  void send(NodeId src, const OutFrame& of) {
    const protocol::Bytes bytes = protocol::encode_frame(of.frame, cfg.engine.protocol.max_payload);
    const auto positions = positions_at(cfg, now);
    if (of.frame.dst == protocol::kBroadcast) {
      const Position& from = positions.at(src);
      for (const auto& [id, pos] : positions) {
        if (id == src) continue;
        if (matchmaking::distance(from, pos) <= cfg.radio_range) {
          transmit(src, id, Transport::short_range, of.frame, bytes);
        }
      }
      return;
    }
    Transport used = Transport::none;
    if (positions.count(of.frame.dst)) {
      used = deliverable(cfg, positions, src, of.frame.dst, now, of.via);
    }
    engines.at(src).on_transport_report(of, used, now);
    if (used == Transport::none) {
      json d{{"src", src},
             {"dst", of.frame.dst},
             {"transport", "none"},
             {"frame_kind", protocol::to_string(of.frame.kind)},
             {"frame_seq", of.frame.seq},
             {"bytes", bytes.size()}};
      emit(EventKind::FrameSent, d);
      d["reason"] = positions.count(of.frame.dst) ? "unreachable" : "unknown_node";
      emit(EventKind::FrameDropped, std::move(d));
      return;
    }
    transmit(src, of.frame.dst, used, of.frame, bytes);
  }

  void absorb(NodeId node, EngineOutput&& out) {
    for (const auto& m : out.delivered) {
      json d{{"src", m.from}, {"dst", node}, {"chat_seq", m.seq}, {"text", m.text},
             {"sent_at", m.sent_at}, {"latency_ms", m.delivered_at - m.sent_at}};
      if (m.group) d["group"] = *m.group;
      emit(EventKind::ChatDelivered, std::move(d));
    }
    for (const auto& r : out.match_results) {
      if (r.classification == matchmaking::MatchClass::no_match) continue;
      emit(EventKind::MatchFound, json{{"node", node},
                                       {"peer", r.peer},
                                       {"relevance", r.score.value},
                                       {"profile_similarity", r.score.profile_similarity},
                                       {"proximity_factor", r.score.proximity_factor},
                                       {"observer_distance", r.score.observer_distance},
                                       {"class", matchmaking::to_string(r.classification)}});
    }
    for (const auto& id : out.evicted) emit(EventKind::StoreEvicted, json{{"node", node}, {"entry_id", id.value}});
    for (const OutFrame& of : out.frames) send(node, of);
  }

  void run_action(const ScriptAction& a) {
    NodeEngine& e = engines.at(a.node);
    try {
      switch (a.kind) {
        case ActionKind::chat: absorb(a.node, e.send_chat(a.peer, a.text, now)); break;
        case ActionKind::group_chat: absorb(a.node, e.send_group_chat(a.group, a.text, now)); break;
        case ActionKind::friend_search: absorb(a.node, e.friend_search(now)); break;
        case ActionKind::platform_request: absorb(a.node, e.platform_request(now)); break;
        case ActionKind::form_group: absorb(a.node, e.form_group(a.group, now)); break;
        case ActionKind::invite: absorb(a.node, e.invite(a.peer, a.group, now)); break;
      }
    } catch (const Error& err) {
      emit(EventKind::ActionFailed, json{{"node", a.node}, {"action", to_string(a.kind)}, {"error", err.what()}});
    }
  }

  RunResult run() {
    if (ran) throw Error(ErrorCode::ConfigError, "simulator already ran");
    ran = true;
    for (std::size_t i = 0; i < cfg.wide_area_outages.size(); ++i) {
      queue.push(Scheduled{cfg.wide_area_outages[i].start, kOutage, 0, 2 * i, OutageEdge{true, i}});
      queue.push(Scheduled{cfg.wide_area_outages[i].end, kOutage, 0, 2 * i + 1, OutageEdge{false, i}});
    }
    for (const NodeConfig& n : cfg.nodes) {
      for (std::size_t w = 0; w < n.waypoints.size(); ++w) {
        queue.push(Scheduled{n.waypoints[w].t, kMove, n.id, w, MoveMark{n.id, w}});
      }
    }
    for (std::size_t i = 0; i < cfg.script.size(); ++i) {
      queue.push(Scheduled{cfg.script[i].t, kAction, cfg.script[i].node, i, i});
    }
    if (!engines.empty()) queue.push(Scheduled{0, kTick, 0, 0, Tick{}});

    while (!queue.empty() && queue.top().t <= cfg.duration) {
      Scheduled ev = queue.top();
      queue.pop();
      now = ev.t;
      place_nodes();
      if (auto* arr = std::get_if<Arrival>(&ev.what)) {
        json d{{"src", arr->src}, {"dst", arr->dst}, {"transport", protocol::to_string(arr->transport)},
               {"bytes", arr->bytes.size()}};
        if (arr->bytes.size() >= protocol::kHeaderSize) {
          if (auto k = protocol::frame_kind_from_byte(arr->bytes[0])) d["frame_kind"] = protocol::to_string(*k);
          std::uint64_t seq = 0;
          for (std::size_t i = 17; i < 25; ++i) seq = (seq << 8) | arr->bytes[i];
          d["frame_seq"] = seq;
        }
        if (arr->duplicate) d["duplicate"] = true;
        emit(EventKind::FrameDelivered, std::move(d));
        absorb(arr->dst, engines.at(arr->dst).on_bytes(arr->bytes, now));
      } else if (auto* edge = std::get_if<OutageEdge>(&ev.what)) {
        const Outage& o = cfg.wide_area_outages[edge->index];
        emit(edge->start ? EventKind::OutageStart : EventKind::OutageEnd, json{{"start", o.start}, {"end", o.end}});
      } else if (auto* mv = std::get_if<MoveMark>(&ev.what)) {
        const Position p = move_node(*std::find_if(cfg.nodes.begin(), cfg.nodes.end(),
                                                   [&](const NodeConfig& n) { return n.id == mv->node; }),
                                     now);
        emit(EventKind::NodeMoved, json{{"node", mv->node}, {"position", json::array({p.x, p.y})}});
      } else if (auto* idx = std::get_if<std::size_t>(&ev.what)) {
        run_action(cfg.script[*idx]);
      } else {
        for (auto& [id, e] : engines) absorb(id, e.on_tick(now));
        queue.push(Scheduled{now + cfg.tick_interval, kTick, 0, 0, Tick{}});
      }
    }
    return RunResult{log, metrics(log)};
  }
};

Simulator::Simulator(ScenarioConfig cfg) : impl_(std::make_unique<Impl>(std::move(cfg))) {}
Simulator::~Simulator() = default;
Simulator::Simulator(Simulator&&) noexcept = default;
Simulator& Simulator::operator=(Simulator&&) noexcept = default;

RunResult Simulator::run() { return impl_->run(); }
const ScenarioConfig& Simulator::config() const { return impl_->cfg; }
const EventLog& Simulator::log() const { return impl_->log; }

const protocol::NodeEngine& Simulator::engine(NodeId id) const {
  auto it = impl_->engines.find(id);
  if (it == impl_->engines.end()) throw Error(ErrorCode::UnknownNode, "node " + std::to_string(id));
  return it->second;
}

RunResult run(const ScenarioConfig& cfg) { return Simulator(cfg).run(); }

std::vector<RunResult> run_many_serial(const std::vector<ScenarioConfig>& cfgs) {
  std::vector<RunResult> out;
  out.reserve(cfgs.size());
  for (const auto& c : cfgs) out.push_back(run(c));
  return out;
}

std::vector<RunResult> run_many(const std::vector<ScenarioConfig>& cfgs) {
  std::vector<RunResult> out(cfgs.size());
  std::vector<std::exception_ptr> errors(cfgs.size());
  const auto n = static_cast<std::int64_t>(cfgs.size());
#pragma omp parallel for schedule(dynamic, 1)
  for (std::int64_t i = 0; i < n; ++i) {
    const auto k = static_cast<std::size_t>(i);
    try {
      out[k] = run(cfgs[k]);
    } catch (...) {
      errors[k] = std::current_exception();
    }
  }
  for (auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }
  return out;
}

}  // namespace mym::netsim
