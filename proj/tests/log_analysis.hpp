#pragma once

// Independent checks over event logs, shared by unit and acceptance tests.

#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <tuple>
#include <vector>

#include "mym/matchmaking.hpp"
#include "mym/netsim.hpp"

namespace logcheck {

using mym::netsim::EventKind;
using mym::netsim::EventLog;
using mym::netsim::ScenarioConfig;
using mym::netsim::SimEvent;

inline std::string text(const EventLog& log) {
  std::ostringstream out;
  mym::netsim::write_event_log(log, out);
  return out.str();
}

inline std::vector<const SimEvent*> of_kind(const EventLog& log, EventKind k) {
  std::vector<const SimEvent*> out;
  for (const auto& e : log) {
    if (e.kind == k) out.push_back(&e);
  }
  return out;
}

inline mym::SimTime latency(const ScenarioConfig& cfg, const std::string& transport) {
  return transport == "wide_area" ? cfg.wide_latency : cfg.short_latency;
}

/// Transport of the first CHAT frame that brought `chat` to its receiver.
inline std::optional<std::string> carrier(const EventLog& log, const SimEvent& chat) {
  const auto src = chat.details.at("src");
  const auto dst = chat.details.at("dst");
  const auto seq = chat.details.at("chat_seq");
  for (const auto& e : log) {
    if (e.seq >= chat.seq) break;
    if (e.kind == EventKind::FrameDelivered && e.details.value("frame_kind", "") == "CHAT" &&
        e.details.at("src") == src && e.details.at("dst") == dst && e.details.value("frame_seq", 0ULL) == seq) {
      return e.details.at("transport").get<std::string>();
    }
  }
  return std::nullopt;
}

/// Per-peer inbox order: for each (src,dst), delivered chat_seq must run 1,2,3,...
/// with no repeats. Returns the number of violations.
inline int exactly_once_violations(const EventLog& log) {
  std::map<std::pair<std::uint64_t, std::uint64_t>, std::uint64_t> next;
  int bad = 0;
  for (const auto* e : of_kind(log, EventKind::ChatDelivered)) {
    auto& n = next[{e->details.at("src").get<std::uint64_t>(), e->details.at("dst").get<std::uint64_t>()}];
    if (e->details.at("chat_seq").get<std::uint64_t>() != n + 1) ++bad;
    n = e->details.at("chat_seq").get<std::uint64_t>();
  }
  return bad;
}

/// Every ChatDelivered has an earlier FrameSent for the same CHAT frame.
inline int causality_violations(const EventLog& log) {
  int bad = 0;
  for (const auto* c : of_kind(log, EventKind::ChatDelivered)) {
    bool found = false;
    for (const auto& e : log) {
      if (e.seq >= c->seq) break;
      if (e.kind == EventKind::FrameSent && e.details.at("frame_kind") == "CHAT" &&
          e.details.at("src") == c->details.at("src") && e.details.at("dst") == c->details.at("dst") &&
          e.details.at("frame_seq") == c->details.at("chat_seq") && e.details.at("transport") != "none") {
        found = true;
        break;
      }
    }
    bad += !found;
  }
  return bad;
}

/// Recounts in-flight frames from send times and compares with the
/// sent/delivered/dropped balance per transport. Needs jitter off.
inline int conservation_violations(const ScenarioConfig& cfg, const EventLog& log) {
  std::map<std::string, long> sent, delivered, dropped, late_sends, late_losses;
  for (const auto& e : log) {
    if (e.kind != EventKind::FrameSent && e.kind != EventKind::FrameDelivered && e.kind != EventKind::FrameDropped) {
      continue;
    }
    const std::string tr = e.details.at("transport").get<std::string>();
    const bool late = tr != "none" && e.time + latency(cfg, tr) > cfg.duration;
    if (e.kind == EventKind::FrameSent) {
      ++sent[tr];
      late_sends[tr] += late;
    } else if (e.kind == EventKind::FrameDelivered) {
      ++delivered[tr];
    } else {
      ++dropped[tr];
      late_losses[tr] += late;
    }
  }
  int bad = 0;
  const auto m = mym::netsim::metrics(log);
  for (const std::string tr : {"short_range", "wide_area", "none"}) {
    const long in_flight = late_sends[tr] - late_losses[tr];
    bad += sent[tr] != delivered[tr] + dropped[tr] + in_flight;
    const auto& c = m.frames.at(tr == "short_range" ? mym::netsim::Transport::short_range
                                : tr == "wide_area" ? mym::netsim::Transport::wide_area
                                                    : mym::netsim::Transport::none);
    bad += static_cast<long>(c.sent) != sent[tr];
    bad += static_cast<long>(c.in_flight()) != in_flight;
  }
  return bad;
}

/// Each FrameDelivered maps back to a FrameSent whose link was open at send
/// time by direct geometry and outage checks. Needs jitter off.
inline int link_violations(const ScenarioConfig& cfg, const EventLog& log) {
  int bad = 0;
  for (const auto* d : of_kind(log, EventKind::FrameDelivered)) {
    const std::string tr = d->details.at("transport").get<std::string>();
    const mym::SimTime sent_at = d->time - latency(cfg, tr);
    if (tr == "none") {
      ++bad;
      continue;
    }
    if (tr == "short_range") {
      const auto pos = mym::netsim::positions_at(cfg, sent_at);
      const auto& a = pos.at(d->details.at("src").get<std::uint64_t>());
      const auto& b = pos.at(d->details.at("dst").get<std::uint64_t>());
      const double dx = a.x - b.x;
      const double dy = a.y - b.y;
      bad += dx * dx + dy * dy > cfg.radio_range * cfg.radio_range;
    } else {
      for (const auto& o : cfg.wide_area_outages) bad += sent_at >= o.start && sent_at < o.end;
    }
  }
  return bad;
}

}  // namespace logcheck
