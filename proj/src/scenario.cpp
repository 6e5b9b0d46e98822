#include <filesystem>
#include <fstream>
#include <set>

#include "mym/error.hpp"
#include "mym/netsim.hpp"
#include "mym/profile_io.hpp"

namespace mym::netsim {

using nlohmann::json;
namespace fs = std::filesystem;

namespace {

[[noreturn]] void config_error(const std::string& field, const std::string& what) {
  throw Error(ErrorCode::ConfigError, field + ": " + what);
}

Position parse_position(const json& j, const std::string& field) {
  if (!j.is_array() || j.size() != 2 || !j[0].is_number() || !j[1].is_number()) {
    config_error(field, "expected [x, y]");
  }
  return Position{j[0].get<double>(), j[1].get<double>()};
}

ActionKind parse_action(const std::string& s, const std::string& field) {
  for (ActionKind k : {ActionKind::chat, ActionKind::group_chat, ActionKind::friend_search,
                       ActionKind::platform_request, ActionKind::form_group, ActionKind::invite}) {
    if (s == to_string(k)) return k;
  }
  config_error(field, "unknown action '" + s + "'");
}

void check_keys(const json& obj, const std::set<std::string>& allowed, const std::string& where) {
  if (!obj.is_object()) config_error(where, "expected an object");
  for (const auto& [key, value] : obj.items()) {
    if (!allowed.count(key)) config_error(where.empty() ? key : where + "." + key, "unknown field");
  }
}

std::string resolve_path(const std::string& base_dir, const std::string& p) {
  const fs::path path(p);
  if (path.is_absolute() || base_dir.empty()) return path.string();
  return (fs::path(base_dir) / path).string();
}

}  // namespace

void validate(const ScenarioConfig& cfg) {
  if (!cfg.taxonomy) config_error("taxonomy", "missing");
  if (!(cfg.radio_range > 0.0)) config_error("radio_range", "must be positive");
  if (cfg.short_latency < 0) config_error("short_latency_ms", "must be non-negative");
  if (cfg.wide_latency < 0) config_error("wide_latency_ms", "must be non-negative");
  if (!(cfg.loss_prob >= 0.0 && cfg.loss_prob < 1.0)) config_error("loss_prob", "must lie in [0,1)");
  if (!(cfg.dup_prob >= 0.0 && cfg.dup_prob < 1.0)) config_error("dup_prob", "must lie in [0,1)");
  if (cfg.jitter < 0) config_error("jitter_ms", "must be non-negative");
  if (cfg.tick_interval <= 0) config_error("tick_ms", "must be positive");
  if (cfg.duration < 0) config_error("duration_ms", "must be non-negative");

  try {
    cfg.engine.protocol.validate();
  } catch (const Error& e) {
    config_error("protocol", e.what());
  }
  try {
    cfg.engine.match.validate();
  } catch (const Error& e) {
    config_error("match", e.what());
  }
  if (cfg.engine.store.capacity == 0) config_error("store_capacity", "must be positive");

  std::set<NodeId> ids;
  std::set<matchmaking::PersonId> persons;
  for (std::size_t i = 0; i < cfg.nodes.size(); ++i) {
    const NodeConfig& n = cfg.nodes[i];
    const std::string field = "nodes[" + std::to_string(i) + "]";
    if (n.id == protocol::kBroadcast) config_error(field + ".id", "reserved broadcast id");
    if (!ids.insert(n.id).second) config_error(field + ".id", "duplicate node id " + std::to_string(n.id));
    if (!persons.insert(n.profile.person_id).second) {
      config_error(field + ".profile.person_id", "duplicate person id " + std::to_string(n.profile.person_id));
    }
    try {
      matchmaking::validate(n.profile, *cfg.taxonomy);
    } catch (const Error& e) {
      config_error(field + ".profile", e.what());
    }
    SimTime prev = 0;
    for (std::size_t w = 0; w < n.waypoints.size(); ++w) {
      if (n.waypoints[w].t <= prev) {
        config_error(field + ".waypoints[" + std::to_string(w) + "].t_ms", "must be strictly increasing and positive");
      }
      prev = n.waypoints[w].t;
    }
  }

  for (std::size_t i = 0; i < cfg.wide_area_outages.size(); ++i) {
    const Outage& o = cfg.wide_area_outages[i];
    const std::string field = "wide_area_outages[" + std::to_string(i) + "]";
    if (o.start < 0 || o.end <= o.start) config_error(field, "interval must satisfy 0 <= start < end");
    if (i > 0) {
      const Outage& p = cfg.wide_area_outages[i - 1];
      if (o.start < p.end) {
        config_error("wide_area_outages", "intervals [" + std::to_string(p.start) + "," + std::to_string(p.end) +
                                              ") and [" + std::to_string(o.start) + "," + std::to_string(o.end) +
                                              ") overlap or are unsorted");
      }
    }
  }

  for (std::size_t i = 0; i < cfg.script.size(); ++i) {
    const ScriptAction& a = cfg.script[i];
    const std::string field = "script[" + std::to_string(i) + "]";
    if (a.t < 0 || a.t > cfg.duration) config_error(field + ".t_ms", "outside [0, duration_ms]");
    if (!ids.count(a.node)) config_error(field + ".node", "unknown node " + std::to_string(a.node));
    const bool needs_peer = a.kind == ActionKind::chat || a.kind == ActionKind::invite;
    if (needs_peer && (!ids.count(a.peer) || a.peer == a.node)) {
      config_error(field + ".peer", "must name another node");
    }
    const bool needs_text = a.kind == ActionKind::chat || a.kind == ActionKind::group_chat;
    if (needs_text && a.text.empty()) config_error(field + ".text", "must be non-empty");
    const bool needs_group = a.kind == ActionKind::group_chat || a.kind == ActionKind::form_group ||
                             a.kind == ActionKind::invite;
    if (needs_group && a.group.empty()) config_error(field + ".group", "must be non-empty");
  }
}

void apply_override(json& doc, const std::string& assignment) {
  const auto eq = assignment.find('=');
  if (eq == std::string::npos || eq == 0) {
    throw Error(ErrorCode::ConfigError, "override '" + assignment + "' is not key=value");
  }
  const std::string key = assignment.substr(0, eq);
  const std::string raw = assignment.substr(eq + 1);
  json value = json::parse(raw, nullptr, false);
  if (value.is_discarded()) value = raw;
  json* target = &doc;
  std::size_t start = 0;
  while (true) {
    const auto dot = key.find('.', start);
    const std::string part = key.substr(start, dot == std::string::npos ? std::string::npos : dot - start);
    if (dot == std::string::npos) {
      (*target)[part] = value;
      break;
    }
    target = &(*target)[part];
    if (!target->is_object() && !target->is_null()) {
      throw Error(ErrorCode::ConfigError, "override '" + key + "': " + part + " is not an object");
    }
    start = dot + 1;
  }
}

ScenarioConfig parse_scenario(const json& doc, const std::string& base_dir) {
  ScenarioConfig cfg;
  try {
    check_keys(doc,
               {"name", "seed", "taxonomy", "radio_range", "short_latency_ms", "wide_latency_ms", "loss_prob",
                "dup_prob", "jitter_ms", "tick_ms", "duration_ms", "protocol", "match", "store_capacity",
                "store_ttl_ms", "body_limit", "nodes", "wide_area_outages", "script"},
               "");
    cfg.name = doc.value("name", std::string{});
    cfg.seed = doc.value("seed", std::uint64_t{0});
    cfg.radio_range = doc.value("radio_range", cfg.radio_range);
    cfg.short_latency = doc.value("short_latency_ms", cfg.short_latency);
    cfg.wide_latency = doc.value("wide_latency_ms", cfg.wide_latency);
    cfg.loss_prob = doc.value("loss_prob", cfg.loss_prob);
    cfg.dup_prob = doc.value("dup_prob", cfg.dup_prob);
    cfg.jitter = doc.value("jitter_ms", cfg.jitter);
    cfg.tick_interval = doc.value("tick_ms", cfg.tick_interval);
    if (!doc.contains("duration_ms")) config_error("duration_ms", "required");
    cfg.duration = doc.at("duration_ms").get<SimTime>();

    if (!doc.contains("taxonomy")) config_error("taxonomy", "required");
    try {
      cfg.taxonomy = std::make_shared<const ontology::Taxonomy>(
          ontology::load_taxonomy_file(resolve_path(base_dir, doc.at("taxonomy").get<std::string>())));
    } catch (const Error& e) {
      config_error("taxonomy", e.what());
    }

    if (doc.contains("protocol")) {
      const json& p = doc.at("protocol");
      check_keys(p, {"beacon_interval_ms", "session_timeout_ms", "max_payload", "retry_limit"}, "protocol");
      auto& pp = cfg.engine.protocol;
      pp.beacon_interval = p.value("beacon_interval_ms", pp.beacon_interval);
      pp.session_timeout = p.value("session_timeout_ms", pp.session_timeout);
      pp.max_payload = p.value("max_payload", pp.max_payload);
      pp.retry_limit = p.value("retry_limit", pp.retry_limit);
    }
    if (doc.contains("match")) {
      const json& m = doc.at("match");
      check_keys(m, {"match_threshold", "near_radius", "decay_length", "exact_match_floor"}, "match");
      auto& mp = cfg.engine.match;
      mp.match_threshold = m.value("match_threshold", mp.match_threshold);
      mp.near_radius = m.value("near_radius", mp.near_radius);
      mp.decay_length = m.value("decay_length", mp.decay_length);
      mp.exact_match_floor = m.value("exact_match_floor", mp.exact_match_floor);
    }
    cfg.engine.store.capacity = doc.value("store_capacity", cfg.engine.store.capacity);
    if (doc.contains("store_ttl_ms") && !doc.at("store_ttl_ms").is_null()) {
      cfg.engine.store.ttl = doc.at("store_ttl_ms").get<SimTime>();
    }
    cfg.engine.graph.body_limit = doc.value("body_limit", cfg.engine.graph.body_limit);

    const json nodes = doc.value("nodes", json::array());
    for (std::size_t i = 0; i < nodes.size(); ++i) {
      const json& n = nodes[i];
      const std::string field = "nodes[" + std::to_string(i) + "]";
      check_keys(n, {"id", "profile", "position", "waypoints"}, field);
      NodeConfig nc;
      if (!n.contains("id")) config_error(field + ".id", "required");
      nc.id = n.at("id").get<NodeId>();
      if (!n.contains("profile")) config_error(field + ".profile", "required");
      json profile_doc;
      if (n.at("profile").is_string()) {
        const std::string path = resolve_path(base_dir, n.at("profile").get<std::string>());
        std::ifstream in(path);
        if (!in) config_error(field + ".profile", "cannot open '" + path + "'");
        profile_doc = json::parse(in, nullptr, false);
        if (profile_doc.is_discarded()) config_error(field + ".profile", "'" + path + "' is not valid JSON");
      } else {
        profile_doc = n.at("profile");
      }
      if (!profile_doc.contains("person_id")) profile_doc["person_id"] = nc.id;
      try {
        nc.profile = matchmaking::profile_from_document(profile_doc, *cfg.taxonomy);
      } catch (const Error& e) {
        config_error(field + ".profile", e.what());
      }
      nc.initial = n.contains("position") ? parse_position(n.at("position"), field + ".position") : Position{};
      const json wps = n.value("waypoints", json::array());
      for (std::size_t w = 0; w < wps.size(); ++w) {
        const std::string wf = field + ".waypoints[" + std::to_string(w) + "]";
        check_keys(wps[w], {"t_ms", "position"}, wf);
        if (!wps[w].contains("t_ms") || !wps[w].contains("position")) config_error(wf, "needs t_ms and position");
        nc.waypoints.push_back({wps[w].at("t_ms").get<SimTime>(), parse_position(wps[w].at("position"), wf + ".position")});
      }
      cfg.nodes.push_back(std::move(nc));
    }

    const json outages = doc.value("wide_area_outages", json::array());
    for (std::size_t i = 0; i < outages.size(); ++i) {
      const json& o = outages[i];
      if (!o.is_array() || o.size() != 2) {
        config_error("wide_area_outages[" + std::to_string(i) + "]", "expected [start_ms, end_ms]");
      }
      cfg.wide_area_outages.push_back({o[0].get<SimTime>(), o[1].get<SimTime>()});
    }

    const json script = doc.value("script", json::array());
    for (std::size_t i = 0; i < script.size(); ++i) {
      const json& a = script[i];
      const std::string field = "script[" + std::to_string(i) + "]";
      check_keys(a, {"t_ms", "node", "action", "peer", "text", "group"}, field);
      if (!a.contains("t_ms") || !a.contains("node") || !a.contains("action")) {
        config_error(field, "needs t_ms, node and action");
      }
      ScriptAction sa;
      sa.t = a.at("t_ms").get<SimTime>();
      sa.node = a.at("node").get<NodeId>();
      sa.kind = parse_action(a.at("action").get<std::string>(), field + ".action");
      sa.peer = a.value("peer", NodeId{0});
      sa.text = a.value("text", std::string{});
      sa.group = a.value("group", std::string{});
      cfg.script.push_back(std::move(sa));
    }
  } catch (const json::exception& e) {
    throw Error(ErrorCode::ConfigError, std::string("scenario: ") + e.what());
  }
  validate(cfg);
  return cfg;
}

json read_scenario_document(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::ConfigError, "cannot open scenario '" + path + "'");
  json doc = json::parse(in, nullptr, false);
  if (doc.is_discarded()) throw Error(ErrorCode::ConfigError, "scenario '" + path + "' is not valid JSON");
  return doc;
}

ScenarioConfig load_scenario(const std::string& path, const std::vector<std::string>& overrides) {
  json doc = read_scenario_document(path);
  for (const auto& o : overrides) apply_override(doc, o);
  return parse_scenario(doc, fs::path(path).parent_path().string());
}

}  // namespace mym::netsim
