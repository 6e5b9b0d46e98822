#pragma once

#include <cstdint>
#include <iosfwd>
#include <map>
#include <memory>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include <json.hpp>

#include "mym/ontology.hpp"
#include "mym/protocol.hpp"
#include "mym/types.hpp"

namespace mym::netsim {

using matchmaking::Position;
using matchmaking::Profile;
using protocol::NodeId;
using protocol::Transport;

struct Waypoint {
  SimTime t = 0;
  Position position;
};

struct NodeConfig {
  NodeId id = 0;
  Profile profile;
  Position initial;
  std::vector<Waypoint> waypoints;  // strictly increasing t > 0
};

/// Wide-area link down during [start, end).
struct Outage {
  SimTime start = 0;
  SimTime end = 0;
};

enum class ActionKind { chat, group_chat, friend_search, platform_request, form_group, invite };
const char* to_string(ActionKind k);

/// A user action injected at a given time.
struct ScriptAction {
  SimTime t = 0;
  NodeId node = 0;
  ActionKind kind = ActionKind::chat;
  NodeId peer = 0;
  std::string text;
  std::string group;
};

struct ScenarioConfig {
  std::string name;
  std::uint64_t seed = 0;
  double radio_range = 30.0;
  SimTime short_latency = 20;
  SimTime wide_latency = 120;
  double loss_prob = 0.0;
  double dup_prob = 0.0;
  SimTime jitter = 0;  // uniform extra latency in [0, jitter]; off by default
  SimTime tick_interval = 100;
  SimTime duration = 0;
  std::vector<NodeConfig> nodes;
  std::vector<Outage> wide_area_outages;
  std::vector<ScriptAction> script;
  std::shared_ptr<const ontology::Taxonomy> taxonomy;
  protocol::EngineConfig engine;
};

/// Throws ConfigError naming the offending field. Shared by sim-validate and
/// the runner.
void validate(const ScenarioConfig& cfg);

/// Scenario file support. Paths inside the document (taxonomy, profile
/// files) resolve relative to `base_dir`.
ScenarioConfig parse_scenario(const nlohmann::json& doc, const std::string& base_dir);
nlohmann::json read_scenario_document(const std::string& path);
ScenarioConfig load_scenario(const std::string& path, const std::vector<std::string>& overrides = {});
/// Applies `key=value` (dotted keys reach nested objects; value parsed as JSON
/// when possible, otherwise taken as a string).
void apply_override(nlohmann::json& doc, const std::string& assignment);

enum class EventKind {
  FrameSent,
  FrameDelivered,
  FrameDropped,
  NodeMoved,
  OutageStart,
  OutageEnd,
  MatchFound,
  ChatDelivered,
  StoreEvicted,
  ActionFailed,
};
const char* to_string(EventKind k);

struct SimEvent {
  SimTime time = 0;
  std::uint64_t seq = 0;
  EventKind kind = EventKind::FrameSent;
  nlohmann::json details;  // kind-specific fields
};

using EventLog = std::vector<SimEvent>;

std::string to_jsonl(const SimEvent& e);
void write_event_log(const EventLog& log, std::ostream& out);
EventLog read_event_log(std::istream& in);

Position move_node(const NodeConfig& node, SimTime t);
std::map<NodeId, Position> positions_at(const ScenarioConfig& cfg, SimTime t);

bool wide_area_up(const ScenarioConfig& cfg, SimTime t);

/// Picks the transport for a unicast frame: `preferred` when available,
/// otherwise the other one, otherwise none.
Transport deliverable(const ScenarioConfig& cfg, const std::map<NodeId, Position>& positions, NodeId src, NodeId dst,
                      SimTime t, Transport preferred);

struct TransportCounts {
  std::uint64_t sent = 0;
  std::uint64_t delivered = 0;
  std::uint64_t dropped = 0;
  std::uint64_t in_flight() const { return sent - delivered - dropped; }
};

struct MetricsReport {
  std::map<Transport, TransportCounts> frames;  // always holds all three transports
  std::uint64_t chats_delivered = 0;
  SimTime chat_latency_min = 0;
  double chat_latency_mean = 0.0;
  SimTime chat_latency_max = 0;
  std::vector<double> match_relevance;  // one per MatchFound, log order
  std::uint64_t store_evictions = 0;
  std::uint64_t actions_failed = 0;
};

MetricsReport metrics(const EventLog& log);
/// Long-format CSV: header `metric,value`, rows in a fixed order, then one
/// `match_relevance` row per match.
void write_metrics_csv(const MetricsReport& m, std::size_t nodes, std::ostream& out);

struct RunResult {
  EventLog log;
  MetricsReport metrics;
};

/// Discrete-event loop over one scenario. Single-threaded; everything random
/// comes from the scenario seed.
class Simulator {
 public:
  explicit Simulator(ScenarioConfig cfg);
  ~Simulator();
  Simulator(Simulator&&) noexcept;
  Simulator& operator=(Simulator&&) noexcept;

  RunResult run();

  const ScenarioConfig& config() const;
  const protocol::NodeEngine& engine(NodeId id) const;
  const EventLog& log() const;

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

RunResult run(const ScenarioConfig& cfg);

/// Runs independent scenarios on OpenMP threads, one event loop per thread.
std::vector<RunResult> run_many(const std::vector<ScenarioConfig>& cfgs);
/// Serial reference for run_many.
std::vector<RunResult> run_many_serial(const std::vector<ScenarioConfig>& cfgs);

}  // namespace mym::netsim
