#include <doctest.h>

#include <sstream>

#include "fixtures.hpp"
#include "log_analysis.hpp"
#include "mym/error.hpp"
#include "mym/netsim.hpp"

using namespace mym::netsim;

namespace {

const std::vector<std::string> kScenarios = {"two_peer_chat", "friend_search", "failover", "campus_walk",
                                             "lossy_chat"};

ScenarioConfig bundled(const std::string& name, const std::vector<std::string>& overrides = {}) {
  return load_scenario(fixtures::source_path("data/scenarios/" + name + ".json"), overrides);
}

ScenarioConfig two_nodes(double gap) {
  auto small = std::make_shared<fixtures::SmallTaxonomy>();
  ScenarioConfig cfg;
  cfg.name = "pair";
  cfg.taxonomy = std::shared_ptr<const mym::ontology::Taxonomy>(small, &small->t);
  cfg.duration = 5000;
  cfg.nodes.push_back({1, fixtures::profile(1, {small->jazz}), {0, 0}, {}});
  cfg.nodes.push_back({2, fixtures::profile(2, {small->jazz}), {gap, 0}, {}});
  return cfg;
}

}  // namespace

TEST_CASE("deliverable") {
  auto cfg = two_nodes(0);
  std::map<NodeId, Position> pos = {{1, {0, 0}}, {2, {0, 0}}};
  CHECK(deliverable(cfg, pos, 1, 2, 0, Transport::short_range) == Transport::short_range);
  CHECK(deliverable(cfg, pos, 1, 2, 0, Transport::wide_area) == Transport::wide_area);

  pos[2] = {31, 0};
  CHECK(deliverable(cfg, pos, 1, 2, 0, Transport::short_range) == Transport::wide_area);
  cfg.wide_area_outages = {{100, 200}};
  CHECK(deliverable(cfg, pos, 1, 2, 150, Transport::short_range) == Transport::none);
  CHECK(deliverable(cfg, pos, 1, 2, 150, Transport::wide_area) == Transport::none);
  CHECK(deliverable(cfg, pos, 1, 2, 200, Transport::short_range) == Transport::wide_area);
  pos[2] = {30, 0};
  CHECK(deliverable(cfg, pos, 1, 2, 150, Transport::wide_area) == Transport::short_range);
  CHECK_THROWS_AS(deliverable(cfg, pos, 1, 9, 0, Transport::short_range), mym::Error);
}

TEST_CASE("move_node") {
  NodeConfig n{1, {}, {7, 7}, {}};
  CHECK(move_node(n, 0) == Position{7, 7});
  CHECK(move_node(n, 99999) == Position{7, 7});

  NodeConfig m{2, {}, {0, 0}, {{10000, {100, 0}}}};
  CHECK(move_node(m, 5000) == Position{50, 0});
  CHECK(move_node(m, 20000) == Position{100, 0});

  NodeConfig k{3, {}, {0, 0}, {{1000, {0, 0}}, {2000, {10, 20}}}};
  CHECK(move_node(k, 500) == Position{0, 0});
  CHECK(move_node(k, 1500) == Position{5, 10});
  CHECK(move_node(k, 3000) == Position{10, 20});
}

TEST_CASE("empty scenario") {
  auto cfg = two_nodes(0);
  cfg.nodes.clear();
  const auto r = run(cfg);
  CHECK(r.log.empty());
  CHECK(r.metrics.chats_delivered == 0);
  for (const auto& [t, c] : r.metrics.frames) CHECK(c.sent == 0);
  const auto empty = metrics({});
  CHECK(empty.chats_delivered == 0);
  CHECK(empty.frames.size() == 3);
  CHECK(empty.match_relevance.empty());
}

TEST_CASE("two-peer chat delivers in order") {
  const auto cfg = bundled("two_peer_chat");
  const auto r = run(cfg);
  const auto chats = logcheck::of_kind(r.log, EventKind::ChatDelivered);
  REQUIRE(chats.size() == 2);
  CHECK(chats[0]->details.at("text") == "Hello John, are you at the library?");
  CHECK(chats[1]->details.at("text") == "Hi Nkechi, yes, second floor.");
  CHECK(logcheck::exactly_once_violations(r.log) == 0);
  std::uint64_t chat_frames = 0, chat_deliveries = 0;
  for (const auto& e : r.log) {
    if (e.details.value("frame_kind", "") != "CHAT") continue;
    chat_frames += e.kind == EventKind::FrameSent;
    chat_deliveries += e.kind == EventKind::FrameDelivered;
  }
  CHECK(chat_frames == chat_deliveries);
}

TEST_CASE("bundled scenarios are deterministic and consistent") {
  for (const auto& name : kScenarios) {
    CAPTURE(name);
    const auto cfg = bundled(name);
    const auto a = run(cfg);
    const auto b = run(cfg);
    CHECK(logcheck::text(a.log) == logcheck::text(b.log));
    CHECK(logcheck::conservation_violations(cfg, a.log) == 0);
    CHECK(logcheck::causality_violations(a.log) == 0);
    CHECK(logcheck::link_violations(cfg, a.log) == 0);
    CHECK(logcheck::exactly_once_violations(a.log) == 0);
    for (std::size_t i = 1; i < a.log.size(); ++i) {
      REQUIRE(a.log[i - 1].time <= a.log[i].time);
      REQUIRE(a.log[i - 1].seq < a.log[i].seq);
    }
  }
}

TEST_CASE("event log round-trips through JSON lines") {
  const auto r = run(bundled("campus_walk"));
  std::stringstream io;
  write_event_log(r.log, io);
  const auto back = read_event_log(io);
  CHECK(logcheck::text(back) == logcheck::text(r.log));
  CHECK(metrics(back).chats_delivered == r.metrics.chats_delivered);
}

TEST_CASE("failover keeps chats flowing") {
  const auto cfg = bundled("failover");
  const auto r = run(cfg);
  const auto chats = logcheck::of_kind(r.log, EventKind::ChatDelivered);
  CHECK(chats.size() == cfg.script.size() - 2);
  int short_in_window = 0;
  for (const auto* c : chats) {
    const auto sent = c->details.at("sent_at").get<mym::SimTime>();
    const auto via = logcheck::carrier(r.log, *c);
    REQUIRE(via);
    if (sent >= 10000 && sent < 20000) {
      const auto pos = positions_at(cfg, sent);
      if (mym::matchmaking::distance(pos.at(1), pos.at(2)) <= cfg.radio_range) {
        CHECK(*via == "short_range");
        ++short_in_window;
      } else {
        CHECK(c->time >= 20000);
      }
    }
  }
  CHECK(short_in_window >= 1);
}

TEST_CASE("loss is driven by the seed only") {
  const auto a = run(bundled("lossy_chat"));
  const auto b = run(bundled("lossy_chat", {"seed=999"}));
  CHECK(logcheck::text(a.log) != logcheck::text(b.log));
  const auto c = run(bundled("two_peer_chat"));
  const auto d = run(bundled("two_peer_chat", {"seed=999"}));
  CHECK(logcheck::text(c.log) == logcheck::text(d.log));
}

TEST_CASE("out-of-range chat waits for contact") {
  auto cfg = two_nodes(100);
  cfg.wide_area_outages = {{0, 3000}};
  cfg.script.push_back({500, 1, ActionKind::chat, 2, "hello", ""});
  cfg.nodes[1].waypoints = {{1000, {100, 0}}, {2000, {10, 0}}};
  const auto r = run(cfg);
  const auto chats = logcheck::of_kind(r.log, EventKind::ChatDelivered);
  REQUIRE(chats.size() == 1);
  CHECK(chats[0]->time > 1000);
  CHECK(*logcheck::carrier(r.log, *chats[0]) == "short_range");
  CHECK(logcheck::link_violations(cfg, r.log) == 0);
}

TEST_CASE("failed actions are logged, not fatal") {
  auto cfg = two_nodes(0);
  cfg.script.push_back({100, 1, ActionKind::group_chat, 0, "x", "missing"});
  cfg.script.push_back({100, 1, ActionKind::invite, 2, "", "missing"});
  const auto r = run(cfg);
  CHECK(r.metrics.actions_failed == 2);
}

TEST_CASE("scenario validation") {
  auto expect_config_error = [](const ScenarioConfig& cfg, const std::string& field) {
    try {
      validate(cfg);
      FAIL("expected ConfigError");
    } catch (const mym::Error& e) {
      CHECK(e.code() == mym::ErrorCode::ConfigError);
      CHECK(std::string(e.what()).find(field) != std::string::npos);
    }
  };
  auto cfg = two_nodes(0);
  CHECK_NOTHROW(validate(cfg));
  cfg.nodes[1].id = 1;
  expect_config_error(cfg, "nodes[1].id");
  cfg = two_nodes(0);
  cfg.wide_area_outages = {{100, 300}, {200, 400}};
  expect_config_error(cfg, "[100,300) and [200,400)");
  cfg.wide_area_outages = {{500, 600}, {100, 200}};
  expect_config_error(cfg, "wide_area_outages");
  cfg = two_nodes(0);
  cfg.loss_prob = 1.0;
  expect_config_error(cfg, "loss_prob");
  cfg = two_nodes(0);
  cfg.script.push_back({10, 5, ActionKind::chat, 1, "x", ""});
  expect_config_error(cfg, "script[0]");
  cfg = two_nodes(0);
  cfg.nodes[0].waypoints = {{200, {0, 0}}, {100, {1, 1}}};
  expect_config_error(cfg, "nodes[0].waypoints");
  CHECK_THROWS_AS(Simulator{cfg}, mym::Error);
}

TEST_CASE("scenario documents") {
  auto doc = read_scenario_document(fixtures::source_path("data/scenarios/two_peer_chat.json"));
  apply_override(doc, "protocol.retry_limit=3");
  apply_override(doc, "name=renamed");
  const auto cfg = parse_scenario(doc, fixtures::source_path("data/scenarios"));
  CHECK(cfg.engine.protocol.retry_limit == 3);
  CHECK(cfg.name == "renamed");
  CHECK(cfg.nodes.size() == 2);
  CHECK(cfg.nodes[0].profile.person_id == 101);
  CHECK_THROWS_AS(apply_override(doc, "no-equals"), mym::Error);
  doc["bogus"] = 1;
  CHECK_THROWS_AS(parse_scenario(doc, fixtures::source_path("data/scenarios")), mym::Error);
}

TEST_CASE("metrics csv layout") {
  const auto r = run(bundled("friend_search"));
  std::ostringstream out;
  write_metrics_csv(r.metrics, 4, out);
  std::istringstream in(out.str());
  std::string line;
  std::getline(in, line);
  CHECK(line == "metric,value");
  std::getline(in, line);
  CHECK(line == "nodes,4");
  std::getline(in, line);
  CHECK(line.rfind("frames_sent_short_range,", 0) == 0);
  CHECK(out.str().find("match_relevance,1.000000") != std::string::npos);
}

TEST_CASE("parallel batch equals the serial reference") {
  std::vector<ScenarioConfig> cfgs;
  for (int s = 0; s < 12; ++s) cfgs.push_back(bundled("lossy_chat", {"seed=" + std::to_string(s)}));
  for (const auto& name : kScenarios) cfgs.push_back(bundled(name));
  const auto par = run_many(cfgs);
  const auto ser = run_many_serial(cfgs);
  REQUIRE(par.size() == ser.size());
  for (std::size_t i = 0; i < par.size(); ++i) CHECK(logcheck::text(par[i].log) == logcheck::text(ser[i].log));
}
