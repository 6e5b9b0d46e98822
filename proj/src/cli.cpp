#include "mym/cli.hpp"

#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <ostream>

#include <CLI11.hpp>

#include "mym/error.hpp"
#include "mym/matchmaking.hpp"
#include "mym/netsim.hpp"
#include "mym/ontology.hpp"
#include "mym/profile_io.hpp"
#include "mym/socialgraph.hpp"

namespace mym::cli {

namespace fs = std::filesystem;

std::string fixed6(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.6f", v);
  return buf;
}

namespace {

struct Options {
  // sim-run / sim-validate
  std::string scenario;
  std::string out_dir;
  std::vector<std::string> overrides;
  std::uint64_t seed = 0;
  bool dump_stores = false;
  // match-score
  std::string profile_a;
  std::string profile_b;
  std::string taxonomy;
  double distance = 0.0;
  matchmaking::MatchParams match;
  // ontology-query
  std::string op;
  std::vector<std::string> paths;
  // graph-replay
  std::string log;
  bool snapshot = false;
};

std::vector<std::string> scenario_overrides(const Options& o, const CLI::App* sub) {
  auto overrides = o.overrides;
  if (sub->count("--seed")) overrides.push_back("seed=" + std::to_string(o.seed));
  return overrides;
}

int sim_validate(const Options& o, const CLI::App* sub, std::ostream& out) {
  const auto cfg = netsim::load_scenario(o.scenario, scenario_overrides(o, sub));
  out << "ok: " << (cfg.name.empty() ? o.scenario : cfg.name) << " (" << cfg.nodes.size() << " nodes, "
      << cfg.script.size() << " actions)\n";
  return 0;
}

int sim_run(const Options& o, const CLI::App* sub, std::ostream& out) {
  const auto cfg = netsim::load_scenario(o.scenario, scenario_overrides(o, sub));
  std::string dir = o.out_dir;
  if (dir.empty()) {
    const char* env = std::getenv("MYM_OUT_DIR");
    dir = env && *env ? env : ".";
  }
  fs::create_directories(dir);

  netsim::Simulator sim(cfg);
  const auto result = sim.run();
  {
    std::ofstream events(fs::path(dir) / "events.jsonl", std::ios::binary);
    netsim::write_event_log(result.log, events);
  }
  {
    std::ofstream csv(fs::path(dir) / "metrics.csv", std::ios::binary);
    netsim::write_metrics_csv(result.metrics, cfg.nodes.size(), csv);
  }
  if (o.dump_stores) {
    std::ofstream stores(fs::path(dir) / "stores.jsonl", std::ios::binary);
    for (const auto& n : cfg.nodes) sim.engine(n.id).store().dump(stores);
  }
  std::uint64_t frames = 0;
  for (const auto& [t, c] : result.metrics.frames) frames += c.sent;
  out << "nodes=" << cfg.nodes.size() << " frames=" << frames
      << " matches=" << result.metrics.match_relevance.size()
      << " chats_delivered=" << result.metrics.chats_delivered << '\n';
  return 0;
}

int match_score(const Options& o, std::ostream& out) {
  o.match.validate();
  const auto t = ontology::load_taxonomy_file(o.taxonomy);
  auto a = matchmaking::load_profile_file(o.profile_a, t);
  auto b = matchmaking::load_profile_file(o.profile_b, t);
  const auto s = matchmaking::relevance(a, b, o.distance, t, o.match);
  out << "similarity: " << fixed6(s.profile_similarity) << '\n'
      << "proximity_factor: " << fixed6(s.proximity_factor) << '\n'
      << "relevance: " << fixed6(s.value) << '\n'
      << "classification: " << matchmaking::to_string(matchmaking::is_match(s, o.match)) << '\n';
  return 0;
}

int ontology_query(const Options& o, std::ostream& out) {
  const auto t = ontology::load_taxonomy_file(o.taxonomy);
  std::vector<ontology::ConceptId> ids;
  for (const auto& p : o.paths) ids.push_back(t.resolve(p));
  const std::size_t want = o.op == "depth" ? 1 : 2;
  if (ids.size() != want) {
    throw CLI::ValidationError("ontology-query", o.op + " takes " + std::to_string(want) + " concept path(s)");
  }
  if (o.op == "depth") {
    out << t.depth(ids[0]) << '\n';
  } else if (o.op == "lca") {
    const auto c = t.lca(ids[0], ids[1]);
    out << (c == t.root() ? t.label(c) : t.path(c)) << '\n';
  } else if (o.op == "dist") {
    out << t.concept_distance(ids[0], ids[1]) << '\n';
  } else {
    out << fixed6(t.concept_similarity(ids[0], ids[1])) << '\n';
  }
  return 0;
}

int graph_replay(const Options& o, std::ostream& out) {
  std::ifstream in(o.log);
  if (!in) throw Error(ErrorCode::ParseError, "cannot open operation log '" + o.log + "'");
  const auto g = socialgraph::SocialGraph::replay(in);
  if (o.snapshot) {
    out << g.snapshot().dump(2) << '\n';
    return 0;
  }
  const auto bad = g.check_invariants();
  out << "ops=" << g.op_log().size() << " prosumers=" << g.prosumers().size()
      << " friend_edges=" << g.friend_edge_count() << " contents=" << g.contents().size()
      << " groups=" << g.groups().size() << " invariants=" << (bad.empty() ? "ok" : "violated") << '\n';
  return bad.empty() ? 0 : 1;
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"mym: hybrid social network simulator and matchmaking tools", "mym"};
  app.require_subcommand(1);
  Options o;

  auto* validate_cmd = app.add_subcommand("sim-validate", "Check a scenario file without running it");
  validate_cmd->add_option("scenario", o.scenario, "Scenario JSON")->required();
  validate_cmd->add_option("--set", o.overrides, "Override a scenario field (key=value)");
  validate_cmd->add_option("--seed", o.seed, "Override the RNG seed");

  auto* run_cmd = app.add_subcommand("sim-run", "Run a scenario and write events.jsonl and metrics.csv");
  run_cmd->add_option("scenario", o.scenario, "Scenario JSON")->required();
  run_cmd->add_option("--out", o.out_dir, "Output directory (default: $MYM_OUT_DIR or .)");
  run_cmd->add_option("--set", o.overrides, "Override a scenario field (key=value)");
  run_cmd->add_option("--seed", o.seed, "Override the RNG seed");
  run_cmd->add_flag("--dump-stores", o.dump_stores, "Also write every node's store as stores.jsonl");

  auto* score_cmd = app.add_subcommand("match-score", "Score two profile documents");
  score_cmd->add_option("profile_a", o.profile_a)->required();
  score_cmd->add_option("profile_b", o.profile_b)->required();
  score_cmd->add_option("--taxonomy", o.taxonomy, "Taxonomy document")->required();
  score_cmd->add_option("--distance", o.distance, "Observer distance in meters")->check(CLI::NonNegativeNumber);
  score_cmd->add_option("--threshold", o.match.match_threshold, "Match threshold");
  score_cmd->add_option("--near-radius", o.match.near_radius, "Near radius in meters");
  score_cmd->add_option("--decay-length", o.match.decay_length, "Decay length in meters");
  score_cmd->add_option("--exact-floor", o.match.exact_match_floor, "Exact match floor");

  auto* onto_cmd = app.add_subcommand("ontology-query", "Query depth, lca, dist or sim on a taxonomy");
  onto_cmd->add_option("--taxonomy", o.taxonomy, "Taxonomy document")->required();
  onto_cmd->add_option("op", o.op, "depth | lca | dist | sim")
      ->required()
      ->check(CLI::IsMember({"depth", "lca", "dist", "sim"}));
  onto_cmd->add_option("paths", o.paths, "Concept paths such as Music/Jazz")->required();

  auto* replay_cmd = app.add_subcommand("graph-replay", "Replay a social graph operation log");
  replay_cmd->add_option("log", o.log, "Operation log (JSON lines)")->required();
  replay_cmd->add_flag("--snapshot", o.snapshot, "Print the rebuilt graph as JSON");

  std::vector<std::string> reversed(args.rbegin(), args.rend());
  try {
    app.parse(reversed);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return 0;
  } catch (const CLI::ParseError& e) {
    err << "usage error: " << e.what() << '\n' << app.help();
    return 2;
  }

  try {
    if (*validate_cmd) return sim_validate(o, validate_cmd, out);
    if (*run_cmd) return sim_run(o, run_cmd, out);
    if (*score_cmd) return match_score(o, out);
    if (*onto_cmd) return ontology_query(o, out);
    if (*replay_cmd) return graph_replay(o, out);
  } catch (const CLI::ValidationError& e) {
    err << "usage error: " << e.what() << '\n';
    return 2;
  } catch (const Error& e) {
    err << "error: " << e.what() << '\n';
    return 1;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return 1;
  }
  return 2;
}

}  // namespace mym::cli
