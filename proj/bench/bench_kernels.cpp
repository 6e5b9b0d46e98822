#include <benchmark/benchmark.h>

#include <random>

#include "mym/matchmaking.hpp"
#include "mym/netsim.hpp"
#include "mym/ontology.hpp"

namespace {

using namespace mym;

struct RankSetup {
  ontology::Taxonomy tax{"root"};
  matchmaking::Profile monitor;
  std::vector<matchmaking::Candidate> candidates;

  explicit RankSetup(std::size_t n) {
    std::mt19937_64 rng(1);
    for (std::uint32_t i = 1; i < 200; ++i) {
      tax.add_concept(ontology::ConceptId{static_cast<std::uint32_t>(rng() % i)}, "c" + std::to_string(i));
    }
    auto interests = [&] {
      std::set<ontology::ConceptId> s;
      for (int k = 0; k < 6; ++k) s.insert(ontology::ConceptId{static_cast<std::uint32_t>(rng() % 200)});
      return s;
    };
    monitor.person_id = 0;
    monitor.name = "monitor";
    monitor.interests = interests();
    for (std::size_t i = 0; i < n; ++i) {
      matchmaking::Profile p;
      p.person_id = i + 1;
      p.name = "p";
      p.interests = interests();
      candidates.push_back({std::move(p), static_cast<double>(rng() % 400)});
    }
  }
};

void BM_rank_serial(benchmark::State& state) {
  RankSetup s(static_cast<std::size_t>(state.range(0)));
  const matchmaking::MatchParams params;
  for (auto _ : state) {
    benchmark::DoNotOptimize(matchmaking::rank_candidates_serial(s.monitor, s.candidates, s.tax, params));
  }
  state.SetItemsProcessed(state.iterations() * state.range(0));
}

void BM_rank_parallel(benchmark::State& state) {
  RankSetup s(static_cast<std::size_t>(state.range(0)));
  const matchmaking::MatchParams params;
  for (auto _ : state) {
    benchmark::DoNotOptimize(matchmaking::rank_candidates(s.monitor, s.candidates, s.tax, params));
  }
  state.SetItemsProcessed(state.iterations() * state.range(0));
}

std::vector<netsim::ScenarioConfig> lossy_batch(std::size_t n) {
  std::vector<netsim::ScenarioConfig> cfgs;
  for (std::size_t i = 0; i < n; ++i) {
    cfgs.push_back(netsim::load_scenario(std::string(MYM_SOURCE_DIR) + "/data/scenarios/lossy_chat.json",
                                         {"seed=" + std::to_string(i)}));
  }
  return cfgs;
}

void BM_run_many_serial(benchmark::State& state) {
  const auto cfgs = lossy_batch(static_cast<std::size_t>(state.range(0)));
  for (auto _ : state) benchmark::DoNotOptimize(netsim::run_many_serial(cfgs));
  state.SetItemsProcessed(state.iterations() * state.range(0));
}

void BM_run_many_parallel(benchmark::State& state) {
  const auto cfgs = lossy_batch(static_cast<std::size_t>(state.range(0)));
  for (auto _ : state) benchmark::DoNotOptimize(netsim::run_many(cfgs));
  state.SetItemsProcessed(state.iterations() * state.range(0));
}

}  // namespace

BENCHMARK(BM_rank_serial)->Arg(1000)->Arg(10000)->Unit(benchmark::kMicrosecond);
BENCHMARK(BM_rank_parallel)->Arg(1000)->Arg(10000)->Unit(benchmark::kMicrosecond)->UseRealTime();
BENCHMARK(BM_run_many_serial)->Arg(32)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_run_many_parallel)->Arg(32)->Unit(benchmark::kMillisecond)->UseRealTime();

BENCHMARK_MAIN();
