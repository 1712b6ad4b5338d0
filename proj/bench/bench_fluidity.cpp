// Serial reference vs OpenMP paths for the three parallel kernels:
// chain execution, control chains and the threshold sweep.

#include <benchmark/benchmark.h>

#include <filesystem>
#include <random>
#include <thread>

#include "fluidity/config.hpp"
#include "fluidity/engine.hpp"
#include "fluidity/mock.hpp"
#include "fluidity/report.hpp"

namespace fs = std::filesystem;
using namespace fluidity;

namespace {

fs::path scratch(const std::string& name) {
  const fs::path p = fs::temp_directory_path() / ("fluidity-bench-" + name);
  fs::remove_all(p);
  fs::create_directories(p);
  return p;
}

std::vector<SeedImage> seeds_in(const fs::path& dir, std::size_t count) {
  const auto ids = write_scene_files(make_mock_seed_scenes(MockOntology::default_ontology(), count, 1), dir);
  std::vector<SeedImage> out;
  for (const auto& id : ids) out.push_back({id, dir / (id + ".scene"), std::nullopt});
  return out;
}

ExperimentConfig config_for(std::vector<SeedImage> seeds, int workers) {
  ExperimentConfig c;
  apply_mock_suite(c, make_mock_suite(MockOntology::default_ontology(), 0.3, 1));
  c.seed_set = std::move(seeds);
  c.rng_seed = 1;
  c.workers = workers;
  return c;
}

int threads() { return static_cast<int>(std::max(1u, std::thread::hardware_concurrency())); }

void run_chains(benchmark::State& state, Execution execution) {
  const auto root = scratch(execution == Execution::serial ? "run-serial" : "run-parallel");
  const auto config = config_for(seeds_in(root / "seeds", static_cast<std::size_t>(state.range(0))),
                                 execution == Execution::serial ? 1 : threads());
  ExperimentOptions opts;
  opts.execution = execution;
  for (auto _ : state) {
    state.PauseTiming();
    fs::remove_all(root / "run");
    auto service = std::make_shared<MockService>();
    BackendClient client;
    client.mount("suite", service);
    state.ResumeTiming();
    benchmark::DoNotOptimize(run_experiment(config, root / "run", client, opts));
  }
  state.SetItemsProcessed(state.iterations() * state.range(0));
  fs::remove_all(root);
}

void BM_RunSerial(benchmark::State& state) { run_chains(state, Execution::serial); }
void BM_RunParallel(benchmark::State& state) { run_chains(state, Execution::parallel); }
BENCHMARK(BM_RunSerial)->Arg(64)->Unit(benchmark::kMillisecond)->UseRealTime();
BENCHMARK(BM_RunParallel)->Arg(64)->Unit(benchmark::kMillisecond)->UseRealTime();

void control_chains(benchmark::State& state, Execution execution) {
  const auto root = scratch(execution == Execution::serial ? "ctrl-serial" : "ctrl-parallel");
  const auto ids =
      write_scene_files(make_mock_control_scenes(MockOntology::default_ontology(), "truck", 15, 1), root / "truck");
  std::vector<fs::path> paths;
  for (const auto& id : ids) paths.push_back(root / "truck" / (id + ".scene"));
  const auto config = config_for({}, execution == Execution::serial ? 1 : threads());
  auto service = std::make_shared<MockService>();
  BackendClient client;
  client.mount("suite", service);
  for (auto _ : state) {
    benchmark::DoNotOptimize(
        build_control_chains(paths, "truck", static_cast<int>(state.range(0)), config, client, execution));
  }
  state.SetItemsProcessed(state.iterations() * state.range(0));
  fs::remove_all(root);
}

void BM_ControlSerial(benchmark::State& state) { control_chains(state, Execution::serial); }
void BM_ControlParallel(benchmark::State& state) { control_chains(state, Execution::parallel); }
BENCHMARK(BM_ControlSerial)->Arg(64)->Unit(benchmark::kMillisecond)->UseRealTime();
BENCHMARK(BM_ControlParallel)->Arg(64)->Unit(benchmark::kMillisecond)->UseRealTime();

// The sweep re-evaluates stored metrics, so it runs on synthetic records.
std::vector<ChainRecord> synthetic_records(std::size_t n) {
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  std::vector<ChainRecord> out(n);
  for (std::size_t i = 0; i < n; ++i) {
    auto& r = out[i];
    r.seed.id = std::to_string(i);
    r.complete = true;
    for (int s = 1; s <= kMaxChainSteps; ++s) {
      ChainStep step;
      step.index = s;
      step.metrics = {15.0 + 20.0 * u(rng), u(rng), u(rng), u(rng), u(rng), false};
      r.steps.push_back(step);
    }
  }
  return out;
}

void sweep(benchmark::State& state, Execution execution) {
  const auto records = synthetic_records(static_cast<std::size_t>(state.range(0)));
  SweepGrid grid;
  for (int i = 1; i < 20; ++i) grid.semantic_values.push_back(0.05 * i);
  for (int i = 0; i <= 10; ++i) grid.compat_values.push_back(10.0 + 2.0 * i);
  grid.label_values = {0.3, 0.4, 0.5, 0.6, 0.7};
  for (auto _ : state) benchmark::DoNotOptimize(sweep_thresholds(records, grid, execution));
  state.SetItemsProcessed(state.iterations() * state.range(0) * static_cast<long>(grid.points().size()));
}

void BM_SweepSerial(benchmark::State& state) { sweep(state, Execution::serial); }
void BM_SweepParallel(benchmark::State& state) { sweep(state, Execution::parallel); }
BENCHMARK(BM_SweepSerial)->Arg(2000)->Unit(benchmark::kMillisecond)->UseRealTime();
BENCHMARK(BM_SweepParallel)->Arg(2000)->Unit(benchmark::kMillisecond)->UseRealTime();

}  // namespace

BENCHMARK_MAIN();
