#include <benchmark/benchmark.h>

#include "rvpp/assessment.hpp"
#include "rvpp/domain.hpp"
#include "rvpp/formulation.hpp"
#include "rvpp/presolve.hpp"
#include "rvpp/sequence.hpp"

namespace {

rvpp::CaseConfig study() {
  static const rvpp::CaseConfig cfg = [] {
    rvpp::CaseConfig c = rvpp::load_case(RVPP_DATA_DIR "/case_study.json");
    rvpp::validate_case(c);
    return c;
  }();
  return cfg;
}

void bench_build_dam(benchmark::State& state) {
  const rvpp::CaseConfig cfg = study();
  for (auto _ : state) {
    auto bundle = rvpp::build_session_model(cfg, cfg.sessions.front().name, {},
                                            rvpp::BuildMode::proposed);
    benchmark::DoNotOptimize(bundle.model.vars.size());
  }
}
BENCHMARK(bench_build_dam);

void bench_presolve_dam(benchmark::State& state) {
  const rvpp::CaseConfig cfg = study();
  auto bundle = rvpp::build_session_model(cfg, cfg.sessions.front().name, {},
                                          rvpp::BuildMode::proposed);
  // the presolve contract wants profile selectors pinned; pick each first one
  for (auto& [id, refs] : bundle.demand)
    for (size_t i = 0; i < refs.u.size(); ++i) {
      bundle.model.vars[static_cast<size_t>(refs.u[i])].lb = i == 0 ? 1.0 : 0.0;
      bundle.model.vars[static_cast<size_t>(refs.u[i])].ub = i == 0 ? 1.0 : 0.0;
    }
  for (auto _ : state) {
    auto reduced = rvpp::presolve_fix_robust_binaries(bundle.model);
    benchmark::DoNotOptimize(reduced.model.vars.size());
  }
}
BENCHMARK(bench_presolve_dam);

void bench_solve_dam(benchmark::State& state) {
  const rvpp::CaseConfig cfg = study();
  for (auto _ : state) {
    auto result =
        rvpp::run_session(cfg, cfg.sessions.front().name, {}, rvpp::BuildMode::proposed);
    benchmark::DoNotOptimize(result.objective);
  }
}
BENCHMARK(bench_solve_dam)->Unit(benchmark::kMillisecond);

void bench_chain(benchmark::State& state) {
  const rvpp::CaseConfig cfg = study();
  for (auto _ : state) {
    auto seq = rvpp::chain_sessions(cfg);
    benchmark::DoNotOptimize(seq.total_objective());
  }
}
BENCHMARK(bench_chain)->Unit(benchmark::kMillisecond);

void bench_recourse_scenarios(benchmark::State& state) {
  const rvpp::CaseConfig cfg = study();
  const rvpp::StarredResults positions = rvpp::chain_sessions(cfg).positions;
  rvpp::ScenarioGenSpec spec;
  spec.count = static_cast<int>(state.range(0));
  const rvpp::ScenarioSet scenarios = rvpp::generate_scenarios(cfg, spec);
  for (auto _ : state) {
    auto result = rvpp::out_of_sample_evaluate(cfg, positions, scenarios, {});
    benchmark::DoNotOptimize(result.average_profit);
  }
}
BENCHMARK(bench_recourse_scenarios)->Arg(10)->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
