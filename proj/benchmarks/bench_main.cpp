#include <benchmark/benchmark.h>

#include "drrisk/discrepancy.hpp"
#include "drrisk/nominal_fit.hpp"
#include "drrisk/prl.hpp"
#include "drrisk/rmpc.hpp"
#include "drrisk/scenario_bounds.hpp"

using namespace drrisk;

static void BM_PrlBisection(benchmark::State& state) {
    const auto kind = kAllDiscrepancyKinds[static_cast<std::size_t>(state.range(0))];
    const double m = kind == DiscrepancyKind::Rvd ? 2.05 : 0.2;
    for (auto _ : state) benchmark::DoNotOptimize(prl(kind, m, 0.1));
    state.SetLabel(std::string(to_string(kind)));
}
BENCHMARK(BM_PrlBisection)->DenseRange(0, 4);

static void BM_RvdNumeric2d(benchmark::State& state) {
    Eigen::Matrix2d s, sh;
    s << 1.0, 0.3, 0.3, 0.8;
    sh << 2.5, 0.2, 0.2, 2.0;
    const Distribution p = GaussianNd(Eigen::Vector2d(0.2, -0.1), s);
    const Distribution q = GaussianNd(Eigen::Vector2d(0.0, 0.1), sh);
    const auto grids = default_grids(p, q, static_cast<std::size_t>(state.range(0)));
    for (auto _ : state) benchmark::DoNotOptimize(rvd_numeric(p, q, grids));
}
BENCHMARK(BM_RvdNumeric2d)->Arg(201)->Arg(1001)->Unit(benchmark::kMillisecond);

static void BM_FitNominal(benchmark::State& state) {
    const auto kind = kAllDiscrepancyKinds[static_cast<std::size_t>(state.range(0))];
    const auto fam = comparison_family();
    FitOptions o;
    o.threads = 1;
    for (auto _ : state) benchmark::DoNotOptimize(fit_nominal(kind, fam, o));
    state.SetLabel(std::string(to_string(kind)));
}
BENCHMARK(BM_FitNominal)->DenseRange(0, 4)->Unit(benchmark::kMillisecond);

static void BM_TwoLevelNominal(benchmark::State& state) {
    const ScenarioParams p(1000, static_cast<std::size_t>(state.range(0)));
    for (auto _ : state) benchmark::DoNotOptimize(two_level_nominal(p, 0.01));
}
BENCHMARK(BM_TwoLevelNominal)->Arg(2)->Arg(50);

static void BM_ExpectedDrNumeric(benchmark::State& state) {
    const ScenarioParams p(1000, 2);
    for (auto _ : state) benchmark::DoNotOptimize(expected_dr_numeric(p, DiscrepancyKind::KullbackLeibler, 0.19));
}
BENCHMARK(BM_ExpectedDrNumeric)->Unit(benchmark::kMillisecond);

static void BM_ScenarioSolve(benchmark::State& state) {
    RmpcExperiment exp;
    const Samples s = sample(exp.nominal, 1, exp.n_scenarios);
    for (auto _ : state) benchmark::DoNotOptimize(solve_scenario_program(exp, s));
}
BENCHMARK(BM_ScenarioSolve)->Unit(benchmark::kMicrosecond);

static void BM_ViolationProbability(benchmark::State& state) {
    RmpcExperiment exp;
    const Samples s = sample(exp.nominal, 1, exp.n_scenarios);
    const auto sol = solve_scenario_program(exp, s);
    for (auto _ : state) benchmark::DoNotOptimize(violation_probability(exp, sol.c, exp.truth, 40000, 5));
    state.SetItemsProcessed(state.iterations() * 40000);
}
BENCHMARK(BM_ViolationProbability)->Unit(benchmark::kMillisecond);

BENCHMARK_MAIN();
