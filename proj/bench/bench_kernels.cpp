#include <random>

#include <benchmark/benchmark.h>

#include "mstor/forecast.hpp"
#include "mstor/sweep.hpp"
#include "mstor/synthetic.hpp"

using namespace mstor;

namespace {

std::vector<double> residual_series(std::size_t n) {
    std::mt19937_64 rng(1);
    std::normal_distribution<double> d(0.0, 0.1);
    std::vector<double> x(n);
    for (auto& v : x) v = d(rng);
    return x;
}

void BM_NormalEquationsSerial(benchmark::State& state) {
    const std::size_t n_day = 96;
    const auto x = residual_series(static_cast<std::size_t>(state.range(0)) * n_day);
    for (auto _ : state) {
        benchmark::DoNotOptimize(accumulate_normal_equations_serial(x, n_day, 3 * n_day, x.size()));
    }
}

void BM_NormalEquationsParallel(benchmark::State& state) {
    const std::size_t n_day = 96;
    const auto x = residual_series(static_cast<std::size_t>(state.range(0)) * n_day);
    for (auto _ : state) {
        benchmark::DoNotOptimize(accumulate_normal_equations(x, n_day, 3 * n_day, x.size()));
    }
}

struct SweepInputs {
    Scenario scenario;
    BatterySpec base;
    std::vector<std::string> batteries{"0.5C-0.5C", "1C-1C", "2C-2C", "4C-4C"};
    std::vector<SweepTariff> tariffs{{"2-level", dual_rate_schedule()}, {"3-level", triple_rate_schedule()}};

    SweepInputs() {
        SyntheticOptions o;
        o.days = 2;
        scenario = synthetic_scenario(o);
        base.eta_ch = base.eta_dis = 0.95;
        base.b_min = 0.2;
        base.b_max = 2.0;
    }
};

void BM_SweepSerial(benchmark::State& state) {
    const SweepInputs in;
    for (auto _ : state) {
        benchmark::DoNotOptimize(
            run_sweep_serial(in.scenario, in.base, 1.0, in.batteries, in.tariffs, default_ppc_table()));
    }
}

void BM_SweepParallel(benchmark::State& state) {
    const SweepInputs in;
    for (auto _ : state) {
        benchmark::DoNotOptimize(run_sweep(in.scenario, in.base, 1.0, in.batteries, in.tariffs, default_ppc_table()));
    }
}

}  // namespace

BENCHMARK(BM_NormalEquationsSerial)->Arg(30)->Arg(365)->Unit(benchmark::kMicrosecond);
BENCHMARK(BM_NormalEquationsParallel)->Arg(30)->Arg(365)->Unit(benchmark::kMicrosecond);
BENCHMARK(BM_SweepSerial)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_SweepParallel)->Unit(benchmark::kMillisecond);

BENCHMARK_MAIN();
