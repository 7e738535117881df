#include "mstor/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include <fmt/core.h>

#include "mstor/errors.hpp"

namespace mstor {

double arbitrage_gain(const NetLoadSeries& z, const StorageSchedule& sched, const std::vector<double>& prices) {
    if (sched.theta.size() != z.size() || prices.size() != z.size()) {
        throw AlignmentError("arbitrage gain needs equal-length net load, schedule and prices");
    }
    double gain = 0.0;
    for (std::size_t i = 0; i < z.size(); ++i) {
        gain += prices[i] * (std::max(0.0, z[i]) - sched.theta[i]);
    }
    return gain;
}

PeakGain peak_gain(const PpcTable& table, double before, double after, RateType rate_type, double days) {
    const double gain = (ppc_daily_rate(table, before, rate_type) - ppc_daily_rate(table, after, rate_type)) * days;
    return {gain, after > before + 1e-9};
}

double self_sufficiency(const Scenario& scenario, const StorageSchedule& sched) {
    const double demand = std::accumulate(scenario.demand.begin(), scenario.demand.end(), 0.0);
    if (!(demand > 0.0)) throw UndefinedMetricError("self-sufficiency undefined for zero total demand");
    const double grid = std::accumulate(sched.theta.begin(), sched.theta.end(), 0.0);
    return std::clamp(1.0 - grid / demand, 0.0, 1.0);
}

double self_sufficiency_no_storage(const Scenario& scenario) {
    StorageSchedule idle;
    const auto z = net_load(scenario);
    idle.theta.resize(z.size());
    for (std::size_t i = 0; i < z.size(); ++i) idle.theta[i] = std::max(0.0, z[i]);
    return self_sufficiency(scenario, idle);
}

double count_cycles(const std::vector<double>& b, const BatterySpec& spec) {
    double depth = 0.0;
    for (std::size_t i = 1; i < b.size(); ++i) depth += std::max(0.0, b[i - 1] - b[i]);
    return spec.usable() > 0.0 ? depth / spec.usable() : 0.0;
}

double count_cycles(double b0, const std::vector<double>& b, const BatterySpec& spec) {
    std::vector<double> full;
    full.reserve(b.size() + 1);
    full.push_back(b0);
    full.insert(full.end(), b.begin(), b.end());
    return count_cycles(full, spec);
}

double loss_of_opportunity(double actual_gain, double deterministic_gain) {
    if (!(deterministic_gain > 0.0)) {
        throw UndefinedMetricError(
            fmt::format("loss of opportunity needs a positive deterministic gain, got {}", deterministic_gain));
    }
    return 1.0 - actual_gain / deterministic_gain;
}

void finalize(PerformanceReport& r) {
    r.g_total = r.g_arb.value_or(0.0) + r.g_peak;
    if (r.cycles >= 1e-6) {
        r.euros_per_cycle = r.g_total / r.cycles;
    } else {
        r.euros_per_cycle.reset();
    }
}

std::vector<std::string> report_csv_header() {
    return {"case", "G_arb", "PPC", "G_peak", "SS", "G_T", "euros_per_cycle", "PPC_before", "cycles", "LoO"};
}

namespace {

std::string opt_num(const std::optional<double>& v) { return v ? format_number(*v) : std::string{}; }

}  // namespace

std::vector<std::string> report_csv_row(const std::string& case_label, const PerformanceReport& r) {
    return {case_label,
            opt_num(r.g_arb),
            format_number(r.ppc_after),
            format_number(r.g_peak),
            opt_num(r.ss),
            format_number(r.g_total),
            opt_num(r.euros_per_cycle),
            format_number(r.ppc_before),
            format_number(r.cycles),
            opt_num(r.loo)};
}

}  // namespace mstor
