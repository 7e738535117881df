#pragma once

#include <string>
#include <vector>

#include "mstor/battery.hpp"
#include "mstor/metrics.hpp"
#include "mstor/tariff.hpp"
#include "mstor/ts_core.hpp"

namespace mstor {

struct SweepTariff {
    std::string label;
    TouSchedule schedule;
};

struct SweepOptions {
    bool include_baselines = true;
    // PPC rate column used for G_peak; the single-rate column is the nominal case.
    RateType ppc_rate_type = RateType::single;
    double days = 0.0;  // 0: calendar days covered by the scenario
    int jobs = 0;       // 0: OpenMP default
};

struct SweepRow {
    std::string case_label;
    std::string battery;  // C-rating, or "none" for the baselines
    std::string tariff;
    bool feasible = true;
    std::string note;
    PerformanceReport report;
};

// Evaluates one (battery, tariff) combination: recommends the smallest
// holdable PPC level, solves the dispatch under it and scores the schedule.
SweepRow evaluate_case(const Scenario& scenario, const BatterySpec& base, double b0, const std::string& c_rating,
                       const SweepTariff& tariff, const PpcTable& table, const SweepOptions& options);

std::vector<SweepRow> baseline_rows(const Scenario& scenario, const PpcTable& table, const SweepOptions& options);

// Cartesian product batteries x tariffs, preceded by the baselines when requested.
std::vector<SweepRow> run_sweep(const Scenario& scenario, const BatterySpec& base, double b0,
                                const std::vector<std::string>& c_ratings, const std::vector<SweepTariff>& tariffs,
                                const PpcTable& table, const SweepOptions& options = {});
// Same result computed one case after another; kept as the reference for tests.
std::vector<SweepRow> run_sweep_serial(const Scenario& scenario, const BatterySpec& base, double b0,
                                       const std::vector<std::string>& c_ratings,
                                       const std::vector<SweepTariff>& tariffs, const PpcTable& table,
                                       const SweepOptions& options = {});

CsvTable sweep_table(const std::vector<SweepRow>& rows);

double scenario_days(const Scenario& scenario);

}  // namespace mstor
