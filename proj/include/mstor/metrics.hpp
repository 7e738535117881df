#pragma once

#include <optional>
#include <string>
#include <vector>

#include "mstor/battery.hpp"
#include "mstor/tariff.hpp"
#include "mstor/ts_core.hpp"

namespace mstor {

struct PerformanceReport {
    std::optional<double> g_arb;  // absent for no-battery rows
    double ppc_before = 0.0;
    double ppc_after = 0.0;
    double g_peak = 0.0;
    bool peak_gain_negative = false;
    std::optional<double> ss;
    double g_total = 0.0;
    double cycles = 0.0;
    std::optional<double> euros_per_cycle;
    std::optional<double> loo;
};

// Cost avoided relative to the same scenario with an idle battery.
double arbitrage_gain(const NetLoadSeries& z, const StorageSchedule& sched, const std::vector<double>& prices);

struct PeakGain {
    double euros = 0.0;
    bool negative = false;  // the new contract is larger than the old one
};

PeakGain peak_gain(const PpcTable& table, double before, double after, RateType rate_type, double days);

double self_sufficiency(const Scenario& scenario, const StorageSchedule& sched);
// Self-sufficiency from PV alone (theta_i = max(0, z_i)).
double self_sufficiency_no_storage(const Scenario& scenario);

// Equivalent full cycles: total discharge depth over the usable range.
// `b` is the full trajectory including the initial charge.
double count_cycles(const std::vector<double>& b, const BatterySpec& spec);
double count_cycles(double b0, const std::vector<double>& b, const BatterySpec& spec);

double loss_of_opportunity(double actual_gain, double deterministic_gain);

// Fills g_total and euros_per_cycle from the other fields.
void finalize(PerformanceReport& r);

std::vector<std::string> report_csv_header();
std::vector<std::string> report_csv_row(const std::string& case_label, const PerformanceReport& r);

}  // namespace mstor
