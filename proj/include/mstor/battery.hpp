#pragma once

#include <string_view>
#include <utility>
#include <vector>

#include "mstor/ts_core.hpp"

namespace mstor {

// Tolerance (kWh) applied to every battery bound check.
inline constexpr double kFeasibilityTol = 1e-9;

struct BatterySpec {
    double eta_ch = 1.0;
    double eta_dis = 1.0;
    double delta_min = 0.0;  // kW, <= 0 (discharge)
    double delta_max = 0.0;  // kW, >= 0 (charge)
    double b_min = 0.0;      // kWh
    double b_max = 0.0;      // kWh

    double usable() const { return b_max - b_min; }
    // Throws ValidationError when an invariant does not hold.
    void validate() const;
};

struct BatteryState {
    double b = 0.0;
};

// Grid-side storage energy per step and the resulting charge and grid import.
struct StorageSchedule {
    std::vector<double> s;
    std::vector<double> b;
    std::vector<double> theta;

    std::size_t size() const { return s.size(); }
};

struct StepBounds {
    double lo = 0.0;
    double hi = 0.0;
};

// "xC-yC": full usable range charges in 1/x h and discharges in 1/y h.
BatterySpec parse_c_rating(std::string_view tag, BatterySpec spec);

StepBounds step_bounds(const BatterySpec& spec, double h);

// Change in stored energy caused by grid-side action s.
double internal_delta(double s, const BatterySpec& spec);

BatteryState apply_action(BatteryState state, double s, const BatterySpec& spec, double h);

StorageSchedule greedy_backup(const NetLoadSeries& z, const BatterySpec& spec, double b0, double h);

// Re-derives b and theta for an action sequence, checking every step with apply_action.
StorageSchedule replay(const NetLoadSeries& z, const std::vector<double>& s, const BatterySpec& spec, double b0,
                       double h);

}  // namespace mstor
