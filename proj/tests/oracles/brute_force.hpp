#pragma once

#include <limits>
#include <vector>

namespace oracle {

// Small dispatch instance in plain numbers, all energies in kWh per step.
struct Instance {
    std::vector<double> z;
    std::vector<double> prices;
    double eta_ch = 1.0;
    double eta_dis = 1.0;
    double s_lo = 0.0;  // most negative grid-side action
    double s_hi = 0.0;  // most positive grid-side action
    double b_min = 0.0;
    double b_max = 0.0;
    double b0 = 0.0;
    double import_cap = std::numeric_limits<double>::infinity();  // kWh per step
    std::vector<double> floor;    // per-step minimum charge after the step, empty if none
    std::vector<double> reward;   // per-step weight on the charge after the step, empty if none
};

struct Result {
    bool feasible = false;
    double cost = std::numeric_limits<double>::infinity();
    std::vector<double> s;
    std::vector<double> b;
};

// Exhaustive search over actions on a uniform grid of the given spacing,
// augmented with the boundary actions (rate limits, empty, full, zero import,
// import cap, floor) so that tight constraints are representable exactly.
// Cost: sum p_i max(0, z_i + s_i) - sum reward_i b_i.
Result enumerate(const Instance& inst, double spacing);

// Per-step charge update written out from the battery definition.
double next_charge(double b, double s, double eta_ch, double eta_dis);

}  // namespace oracle
