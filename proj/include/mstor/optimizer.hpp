#pragma once

#include <cstddef>
#include <optional>
#include <string>
#include <vector>

#include "mstor/battery.hpp"
#include "mstor/lp.hpp"
#include "mstor/tariff.hpp"
#include "mstor/ts_core.hpp"

namespace mstor {

// Scheduled outage: the charge must be at least b_set at `step`
// (and for the following window-1 steps).
struct Incident {
    std::size_t step = 0;
    double b_set = 0.0;
};

struct BackupPolicy {
    std::vector<double> outage_prob;  // empty means all zero
    double lambda = 0.0;              // euros/kWh
    std::vector<Incident> incidents;
    std::size_t window = 1;

    bool trivial() const;
    void validate(std::size_t n, const BatterySpec& spec) const;
};

struct OptProblem {
    NetLoadSeries z;
    std::vector<double> prices;
    BatterySpec spec;
    double b0 = 0.0;
    TimeGrid grid;
    double p_set = kInf;  // kW
    std::optional<BackupPolicy> backup;

    std::size_t size() const { return z.size(); }
    void validate() const;
};

enum class OptStatus { optimal, infeasible };
enum class ConstraintClass { ramp, capacity, peak, backup };

const char* to_string(OptStatus s);
const char* to_string(ConstraintClass c);

struct Infeasibility {
    ConstraintClass kind = ConstraintClass::capacity;
    std::size_t step = 0;
    std::string message;
};

// Reachable charge interval after each step, used for exact feasibility checks.
struct Reachability {
    bool feasible = true;
    std::optional<Infeasibility> failure;
    std::vector<double> lo;
    std::vector<double> hi;
};

Reachability check_feasibility(const OptProblem& p);

struct OptDiagnostics {
    int lp_iterations = 0;
    double lp_max_violation = 0.0;
    // Steps where the raw LP solution charged and discharged at once
    // (s_plus * s_minus > 1e-8). They are netted out in the returned schedule.
    std::vector<std::size_t> complementarity_violations;
    double max_complementarity_product = 0.0;
    // Largest adjustment applied when snapping the LP point onto exact battery feasibility.
    double max_polish_adjustment = 0.0;
};

struct OptSolution {
    OptStatus status = OptStatus::infeasible;
    StorageSchedule schedule;
    std::vector<double> s_plus;
    std::vector<double> s_minus;
    double objective = 0.0;     // energy_cost - backup_reward
    double energy_cost = 0.0;   // sum p_i theta_i
    double backup_reward = 0.0; // lambda * sum P_i b_i
    std::optional<Infeasibility> infeasibility;
    OptDiagnostics diagnostics;
};

// Column layout of build_lp: four variables per step.
struct LpLayout {
    static std::size_t s_plus(std::size_t i) { return 4 * i; }
    static std::size_t s_minus(std::size_t i) { return 4 * i + 1; }
    static std::size_t theta(std::size_t i) { return 4 * i + 2; }
    static std::size_t charge(std::size_t i) { return 4 * i + 3; }
};

// Charge/discharge-split linearisation of the dispatch problem.
LpModel build_lp(const OptProblem& p);

// Arbitrage + self-consumption + peak cap; rejects a non-trivial backup policy.
OptSolution solve_p_opt(const OptProblem& p, const IpmOptions& options = {});
// Adds the probable-outage reward and scheduled-outage floors.
OptSolution solve_p_madeira(const OptProblem& p, const IpmOptions& options = {});

// sum_i p_i * max(0, z_i): cost of the same scenario with an idle battery.
double zero_storage_cost(const NetLoadSeries& z, const std::vector<double>& prices);

struct PsetRecommendation {
    double p_max = 0.0;  // kW, peak without storage
    double p_set = 0.0;  // kW
    PpcLevel level;
};

// Smallest PPC level whose cap the battery can hold over the whole horizon.
PsetRecommendation recommend_p_set(const NetLoadSeries& z, const BatterySpec& spec, const TimeGrid& grid,
                                   const PpcTable& table, double b0);

}  // namespace mstor
