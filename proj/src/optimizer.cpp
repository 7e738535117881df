#include "mstor/optimizer.hpp"

#include <algorithm>
#include <cmath>

#include <fmt/core.h>

#include "mstor/errors.hpp"

namespace mstor {

bool BackupPolicy::trivial() const {
    if (!incidents.empty()) return false;
    if (lambda == 0.0) return true;
    return std::all_of(outage_prob.begin(), outage_prob.end(), [](double p) { return p == 0.0; });
}

void BackupPolicy::validate(std::size_t n, const BatterySpec& spec) const {
    if (!outage_prob.empty() && outage_prob.size() != n) {
        throw AlignmentError(fmt::format("outage probability has {} entries for {} steps", outage_prob.size(), n));
    }
    for (double p : outage_prob) {
        if (!(p >= 0.0 && p <= 1.0)) throw ValidationError(fmt::format("outage probability {} not in [0,1]", p));
    }
    if (!(lambda >= 0.0) || !std::isfinite(lambda)) {
        throw ValidationError(fmt::format("lambda must be finite and >= 0, got {}", lambda));
    }
    if (window < 1) throw ValidationError("backup window must be at least one step");
    for (const auto& inc : incidents) {
        if (inc.step >= n) {
            throw ValidationError(fmt::format("incident step {} outside horizon of {} steps", inc.step, n));
        }
        if (inc.b_set > spec.b_max + kFeasibilityTol) {
            throw ValidationError(fmt::format("incident b_set {} exceeds b_max {}", inc.b_set, spec.b_max));
        }
    }
}

void OptProblem::validate() const {
    spec.validate();
    const std::size_t n = z.size();
    if (n == 0) throw ValidationError("empty horizon");
    if (prices.size() != n) throw AlignmentError(fmt::format("{} prices for {} steps", prices.size(), n));
    if (grid.n != n) throw AlignmentError(fmt::format("grid has {} steps, net load {}", grid.n, n));
    for (std::size_t i = 0; i < n; ++i) {
        if (!std::isfinite(z[i])) throw ValidationError(fmt::format("non-finite net load at step {}", i));
        if (!(prices[i] >= 0.0) || !std::isfinite(prices[i])) {
            throw ValidationError(fmt::format("price at step {} must be finite and >= 0", i));
        }
    }
    if (b0 < spec.b_min - kFeasibilityTol || b0 > spec.b_max + kFeasibilityTol) {
        throw ValidationError(fmt::format("b0 {} outside [{}, {}]", b0, spec.b_min, spec.b_max));
    }
    if (!(p_set >= 0.0)) throw ValidationError(fmt::format("p_set must be >= 0, got {}", p_set));
    if (backup) backup->validate(n, spec);
}

const char* to_string(OptStatus s) { return s == OptStatus::optimal ? "optimal" : "infeasible"; }

const char* to_string(ConstraintClass c) {
    switch (c) {
        case ConstraintClass::ramp: return "ramp";
        case ConstraintClass::capacity: return "capacity";
        case ConstraintClass::peak: return "peak";
        case ConstraintClass::backup: return "backup";
    }
    return "?";
}

namespace {

// Lower floor on b_i from scheduled incidents, or -inf.
std::vector<double> incident_floors(const OptProblem& p) {
    std::vector<double> floor(p.size(), -kInf);
    if (!p.backup) return floor;
    for (const auto& inc : p.backup->incidents) {
        for (std::size_t k = inc.step; k < std::min(p.size(), inc.step + p.backup->window); ++k) {
            floor[k] = std::max(floor[k], inc.b_set);
        }
    }
    return floor;
}

double grid_cap(const OptProblem& p, std::size_t i) {
    return std::isfinite(p.p_set) ? p.p_set * p.grid.h - p.z[i] : kInf;
}

}  // namespace

Reachability check_feasibility(const OptProblem& p) {
    p.validate();
    const auto& spec = p.spec;
    const auto bounds = step_bounds(spec, p.grid.h);
    const auto floors = incident_floors(p);
    const double tol = kFeasibilityTol;

    Reachability r;
    r.lo.reserve(p.size());
    r.hi.reserve(p.size());
    double lo = p.b0;
    double hi = p.b0;
    for (std::size_t i = 0; i < p.size(); ++i) {
        const double u = std::min(bounds.hi, grid_cap(p, i));
        if (u < bounds.lo - tol) {
            r.feasible = false;
            r.failure = Infeasibility{ConstraintClass::peak, i,
                                      fmt::format("step {}: net load {} kWh exceeds the peak cap even at full "
                                                  "discharge ({} kW ramp)",
                                                  i, p.z[i], spec.delta_min)};
            return r;
        }
        // Internal change range given s <= u; simultaneous charge and discharge
        // can only lower the charge further, never raise it.
        const double x_min = bounds.lo / spec.eta_dis;
        const double x_max = u >= 0.0 ? spec.eta_ch * u : u / spec.eta_dis;
        double nlo = std::max(lo + x_min, spec.b_min);
        const double nhi = std::min(hi + x_max, spec.b_max);
        if (nlo > nhi + tol) {
            r.feasible = false;
            r.failure = Infeasibility{u < 0.0 ? ConstraintClass::peak : ConstraintClass::capacity, i,
                                      fmt::format("step {}: holding the peak cap needs {} kWh from the battery "
                                                  "but at most {} kWh is stored above b_min",
                                                  i, -u, hi - spec.b_min)};
            return r;
        }
        if (floors[i] > nlo) nlo = floors[i];
        if (nlo > nhi + tol) {
            r.feasible = false;
            r.failure = Infeasibility{ConstraintClass::backup, i,
                                      fmt::format("step {}: backup level {} kWh unreachable, at most {} kWh "
                                                  "attainable",
                                                  i, floors[i], nhi)};
            return r;
        }
        lo = nlo;
        hi = std::max(nhi, nlo);
        r.lo.push_back(lo);
        r.hi.push_back(hi);
    }
    return r;
}

LpModel build_lp(const OptProblem& p) {
    p.validate();
    const auto& spec = p.spec;
    const double h = p.grid.h;
    const std::size_t n = p.size();
    const bool has_backup = p.backup.has_value();
    const auto floors = incident_floors(p);

    LpModel lp;
    for (std::size_t i = 0; i < n; ++i) {
        double reward = 0.0;
        if (has_backup && !p.backup->outage_prob.empty()) reward = p.backup->lambda * p.backup->outage_prob[i];
        lp.add_var(fmt::format("sp_{}", i), 0.0, kInf, 0.0);
        lp.add_var(fmt::format("sm_{}", i), 0.0, kInf, 0.0);
        lp.add_var(fmt::format("theta_{}", i), -kInf, kInf, p.prices[i]);
        lp.add_var(fmt::format("b_{}", i), -kInf, kInf, -reward);
    }
    for (std::size_t i = 0; i < n; ++i) {
        const auto sp = LpLayout::s_plus(i);
        const auto sm = LpLayout::s_minus(i);
        const auto th = LpLayout::theta(i);
        const auto b = LpLayout::charge(i);
        lp.add_row(fmt::format("ramp_up_{}", i), {{sp, 1.0}}, RowSense::le, spec.delta_max * h / spec.eta_ch);
        lp.add_row(fmt::format("ramp_down_{}", i), {{sm, 1.0}}, RowSense::le, -spec.delta_min * h * spec.eta_dis);
        // b_i - b_{i-1} - eta_ch s+ + s-/eta_dis = 0, with b_{-1} = b0
        std::vector<std::pair<std::size_t, double>> dyn{{b, 1.0}, {sp, -spec.eta_ch}, {sm, 1.0 / spec.eta_dis}};
        double rhs = 0.0;
        if (i == 0) {
            rhs = p.b0;
        } else {
            dyn.emplace_back(LpLayout::charge(i - 1), -1.0);
        }
        lp.add_row(fmt::format("dyn_{}", i), std::move(dyn), RowSense::eq, rhs);
        lp.add_row(fmt::format("cap_lo_{}", i), {{b, 1.0}}, RowSense::ge, spec.b_min);
        lp.add_row(fmt::format("cap_hi_{}", i), {{b, 1.0}}, RowSense::le, spec.b_max);
        lp.add_row(fmt::format("epi_{}", i), {{th, 1.0}, {sp, -1.0}, {sm, 1.0}}, RowSense::ge, p.z[i]);
        lp.add_row(fmt::format("theta_nn_{}", i), {{th, 1.0}}, RowSense::ge, 0.0);
        if (std::isfinite(p.p_set)) {
            lp.add_row(fmt::format("peak_{}", i), {{sp, 1.0}, {sm, -1.0}}, RowSense::le, p.p_set * h - p.z[i]);
        }
        if (std::isfinite(floors[i])) {
            lp.add_row(fmt::format("backup_{}", i), {{b, 1.0}}, RowSense::ge, floors[i]);
        }
    }
    return lp;
}

double zero_storage_cost(const NetLoadSeries& z, const std::vector<double>& prices) {
    double c = 0.0;
    for (std::size_t i = 0; i < z.size(); ++i) c += prices[i] * std::max(0.0, z[i]);
    return c;
}

namespace {

OptSolution solve_impl(const OptProblem& p, const IpmOptions& options) {
    OptSolution sol;
    const auto reach = check_feasibility(p);
    if (!reach.feasible) {
        sol.status = OptStatus::infeasible;
        sol.infeasibility = reach.failure;
        return sol;
    }

    const auto lp = build_lp(p);
    const auto res = solve_lp(lp, options);
    if (res.status != LpStatus::optimal) {
        throw Error(fmt::format("LP solver stopped with status {} after {} iterations (primal {}, dual {}, gap {})",
                                to_string(res.status), res.iterations, res.primal_residual, res.dual_residual,
                                res.gap));
    }
    sol.diagnostics.lp_iterations = res.iterations;
    sol.diagnostics.lp_max_violation = lp.max_violation(res.x);

    const auto& spec = p.spec;
    const double h = p.grid.h;
    const std::size_t n = p.size();
    const auto bounds = step_bounds(spec, h);
    sol.s_plus.resize(n);
    sol.s_minus.resize(n);
    sol.schedule.s.resize(n);
    sol.schedule.b.resize(n);
    sol.schedule.theta.resize(n);

    double b = p.b0;
    for (std::size_t i = 0; i < n; ++i) {
        double sp = std::max(0.0, res.x[LpLayout::s_plus(i)]);
        double sm = std::max(0.0, res.x[LpLayout::s_minus(i)]);
        const double prod = sp * sm;
        sol.diagnostics.max_complementarity_product = std::max(sol.diagnostics.max_complementarity_product, prod);
        if (prod > 1e-8) sol.diagnostics.complementarity_violations.push_back(i);

        // Net a simultaneous pair into one direction with the same internal
        // change: b is unchanged and grid import can only fall.
        const double delta = spec.eta_ch * sp - sm / spec.eta_dis;
        double s = delta >= 0.0 ? delta / spec.eta_ch : delta * spec.eta_dis;

        // Snap onto exact feasibility given the realised charge b.
        const double raw = s;
        double lo = std::max(bounds.lo, -(b - spec.b_min) * spec.eta_dis);
        double hi = std::min({bounds.hi, (spec.b_max - b) / spec.eta_ch, grid_cap(p, i)});
        lo = std::min(lo, 0.0);
        hi = std::max(hi, lo);
        s = std::clamp(s, lo, hi);
        sol.diagnostics.max_polish_adjustment = std::max(sol.diagnostics.max_polish_adjustment, std::abs(s - raw));

        const auto next = apply_action(BatteryState{b}, s, spec, h);
        b = next.b;
        sol.s_plus[i] = std::max(0.0, s);
        sol.s_minus[i] = std::max(0.0, -s);
        sol.schedule.s[i] = s;
        sol.schedule.b[i] = b;
        sol.schedule.theta[i] = std::max(0.0, p.z[i] + s);
    }

    sol.energy_cost = energy_cost(sol.schedule.theta, p.prices);
    if (p.backup && !p.backup->outage_prob.empty()) {
        for (std::size_t i = 0; i < n; ++i) {
            sol.backup_reward += p.backup->lambda * p.backup->outage_prob[i] * sol.schedule.b[i];
        }
    }
    sol.objective = sol.energy_cost - sol.backup_reward;
    sol.status = OptStatus::optimal;
    return sol;
}

}  // namespace

OptSolution solve_p_opt(const OptProblem& p, const IpmOptions& options) {
    if (p.backup && !p.backup->trivial()) {
        throw ValidationError("solve_p_opt takes no backup terms; use solve_p_madeira");
    }
    return solve_impl(p, options);
}

OptSolution solve_p_madeira(const OptProblem& p, const IpmOptions& options) { return solve_impl(p, options); }

PsetRecommendation recommend_p_set(const NetLoadSeries& z, const BatterySpec& spec, const TimeGrid& grid,
                                   const PpcTable& table, double b0) {
    PsetRecommendation out;
    out.p_max = -kInf;
    for (double v : z.z) out.p_max = std::max(out.p_max, v / grid.h);
    const double start = std::max(out.p_max + spec.delta_min, 0.0);

    OptProblem probe;
    probe.z = z;
    probe.prices.assign(z.size(), 0.0);
    probe.spec = spec;
    probe.b0 = b0;
    probe.grid = grid;
    for (const auto& level : table.levels) {
        if (level.kva < start - 1e-9) continue;
        probe.p_set = level.kva;
        if (check_feasibility(probe).feasible) {
            out.p_set = level.kva;
            out.level = level;
            return out;
        }
    }
    throw NoContractError(fmt::format("no PPC level up to {} kVA can hold a {} kW peak with this battery",
                                      table.levels.empty() ? 0.0 : table.levels.back().kva, out.p_max));
}

}  // namespace mstor
