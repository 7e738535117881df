#include "mstor/mpc.hpp"

#include <algorithm>
#include <cmath>
#include <ostream>

#include <fmt/core.h>

#include "mstor/errors.hpp"

namespace mstor {

std::string flag_string(unsigned flags) {
    std::string out;
    auto add = [&out](const char* s) {
        if (!out.empty()) out += '|';
        out += s;
    };
    if (flags & kFlagBackupDropped) add("backup_dropped");
    if (flags & kFlagPeakRelaxed) add("peak_relaxed");
    if (flags & kFlagContractViolation) add("contract_violation");
    return out;
}

Forecaster arma_forecaster(ForecastModel model, std::size_t lookback_days, bool rolling_mean) {
    return [model = std::move(model), lookback_days, rolling_mean](const std::vector<double>& observed,
                                                                   std::size_t origin, std::size_t end) {
        if (!rolling_mean) return forecast_horizon(model, observed, origin, end);
        auto m = model;
        const auto n_day = model.steps_per_day();
        const std::size_t days = lookback_days ? lookback_days : std::max<std::size_t>(1, origin / n_day);
        m.mean_profile = rolling_mean_profile(observed, origin, n_day, days);
        return forecast_horizon(m, observed, origin, end);
    };
}

Forecaster perfect_forecaster(std::vector<double> full_series) {
    return [series = std::move(full_series)](const std::vector<double>&, std::size_t origin, std::size_t end) {
        if (end > series.size()) throw ValidationError("perfect forecast asked beyond the known series");
        return std::vector<double>(series.begin() + static_cast<std::ptrdiff_t>(origin),
                                   series.begin() + static_cast<std::ptrdiff_t>(end));
    };
}

namespace {

std::vector<double> absolute_floors(const MpcTemplate& tpl, std::size_t n) {
    std::vector<double> floor(n, -kInf);
    if (!tpl.backup) return floor;
    for (const auto& inc : tpl.backup->incidents) {
        for (std::size_t k = inc.step; k < std::min(n, inc.step + tpl.backup->window); ++k) {
            floor[k] = std::max(floor[k], inc.b_set);
        }
    }
    return floor;
}

}  // namespace

MpcRun run_mpc(const Scenario& eval, const std::vector<double>& history_z, const Forecaster& forecaster,
               const MpcTemplate& tpl, double b0, const MpcOptions& options) {
    const std::size_t n = eval.size();
    if (n == 0) throw ValidationError("empty evaluation window");
    if (tpl.prices.size() != n) throw AlignmentError(fmt::format("{} prices for {} steps", tpl.prices.size(), n));
    tpl.spec.validate();
    if (tpl.backup) tpl.backup->validate(n, tpl.spec);

    const auto z = net_load(eval);
    const double h = eval.grid.h;
    auto floors = absolute_floors(tpl, n);
    const std::size_t hist_len = history_z.size();

    std::vector<double> observed = history_z;
    observed.reserve(hist_len + n);

    MpcRun run;
    BatteryState state{b0};
    for (std::size_t t = 0; t < n; ++t) {
        const std::size_t end = options.window ? std::min(n, t + options.window) : n;
        const std::size_t len = end - t;
        auto zhat = forecaster(observed, hist_len + t, hist_len + end);
        if (zhat.size() != len) {
            throw Error(fmt::format("forecaster returned {} values for a {}-step horizon", zhat.size(), len));
        }

        OptProblem sub;
        sub.z.z = zhat;
        sub.prices.assign(tpl.prices.begin() + static_cast<std::ptrdiff_t>(t),
                          tpl.prices.begin() + static_cast<std::ptrdiff_t>(end));
        sub.spec = tpl.spec;
        sub.b0 = std::clamp(state.b, tpl.spec.b_min, tpl.spec.b_max);
        sub.grid = TimeGrid{h, len, eval.grid.time_at(t)};
        sub.p_set = tpl.p_set;
        BackupPolicy bp;
        if (tpl.backup) {
            bp.lambda = tpl.backup->lambda;
            if (!tpl.backup->outage_prob.empty()) {
                bp.outage_prob.assign(tpl.backup->outage_prob.begin() + static_cast<std::ptrdiff_t>(t),
                                      tpl.backup->outage_prob.begin() + static_cast<std::ptrdiff_t>(end));
            }
        }
        for (std::size_t k = t; k < end; ++k) {
            if (std::isfinite(floors[k])) bp.incidents.push_back({k - t, floors[k]});
        }
        sub.backup = bp;

        MpcStepLog entry;
        entry.step = t;
        OptSolution sol;
        for (;;) {
            sol = solve_p_madeira(sub, options.ipm);
            if (sol.status == OptStatus::optimal) break;
            const auto& why = *sol.infeasibility;
            if (why.kind == ConstraintClass::backup && !sub.backup->incidents.empty()) {
                // Drop the floor that failed first, here and for the rest of the run.
                const std::size_t k_abs = t + why.step;
                auto& inc = sub.backup->incidents;
                inc.erase(std::remove_if(inc.begin(), inc.end(), [&](const Incident& x) { return x.step == why.step; }),
                          inc.end());
                floors[k_abs] = -kInf;
                entry.flags |= kFlagBackupDropped;
                entry.note += fmt::format("dropped backup floor at step {}; ", k_abs);
                ++run.backup_drops;
                continue;
            }
            if (std::isfinite(sub.p_set)) {
                sub.p_set = kInf;
                entry.flags |= kFlagPeakRelaxed;
                entry.note += fmt::format("peak cap relaxed ({}); ", why.message);
                ++run.peak_relaxations;
                continue;
            }
            throw Error(fmt::format("MPC step {}: sub-problem infeasible with only battery constraints: {}", t,
                                    why.message));
        }

        const double s = sol.schedule.s.front();
        state = apply_action(state, s, tpl.spec, h);
        const double theta = std::max(0.0, z[t] + s);
        run.committed.s.push_back(s);
        run.committed.b.push_back(state.b);
        run.committed.theta.push_back(theta);

        const double grid_kw = (z[t] + s) / h;
        run.committed_peak_kw = t == 0 ? grid_kw : std::max(run.committed_peak_kw, grid_kw);
        if (std::isfinite(tpl.p_set) && grid_kw > tpl.p_set + 1e-9) {
            entry.flags |= kFlagContractViolation;
            ++run.contract_violations;
        }
        entry.forecast_cost = sol.objective;
        entry.s = s;
        entry.z = z[t];
        entry.b = state.b;
        entry.theta = theta;
        run.log.push_back(std::move(entry));
        if (options.keep_forecasts) run.forecasts.push_back(std::move(zhat));

        observed.push_back(z[t]);
    }

    run.energy_cost = energy_cost(run.committed.theta, tpl.prices);
    if (tpl.backup && !tpl.backup->outage_prob.empty()) {
        for (std::size_t i = 0; i < n; ++i) {
            run.backup_reward += tpl.backup->lambda * tpl.backup->outage_prob[i] * run.committed.b[i];
        }
    }
    run.objective = run.energy_cost - run.backup_reward;
    return run;
}

MpcRun run_mpc(const Scenario& eval, const std::vector<double>& history_z, const ForecastModel& model,
               const MpcTemplate& tpl, double b0, const MpcOptions& options) {
    const auto n_day = model.steps_per_day();
    if (n_day == 0 || history_z.size() % n_day != 0 || history_z.size() < 3 * n_day) {
        throw ValidationError(fmt::format("MPC needs at least 3 whole days of history ({} steps), got {} steps",
                                          3 * n_day, history_z.size()));
    }
    const std::size_t days = history_z.size() / n_day;
    const std::size_t lookback = options.lookback_days ? std::min(options.lookback_days, days) : days;
    return run_mpc(eval, history_z, arma_forecaster(model, lookback, options.rolling_mean), tpl, b0, options);
}

void write_run_log(std::ostream& out, const TimeGrid& grid, const MpcRun& run) {
    out << "step,timestamp,forecast_cost,s,z,b,theta,flags\n";
    for (const auto& e : run.log) {
        out << e.step << ',' << format_timestamp(grid.time_at(e.step)) << ',' << format_number(e.forecast_cost) << ','
            << format_number(e.s) << ',' << format_number(e.z) << ',' << format_number(e.b) << ','
            << format_number(e.theta) << ',' << flag_string(e.flags) << '\n';
    }
}

}  // namespace mstor
