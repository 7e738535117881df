#include <sstream>

#include <gtest/gtest.h>

#include "mstor/errors.hpp"
#include "mstor/mpc.hpp"
#include "mstor/synthetic.hpp"

using namespace mstor;

namespace {

struct Setup {
    Scenario eval;
    std::vector<double> hist_z;
    MpcTemplate tpl;
};

Setup hourly_setup(std::size_t hist_days = 4, std::size_t eval_days = 1) {
    SyntheticOptions o;
    o.days = hist_days + eval_days;
    o.h = 1.0;
    o.seed = 5;
    const auto sc = synthetic_scenario(o);
    Setup s;
    const std::size_t first = hist_days * 24;
    s.eval = sc.slice(first, sc.size() - first);
    s.hist_z = net_load(sc.slice(0, first)).z;
    s.tpl.prices = price_signal(triple_rate_schedule(), s.eval.grid);
    BatterySpec spec;
    spec.eta_ch = spec.eta_dis = 0.95;
    spec.b_min = 0.2;
    spec.b_max = 2.0;
    s.tpl.spec = parse_c_rating("1C-1C", spec);
    return s;
}

OptSolution deterministic(const Setup& s, double b0) {
    OptProblem p;
    p.z = net_load(s.eval);
    p.prices = s.tpl.prices;
    p.spec = s.tpl.spec;
    p.b0 = b0;
    p.grid = s.eval.grid;
    p.p_set = s.tpl.p_set;
    p.backup = s.tpl.backup;
    return solve_p_madeira(p);
}

std::vector<double> joined(const Setup& s) {
    auto full = s.hist_z;
    const auto z = net_load(s.eval).z;
    full.insert(full.end(), z.begin(), z.end());
    return full;
}

}  // namespace

TEST(Mpc, PerfectForecastReproducesDeterministic) {
    const auto s = hourly_setup();
    const auto det = deterministic(s, 1.0);
    const auto run = run_mpc(s.eval, s.hist_z, perfect_forecaster(joined(s)), s.tpl, 1.0);
    ASSERT_EQ(det.status, OptStatus::optimal);
    EXPECT_NEAR(run.objective, det.objective, 1e-6);
    EXPECT_EQ(run.log.size(), s.eval.size());
    EXPECT_EQ(run.contract_violations, 0u);
}

TEST(Mpc, PerfectForecastWithPeakCapAndBackup) {
    auto s = hourly_setup();
    s.tpl.p_set = 4.6;
    BackupPolicy bp;
    bp.outage_prob.assign(s.eval.size(), 0.01);
    bp.lambda = 0.5;
    bp.incidents = {{18, 1.5}};
    s.tpl.backup = bp;
    const auto det = deterministic(s, 1.0);
    ASSERT_EQ(det.status, OptStatus::optimal);
    const auto run = run_mpc(s.eval, s.hist_z, perfect_forecaster(joined(s)), s.tpl, 1.0);
    EXPECT_NEAR(run.objective, det.objective, 1e-6);
    EXPECT_GE(run.committed.b[18], 1.5 - 1e-6);
}

TEST(Mpc, SingleStepHorizon) {
    auto s = hourly_setup();
    s.eval = s.eval.slice(0, 1);
    s.tpl.prices.resize(1);
    const auto det = deterministic(s, 1.0);
    const auto run = run_mpc(s.eval, s.hist_z, perfect_forecaster(joined(s)), s.tpl, 1.0);
    ASSERT_EQ(run.log.size(), 1u);
    EXPECT_NEAR(run.committed.s[0], det.schedule.s[0], 1e-7);
    EXPECT_NEAR(run.objective, det.objective, 1e-9);
}

TEST(Mpc, BiasedForecastCostsMore) {
    const auto s = hourly_setup();
    const auto det = deterministic(s, 1.0);
    auto truth = perfect_forecaster(joined(s));
    Forecaster biased = [truth](const std::vector<double>& obs, std::size_t origin, std::size_t end) {
        auto f = truth(obs, origin, end);
        for (auto& v : f) v += 0.1;
        return f;
    };
    const auto run = run_mpc(s.eval, s.hist_z, biased, s.tpl, 1.0);
    EXPECT_GE(run.objective, det.objective - 1e-9);
    const double idle = zero_storage_cost(net_load(s.eval), s.tpl.prices);
    const double loo = 1.0 - (idle - run.objective) / (idle - det.objective);
    EXPECT_GT(loo, 0.0);
}

TEST(Mpc, FixedWindowRuns) {
    const auto s = hourly_setup();
    MpcOptions o;
    o.window = 6;
    o.keep_forecasts = true;
    const auto run = run_mpc(s.eval, s.hist_z, perfect_forecaster(joined(s)), s.tpl, 1.0, o);
    ASSERT_EQ(run.forecasts.size(), s.eval.size());
    EXPECT_EQ(run.forecasts.front().size(), 6u);
    EXPECT_EQ(run.forecasts.back().size(), 1u);
    EXPECT_GE(run.objective, deterministic(s, 1.0).objective - 1e-9);
}

TEST(Mpc, ArmaModelRun) {
    const auto s = hourly_setup(6, 2);
    const auto model = fit_arma(HistoryBuffer(24, s.hist_z));
    const auto run = run_mpc(s.eval, s.hist_z, model, s.tpl, 1.0);
    const auto det = deterministic(s, 1.0);
    EXPECT_GE(run.objective, det.objective - 1e-9);
    for (double b : run.committed.b) {
        EXPECT_GE(b, s.tpl.spec.b_min - 1e-9);
        EXPECT_LE(b, s.tpl.spec.b_max + 1e-9);
    }
}

TEST(Mpc, ModelRunNeedsThreeHistoryDays) {
    const auto s = hourly_setup();
    const auto model = fit_arma(HistoryBuffer(24, s.hist_z));
    const std::vector<double> short_hist(s.hist_z.begin(), s.hist_z.begin() + 48);
    EXPECT_THROW(run_mpc(s.eval, short_hist, model, s.tpl, 1.0), ValidationError);
}

TEST(Mpc, UnreachableBackupIsDroppedAndFlagged) {
    auto s = hourly_setup();
    BackupPolicy bp;
    bp.incidents = {{0, 2.0}};
    s.tpl.backup = bp;
    s.tpl.spec = parse_c_rating("0.5C-0.5C", s.tpl.spec);  // at most 0.9 kWh gained in the first hour
    const auto run = run_mpc(s.eval, s.hist_z, perfect_forecaster(joined(s)), s.tpl, 0.2);
    EXPECT_EQ(run.backup_drops, 1u);
    EXPECT_TRUE(run.log[0].flags & kFlagBackupDropped);
    EXPECT_FALSE(run.log[1].flags & kFlagBackupDropped);
}

TEST(Mpc, UnholdableCapIsRelaxedAndViolationFlagged) {
    auto s = hourly_setup();
    const auto z = net_load(s.eval);
    double peak = 0.0;
    for (double v : z.z) peak = std::max(peak, v);
    s.tpl.p_set = peak - 2.5;  // more than the battery can shave at once
    const auto run = run_mpc(s.eval, s.hist_z, perfect_forecaster(joined(s)), s.tpl, 0.2);
    EXPECT_GT(run.peak_relaxations, 0u);
    EXPECT_GT(run.contract_violations, 0u);
    bool flagged = false;
    for (const auto& e : run.log) flagged = flagged || (e.flags & kFlagContractViolation);
    EXPECT_TRUE(flagged);
}

TEST(Mpc, RunLogParses) {
    const auto s = hourly_setup();
    const auto run = run_mpc(s.eval, s.hist_z, perfect_forecaster(joined(s)), s.tpl, 1.0);
    std::ostringstream os;
    write_run_log(os, s.eval.grid, run);
    std::istringstream is(os.str());
    const auto t = read_table_csv(is);
    EXPECT_EQ(t.rows.size(), s.eval.size());
    const auto col = t.column("b");
    EXPECT_DOUBLE_EQ(parse_number(t.rows[3][col], "b"), run.committed.b[3]);
}

TEST(Mpc, FlagString) {
    EXPECT_EQ(flag_string(kFlagNone), "");
    EXPECT_EQ(flag_string(kFlagBackupDropped | kFlagContractViolation), "backup_dropped|contract_violation");
}
