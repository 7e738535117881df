#include <gtest/gtest.h>

#include "mstor/errors.hpp"
#include "mstor/metrics.hpp"

using namespace mstor;

namespace {

BatterySpec range(double bmin, double bmax) {
    BatterySpec s;
    s.b_min = bmin;
    s.b_max = bmax;
    return s;
}

StorageSchedule sched(std::vector<double> s, std::vector<double> theta) {
    StorageSchedule out;
    out.s = std::move(s);
    out.theta = std::move(theta);
    out.b.assign(out.s.size(), 0.0);
    return out;
}

}  // namespace

TEST(ArbitrageGain, IdleBatteryGainsNothing) {
    const NetLoadSeries z{{1, -1, 2}};
    EXPECT_DOUBLE_EQ(arbitrage_gain(z, sched({0, 0, 0}, {1, 0, 2}), {0.1, 0.2, 0.3}), 0.0);
}

TEST(ArbitrageGain, ShiftedSurplus) {
    const NetLoadSeries z{{-1, 1}};
    EXPECT_NEAR(arbitrage_gain(z, sched({1, -1}, {0, 0}), {0.1, 0.2}), 0.2, 1e-15);
}

TEST(PeakGain, TableFourColumn) {
    const auto t = default_ppc_table();
    EXPECT_NEAR(peak_gain(t, 10.35, 3.45, RateType::single, 1).euros, 0.2867, 1e-12);
    EXPECT_NEAR(peak_gain(t, 10.35, 5.75, RateType::single, 1).euros, 0.1918, 1e-12);
    EXPECT_NEAR(peak_gain(t, 10.35, 6.90, RateType::single, 1).euros, 0.1438, 1e-12);
}

TEST(PeakGain, TableThreeColumn) {
    const auto t = default_ppc_table();
    EXPECT_NEAR(peak_gain(t, 17.25, 10.35, RateType::single, 30).euros, 8.544, 1e-9);
    EXPECT_NEAR(peak_gain(t, 17.25, 13.80, RateType::single, 30).euros, 4.272, 1e-9);
}

TEST(PeakGain, SameLevelIsZeroAndIncreaseIsFlagged) {
    const auto t = default_ppc_table();
    EXPECT_DOUBLE_EQ(peak_gain(t, 6.9, 6.9, RateType::dual, 7).euros, 0.0);
    const auto g = peak_gain(t, 3.45, 6.9, RateType::single, 1);
    EXPECT_LT(g.euros, 0.0);
    EXPECT_TRUE(g.negative);
}

TEST(SelfSufficiency, AllFromGrid) {
    const Scenario sc{TimeGrid{1.0, 2}, {1, 2}, {0, 0}};
    EXPECT_DOUBLE_EQ(self_sufficiency(sc, sched({0, 0}, {1, 2})), 0.0);
    EXPECT_DOUBLE_EQ(self_sufficiency_no_storage(sc), 0.0);
}

TEST(SelfSufficiency, NothingFromGrid) {
    const Scenario sc{TimeGrid{1.0, 2}, {1, 2}, {1, 2}};
    EXPECT_DOUBLE_EQ(self_sufficiency(sc, sched({0, 0}, {0, 0})), 1.0);
}

TEST(SelfSufficiency, Fraction) {
    const Scenario sc{TimeGrid{1.0, 2}, {4, 6}, {0, 0}};
    EXPECT_NEAR(self_sufficiency(sc, sched({0, 0}, {3.0, 3.59})), 0.341, 1e-12);
}

TEST(SelfSufficiency, ZeroDemandIsUndefined) {
    const Scenario sc{TimeGrid{1.0, 1}, {0}, {1}};
    EXPECT_THROW(self_sufficiency(sc, sched({0}, {0})), UndefinedMetricError);
}

TEST(SelfSufficiency, PvRaisesItAndStorageMore) {
    const Scenario sc{TimeGrid{1.0, 2}, {1, 1}, {2, 0}};
    const double pv = self_sufficiency_no_storage(sc);
    EXPECT_DOUBLE_EQ(pv, 0.5);
    EXPECT_DOUBLE_EQ(self_sufficiency(sc, sched({1, -1}, {0, 0})), 1.0);
}

TEST(Cycles, ConstantChargeIsZero) { EXPECT_DOUBLE_EQ(count_cycles({1, 1, 1}, range(0, 2)), 0.0); }

TEST(Cycles, FullExcursionIsOne) { EXPECT_DOUBLE_EQ(count_cycles({0.2, 2.0, 0.2}, range(0.2, 2.0)), 1.0); }

TEST(Cycles, TwoHalfExcursions) {
    EXPECT_DOUBLE_EQ(count_cycles({2.0, 1.1, 2.0, 1.1}, range(0.2, 2.0)), 1.0);
    EXPECT_DOUBLE_EQ(count_cycles(2.0, {1.1, 2.0, 1.1}, range(0.2, 2.0)), 1.0);
}

TEST(Cycles, ZeroUsableRange) { EXPECT_DOUBLE_EQ(count_cycles({1, 1}, range(1, 1)), 0.0); }

TEST(LossOfOpportunity, Examples) {
    EXPECT_NEAR(loss_of_opportunity(5.01, 5.50), 0.0891, 1e-4);
    EXPECT_DOUBLE_EQ(loss_of_opportunity(5.5, 5.5), 0.0);
    EXPECT_DOUBLE_EQ(loss_of_opportunity(0.0, 5.5), 1.0);
    EXPECT_THROW(loss_of_opportunity(1.0, 0.0), UndefinedMetricError);
}

TEST(Report, FinalizeAndRow) {
    PerformanceReport r;
    r.g_arb = 0.5;
    r.g_peak = 0.25;
    r.cycles = 0.5;
    finalize(r);
    EXPECT_DOUBLE_EQ(r.g_total, 0.75);
    ASSERT_TRUE(r.euros_per_cycle);
    EXPECT_DOUBLE_EQ(*r.euros_per_cycle, 1.5);
    r.cycles = 0.0;
    finalize(r);
    EXPECT_FALSE(r.euros_per_cycle);
    const auto row = report_csv_row("x", r);
    EXPECT_EQ(row.size(), report_csv_header().size());
    EXPECT_EQ(row[6], "");
}
