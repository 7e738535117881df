#include <cmath>
#include <random>

#include <gtest/gtest.h>

#include "mstor/battery.hpp"
#include "mstor/errors.hpp"
#include "oracles/brute_force.hpp"

using namespace mstor;

namespace {

BatterySpec home_battery(double eta = 0.95) {
    BatterySpec s;
    s.eta_ch = eta;
    s.eta_dis = eta;
    s.b_min = 0.2;
    s.b_max = 2.0;
    return s;
}

BatterySpec lossless(double dmin, double dmax, double bmin, double bmax) {
    BatterySpec s;
    s.delta_min = dmin;
    s.delta_max = dmax;
    s.b_min = bmin;
    s.b_max = bmax;
    return s;
}

NetLoadSeries nl(std::vector<double> z) { return NetLoadSeries{std::move(z)}; }

}  // namespace

TEST(CRating, OneCOverUsableRange) {
    const auto s = parse_c_rating("1C-1C", home_battery());
    EXPECT_NEAR(s.delta_max, 1.8, 1e-12);
    EXPECT_NEAR(s.delta_min, -1.8, 1e-12);
}

TEST(CRating, TwoC) {
    const auto s = parse_c_rating("2C-2C", home_battery());
    EXPECT_NEAR(s.delta_max, 3.6, 1e-12);
    EXPECT_NEAR(s.delta_min, -3.6, 1e-12);
}

TEST(CRating, Asymmetric) {
    const auto s = parse_c_rating("0.5C-4C", home_battery());
    EXPECT_NEAR(s.delta_max, 0.9, 1e-12);
    EXPECT_NEAR(s.delta_min, -7.2, 1e-12);
}

TEST(CRating, ZeroOrMalformedIsParseError) {
    EXPECT_THROW(parse_c_rating("0C-1C", home_battery()), ParseError);
    EXPECT_THROW(parse_c_rating("1C-0C", home_battery()), ParseError);
    EXPECT_THROW(parse_c_rating("1C", home_battery()), ParseError);
    EXPECT_THROW(parse_c_rating("xC-1C", home_battery()), ParseError);
    EXPECT_THROW(parse_c_rating("-1C-1C", home_battery()), ParseError);
}

TEST(Spec, ValidateRejectsBadParameters) {
    auto s = home_battery();
    s.eta_ch = 1.1;
    EXPECT_THROW(s.validate(), ValidationError);
    s = home_battery();
    s.delta_min = 0.5;
    EXPECT_THROW(s.validate(), ValidationError);
    s = home_battery();
    s.b_min = 3.0;
    EXPECT_THROW(s.validate(), ValidationError);
    EXPECT_NO_THROW(home_battery().validate());
}

TEST(StepBounds, LosslessIdentity) {
    const auto b = step_bounds(lossless(-1, 1, 0, 10), 1.0);
    EXPECT_DOUBLE_EQ(b.lo, -1.0);
    EXPECT_DOUBLE_EQ(b.hi, 1.0);
}

TEST(StepBounds, QuarterHourWithLosses) {
    auto spec = lossless(-1, 1, 0, 10);
    spec.eta_ch = spec.eta_dis = 0.95;
    const auto b = step_bounds(spec, 0.25);
    EXPECT_NEAR(b.lo, -0.2375, 1e-12);
    EXPECT_NEAR(b.hi, 0.25 / 0.95, 1e-12);
    EXPECT_NEAR(b.hi, 0.2632, 5e-5);
}

TEST(StepBounds, ChargeOnly) { EXPECT_EQ(step_bounds(lossless(0, 1, 0, 10), 1.0).lo, 0.0); }

TEST(ApplyAction, Idle) {
    const auto spec = parse_c_rating("1C-1C", home_battery());
    EXPECT_DOUBLE_EQ(apply_action({1.0}, 0.0, spec, 1.0).b, 1.0);
}

TEST(ApplyAction, ChargeWithLoss) {
    const auto spec = parse_c_rating("1C-1C", home_battery());
    EXPECT_NEAR(apply_action({1.0}, 0.5, spec, 1.0).b, 1.475, 1e-12);
}

TEST(ApplyAction, DischargeWithLoss) {
    const auto spec = parse_c_rating("1C-1C", home_battery());
    EXPECT_NEAR(apply_action({1.0}, -0.5, spec, 1.0).b, 1.0 - 0.5 / 0.95, 1e-12);
    EXPECT_NEAR(apply_action({1.0}, -0.5, spec, 1.0).b, 0.4737, 5e-5);
}

TEST(ApplyAction, NamesViolatedConstraint) {
    const auto spec = parse_c_rating("1C-1C", home_battery());
    try {
        apply_action({1.0}, 5.0, spec, 1.0);
        FAIL();
    } catch (const InfeasibleActionError& e) {
        EXPECT_EQ(e.constraint(), "ramp");
    }
    try {
        apply_action({1.9}, 1.0, spec, 1.0);
        FAIL();
    } catch (const InfeasibleActionError& e) {
        EXPECT_EQ(e.constraint(), "capacity_max");
    }
    try {
        apply_action({0.3}, -1.0, spec, 1.0);
        FAIL();
    } catch (const InfeasibleActionError& e) {
        EXPECT_EQ(e.constraint(), "capacity_min");
    }
}

TEST(ApplyAction, ChargeDischargeRoundTripLosesEtaSquared) {
    auto spec = parse_c_rating("1C-1C", home_battery(0.9));
    const double b0 = 1.0;
    const double s = 0.5;
    const auto up = apply_action({b0}, s, spec, 1.0);
    const double stored = up.b - b0;
    // Discharge everything that was stored; the grid sees eta^2 of the original action.
    const auto down = apply_action(up, -stored * spec.eta_dis, spec, 1.0);
    EXPECT_NEAR(down.b, b0, 1e-12);
    EXPECT_NEAR(stored * spec.eta_dis, s * spec.eta_ch * spec.eta_dis, 1e-12);
}

TEST(Greedy, AbsorbsAllExcess) {
    const auto g = greedy_backup(nl({-1}), lossless(-100, 100, 0, 100), 0.0, 1.0);
    EXPECT_DOUBLE_EQ(g.s[0], 1.0);
    EXPECT_DOUBLE_EQ(g.theta[0], 0.0);
}

TEST(Greedy, EmptyBatteryCannotDischarge) {
    const auto g = greedy_backup(nl({1}), lossless(-1, 1, 0.2, 2), 0.2, 1.0);
    EXPECT_DOUBLE_EQ(g.s[0], 0.0);
    EXPECT_DOUBLE_EQ(g.theta[0], 1.0);
}

TEST(Greedy, ThreeTermExample) {
    const auto g = greedy_backup(nl({-2, 2}), lossless(-1, 1, 0, 1), 0.0, 1.0);
    EXPECT_DOUBLE_EQ(g.s[0], 1.0);
    EXPECT_DOUBLE_EQ(g.s[1], -1.0);
    EXPECT_DOUBLE_EQ(g.b[0], 1.0);
    EXPECT_DOUBLE_EQ(g.b[1], 0.0);
}

TEST(Greedy, RandomInstancesAreFeasibleAndBindOneTerm) {
    std::mt19937_64 rng(11);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    for (int trial = 0; trial < 200; ++trial) {
        BatterySpec spec;
        spec.eta_ch = 0.8 + 0.2 * u(rng);
        spec.eta_dis = 0.8 + 0.2 * u(rng);
        spec.b_min = 0.5 * u(rng);
        spec.b_max = spec.b_min + 0.1 + 3 * u(rng);
        spec.delta_max = 3 * u(rng);
        spec.delta_min = -3 * u(rng);
        const double h = trial % 2 ? 0.25 : 1.0;
        const double b0 = spec.b_min + u(rng) * spec.usable();
        std::vector<double> z(48);
        for (auto& v : z) v = 4 * u(rng) - 2;
        const auto g = greedy_backup(nl(z), spec, b0, h);
        const auto bounds = step_bounds(spec, h);
        const auto again = replay(nl(z), g.s, spec, b0, h);
        double b = b0;
        for (std::size_t i = 0; i < z.size(); ++i) {
            EXPECT_DOUBLE_EQ(again.b[i], g.b[i]);
            double t1, t2, t3;
            if (z[i] >= 0) {
                t1 = -z[i];
                t2 = bounds.lo;
                t3 = -(b - spec.b_min) * spec.eta_dis;
            } else {
                t1 = -z[i];
                t2 = bounds.hi;
                t3 = (spec.b_max - b) / spec.eta_ch;
            }
            const double gap = std::min({std::abs(g.s[i] - t1), std::abs(g.s[i] - t2), std::abs(g.s[i] - t3)});
            EXPECT_LE(gap, 1e-9) << "trial " << trial << " step " << i;
            b = g.b[i];
        }
    }
}

TEST(Oracle, ChargeUpdateMatchesLibrary) {
    auto spec = parse_c_rating("1C-1C", home_battery(0.9));
    for (double s : {-0.7, -0.1, 0.0, 0.3, 0.9}) {
        EXPECT_NEAR(apply_action({1.0}, s, spec, 1.0).b, oracle::next_charge(1.0, s, 0.9, 0.9), 1e-15);
    }
}
