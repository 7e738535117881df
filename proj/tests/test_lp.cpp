#include <array>
#include <cmath>
#include <random>
#include <sstream>

#include <gtest/gtest.h>

#include "mstor/lp.hpp"

using namespace mstor;

namespace {

// Minimum of c'x over a bounded 2-D polytope, by enumerating the
// intersections of every pair of constraint lines.
double vertex_min_2d(const std::vector<std::array<double, 3>>& le_rows, double c0, double c1, bool* feasible) {
    double best = kInf;
    *feasible = false;
    for (std::size_t i = 0; i < le_rows.size(); ++i) {
        for (std::size_t j = i + 1; j < le_rows.size(); ++j) {
            const auto& a = le_rows[i];
            const auto& b = le_rows[j];
            const double det = a[0] * b[1] - a[1] * b[0];
            if (std::abs(det) < 1e-12) continue;
            const double x = (a[2] * b[1] - a[1] * b[2]) / det;
            const double y = (a[0] * b[2] - a[2] * b[0]) / det;
            bool ok = true;
            for (const auto& r : le_rows) ok = ok && r[0] * x + r[1] * y <= r[2] + 1e-9;
            if (!ok) continue;
            *feasible = true;
            best = std::min(best, c0 * x + c1 * y);
        }
    }
    return best;
}

}  // namespace

TEST(Lp, TextbookMaximisation) {
    // max 3x + 5y s.t. x <= 4, 2y <= 12, 3x + 2y <= 18  ->  (2, 6), 36
    LpModel m;
    const auto x = m.add_var("x", 0, kInf, -3);
    const auto y = m.add_var("y", 0, kInf, -5);
    m.add_row("r1", {{x, 1}}, RowSense::le, 4);
    m.add_row("r2", {{y, 2}}, RowSense::le, 12);
    m.add_row("r3", {{x, 3}, {y, 2}}, RowSense::le, 18);
    const auto r = solve_lp(m);
    ASSERT_EQ(r.status, LpStatus::optimal);
    EXPECT_NEAR(r.objective, -36, 1e-7);
    EXPECT_NEAR(r.x[x], 2, 1e-6);
    EXPECT_NEAR(r.x[y], 6, 1e-6);
}

TEST(Lp, EqualityAndFreeVariable) {
    // min x + y s.t. x - y = 1, y free, x in [0, 5], x + y >= -3
    LpModel m;
    const auto x = m.add_var("x", 0, 5, 1);
    const auto y = m.add_var("y", -kInf, kInf, 1);
    m.add_row("eq", {{x, 1}, {y, -1}}, RowSense::eq, 1);
    m.add_row("ge", {{x, 1}, {y, 1}}, RowSense::ge, -3);
    const auto r = solve_lp(m);
    ASSERT_EQ(r.status, LpStatus::optimal);
    EXPECT_NEAR(r.objective, -1, 1e-7);
    EXPECT_NEAR(r.x[x], 0, 1e-6);
    EXPECT_NEAR(r.x[y], -1, 1e-6);
}

TEST(Lp, FixedAndNegativeUpperBounded) {
    LpModel m;
    const auto a = m.add_var("a", 2, 2, 1);
    const auto b = m.add_var("b", -kInf, -1, -1);
    m.add_row("r", {{a, 1}, {b, 1}}, RowSense::ge, -4);
    const auto r = solve_lp(m);
    ASSERT_EQ(r.status, LpStatus::optimal);
    EXPECT_NEAR(r.x[a], 2, 1e-8);
    EXPECT_NEAR(r.x[b], -1, 1e-6);
    EXPECT_NEAR(r.objective, 3, 1e-6);
}

TEST(Lp, ObjectiveOffset) {
    LpModel m;
    m.add_var("x", 1, 3, 2);
    m.objective_offset = 10;
    const auto r = solve_lp(m);
    ASSERT_EQ(r.status, LpStatus::optimal);
    EXPECT_NEAR(r.objective, 12, 1e-8);
}

TEST(Lp, DetectsInfeasibility) {
    LpModel m;
    const auto x = m.add_var("x", 0, 1, 1);
    m.add_row("r", {{x, 1}}, RowSense::ge, 2);
    EXPECT_NE(solve_lp(m).status, LpStatus::optimal);

    LpModel m2;
    const auto u = m2.add_var("u", 0, kInf, 1);
    const auto v = m2.add_var("v", 0, kInf, 1);
    m2.add_row("a", {{u, 1}, {v, 1}}, RowSense::le, 1);
    m2.add_row("b", {{u, 1}, {v, 1}}, RowSense::ge, 2);
    EXPECT_NE(solve_lp(m2).status, LpStatus::optimal);
}

TEST(Lp, DetectsUnboundedness) {
    LpModel m;
    const auto x = m.add_var("x", 0, kInf, -1);
    const auto y = m.add_var("y", 0, kInf, 0);
    m.add_row("r", {{x, 1}, {y, -1}}, RowSense::le, 1);
    EXPECT_NE(solve_lp(m).status, LpStatus::optimal);
}

TEST(Lp, MaxViolationAndObjective) {
    LpModel m;
    const auto x = m.add_var("x", 0, 1, 2);
    m.add_row("r", {{x, 1}}, RowSense::le, 0.5);
    EXPECT_DOUBLE_EQ(m.objective({0.25}), 0.5);
    EXPECT_DOUBLE_EQ(m.max_violation({0.25}), 0.0);
    EXPECT_DOUBLE_EQ(m.max_violation({0.75}), 0.25);
    EXPECT_DOUBLE_EQ(m.max_violation({-0.5}), 0.5);
    EXPECT_EQ(m.inequality_count(), 1u);
    EXPECT_EQ(m.equality_count(), 0u);
}

TEST(Lp, WritesLpFormat) {
    LpModel m;
    const auto x = m.add_var("x", 0, 4, -3);
    m.add_row("cap", {{x, 1}}, RowSense::le, 2);
    std::ostringstream os;
    write_lp_format(os, m);
    const auto text = os.str();
    EXPECT_NE(text.find("Minimize"), std::string::npos);
    EXPECT_NE(text.find("Subject To"), std::string::npos);
    EXPECT_NE(text.find("cap:"), std::string::npos);
    EXPECT_NE(text.find("End"), std::string::npos);
}

TEST(Lp, RandomTwoVariableProblemsMatchVertexEnumeration) {
    std::mt19937_64 rng(5);
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    int feasible_seen = 0;
    for (int trial = 0; trial < 300; ++trial) {
        LpModel m;
        const double c0 = u(rng), c1 = u(rng);
        const auto x = m.add_var("x", -2, 2, c0);
        const auto y = m.add_var("y", -2, 2, c1);
        std::vector<std::array<double, 3>> rows{{1, 0, 2}, {-1, 0, 2}, {0, 1, 2}, {0, -1, 2}};
        for (int k = 0; k < 4; ++k) {
            const double a = u(rng), b = u(rng), rhs = u(rng) + 0.3;
            if (k % 2) {
                m.add_row("r", {{x, a}, {y, b}}, RowSense::le, rhs);
                rows.push_back({a, b, rhs});
            } else {
                m.add_row("r", {{x, a}, {y, b}}, RowSense::ge, -rhs);
                rows.push_back({-a, -b, rhs});
            }
        }
        bool feasible = false;
        const double ref = vertex_min_2d(rows, c0, c1, &feasible);
        const auto r = solve_lp(m);
        if (!feasible) {
            EXPECT_NE(r.status, LpStatus::optimal) << trial;
            continue;
        }
        ++feasible_seen;
        ASSERT_EQ(r.status, LpStatus::optimal) << trial;
        EXPECT_NEAR(r.objective, ref, 1e-7) << trial;
        EXPECT_LE(m.max_violation(r.x), 1e-7) << trial;
    }
    EXPECT_GT(feasible_seen, 200);
}
