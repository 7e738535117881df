#pragma once

#include <cstddef>
#include <iosfwd>
#include <limits>
#include <string>
#include <utility>
#include <vector>

namespace mstor {

inline constexpr double kInf = std::numeric_limits<double>::infinity();

enum class RowSense { le, ge, eq };

struct LpVariable {
    std::string name;
    double lower = 0.0;
    double upper = kInf;
    double cost = 0.0;
};

struct LpRow {
    std::string name;
    std::vector<std::pair<std::size_t, double>> coeffs;
    RowSense sense = RowSense::le;
    double rhs = 0.0;
};

// min cost'x + offset  s.t. rows, lower <= x <= upper.
struct LpModel {
    std::vector<LpVariable> vars;
    std::vector<LpRow> rows;
    double objective_offset = 0.0;

    std::size_t add_var(std::string name, double lower, double upper, double cost);
    std::size_t add_row(std::string name, std::vector<std::pair<std::size_t, double>> coeffs, RowSense sense,
                        double rhs);

    std::size_t num_vars() const { return vars.size(); }
    std::size_t num_rows() const { return rows.size(); }
    std::size_t inequality_count() const;
    std::size_t equality_count() const;
    double objective(const std::vector<double>& x) const;
    // Largest bound or row violation of x.
    double max_violation(const std::vector<double>& x) const;
};

// CPLEX LP text format, readable by most external solvers.
void write_lp_format(std::ostream& out, const LpModel& model);

enum class LpStatus { optimal, infeasible, unbounded, iteration_limit, numerical_error };

const char* to_string(LpStatus s);

struct LpResult {
    LpStatus status = LpStatus::numerical_error;
    std::vector<double> x;
    double objective = 0.0;
    int iterations = 0;
    double primal_residual = 0.0;
    double dual_residual = 0.0;
    double gap = 0.0;
};

struct IpmOptions {
    double tolerance = 1e-10;
    int max_iterations = 200;
    double step_fraction = 0.995;
};

// Primal-dual interior point (Mehrotra predictor-corrector) on a sparse
// normal-equation system.
LpResult solve_lp(const LpModel& model, const IpmOptions& options = {});

}  // namespace mstor
