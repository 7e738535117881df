#include "mstor/lp.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <ostream>

#include <Eigen/Dense>
#include <Eigen/Sparse>
#include <Eigen/SparseCholesky>
#include <fmt/core.h>

namespace mstor {

std::size_t LpModel::add_var(std::string name, double lower, double upper, double cost) {
    vars.push_back({std::move(name), lower, upper, cost});
    return vars.size() - 1;
}

std::size_t LpModel::add_row(std::string name, std::vector<std::pair<std::size_t, double>> coeffs, RowSense sense,
                             double rhs) {
    rows.push_back({std::move(name), std::move(coeffs), sense, rhs});
    return rows.size() - 1;
}

std::size_t LpModel::inequality_count() const {
    return static_cast<std::size_t>(
        std::count_if(rows.begin(), rows.end(), [](const auto& r) { return r.sense != RowSense::eq; }));
}

std::size_t LpModel::equality_count() const { return rows.size() - inequality_count(); }

double LpModel::objective(const std::vector<double>& x) const {
    double v = objective_offset;
    for (std::size_t j = 0; j < vars.size(); ++j) v += vars[j].cost * x[j];
    return v;
}

double LpModel::max_violation(const std::vector<double>& x) const {
    double worst = 0.0;
    for (std::size_t j = 0; j < vars.size(); ++j) {
        worst = std::max({worst, vars[j].lower - x[j], x[j] - vars[j].upper});
    }
    for (const auto& r : rows) {
        double lhs = 0.0;
        for (const auto& [j, a] : r.coeffs) lhs += a * x[j];
        switch (r.sense) {
            case RowSense::le: worst = std::max(worst, lhs - r.rhs); break;
            case RowSense::ge: worst = std::max(worst, r.rhs - lhs); break;
            case RowSense::eq: worst = std::max(worst, std::abs(lhs - r.rhs)); break;
        }
    }
    return worst;
}

const char* to_string(LpStatus s) {
    switch (s) {
        case LpStatus::optimal: return "optimal";
        case LpStatus::infeasible: return "infeasible";
        case LpStatus::unbounded: return "unbounded";
        case LpStatus::iteration_limit: return "iteration_limit";
        case LpStatus::numerical_error: return "numerical_error";
    }
    return "?";
}

namespace {

std::string lp_name(const std::string& name, const char* prefix, std::size_t idx) {
    return name.empty() ? fmt::format("{}{}", prefix, idx) : name;
}

std::string lp_number(double v) {
    if (std::isinf(v)) return v > 0 ? "+inf" : "-inf";
    return fmt::format("{:.17g}", v);
}

}  // namespace

void write_lp_format(std::ostream& out, const LpModel& model) {
    out << "\\ storage dispatch LP, constant objective term " << lp_number(model.objective_offset) << "\n";
    out << "Minimize\n obj:";
    bool any = false;
    for (std::size_t j = 0; j < model.vars.size(); ++j) {
        const double c = model.vars[j].cost;
        if (c == 0.0) continue;
        out << (c < 0 ? " - " : " + ") << lp_number(std::abs(c)) << ' ' << lp_name(model.vars[j].name, "x", j);
        any = true;
    }
    if (!any) out << " 0 " << lp_name(model.vars.empty() ? "" : model.vars[0].name, "x", 0);
    out << "\nSubject To\n";
    for (std::size_t i = 0; i < model.rows.size(); ++i) {
        const auto& r = model.rows[i];
        out << ' ' << lp_name(r.name, "r", i) << ':';
        for (const auto& [j, a] : r.coeffs) {
            out << (a < 0 ? " - " : " + ") << lp_number(std::abs(a)) << ' ' << lp_name(model.vars[j].name, "x", j);
        }
        out << (r.sense == RowSense::le ? " <= " : r.sense == RowSense::ge ? " >= " : " = ") << lp_number(r.rhs)
            << '\n';
    }
    out << "Bounds\n";
    for (std::size_t j = 0; j < model.vars.size(); ++j) {
        const auto& v = model.vars[j];
        const auto name = lp_name(v.name, "x", j);
        if (std::isinf(v.lower) && std::isinf(v.upper)) {
            out << ' ' << name << " free\n";
        } else {
            out << ' ' << lp_number(v.lower) << " <= " << name << " <= " << lp_number(v.upper) << '\n';
        }
    }
    out << "End\n";
}

namespace {

using SpMat = Eigen::SparseMatrix<double>;
using Vec = Eigen::VectorXd;

enum class ColKind { shifted, negated, split, fixed };

struct ColMap {
    ColKind kind = ColKind::shifted;
    Eigen::Index col = -1;   // primary standard-form column
    Eigen::Index col2 = -1;  // negative part for split variables
    double anchor = 0.0;     // lower (shifted), upper (negated) or value (fixed)
};

// min c'x  s.t.  A x = b,  0 <= x <= u  (u may be +inf)
struct StandardForm {
    SpMat A;
    Vec b;
    Vec c;
    Vec u;
    double offset = 0.0;
    std::vector<ColMap> map;
    bool infeasible = false;
};

StandardForm to_standard_form(const LpModel& model) {
    StandardForm sf;
    const std::size_t nv = model.vars.size();
    std::vector<double> lo(nv), up(nv);
    for (std::size_t j = 0; j < nv; ++j) {
        lo[j] = model.vars[j].lower;
        up[j] = model.vars[j].upper;
    }

    // Merge duplicate coefficients, fold singleton rows into bounds.
    std::vector<std::vector<std::pair<std::size_t, double>>> merged(model.rows.size());
    std::vector<bool> keep(model.rows.size(), true);
    for (std::size_t i = 0; i < model.rows.size(); ++i) {
        std::map<std::size_t, double> acc;
        for (const auto& [j, a] : model.rows[i].coeffs) acc[j] += a;
        for (const auto& [j, a] : acc) {
            if (a != 0.0) merged[i].emplace_back(j, a);
        }
        const auto& r = model.rows[i];
        if (merged[i].empty()) {
            keep[i] = false;
            const bool ok = (r.sense == RowSense::le && r.rhs >= -1e-12) ||
                            (r.sense == RowSense::ge && r.rhs <= 1e-12) ||
                            (r.sense == RowSense::eq && std::abs(r.rhs) <= 1e-12);
            if (!ok) sf.infeasible = true;
        } else if (merged[i].size() == 1) {
            keep[i] = false;
            const auto [j, a] = merged[i][0];
            const double bound = r.rhs / a;
            const bool upper = (r.sense == RowSense::le) == (a > 0);
            if (r.sense == RowSense::eq) {
                lo[j] = std::max(lo[j], bound);
                up[j] = std::min(up[j], bound);
            } else if (upper) {
                up[j] = std::min(up[j], bound);
            } else {
                lo[j] = std::max(lo[j], bound);
            }
        }
    }

    sf.map.resize(nv);
    Eigen::Index ncols = 0;
    std::vector<double> cost_col, upper_col;
    for (std::size_t j = 0; j < nv; ++j) {
        const double c = model.vars[j].cost;
        auto& m = sf.map[j];
        if (lo[j] > up[j] + 1e-9 * (1.0 + std::abs(lo[j]))) {
            sf.infeasible = true;
            m = {ColKind::fixed, -1, -1, lo[j]};
            continue;
        }
        if (std::isfinite(lo[j]) && up[j] - lo[j] <= 1e-12 * (1.0 + std::abs(lo[j]))) {
            m = {ColKind::fixed, -1, -1, lo[j]};
            sf.offset += c * lo[j];
        } else if (std::isfinite(lo[j])) {
            m = {ColKind::shifted, ncols++, -1, lo[j]};
            cost_col.push_back(c);
            upper_col.push_back(up[j] - lo[j]);
            sf.offset += c * lo[j];
        } else if (std::isfinite(up[j])) {
            m = {ColKind::negated, ncols++, -1, up[j]};
            cost_col.push_back(-c);
            upper_col.push_back(kInf);
            sf.offset += c * up[j];
        } else {
            m = {ColKind::split, ncols, ncols + 1, 0.0};
            ncols += 2;
            cost_col.insert(cost_col.end(), {c, -c});
            upper_col.insert(upper_col.end(), {kInf, kInf});
        }
    }

    std::vector<Eigen::Triplet<double>> trips;
    std::vector<double> rhs;
    Eigen::Index nrows = 0;
    for (std::size_t i = 0; i < model.rows.size(); ++i) {
        if (!keep[i]) continue;
        const auto& r = model.rows[i];
        double b = r.rhs;
        bool nonempty = false;
        for (const auto& [j, a] : merged[i]) {
            const auto& m = sf.map[j];
            switch (m.kind) {
                case ColKind::fixed: b -= a * m.anchor; break;
                case ColKind::shifted:
                    b -= a * m.anchor;
                    trips.emplace_back(nrows, m.col, a);
                    nonempty = true;
                    break;
                case ColKind::negated:
                    b -= a * m.anchor;
                    trips.emplace_back(nrows, m.col, -a);
                    nonempty = true;
                    break;
                case ColKind::split:
                    trips.emplace_back(nrows, m.col, a);
                    trips.emplace_back(nrows, m.col2, -a);
                    nonempty = true;
                    break;
            }
        }
        if (r.sense != RowSense::eq) {
            trips.emplace_back(nrows, ncols++, r.sense == RowSense::le ? 1.0 : -1.0);
            cost_col.push_back(0.0);
            upper_col.push_back(kInf);
            nonempty = true;
        }
        if (!nonempty) {
            if (std::abs(b) > 1e-9) sf.infeasible = true;
            // drop the slack-free empty equality
            continue;
        }
        rhs.push_back(b);
        ++nrows;
    }

    sf.A.resize(nrows, ncols);
    sf.A.setFromTriplets(trips.begin(), trips.end());
    sf.A.makeCompressed();
    sf.b = Eigen::Map<Vec>(rhs.data(), static_cast<Eigen::Index>(rhs.size()));
    sf.c = Eigen::Map<Vec>(cost_col.data(), ncols);
    sf.u = Eigen::Map<Vec>(upper_col.data(), ncols);
    return sf;
}

std::vector<double> recover(const StandardForm& sf, const Vec& x) {
    std::vector<double> out(sf.map.size());
    for (std::size_t j = 0; j < sf.map.size(); ++j) {
        const auto& m = sf.map[j];
        switch (m.kind) {
            case ColKind::fixed: out[j] = m.anchor; break;
            case ColKind::shifted: out[j] = m.anchor + x[m.col]; break;
            case ColKind::negated: out[j] = m.anchor - x[m.col]; break;
            case ColKind::split: out[j] = x[m.col] - x[m.col2]; break;
        }
    }
    return out;
}

double max_step(const Vec& v, const Vec& dv, const std::vector<Eigen::Index>& idx) {
    double alpha = 1.0;
    for (auto j : idx) {
        if (dv[j] < 0.0) alpha = std::min(alpha, -v[j] / dv[j]);
    }
    return alpha;
}

double max_step(const Vec& v, const Vec& dv) {
    double alpha = 1.0;
    for (Eigen::Index j = 0; j < v.size(); ++j) {
        if (dv[j] < 0.0) alpha = std::min(alpha, -v[j] / dv[j]);
    }
    return alpha;
}

class InteriorPoint {
public:
    InteriorPoint(const StandardForm& sf, const IpmOptions& opt) : sf_(sf), opt_(opt) {
        n_ = sf.A.cols();
        m_ = sf.A.rows();
        for (Eigen::Index j = 0; j < n_; ++j) {
            if (std::isfinite(sf.u[j])) bounded_.push_back(j);
        }
        At_ = sf.A.transpose();
    }

    LpResult run() {
        LpResult res;
        init_point();
        const double bnorm = 1.0 + sf_.b.lpNorm<Eigen::Infinity>();
        const double cnorm = 1.0 + sf_.c.lpNorm<Eigen::Infinity>();
        double unorm = 1.0;
        for (auto j : bounded_) unorm = std::max(unorm, 1.0 + std::abs(sf_.u[j]));

        bool analyzed = false;
        Eigen::SimplicialLDLT<SpMat> ldlt;
        double reg = 1e-13;

        for (int it = 0; it < opt_.max_iterations; ++it) {
            res.iterations = it;
            const Vec rb = sf_.b - sf_.A * x_;
            Vec ru = Vec::Zero(n_);
            for (auto j : bounded_) ru[j] = sf_.u[j] - x_[j] - w_[j];
            const Vec rc = sf_.c - At_ * y_ - z_ + v_;

            double comp = x_.dot(z_);
            for (auto j : bounded_) comp += w_[j] * v_[j];
            const double ncomp = static_cast<double>(n_ + static_cast<Eigen::Index>(bounded_.size()));
            const double mu = ncomp > 0 ? comp / ncomp : 0.0;

            const double pobj = sf_.c.dot(x_);
            double dobj = sf_.b.dot(y_);
            for (auto j : bounded_) dobj -= sf_.u[j] * v_[j];

            res.primal_residual = std::max(rb.lpNorm<Eigen::Infinity>() / bnorm,
                                           bounded_.empty() ? 0.0 : ru.lpNorm<Eigen::Infinity>() / unorm);
            res.dual_residual = rc.lpNorm<Eigen::Infinity>() / cnorm;
            res.gap = std::abs(pobj - dobj) / (1.0 + std::abs(pobj));
            const double merit = std::max({res.primal_residual, res.dual_residual, res.gap,
                                            comp / (1.0 + std::abs(pobj))});
            if (merit < opt_.tolerance) {
                res.status = LpStatus::optimal;
                break;
            }
            if (std::isfinite(merit) && merit < best_merit_) {
                best_merit_ = merit;
                best_x_ = x_;
                best_ = res;
            }
            if (!std::isfinite(mu) || x_.lpNorm<Eigen::Infinity>() > 1e14) {
                res.status = LpStatus::numerical_error;
                return finish(res);
            }
            if (x_.lpNorm<Eigen::Infinity>() > 1e12 && res.primal_residual < 1e-6) {
                res.status = LpStatus::unbounded;
                return finish(res);
            }

            // Scaling: theta^{-1} = z/x + v/w.
            Vec dinv = z_.cwiseQuotient(x_);
            for (auto j : bounded_) dinv[j] += v_[j] / w_[j];
            theta_ = dinv.cwiseInverse();

            SpMat M = sf_.A * theta_.asDiagonal() * At_;
            for (Eigen::Index i = 0; i < m_; ++i) M.coeffRef(i, i) += reg;
            if (!analyzed) {
                ldlt.analyzePattern(M);
                analyzed = true;
            }
            ldlt.factorize(M);
            if (ldlt.info() != Eigen::Success) {
                reg *= 100.0;
                if (reg > 1e-4) {
                    res.status = LpStatus::numerical_error;
                    return finish(res);
                }
                continue;
            }

            // Predictor.
            Vec rxz = -x_.cwiseProduct(z_);
            Vec rwv = Vec::Zero(n_);
            for (auto j : bounded_) rwv[j] = -w_[j] * v_[j];
            Direction aff = solve_direction(ldlt, rb, ru, rc, rxz, rwv);
            const double ap_aff = std::min(max_step(x_, aff.dx), max_step(w_, aff.dw, bounded_));
            const double ad_aff = std::min(max_step(z_, aff.dz), max_step(v_, aff.dv, bounded_));
            double comp_aff = (x_ + ap_aff * aff.dx).dot(z_ + ad_aff * aff.dz);
            for (auto j : bounded_) comp_aff += (w_[j] + ap_aff * aff.dw[j]) * (v_[j] + ad_aff * aff.dv[j]);
            const double mu_aff = comp_aff / ncomp;
            const double sigma = std::pow(mu_aff / mu, 3.0);

            // Corrector.
            rxz = Vec::Constant(n_, sigma * mu) - x_.cwiseProduct(z_) - aff.dx.cwiseProduct(aff.dz);
            for (auto j : bounded_) rwv[j] = sigma * mu - w_[j] * v_[j] - aff.dw[j] * aff.dv[j];
            Direction d = solve_direction(ldlt, rb, ru, rc, rxz, rwv);

            const double ap = std::min(1.0, opt_.step_fraction * std::min(max_step(x_, d.dx), max_step(w_, d.dw, bounded_)));
            const double ad = std::min(1.0, opt_.step_fraction * std::min(max_step(z_, d.dz), max_step(v_, d.dv, bounded_)));
            x_ += ap * d.dx;
            for (auto j : bounded_) w_[j] += ap * d.dw[j];
            y_ += ad * d.dy;
            z_ += ad * d.dz;
            for (auto j : bounded_) v_[j] += ad * d.dv[j];
            res.iterations = it + 1;
            if (it + 1 == opt_.max_iterations) res.status = LpStatus::iteration_limit;
        }
        return finish(res);
    }

private:
    struct Direction {
        Vec dx, dy, dz, dw, dv;
    };

    void init_point() {
        x_ = Vec::Ones(n_);
        w_ = Vec::Zero(n_);
        z_ = Vec::Ones(n_);
        v_ = Vec::Zero(n_);
        y_ = Vec::Zero(m_);
        for (auto j : bounded_) {
            x_[j] = sf_.u[j] / 2.0;
            w_[j] = sf_.u[j] - x_[j];
            v_[j] = 1.0;
        }
    }

    Direction solve_direction(const Eigen::SimplicialLDLT<SpMat>& ldlt, const Vec& rb, const Vec& ru, const Vec& rc,
                              const Vec& rxz, const Vec& rwv) const {
        // r_hat = rc - rxz/x + (rwv - v*ru)/w
        Vec rhat = rc - rxz.cwiseQuotient(x_);
        for (auto j : bounded_) rhat[j] += (rwv[j] - v_[j] * ru[j]) / w_[j];
        Direction d;
        const Vec rhs = rb + sf_.A * theta_.cwiseProduct(rhat);
        d.dy = ldlt.solve(rhs);
        for (int k = 0; k < 2; ++k) {
            const Vec res = rhs - sf_.A * theta_.cwiseProduct(At_ * d.dy);
            if (res.lpNorm<Eigen::Infinity>() <= 1e-15 * (1.0 + rhs.lpNorm<Eigen::Infinity>())) break;
            d.dy += ldlt.solve(res);
        }
        d.dx = theta_.cwiseProduct(At_ * d.dy - rhat);
        d.dz = (rxz - z_.cwiseProduct(d.dx)).cwiseQuotient(x_);
        d.dw = Vec::Zero(n_);
        d.dv = Vec::Zero(n_);
        for (auto j : bounded_) {
            d.dw[j] = ru[j] - d.dx[j];
            d.dv[j] = (rwv[j] - v_[j] * d.dw[j]) / w_[j];
        }
        return d;
    }

    // A stalled run falls back to its best iterate when that one is accurate enough.
    LpResult& finish(LpResult& res) {
        if (res.status != LpStatus::optimal && res.status != LpStatus::unbounded && best_merit_ <= kStallTolerance) {
            const int iterations = res.iterations;
            res = best_;
            res.iterations = iterations;
            res.status = LpStatus::optimal;
            x_ = best_x_;
        }
        res.x.assign(x_.data(), x_.data() + x_.size());
        return res;
    }

    static constexpr double kStallTolerance = 1e-8;

    const StandardForm& sf_;
    IpmOptions opt_;
    Eigen::Index n_ = 0;
    Eigen::Index m_ = 0;
    std::vector<Eigen::Index> bounded_;
    SpMat At_;
    Vec x_, w_, z_, v_, y_, theta_;
    double best_merit_ = kInf;
    Vec best_x_;
    LpResult best_;
};

}  // namespace

LpResult solve_lp(const LpModel& model, const IpmOptions& options) {
    const auto sf = to_standard_form(model);
    LpResult res;
    if (sf.infeasible) {
        res.status = LpStatus::infeasible;
        return res;
    }
    Vec xs;
    if (sf.A.rows() == 0) {
        // Bounds only: each column sits at whichever bound its cost prefers.
        xs = Vec::Zero(sf.A.cols());
        res.status = LpStatus::optimal;
        for (Eigen::Index j = 0; j < xs.size(); ++j) {
            if (sf.c[j] < 0.0) {
                if (!std::isfinite(sf.u[j])) {
                    res.status = LpStatus::unbounded;
                    return res;
                }
                xs[j] = sf.u[j];
            }
        }
    } else {
        InteriorPoint ipm(sf, options);
        auto r = ipm.run();
        res.status = r.status;
        res.iterations = r.iterations;
        res.primal_residual = r.primal_residual;
        res.dual_residual = r.dual_residual;
        res.gap = r.gap;
        xs = Eigen::Map<const Vec>(r.x.data(), static_cast<Eigen::Index>(r.x.size()));
    }
    res.x = recover(sf, xs);
    res.objective = model.objective(res.x);
    return res;
}

}  // namespace mstor
