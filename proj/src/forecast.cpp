#include "mstor/forecast.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>

#include <Eigen/Dense>
#include <omp.h>
#include <fmt/core.h>

#include "mstor/errors.hpp"
#include "mstor/ts_core.hpp"

namespace mstor {

HistoryBuffer::HistoryBuffer(std::size_t steps_per_day, std::vector<double> values)
    : steps_per_day_(steps_per_day), values_(std::move(values)) {
    if (steps_per_day_ == 0) throw ValidationError("history needs at least one step per day");
    if (values_.empty() || values_.size() % steps_per_day_ != 0) {
        throw ValidationError(
            fmt::format("history of {} values is not a whole number of {}-step days", values_.size(), steps_per_day_));
    }
    for (double v : values_) {
        if (!std::isfinite(v)) throw ValidationError("history contains a non-finite value");
    }
}

HistoryBuffer HistoryBuffer::from_days(const std::vector<std::vector<double>>& days) {
    if (days.empty()) throw ValidationError("history needs at least one day");
    std::vector<double> flat;
    for (const auto& d : days) {
        if (d.size() != days.front().size()) throw ValidationError("history days differ in length");
        flat.insert(flat.end(), d.begin(), d.end());
    }
    return HistoryBuffer(days.front().size(), std::move(flat));
}

void HistoryBuffer::append_day(const std::vector<double>& day) {
    if (day.size() != steps_per_day_) {
        throw ValidationError(fmt::format("day of {} values, expected {}", day.size(), steps_per_day_));
    }
    values_.insert(values_.end(), day.begin(), day.end());
}

std::vector<double> mean_profile(const HistoryBuffer& hist) {
    const auto n = hist.steps_per_day();
    std::vector<double> out(n, 0.0);
    for (std::size_t d = 0; d < hist.days(); ++d) {
        for (std::size_t s = 0; s < n; ++s) out[s] += hist.at(d, s);
    }
    for (auto& v : out) v /= static_cast<double>(hist.days());
    return out;
}

std::vector<double> rolling_mean_profile(const std::vector<double>& z, std::size_t origin, std::size_t steps_per_day,
                                         std::size_t lookback_days) {
    if (lookback_days == 0) throw ValidationError("lookback must cover at least one day");
    if (origin > z.size()) throw ValidationError("origin beyond observed data");
    std::vector<double> out(steps_per_day, 0.0);
    for (std::size_t s = 0; s < steps_per_day; ++s) {
        // most recent occurrence of slot s strictly before origin
        if (origin <= s) throw ValidationError(fmt::format("no observation of slot {} before step {}", s, origin));
        std::size_t last = origin - 1 - ((origin - 1 + steps_per_day - s) % steps_per_day);
        std::size_t count = 0;
        double sum = 0.0;
        while (count < lookback_days) {
            sum += z[last];
            ++count;
            if (last < steps_per_day) break;
            last -= steps_per_day;
        }
        out[s] = sum / static_cast<double>(count);
    }
    return out;
}

namespace {

inline void regressors(const double* x, std::size_t n_day, std::size_t k, double* r) {
    r[0] = x[k - 1];
    r[1] = x[k - 2];
    r[2] = x[k - 3];
    r[3] = x[k - n_day];
    r[4] = x[k - 2 * n_day];
    r[5] = x[k - 3 * n_day];
}

void check_range(const std::vector<double>& x, std::size_t n_day, std::size_t first, std::size_t last) {
    if (first < 3 || first < 3 * n_day || last > x.size()) {
        throw ValidationError(fmt::format("regression rows [{}, {}) need three days of lags", first, last));
    }
}

// Adds rows [first, last) into ne.
void accumulate_range(const double* x, std::size_t n_day, std::size_t first, std::size_t last, NormalEquations& ne) {
    double g[36] = {};
    double c[6] = {};
    double q = 0.0;
    double r[6];
    for (std::size_t k = first; k < last; ++k) {
        regressors(x, n_day, k, r);
        const double y = x[k];
        for (int a = 0; a < 6; ++a) {
            for (int b = 0; b < 6; ++b) g[a * 6 + b] += r[a] * r[b];
            c[a] += r[a] * y;
        }
        q += y * y;
    }
    for (int i = 0; i < 36; ++i) ne.gram[i] += g[i];
    for (int i = 0; i < 6; ++i) ne.rhs[i] += c[i];
    ne.yy += q;
}

}  // namespace

NormalEquations accumulate_normal_equations_serial(const std::vector<double>& x, std::size_t steps_per_day,
                                                   std::size_t first, std::size_t last) {
    check_range(x, steps_per_day, first, last);
    NormalEquations ne;
    accumulate_range(x.data(), steps_per_day, first, last, ne);
    ne.samples = last > first ? last - first : 0;
    return ne;
}

NormalEquations accumulate_normal_equations(const std::vector<double>& x, std::size_t steps_per_day,
                                            std::size_t first, std::size_t last) {
    check_range(x, steps_per_day, first, last);
    NormalEquations ne;
    const std::size_t rows = last > first ? last - first : 0;
#pragma omp parallel
    {
        const auto threads = static_cast<std::size_t>(omp_get_num_threads());
        const auto id = static_cast<std::size_t>(omp_get_thread_num());
        NormalEquations part;
        accumulate_range(x.data(), steps_per_day, first + rows * id / threads, first + rows * (id + 1) / threads,
                         part);
#pragma omp critical(mstor_normal_equations)
        {
            for (int i = 0; i < 36; ++i) ne.gram[i] += part.gram[i];
            for (int i = 0; i < 6; ++i) ne.rhs[i] += part.rhs[i];
            ne.yy += part.yy;
        }
    }
    ne.samples = rows;
    return ne;
}

ForecastModel fit_arma(const HistoryBuffer& hist, const FitOptions& options, FitReport* report) {
    if (hist.days() < 4) {
        throw ValidationError(fmt::format("ARMA fit needs at least 4 days of history, got {}", hist.days()));
    }
    const auto n_day = hist.steps_per_day();
    ForecastModel model;
    model.mean_profile = mean_profile(hist);

    std::vector<double> x(hist.values().size());
    for (std::size_t j = 0; j < x.size(); ++j) x[j] = hist.values()[j] - model.mean_profile[j % n_day];

    const std::size_t first = std::max<std::size_t>(3 * n_day, 3);
    const auto ne = options.parallel ? accumulate_normal_equations(x, n_day, first, x.size())
                                     : accumulate_normal_equations_serial(x, n_day, first, x.size());

    Eigen::Matrix<double, 6, 6> g;
    Eigen::Matrix<double, 6, 1> rhs;
    for (int a = 0; a < 6; ++a) {
        for (int b = 0; b < 6; ++b) g(a, b) = ne.gram[a * 6 + b];
        rhs(a) = ne.rhs[a];
    }
    g.diagonal().array() += options.ridge;

    Eigen::CompleteOrthogonalDecomposition<Eigen::Matrix<double, 6, 6>> cod;
    cod.setThreshold(1e-10);
    cod.compute(g);
    // Residuals at rounding level carry no signal.
    double scale = 0.0;
    for (double v : hist.values()) scale = std::max(scale, std::abs(v));
    const double noise = 64.0 * std::numeric_limits<double>::epsilon() * scale;
    const bool empty = g.cwiseAbs().maxCoeff() <= static_cast<double>(ne.samples) * noise * noise;
    Eigen::Matrix<double, 6, 1> coef = Eigen::Matrix<double, 6, 1>::Zero();
    if (!empty) coef = cod.solve(rhs);
    const int rank = empty ? 0 : static_cast<int>(cod.rank());

    for (int a = 0; a < 3; ++a) {
        model.alpha[a] = coef(a);
        model.beta[a] = coef(a + 3);
    }

    if (report) {
        *report = FitReport{};
        report->samples = ne.samples;
        report->rank = rank;
        report->rank_deficient = rank < 6;
        const double sse = ne.yy - 2.0 * coef.dot(rhs) + coef.dot((g * coef));
        report->residual_rms = ne.samples ? std::sqrt(std::max(0.0, sse) / static_cast<double>(ne.samples)) : 0.0;
        if (report->rank_deficient) {
            report->warning =
                fmt::format("ARMA design matrix has rank {} < 6; using the minimum-norm least-squares fit", rank);
        } else if (hist.days() == 4) {
            // Residuals of one slot over 4 days sum to zero, so the day lags reproduce day 4 exactly.
            report->warning = "4 history days: the seasonal lags fit the last day exactly; more days give a usable model";
        }
    }
    return model;
}

std::vector<double> forecast_horizon(const ForecastModel& model, const std::vector<double>& observed,
                                     std::size_t origin, std::size_t end) {
    const auto n_day = model.steps_per_day();
    if (n_day == 0) throw ValidationError("forecast model has an empty mean profile");
    if (origin > observed.size()) throw ValidationError("forecast origin beyond observed data");
    if (end < origin) throw ValidationError("forecast end before origin");
    if (origin < 3 * n_day || origin < 3) {
        throw ValidationError(fmt::format("forecast at step {} needs three days of residual history", origin));
    }
    // residuals: observed before origin, forecast after
    std::vector<double> x(end);
    for (std::size_t j = 0; j < origin; ++j) x[j] = observed[j] - model.mean_profile[j % n_day];
    std::vector<double> out;
    out.reserve(end - origin);
    for (std::size_t k = origin; k < end; ++k) {
        double v = 0.0;
        for (std::size_t a = 0; a < 3; ++a) v += model.alpha[a] * x[k - 1 - a];
        for (std::size_t m = 0; m < 3; ++m) v += model.beta[m] * x[k - (m + 1) * n_day];
        x[k] = v;
        out.push_back(model.mean_profile[k % n_day] + v);
    }
    return out;
}

void save_model(std::ostream& out, const ForecastModel& m) {
    out << "alpha";
    for (double a : m.alpha) out << ' ' << format_number(a);
    out << "\nbeta";
    for (double b : m.beta) out << ' ' << format_number(b);
    out << "\nmean_profile " << m.mean_profile.size();
    for (double v : m.mean_profile) out << ' ' << format_number(v);
    out << '\n';
}

ForecastModel load_model(std::istream& in) {
    ForecastModel m;
    std::string tag;
    auto read_word = [&in](const char* what) {
        std::string w;
        if (!(in >> w)) throw ParseError(fmt::format("model file: missing {}", what));
        return w;
    };
    if (read_word("alpha tag") != "alpha") throw ParseError("model file: expected 'alpha'");
    for (auto& a : m.alpha) a = parse_number(read_word("alpha"), "model alpha");
    if (read_word("beta tag") != "beta") throw ParseError("model file: expected 'beta'");
    for (auto& b : m.beta) b = parse_number(read_word("beta"), "model beta");
    if (read_word("mean_profile tag") != "mean_profile") throw ParseError("model file: expected 'mean_profile'");
    const auto n = static_cast<std::size_t>(parse_number(read_word("profile length"), "profile length"));
    m.mean_profile.resize(n);
    for (auto& v : m.mean_profile) v = parse_number(read_word("profile value"), "mean profile");
    return m;
}

void save_model(const std::filesystem::path& path, const ForecastModel& m) {
    std::ostringstream os;
    save_model(os, m);
    write_file_atomic(path, os.str());
}

ForecastModel load_model(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError(fmt::format("cannot open model file '{}'", path.string()));
    return load_model(in);
}

}  // namespace mstor
