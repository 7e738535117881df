#pragma once

#include <array>
#include <cstddef>
#include <filesystem>
#include <iosfwd>
#include <string>
#include <vector>

namespace mstor {

// D whole days of past net load, aligned by time of day (row-major, day by day).
class HistoryBuffer {
public:
    HistoryBuffer(std::size_t steps_per_day, std::vector<double> values);
    static HistoryBuffer from_days(const std::vector<std::vector<double>>& days);

    std::size_t steps_per_day() const { return steps_per_day_; }
    std::size_t days() const { return values_.size() / steps_per_day_; }
    const std::vector<double>& values() const { return values_; }
    double at(std::size_t day, std::size_t slot) const { return values_[day * steps_per_day_ + slot]; }

    // Appends one complete day.
    void append_day(const std::vector<double>& day);

private:
    std::size_t steps_per_day_;
    std::vector<double> values_;
};

struct ForecastModel {
    std::array<double, 3> alpha{};  // step lags 1..3
    std::array<double, 3> beta{};   // same slot, day lags 1..3
    std::vector<double> mean_profile;

    std::size_t steps_per_day() const { return mean_profile.size(); }
};

std::vector<double> mean_profile(const HistoryBuffer& hist);

// Per-slot mean over the last `lookback_days` observed occurrences before
// `origin` in a series that starts at slot 0.
std::vector<double> rolling_mean_profile(const std::vector<double>& z, std::size_t origin, std::size_t steps_per_day,
                                         std::size_t lookback_days);

// Gram matrix and right-hand side of the residual regression.
struct NormalEquations {
    std::array<double, 36> gram{};
    std::array<double, 6> rhs{};
    double yy = 0.0;
    std::size_t samples = 0;
};

// Regression rows are k in [first, last) of the residual series x; each uses
// lags k-1, k-2, k-3, k-N, k-2N, k-3N.
NormalEquations accumulate_normal_equations_serial(const std::vector<double>& x, std::size_t steps_per_day,
                                                   std::size_t first, std::size_t last);
NormalEquations accumulate_normal_equations(const std::vector<double>& x, std::size_t steps_per_day,
                                            std::size_t first, std::size_t last);

struct FitOptions {
    double ridge = 0.0;
    bool parallel = true;
};

struct FitReport {
    std::size_t samples = 0;
    int rank = 0;
    bool rank_deficient = false;
    double residual_rms = 0.0;
    std::string warning;
};

ForecastModel fit_arma(const HistoryBuffer& hist, const FitOptions& options = {}, FitReport* report = nullptr);

// Forecast of z for absolute steps [origin, end) of a series whose index 0 is
// slot 0 of a day. Residuals are taken against model.mean_profile; observed
// values are used for every lag before `origin`, forecasts beyond it.
std::vector<double> forecast_horizon(const ForecastModel& model, const std::vector<double>& observed,
                                     std::size_t origin, std::size_t end);

void save_model(std::ostream& out, const ForecastModel& m);
ForecastModel load_model(std::istream& in);
void save_model(const std::filesystem::path& path, const ForecastModel& m);
ForecastModel load_model(const std::filesystem::path& path);

}  // namespace mstor
