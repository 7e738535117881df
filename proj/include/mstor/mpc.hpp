#pragma once

#include <cstddef>
#include <functional>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "mstor/battery.hpp"
#include "mstor/forecast.hpp"
#include "mstor/optimizer.hpp"
#include "mstor/ts_core.hpp"

namespace mstor {

// Problem fields held fixed across receding-horizon steps. Vectors and
// incident steps are indexed over the evaluation window.
struct MpcTemplate {
    std::vector<double> prices;
    BatterySpec spec;
    double p_set = kInf;
    std::optional<BackupPolicy> backup;
};

struct MpcOptions {
    std::size_t window = 0;         // 0: shrinking horizon to the end of the window
    bool rolling_mean = true;       // refresh the mean profile from the last D days each step
    std::size_t lookback_days = 0;  // D; 0 uses every history day
    bool keep_forecasts = false;
    IpmOptions ipm;
};

enum MpcFlag : unsigned {
    kFlagNone = 0,
    kFlagBackupDropped = 1u << 0,
    kFlagPeakRelaxed = 1u << 1,
    kFlagContractViolation = 1u << 2,
};

std::string flag_string(unsigned flags);

struct MpcStepLog {
    std::size_t step = 0;
    double forecast_cost = 0.0;  // objective of the sub-problem on the forecast
    double s = 0.0;
    double z = 0.0;
    double b = 0.0;
    double theta = 0.0;
    unsigned flags = kFlagNone;
    std::string note;
};

struct MpcRun {
    StorageSchedule committed;
    std::vector<std::vector<double>> forecasts;
    std::vector<MpcStepLog> log;
    double energy_cost = 0.0;
    double backup_reward = 0.0;
    double objective = 0.0;
    double committed_peak_kw = 0.0;
    std::size_t contract_violations = 0;
    std::size_t backup_drops = 0;
    std::size_t peak_relaxations = 0;
};

// Returns the forecast of z for absolute steps [origin, end) given the
// observed absolute series (history followed by realised evaluation steps).
using Forecaster =
    std::function<std::vector<double>(const std::vector<double>& observed, std::size_t origin, std::size_t end)>;

Forecaster arma_forecaster(ForecastModel model, std::size_t lookback_days, bool rolling_mean);
// Replays the true net load: history followed by the evaluation window.
Forecaster perfect_forecaster(std::vector<double> full_series);

// Receding-horizon loop over `eval`; `history_z` holds whole days of net load
// immediately preceding the window.
MpcRun run_mpc(const Scenario& eval, const std::vector<double>& history_z, const Forecaster& forecaster,
               const MpcTemplate& tpl, double b0, const MpcOptions& options = {});

MpcRun run_mpc(const Scenario& eval, const std::vector<double>& history_z, const ForecastModel& model,
               const MpcTemplate& tpl, double b0, const MpcOptions& options = {});

void write_run_log(std::ostream& out, const TimeGrid& grid, const MpcRun& run);

}  // namespace mstor
