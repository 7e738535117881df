#pragma once

#include <iosfwd>
#include <string>
#include <vector>

#include "mstor/config.hpp"

namespace mstor {

// Process exit codes.
inline constexpr int kExitOk = 0;
inline constexpr int kExitConfig = 1;
inline constexpr int kExitInfeasible = 2;

// Minimum number of whole history days before an MPC evaluation window.
inline constexpr std::size_t kMinHistoryDays = 4;

// Deterministic or greedy run. Writes schedule.csv, trajectory.csv,
// report.csv and plot.csv into cfg.out_dir.
int cmd_simulate(const RunConfig& cfg, std::ostream& out, std::ostream& err);

// Writes sweep.csv into cfg.out_dir.
int cmd_sweep(const RunConfig& cfg, const std::vector<std::string>& batteries,
              const std::vector<std::string>& tariffs, std::ostream& out, std::ostream& err);

// Fits the forecaster on the history days, runs the receding-horizon loop on
// the rest and compares it with the deterministic optimum. Writes
// run_log.csv, comparison.csv, report.csv and model.txt.
int cmd_mpc(const RunConfig& cfg, std::ostream& out, std::ostream& err);

// Parses flags, loads the config and dispatches on the mode.
int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace mstor
