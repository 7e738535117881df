#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "mstor/battery.hpp"
#include "mstor/optimizer.hpp"
#include "mstor/tariff.hpp"

namespace mstor {

enum class RunMode { deterministic, greedy, mpc, sweep };

RunMode parse_mode(std::string_view s);
const char* to_string(RunMode m);

struct ScenarioConfig {
    std::filesystem::path demand;
    std::filesystem::path generation;
    double h = 0.25;
    bool synthetic = false;
    std::size_t synthetic_days = 7;
    std::uint64_t seed = 1;
};

struct BatteryConfig {
    BatterySpec spec;
    double b0 = 0.0;
    std::optional<std::string> c_rating;
};

struct TariffConfig {
    std::optional<std::filesystem::path> file;
    RateType rate_type = RateType::single;
    // "auto" recommends the smallest holdable level; empty means no cap.
    std::optional<double> ppc_kva;
    bool ppc_auto = true;
    RateType ppc_rate_type = RateType::single;
};

struct BackupConfig {
    std::optional<std::filesystem::path> outage_prob;
    double lambda = 0.0;
    std::vector<Incident> incidents;
    std::size_t window = 1;
};

struct MpcConfig {
    std::size_t history_days = 0;
    std::size_t lookback_days = 0;
    std::size_t window = 0;
    bool rolling_mean = true;
    bool perfect_forecast = false;
    double ridge = 0.0;
    std::optional<std::filesystem::path> model;
};

struct SweepConfig {
    std::vector<std::string> batteries;
    std::vector<std::string> tariffs;  // "single" / "dual" / "triple" or tariff file paths
    bool baselines = true;
    double days = 0.0;
};

struct RunConfig {
    RunMode mode = RunMode::deterministic;
    std::filesystem::path out_dir = "out";
    std::optional<std::filesystem::path> dump_lp;
    ScenarioConfig scenario;
    BatteryConfig battery;
    TariffConfig tariff;
    BackupConfig backup;
    MpcConfig mpc;
    SweepConfig sweep;
    int jobs = 0;

    // Mode-specific required blocks and file existence.
    void validate() const;
};

// Relative paths inside the file are resolved against `base_dir`.
RunConfig parse_run_config(std::istream& in, const std::filesystem::path& base_dir = ".");
RunConfig load_run_config(const std::filesystem::path& path);

// "12:1.6, 40:1.6" -> incidents at steps 12 and 40 with b_set 1.6 kWh.
std::vector<Incident> parse_incidents(const std::string& text);

}  // namespace mstor
