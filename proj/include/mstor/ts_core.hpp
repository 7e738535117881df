#pragma once

#include <chrono>
#include <cstddef>
#include <filesystem>
#include <iosfwd>
#include <string>
#include <string_view>
#include <vector>

namespace mstor {

using Timestamp = std::chrono::sys_seconds;

enum class DayType { workday, saturday, sunday };

// Accepts "YYYY-MM-DDTHH:MM[:SS][Z]" (a space may replace the 'T').
Timestamp parse_timestamp(std::string_view text);
std::string format_timestamp(Timestamp t);
DayType day_type(Timestamp t);
// Hours since local midnight, in [0, 24).
double hour_of_day(Timestamp t);

// Uniform discretisation of the horizon: N steps of h hours starting at `start`.
struct TimeGrid {
    double h = 1.0;
    std::size_t n = 1;
    Timestamp start{};

    TimeGrid() = default;
    TimeGrid(double step_hours, std::size_t steps, Timestamp start_time = {});

    double duration_hours() const { return h * static_cast<double>(n); }
    Timestamp time_at(std::size_t i) const;
    std::chrono::seconds step() const;
    // Number of steps per 24 h; throws GridError if h does not divide a day.
    std::size_t steps_per_day() const;
};

// Per-step demand d_i and generation r_i, both kWh per step.
struct Scenario {
    TimeGrid grid;
    std::vector<double> demand;
    std::vector<double> generation;

    Scenario() = default;
    Scenario(TimeGrid g, std::vector<double> d, std::vector<double> r);

    std::size_t size() const { return demand.size(); }
    // Steps [first, first + count) as a standalone scenario.
    Scenario slice(std::size_t first, std::size_t count) const;
};

// z_i = d_i - r_i, kWh per step.
struct NetLoadSeries {
    std::vector<double> z;

    std::size_t size() const { return z.size(); }
    double operator[](std::size_t i) const { return z[i]; }
};

NetLoadSeries net_load(const Scenario& s);

// One `timestamp,kwh` file.
struct RawSeries {
    std::vector<Timestamp> time;
    std::vector<double> value;
};

RawSeries read_series_csv(std::istream& in, const std::string& source = "<stream>");
RawSeries read_series_csv(const std::filesystem::path& path);
void write_series_csv(std::ostream& out, const TimeGrid& grid, const std::vector<double>& values);
void write_series_csv(const std::filesystem::path& path, const TimeGrid& grid,
                      const std::vector<double>& values);

// Builds a grid from a parsed series, checking uniform spacing h.
TimeGrid grid_from_series(const RawSeries& s, double h, const std::string& source = "<stream>");

Scenario load_scenario(const std::filesystem::path& demand_path,
                       const std::filesystem::path& generation_path, double h);
Scenario make_scenario(const RawSeries& demand, const RawSeries& generation, double h);

// Shortest decimal text that parses back to the same double.
std::string format_number(double v);
double parse_number(std::string_view text, const std::string& context);

// Long-format plot data: `series,timestamp,value`.
struct LongRecord {
    std::string series;
    Timestamp time;
    double value = 0.0;
};

void write_long_csv(std::ostream& out, const std::vector<LongRecord>& rows);
std::vector<LongRecord> read_long_csv(std::istream& in);

// Generic header + rows table for report files.
struct CsvTable {
    std::vector<std::string> header;
    std::vector<std::vector<std::string>> rows;

    std::size_t column(std::string_view name) const;
};

CsvTable read_table_csv(std::istream& in);
CsvTable read_table_csv(const std::filesystem::path& path);
void write_table_csv(std::ostream& out, const CsvTable& table);

std::vector<std::string> split_csv_line(std::string_view line);

// Writes to a sibling temp file and renames over `path`.
void write_file_atomic(const std::filesystem::path& path, const std::string& contents);

}  // namespace mstor
