#include "mstor/ts_core.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>
#include <system_error>

#include <fmt/core.h>

#include "mstor/errors.hpp"

namespace mstor {

namespace {

int parse_int_field(std::string_view text, std::size_t pos, std::size_t len, std::string_view whole) {
    if (pos + len > text.size()) {
        throw ParseError(fmt::format("truncated timestamp '{}'", whole));
    }
    int v = 0;
    auto [ptr, ec] = std::from_chars(text.data() + pos, text.data() + pos + len, v);
    if (ec != std::errc{} || ptr != text.data() + pos + len) {
        throw ParseError(fmt::format("malformed timestamp '{}'", whole));
    }
    return v;
}

std::string_view trim(std::string_view s) {
    while (!s.empty() && (s.front() == ' ' || s.front() == '\t' || s.front() == '\r' || s.front() == '\xEF' ||
                          s.front() == '\xBB' || s.front() == '\xBF')) {
        s.remove_prefix(1);
    }
    while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r' || s.back() == '\n')) {
        s.remove_suffix(1);
    }
    return s;
}

}  // namespace

Timestamp parse_timestamp(std::string_view text) {
    using namespace std::chrono;
    const auto t = trim(text);
    // YYYY-MM-DDTHH:MM[:SS][Z]
    if (t.size() < 16 || t[4] != '-' || t[7] != '-' || (t[10] != 'T' && t[10] != ' ') || t[13] != ':') {
        throw ParseError(fmt::format("malformed timestamp '{}'", text));
    }
    const int y = parse_int_field(t, 0, 4, text);
    const int mo = parse_int_field(t, 5, 2, text);
    const int d = parse_int_field(t, 8, 2, text);
    const int hh = parse_int_field(t, 11, 2, text);
    const int mm = parse_int_field(t, 14, 2, text);
    int ss = 0;
    std::size_t end = 16;
    if (t.size() >= 19 && t[16] == ':') {
        ss = parse_int_field(t, 17, 2, text);
        end = 19;
    }
    if (end < t.size() && !(end + 1 == t.size() && t[end] == 'Z')) {
        throw ParseError(fmt::format("malformed timestamp '{}'", text));
    }
    const year_month_day ymd{year{y}, month{static_cast<unsigned>(mo)}, day{static_cast<unsigned>(d)}};
    if (!ymd.ok() || hh > 23 || mm > 59 || ss > 59) {
        throw ParseError(fmt::format("invalid calendar timestamp '{}'", text));
    }
    return sys_days{ymd} + hours{hh} + minutes{mm} + seconds{ss};
}

std::string format_timestamp(Timestamp t) {
    using namespace std::chrono;
    const auto days = floor<std::chrono::days>(t);
    const year_month_day ymd{days};
    const hh_mm_ss tod{t - days};
    return fmt::format("{:04}-{:02}-{:02}T{:02}:{:02}:{:02}", static_cast<int>(ymd.year()),
                       static_cast<unsigned>(ymd.month()), static_cast<unsigned>(ymd.day()),
                       tod.hours().count(), tod.minutes().count(), tod.seconds().count());
}

DayType day_type(Timestamp t) {
    using namespace std::chrono;
    const weekday wd{floor<days>(t)};
    if (wd == Saturday) return DayType::saturday;
    if (wd == Sunday) return DayType::sunday;
    return DayType::workday;
}

double hour_of_day(Timestamp t) {
    using namespace std::chrono;
    const auto since_midnight = t - floor<days>(t);
    return static_cast<double>(since_midnight.count()) / 3600.0;
}

TimeGrid::TimeGrid(double step_hours, std::size_t steps, Timestamp start_time)
    : h(step_hours), n(steps), start(start_time) {
    if (!(h > 0.0) || !std::isfinite(h)) {
        throw GridError(fmt::format("step duration must be positive, got {}", h));
    }
    if (n < 1) {
        throw GridError("time grid needs at least one step");
    }
}

std::chrono::seconds TimeGrid::step() const {
    return std::chrono::seconds{static_cast<long long>(std::llround(h * 3600.0))};
}

Timestamp TimeGrid::time_at(std::size_t i) const {
    return start + step() * static_cast<long long>(i);
}

std::size_t TimeGrid::steps_per_day() const {
    const double per_day = 24.0 / h;
    const auto rounded = std::llround(per_day);
    if (rounded < 1 || std::abs(per_day - static_cast<double>(rounded)) > 1e-9) {
        throw GridError(fmt::format("step of {} h does not divide a day", h));
    }
    return static_cast<std::size_t>(rounded);
}

Scenario::Scenario(TimeGrid g, std::vector<double> d, std::vector<double> r)
    : grid(g), demand(std::move(d)), generation(std::move(r)) {
    if (demand.size() != generation.size()) {
        throw AlignmentError(fmt::format("demand has {} steps but generation has {}", demand.size(),
                                         generation.size()));
    }
    if (demand.size() != grid.n) {
        throw AlignmentError(fmt::format("series length {} does not match grid N={}", demand.size(), grid.n));
    }
    for (std::size_t i = 0; i < demand.size(); ++i) {
        if (!std::isfinite(demand[i]) || !std::isfinite(generation[i])) {
            throw ValidationError(fmt::format("non-finite value at step {}", i));
        }
        if (demand[i] < 0.0 || generation[i] < 0.0) {
            throw ValidationError(fmt::format("negative energy at step {}", i));
        }
    }
}

Scenario Scenario::slice(std::size_t first, std::size_t count) const {
    if (count == 0 || first + count > size()) {
        throw ValidationError(fmt::format("slice [{}, {}) outside horizon of {} steps", first, first + count, size()));
    }
    TimeGrid g{grid.h, count, grid.time_at(first)};
    return Scenario{g,
                    std::vector<double>(demand.begin() + static_cast<std::ptrdiff_t>(first),
                                        demand.begin() + static_cast<std::ptrdiff_t>(first + count)),
                    std::vector<double>(generation.begin() + static_cast<std::ptrdiff_t>(first),
                                        generation.begin() + static_cast<std::ptrdiff_t>(first + count))};
}

NetLoadSeries net_load(const Scenario& s) {
    NetLoadSeries out;
    out.z.resize(s.size());
    for (std::size_t i = 0; i < s.size(); ++i) {
        out.z[i] = s.demand[i] - s.generation[i];
    }
    return out;
}

std::string format_number(double v) {
    char buf[64];
    auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), v);
    if (ec != std::errc{}) {
        throw Error("number formatting failed");
    }
    return std::string(buf, ptr);
}

double parse_number(std::string_view text, const std::string& context) {
    auto t = trim(text);
    if (!t.empty() && t.front() == '+') t.remove_prefix(1);
    double v = 0.0;
    auto [ptr, ec] = std::from_chars(t.data(), t.data() + t.size(), v);
    if (t.empty() || ec != std::errc{} || ptr != t.data() + t.size()) {
        throw ParseError(fmt::format("{}: cannot parse '{}' as a number", context, text));
    }
    if (!std::isfinite(v)) {
        throw ValidationError(fmt::format("{}: non-finite value '{}'", context, text));
    }
    return v;
}

std::vector<std::string> split_csv_line(std::string_view line) {
    std::vector<std::string> out;
    std::string cur;
    bool quoted = false;
    for (char c : line) {
        if (c == '"') {
            quoted = !quoted;
        } else if (c == ',' && !quoted) {
            out.emplace_back(trim(cur));
            cur.clear();
        } else if (c != '\r' && c != '\n') {
            cur.push_back(c);
        }
    }
    out.emplace_back(trim(cur));
    return out;
}

RawSeries read_series_csv(std::istream& in, const std::string& source) {
    RawSeries out;
    std::string line;
    std::size_t lineno = 0;
    bool header_seen = false;
    while (std::getline(in, line)) {
        ++lineno;
        if (trim(line).empty()) continue;
        const auto fields = split_csv_line(line);
        if (!header_seen) {
            header_seen = true;
            if (fields.size() == 2 && fields[0] == "timestamp") continue;
            throw ParseError(fmt::format("{}: expected header 'timestamp,kwh'", source));
        }
        if (fields.size() != 2) {
            throw ParseError(fmt::format("{}:{}: expected 2 fields, got {}", source, lineno, fields.size()));
        }
        out.time.push_back(parse_timestamp(fields[0]));
        out.value.push_back(parse_number(fields[1], fmt::format("{}:{}", source, lineno)));
    }
    return out;
}

RawSeries read_series_csv(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) {
        throw ConfigError(fmt::format("cannot open '{}'", path.string()));
    }
    return read_series_csv(in, path.string());
}

void write_series_csv(std::ostream& out, const TimeGrid& grid, const std::vector<double>& values) {
    out << "timestamp,kwh\n";
    for (std::size_t i = 0; i < values.size(); ++i) {
        out << format_timestamp(grid.time_at(i)) << ',' << format_number(values[i]) << '\n';
    }
}

void write_series_csv(const std::filesystem::path& path, const TimeGrid& grid, const std::vector<double>& values) {
    std::ostringstream os;
    write_series_csv(os, grid, values);
    write_file_atomic(path, os.str());
}

TimeGrid grid_from_series(const RawSeries& s, double h, const std::string& source) {
    if (s.time.empty()) {
        throw GridError(fmt::format("{}: no data rows", source));
    }
    TimeGrid grid{h, s.time.size(), s.time.front()};
    const auto step = grid.step();
    if (std::abs(static_cast<double>(step.count()) - h * 3600.0) > 1e-6) {
        throw GridError(fmt::format("{}: step of {} h is not a whole number of seconds", source, h));
    }
    for (std::size_t i = 1; i < s.time.size(); ++i) {
        if (s.time[i] - s.time[i - 1] != step) {
            throw GridError(fmt::format("{}: row {} breaks uniform {}-second spacing", source, i + 1, step.count()));
        }
    }
    return grid;
}

Scenario make_scenario(const RawSeries& demand, const RawSeries& generation, double h) {
    if (demand.time.size() != generation.time.size()) {
        throw AlignmentError(fmt::format("demand has {} rows but generation has {}", demand.time.size(),
                                         generation.time.size()));
    }
    const auto grid = grid_from_series(demand, h, "demand");
    grid_from_series(generation, h, "generation");
    if (!generation.time.empty() && generation.time.front() != demand.time.front()) {
        throw AlignmentError("demand and generation start at different timestamps");
    }
    return Scenario{grid, demand.value, generation.value};
}

Scenario load_scenario(const std::filesystem::path& demand_path, const std::filesystem::path& generation_path,
                       double h) {
    return make_scenario(read_series_csv(demand_path), read_series_csv(generation_path), h);
}

void write_long_csv(std::ostream& out, const std::vector<LongRecord>& rows) {
    out << "series,timestamp,value\n";
    for (const auto& r : rows) {
        out << r.series << ',' << format_timestamp(r.time) << ',' << format_number(r.value) << '\n';
    }
}

std::vector<LongRecord> read_long_csv(std::istream& in) {
    std::vector<LongRecord> out;
    std::string line;
    bool header = true;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (trim(line).empty()) continue;
        const auto f = split_csv_line(line);
        if (header) {
            header = false;
            if (f.size() != 3 || f[0] != "series") throw ParseError("expected header 'series,timestamp,value'");
            continue;
        }
        if (f.size() != 3) throw ParseError(fmt::format("line {}: expected 3 fields", lineno));
        out.push_back({f[0], parse_timestamp(f[1]), parse_number(f[2], fmt::format("line {}", lineno))});
    }
    return out;
}

std::size_t CsvTable::column(std::string_view name) const {
    for (std::size_t i = 0; i < header.size(); ++i) {
        if (header[i] == name) return i;
    }
    throw LookupError(fmt::format("no column '{}'", name));
}

CsvTable read_table_csv(std::istream& in) {
    CsvTable t;
    std::string line;
    while (std::getline(in, line)) {
        if (trim(line).empty()) continue;
        auto f = split_csv_line(line);
        if (t.header.empty()) {
            t.header = std::move(f);
            continue;
        }
        if (f.size() != t.header.size()) {
            throw ParseError(fmt::format("row has {} fields, header has {}", f.size(), t.header.size()));
        }
        t.rows.push_back(std::move(f));
    }
    return t;
}

CsvTable read_table_csv(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError(fmt::format("cannot open '{}'", path.string()));
    return read_table_csv(in);
}

void write_table_csv(std::ostream& out, const CsvTable& table) {
    auto emit = [&out](const std::vector<std::string>& row) {
        for (std::size_t i = 0; i < row.size(); ++i) {
            if (i) out << ',';
            out << row[i];
        }
        out << '\n';
    };
    emit(table.header);
    for (const auto& r : table.rows) emit(r);
}

void write_file_atomic(const std::filesystem::path& path, const std::string& contents) {
    auto tmp = path;
    tmp += ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) throw ConfigError(fmt::format("cannot write '{}'", tmp.string()));
        out << contents;
        if (!out) throw ConfigError(fmt::format("write failed for '{}'", tmp.string()));
    }
    std::filesystem::rename(tmp, path);
}

}  // namespace mstor
