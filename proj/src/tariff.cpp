#include "mstor/tariff.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numeric>
#include <ostream>

#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>
#include <fmt/core.h>

#include "mstor/errors.hpp"

namespace mstor {

namespace pt = boost::property_tree;

RateType parse_rate_type(std::string_view s) {
    if (s == "single") return RateType::single;
    if (s == "dual") return RateType::dual;
    if (s == "triple") return RateType::triple;
    throw ConfigError(fmt::format("unknown rate type '{}'", s));
}

std::string_view to_string(RateType r) {
    switch (r) {
        case RateType::single: return "single";
        case RateType::dual: return "dual";
        case RateType::triple: return "triple";
    }
    return "?";
}

Period parse_period(std::string_view s) {
    if (s == "peak") return Period::peak;
    if (s == "half_peak") return Period::half_peak;
    if (s == "off_peak") return Period::off_peak;
    if (s == "flat") return Period::flat;
    throw ConfigError(fmt::format("unknown period label '{}'", s));
}

std::string_view to_string(Period p) {
    switch (p) {
        case Period::peak: return "peak";
        case Period::half_peak: return "half_peak";
        case Period::off_peak: return "off_peak";
        case Period::flat: return "flat";
    }
    return "?";
}

namespace {

constexpr std::array<std::string_view, 3> kDayNames{"workday", "saturday", "sunday"};

void validate_partition(const std::vector<PeriodSpan>& spans, std::string_view day) {
    if (spans.empty()) throw ConfigError(fmt::format("no periods for {}", day));
    double cursor = 0.0;
    for (const auto& p : spans) {
        if (!(p.end > p.start)) {
            throw ConfigError(fmt::format("{}: empty or reversed period [{}, {})", day, p.start, p.end));
        }
        if (std::abs(p.start - cursor) > 1e-9) {
            throw ConfigError(fmt::format("{}: periods leave a gap or overlap at hour {}", day, cursor));
        }
        cursor = p.end;
    }
    if (std::abs(cursor - 24.0) > 1e-9) {
        throw ConfigError(fmt::format("{}: periods end at hour {}, not 24", day, cursor));
    }
}

std::vector<PeriodSpan> merge_adjacent(std::vector<PeriodSpan> spans) {
    std::sort(spans.begin(), spans.end(), [](const auto& a, const auto& b) { return a.start < b.start; });
    std::vector<PeriodSpan> out;
    for (const auto& s : spans) {
        if (!out.empty() && out.back().label == s.label && std::abs(out.back().end - s.start) < 1e-12) {
            out.back().end = s.end;
        } else {
            out.push_back(s);
        }
    }
    return out;
}

}  // namespace

const std::vector<PeriodSpan>& TouSchedule::periods_for(DayType d) const {
    if (cycle == BillingCycle::daily) return periods[0];
    return periods[static_cast<std::size_t>(d)];
}

void TouSchedule::validate() const {
    const std::size_t days = cycle == BillingCycle::daily ? 1 : 3;
    for (std::size_t d = 0; d < days; ++d) {
        validate_partition(periods[d], kDayNames[d]);
        for (const auto& p : periods[d]) {
            if (!prices.contains(p.label)) {
                throw ConfigError(fmt::format("period '{}' has no price", to_string(p.label)));
            }
        }
    }
    for (const auto& [label, price] : prices) {
        if (!(price >= 0.0) || !std::isfinite(price)) {
            throw ConfigError(fmt::format("price for '{}' must be finite and non-negative", to_string(label)));
        }
    }
    if (rate_type == RateType::single) {
        for (std::size_t d = 0; d < days; ++d) {
            if (periods[d].size() != 1 || periods[d][0].label != Period::flat) {
                throw ConfigError("single-rate schedule needs exactly one flat period");
            }
        }
    }
}

double TouSchedule::price_at(Timestamp t) const {
    const double hour = hour_of_day(t);
    for (const auto& p : periods_for(day_type(t))) {
        if (hour >= p.start - 1e-9 && hour < p.end - 1e-9) {
            return prices.at(p.label);
        }
    }
    throw ConfigError(fmt::format("no tariff period covers {}", format_timestamp(t)));
}

void PpcTable::validate() const {
    if (levels.empty()) throw ConfigError("empty PPC table");
    for (std::size_t i = 1; i < levels.size(); ++i) {
        const auto& a = levels[i - 1];
        const auto& b = levels[i];
        if (!(b.kva > a.kva && b.single_rate > a.single_rate && b.multi_rate > a.multi_rate)) {
            throw ConfigError(fmt::format("PPC table not strictly increasing at level {}", b.kva));
        }
    }
}

const PpcLevel& PpcTable::at(double kva) const {
    for (const auto& l : levels) {
        if (std::abs(l.kva - kva) < 1e-9) return l;
    }
    throw LookupError(fmt::format("no PPC level {} kVA", kva));
}

PpcTable default_ppc_table() {
    return PpcTable{{
        {3.45, 0.1611, 0.1643},
        {4.60, 0.2096, 0.2132},
        {5.75, 0.2560, 0.2590},
        {6.90, 0.3040, 0.3080},
        {10.35, 0.4478, 0.4532},
        {13.80, 0.5902, 0.5981},
        {17.25, 0.7326, 0.7436},
        {20.70, 0.8751, 0.8892},
    }};
}

TouSchedule single_rate_schedule() {
    TouSchedule s;
    s.rate_type = RateType::single;
    s.prices = {{Period::flat, 0.1629}};
    s.periods[0] = {{0.0, 24.0, Period::flat}};
    return s;
}

TouSchedule triple_rate_schedule() {
    TouSchedule s;
    s.rate_type = RateType::triple;
    s.prices = {{Period::peak, 0.2153}, {Period::half_peak, 0.1716}, {Period::off_peak, 0.0982}};
    s.periods[0] = {
        {0.0, 8.0, Period::off_peak},    {8.0, 9.0, Period::half_peak},   {9.0, 10.5, Period::peak},
        {10.5, 18.0, Period::half_peak}, {18.0, 20.5, Period::peak},      {20.5, 22.0, Period::half_peak},
        {22.0, 24.0, Period::off_peak},
    };
    return s;
}

TouSchedule dual_rate_schedule() {
    return derive_dual(triple_rate_schedule(), 0.1894, 0.0982);
}

TouSchedule derive_dual(const TouSchedule& triple, double peak_price, double off_peak_price) {
    TouSchedule out;
    out.rate_type = RateType::dual;
    out.cycle = triple.cycle;
    out.prices = {{Period::peak, peak_price}, {Period::off_peak, off_peak_price}};
    for (std::size_t d = 0; d < out.periods.size(); ++d) {
        auto spans = triple.periods[d];
        for (auto& p : spans) {
            if (p.label == Period::half_peak) p.label = Period::peak;
        }
        out.periods[d] = merge_adjacent(std::move(spans));
    }
    return out;
}

std::vector<double> price_signal(const TouSchedule& schedule, const TimeGrid& grid) {
    schedule.validate();
    std::vector<double> out(grid.n);
    for (std::size_t i = 0; i < grid.n; ++i) {
        out[i] = schedule.price_at(grid.time_at(i));
    }
    return out;
}

const PpcLevel& select_ppc(const PpcTable& table, double peak_kw) {
    for (const auto& l : table.levels) {
        if (peak_kw <= l.kva + 1e-9) return l;
    }
    throw NoContractError(fmt::format("peak of {} kW exceeds the largest PPC level {} kVA", peak_kw,
                                      table.levels.empty() ? 0.0 : table.levels.back().kva));
}

double ppc_daily_rate(const PpcTable& table, double level_kva, RateType rate_type) {
    const auto& l = table.at(level_kva);
    return rate_type == RateType::single ? l.single_rate : l.multi_rate;
}

double energy_cost(const std::vector<double>& theta, const std::vector<double>& prices) {
    if (theta.size() != prices.size()) {
        throw AlignmentError(fmt::format("{} grid imports vs {} prices", theta.size(), prices.size()));
    }
    return std::inner_product(theta.begin(), theta.end(), prices.begin(), 0.0);
}

namespace {

std::vector<std::string> split_list(const std::string& s) {
    std::vector<std::string> out;
    for (auto& f : split_csv_line(s)) {
        if (!f.empty()) out.push_back(std::move(f));
    }
    return out;
}

std::vector<PeriodSpan> parse_periods(const pt::ptree& section, std::string_view day) {
    std::vector<PeriodSpan> spans;
    for (const auto& [key, node] : section) {
        const auto label = parse_period(key);
        for (const auto& range : split_list(node.data())) {
            const auto dash = range.find('-');
            if (dash == std::string::npos) {
                throw ConfigError(fmt::format("{}: range '{}' should look like 'start-end'", day, range));
            }
            const auto ctx = fmt::format("periods.{}", day);
            spans.push_back({parse_number(range.substr(0, dash), ctx), parse_number(range.substr(dash + 1), ctx),
                             label});
        }
    }
    std::sort(spans.begin(), spans.end(), [](const auto& a, const auto& b) { return a.start < b.start; });
    return spans;
}

const pt::ptree* find_section(const pt::ptree& root, const std::string& name) {
    auto it = root.find(name);
    return it == root.not_found() ? nullptr : &it->second;
}

std::string format_span_list(const std::vector<PeriodSpan>& spans, Period label) {
    std::string out;
    for (const auto& s : spans) {
        if (s.label != label) continue;
        if (!out.empty()) out += ", ";
        out += format_number(s.start) + "-" + format_number(s.end);
    }
    return out;
}

}  // namespace

TariffFile load_tariff(std::istream& in) {
    pt::ptree root;
    try {
        pt::read_ini(in, root);
    } catch (const pt::ini_parser_error& e) {
        throw ConfigError(fmt::format("tariff file: {}", e.what()));
    }
    TariffFile out;
    auto& sched = out.schedule;
    if (const auto* t = find_section(root, "tariff")) {
        sched.rate_type = parse_rate_type(t->get<std::string>("rate_type", "single"));
        const auto cycle = t->get<std::string>("cycle", "daily");
        if (cycle == "daily") {
            sched.cycle = BillingCycle::daily;
        } else if (cycle == "weekly") {
            sched.cycle = BillingCycle::weekly;
        } else {
            throw ConfigError(fmt::format("unknown billing cycle '{}'", cycle));
        }
    }
    if (const auto* p = find_section(root, "prices")) {
        for (const auto& [key, node] : *p) {
            sched.prices[parse_period(key)] = parse_number(node.data(), "prices." + key);
        }
    } else {
        throw ConfigError("tariff file has no [prices] section");
    }
    for (std::size_t d = 0; d < kDayNames.size(); ++d) {
        const auto name = fmt::format("periods.{}", kDayNames[d]);
        if (const auto* sec = find_section(root, name)) {
            sched.periods[d] = parse_periods(*sec, kDayNames[d]);
        } else if (sched.cycle == BillingCycle::weekly || d == 0) {
            throw ConfigError(fmt::format("tariff file has no [{}] section", name));
        }
    }
    if (sched.cycle == BillingCycle::daily) {
        sched.periods[1] = sched.periods[0];
        sched.periods[2] = sched.periods[0];
    }
    sched.validate();

    if (const auto* t = find_section(root, "ppc_table")) {
        for (const auto& [key, node] : *t) {
            const auto rates = split_list(node.data());
            if (rates.size() != 2) {
                throw ConfigError(fmt::format("ppc_table.{}: expected 'single_rate, multi_rate'", key));
            }
            out.ppc_table.levels.push_back({parse_number(key, "ppc_table"), parse_number(rates[0], "ppc_table"),
                                            parse_number(rates[1], "ppc_table")});
        }
        std::sort(out.ppc_table.levels.begin(), out.ppc_table.levels.end(),
                  [](const auto& a, const auto& b) { return a.kva < b.kva; });
    } else {
        out.ppc_table = default_ppc_table();
    }
    out.ppc_table.validate();
    return out;
}

TariffFile load_tariff(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError(fmt::format("cannot open tariff file '{}'", path.string()));
    return load_tariff(in);
}

void save_tariff(std::ostream& out, const TariffFile& t) {
    const auto& s = t.schedule;
    out << "[tariff]\nrate_type = " << to_string(s.rate_type)
        << "\ncycle = " << (s.cycle == BillingCycle::daily ? "daily" : "weekly") << "\n\n[prices]\n";
    for (const auto& [label, price] : s.prices) {
        out << to_string(label) << " = " << format_number(price) << '\n';
    }
    const std::size_t days = s.cycle == BillingCycle::daily ? 1 : 3;
    for (std::size_t d = 0; d < days; ++d) {
        out << "\n[periods." << kDayNames[d] << "]\n";
        for (const auto& [label, price] : s.prices) {
            (void)price;
            const auto spans = format_span_list(s.periods[d], label);
            if (!spans.empty()) out << to_string(label) << " = " << spans << '\n';
        }
    }
    out << "\n[ppc_table]\n";
    for (const auto& l : t.ppc_table.levels) {
        out << format_number(l.kva) << " = " << format_number(l.single_rate) << ", " << format_number(l.multi_rate)
            << '\n';
    }
}

}  // namespace mstor
