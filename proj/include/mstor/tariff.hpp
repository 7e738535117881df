#pragma once

#include <array>
#include <filesystem>
#include <iosfwd>
#include <map>
#include <string>
#include <string_view>
#include <vector>

#include "mstor/ts_core.hpp"

namespace mstor {

enum class RateType { single, dual, triple };
enum class BillingCycle { daily, weekly };
enum class Period { peak, half_peak, off_peak, flat };

RateType parse_rate_type(std::string_view s);
std::string_view to_string(RateType r);
Period parse_period(std::string_view s);
std::string_view to_string(Period p);

// [start, end) in decimal hours.
struct PeriodSpan {
    double start = 0.0;
    double end = 24.0;
    Period label = Period::flat;
};

struct TouSchedule {
    RateType rate_type = RateType::single;
    BillingCycle cycle = BillingCycle::daily;
    std::map<Period, double> prices;
    // Indexed by DayType. A daily cycle uses the workday entry for every day.
    std::array<std::vector<PeriodSpan>, 3> periods;

    // Throws ConfigError on gaps, overlaps or unpriced labels.
    void validate() const;
    const std::vector<PeriodSpan>& periods_for(DayType d) const;
    double price_at(Timestamp t) const;
};

struct PpcLevel {
    double kva = 0.0;
    double single_rate = 0.0;  // euros/day
    double multi_rate = 0.0;   // euros/day, dual and triple tariffs
};

struct PpcTable {
    std::vector<PpcLevel> levels;

    void validate() const;
    const PpcLevel& at(double kva) const;
};

struct TariffContract {
    double ppc_kva = 0.0;
    TouSchedule schedule;
};

// Low-voltage PPC levels and daily rates as published for 2018.
PpcTable default_ppc_table();

// Sample daily-cycle schedules with the 2018 energy prices. The period clock
// times are representative defaults, not authoritative data.
TouSchedule single_rate_schedule();
TouSchedule triple_rate_schedule();
TouSchedule dual_rate_schedule();
// Dual schedule whose peak period is the triple schedule's peak plus half-peak.
TouSchedule derive_dual(const TouSchedule& triple, double peak_price, double off_peak_price);

std::vector<double> price_signal(const TouSchedule& schedule, const TimeGrid& grid);

const PpcLevel& select_ppc(const PpcTable& table, double peak_kw);

double ppc_daily_rate(const PpcTable& table, double level_kva, RateType rate_type);

double energy_cost(const std::vector<double>& theta, const std::vector<double>& prices);

struct TariffFile {
    TouSchedule schedule;
    PpcTable ppc_table;
};

// INI-style file with sections [tariff], [prices], [periods.workday],
// [periods.saturday], [periods.sunday] and [ppc_table].
TariffFile load_tariff(std::istream& in);
TariffFile load_tariff(const std::filesystem::path& path);
void save_tariff(std::ostream& out, const TariffFile& t);

}  // namespace mstor
