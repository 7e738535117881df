#include "mstor/sweep.hpp"

#include <algorithm>
#include <cmath>

#include <fmt/core.h>
#include <omp.h>

#include "mstor/errors.hpp"
#include "mstor/optimizer.hpp"

namespace mstor {

double scenario_days(const Scenario& scenario) { return std::ceil(scenario.grid.duration_hours() / 24.0 - 1e-9); }

namespace {

double effective_days(const Scenario& scenario, const SweepOptions& options) {
    return options.days > 0.0 ? options.days : scenario_days(scenario);
}

double peak_kw(const std::vector<double>& energy, double h) {
    double p = 0.0;
    for (double e : energy) p = std::max(p, e / h);
    return p;
}

}  // namespace

std::vector<SweepRow> baseline_rows(const Scenario& scenario, const PpcTable& table, const SweepOptions& options) {
    const double days = effective_days(scenario, options);
    const double before = select_ppc(table, peak_kw(scenario.demand, scenario.grid.h)).kva;
    const auto z = net_load(scenario);

    SweepRow no_pv;
    no_pv.case_label = "No PV";
    no_pv.battery = "none";
    no_pv.tariff = "-";
    no_pv.report.ppc_before = before;
    no_pv.report.ppc_after = before;
    finalize(no_pv.report);

    SweepRow pv;
    pv.case_label = "PV";
    pv.battery = "none";
    pv.tariff = "-";
    pv.report.ppc_before = before;
    pv.report.ppc_after = select_ppc(table, peak_kw(z.z, scenario.grid.h)).kva;
    const auto g = peak_gain(table, before, pv.report.ppc_after, options.ppc_rate_type, days);
    pv.report.g_peak = g.euros;
    pv.report.peak_gain_negative = g.negative;
    pv.report.ss = self_sufficiency_no_storage(scenario);
    finalize(pv.report);
    return {no_pv, pv};
}

SweepRow evaluate_case(const Scenario& scenario, const BatterySpec& base, double b0, const std::string& c_rating,
                       const SweepTariff& tariff, const PpcTable& table, const SweepOptions& options) {
    SweepRow row;
    row.case_label = fmt::format("{} {}", tariff.label, c_rating);
    row.battery = c_rating;
    row.tariff = tariff.label;
    try {
        const auto spec = parse_c_rating(c_rating, base);
        const auto z = net_load(scenario);
        const double days = effective_days(scenario, options);
        const double before = select_ppc(table, peak_kw(scenario.demand, scenario.grid.h)).kva;
        const auto rec = recommend_p_set(z, spec, scenario.grid, table, b0);

        OptProblem p;
        p.z = z;
        p.prices = price_signal(tariff.schedule, scenario.grid);
        p.spec = spec;
        p.b0 = b0;
        p.grid = scenario.grid;
        p.p_set = rec.p_set;
        const auto sol = solve_p_opt(p);
        if (sol.status != OptStatus::optimal) {
            row.feasible = false;
            row.note = sol.infeasibility ? sol.infeasibility->message : "infeasible";
            return row;
        }
        auto& r = row.report;
        r.g_arb = arbitrage_gain(z, sol.schedule, p.prices);
        r.ppc_before = before;
        r.ppc_after = rec.p_set;
        const auto g = peak_gain(table, before, rec.p_set, options.ppc_rate_type, days);
        r.g_peak = g.euros;
        r.peak_gain_negative = g.negative;
        r.ss = self_sufficiency(scenario, sol.schedule);
        r.cycles = count_cycles(b0, sol.schedule.b, spec);
        finalize(r);
        if (!sol.diagnostics.complementarity_violations.empty()) {
            row.note = fmt::format("{} simultaneous charge/discharge steps netted",
                                   sol.diagnostics.complementarity_violations.size());
        }
    } catch (const std::exception& e) {
        row.feasible = false;
        row.note = e.what();
    }
    return row;
}

std::vector<SweepRow> run_sweep_serial(const Scenario& scenario, const BatterySpec& base, double b0,
                                       const std::vector<std::string>& c_ratings,
                                       const std::vector<SweepTariff>& tariffs, const PpcTable& table,
                                       const SweepOptions& options) {
    std::vector<SweepRow> rows;
    if (options.include_baselines) rows = baseline_rows(scenario, table, options);
    for (const auto& t : tariffs) {
        for (const auto& c : c_ratings) rows.push_back(evaluate_case(scenario, base, b0, c, t, table, options));
    }
    return rows;
}

std::vector<SweepRow> run_sweep(const Scenario& scenario, const BatterySpec& base, double b0,
                                const std::vector<std::string>& c_ratings, const std::vector<SweepTariff>& tariffs,
                                const PpcTable& table, const SweepOptions& options) {
    std::vector<SweepRow> rows;
    if (options.include_baselines) rows = baseline_rows(scenario, table, options);
    const std::size_t offset = rows.size();
    const auto nb = static_cast<long long>(c_ratings.size());
    const long long total = nb * static_cast<long long>(tariffs.size());
    rows.resize(offset + static_cast<std::size_t>(total));
    const int threads = options.jobs > 0 ? options.jobs : omp_get_max_threads();
#pragma omp parallel for schedule(dynamic) num_threads(threads)
    for (long long k = 0; k < total; ++k) {
        const auto& t = tariffs[static_cast<std::size_t>(k / nb)];
        const auto& c = c_ratings[static_cast<std::size_t>(k % nb)];
        rows[offset + static_cast<std::size_t>(k)] = evaluate_case(scenario, base, b0, c, t, table, options);
    }
    return rows;
}

CsvTable sweep_table(const std::vector<SweepRow>& rows) {
    CsvTable t;
    t.header = report_csv_header();
    t.header.insert(t.header.end(), {"battery", "tariff", "status", "note"});
    for (const auto& r : rows) {
        std::vector<std::string> cells;
        if (r.feasible) {
            cells = report_csv_row(r.case_label, r.report);
        } else {
            cells.assign(report_csv_header().size(), "");
            cells[0] = r.case_label;
        }
        std::string note = r.note;
        std::replace(note.begin(), note.end(), ',', ';');
        cells.insert(cells.end(), {r.battery, r.tariff, r.feasible ? "ok" : "infeasible", note});
        t.rows.push_back(std::move(cells));
    }
    return t;
}

}  // namespace mstor
