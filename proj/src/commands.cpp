#include "mstor/commands.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <optional>
#include <ostream>
#include <sstream>

#include <CLI11.hpp>
#include <fmt/core.h>

#include "mstor/errors.hpp"
#include "mstor/forecast.hpp"
#include "mstor/metrics.hpp"
#include "mstor/mpc.hpp"
#include "mstor/optimizer.hpp"
#include "mstor/sweep.hpp"
#include "mstor/synthetic.hpp"

namespace mstor {

namespace {

// Raised inside a command when the model has no feasible schedule.
struct Infeasible {
    std::string message;
};

Scenario build_scenario(const RunConfig& cfg) {
    if (cfg.scenario.synthetic) {
        SyntheticOptions opt;
        opt.days = cfg.scenario.synthetic_days;
        opt.h = cfg.scenario.h;
        opt.seed = cfg.scenario.seed;
        return synthetic_scenario(opt);
    }
    return load_scenario(cfg.scenario.demand, cfg.scenario.generation, cfg.scenario.h);
}

TouSchedule builtin_schedule(RateType r) {
    switch (r) {
        case RateType::single: return single_rate_schedule();
        case RateType::dual: return dual_rate_schedule();
        case RateType::triple: return triple_rate_schedule();
    }
    return single_rate_schedule();
}

TariffFile build_tariff(const RunConfig& cfg) {
    if (cfg.tariff.file) return load_tariff(*cfg.tariff.file);
    return {builtin_schedule(cfg.tariff.rate_type), default_ppc_table()};
}

std::optional<BackupPolicy> build_backup(const RunConfig& cfg, const Scenario& sc, std::size_t first = 0) {
    BackupPolicy bp;
    bp.lambda = cfg.backup.lambda;
    bp.window = cfg.backup.window;
    if (cfg.backup.outage_prob) {
        const auto raw = read_series_csv(*cfg.backup.outage_prob);
        if (raw.value.size() < first + sc.size()) {
            throw AlignmentError(fmt::format("outage probability profile has {} values, scenario needs {}",
                                             raw.value.size(), first + sc.size()));
        }
        bp.outage_prob.assign(raw.value.begin() + static_cast<std::ptrdiff_t>(first),
                              raw.value.begin() + static_cast<std::ptrdiff_t>(first + sc.size()));
    }
    for (const auto& inc : cfg.backup.incidents) {
        if (inc.step >= first && inc.step < first + sc.size()) bp.incidents.push_back({inc.step - first, inc.b_set});
    }
    if (bp.trivial()) return std::nullopt;
    return bp;
}

double peak_kw(const std::vector<double>& energy, double h) {
    double p = 0.0;
    for (double e : energy) p = std::max(p, e / h);
    return p;
}

// Contract cap in kW for the run, or kInf when uncapped.
double resolve_p_set(const RunConfig& cfg, const NetLoadSeries& z, const Scenario& sc, const PpcTable& table,
                     double b0, const BatterySpec& spec) {
    if (cfg.tariff.ppc_kva) return *cfg.tariff.ppc_kva;
    if (!cfg.tariff.ppc_auto) return kInf;
    try {
        return recommend_p_set(z, spec, sc.grid, table, b0).p_set;
    } catch (const NoContractError& e) {
        throw Infeasible{fmt::format("peak constraint: {}", e.what())};
    }
}

std::string describe(const Infeasibility& inf) {
    return fmt::format("{} constraint violated at step {}: {}", to_string(inf.kind), inf.step, inf.message);
}

OptSolution solve(const OptProblem& p) {
    if (p.backup && !p.backup->trivial()) return solve_p_madeira(p);
    return solve_p_opt(p);
}

void write_text(const std::filesystem::path& path, const std::string& text) { write_file_atomic(path, text); }

std::string series_text(const TimeGrid& grid, const std::vector<double>& v) {
    std::ostringstream os;
    write_series_csv(os, grid, v);
    return os.str();
}

std::string table_text(const CsvTable& t) {
    std::ostringstream os;
    write_table_csv(os, t);
    return os.str();
}

PerformanceReport score(const Scenario& sc, const NetLoadSeries& z, const StorageSchedule& sched,
                        const std::vector<double>& prices, const PpcTable& table, double p_set, double b0,
                        const BatterySpec& spec, RateType ppc_rate) {
    PerformanceReport r;
    r.g_arb = arbitrage_gain(z, sched, prices);
    r.ppc_before = select_ppc(table, peak_kw(sc.demand, sc.grid.h)).kva;
    // Uncapped runs are billed at the level their realised grid peak needs.
    r.ppc_after = std::isfinite(p_set) ? select_ppc(table, p_set).kva : select_ppc(table, peak_kw(sched.theta, sc.grid.h)).kva;
    const auto g = peak_gain(table, r.ppc_before, r.ppc_after, ppc_rate, scenario_days(sc));
    r.g_peak = g.euros;
    r.peak_gain_negative = g.negative;
    r.ss = self_sufficiency(sc, sched);
    r.cycles = count_cycles(b0, sched.b, spec);
    finalize(r);
    return r;
}

std::string plot_text(const Scenario& sc, const NetLoadSeries& z, const StorageSchedule& sched,
                      const std::vector<double>& prices) {
    std::vector<LongRecord> rows;
    auto add = [&](const char* name, const std::vector<double>& v) {
        for (std::size_t i = 0; i < v.size(); ++i) rows.push_back({name, sc.grid.time_at(i), v[i]});
    };
    add("demand", sc.demand);
    add("generation", sc.generation);
    add("net_load", z.z);
    add("price", prices);
    add("s", sched.s);
    add("b", sched.b);
    add("theta", sched.theta);
    std::ostringstream os;
    write_long_csv(os, rows);
    return os.str();
}

void check_b0(double b0, const BatterySpec& spec) {
    if (b0 < spec.b_min - kFeasibilityTol || b0 > spec.b_max + kFeasibilityTol) {
        throw ConfigError(fmt::format("battery.b0 = {} lies outside [{}, {}]", b0, spec.b_min, spec.b_max));
    }
}

int simulate(const RunConfig& cfg, std::ostream& out) {
    const auto sc = build_scenario(cfg);
    const auto tariff = build_tariff(cfg);
    const auto& spec = cfg.battery.spec;
    const double b0 = cfg.battery.b0;
    check_b0(b0, spec);
    const auto z = net_load(sc);
    const auto prices = price_signal(tariff.schedule, sc.grid);

    StorageSchedule sched;
    double p_set = kInf;
    if (cfg.mode == RunMode::greedy) {
        sched = greedy_backup(z, spec, b0, sc.grid.h);
    } else {
        OptProblem p;
        p.z = z;
        p.prices = prices;
        p.spec = spec;
        p.b0 = b0;
        p.grid = sc.grid;
        p.p_set = resolve_p_set(cfg, z, sc, tariff.ppc_table, b0, spec);
        p.backup = build_backup(cfg, sc);
        p.validate();
        if (cfg.dump_lp) {
            std::ostringstream os;
            write_lp_format(os, build_lp(p));
            write_text(*cfg.dump_lp, os.str());
        }
        const auto sol = solve(p);
        if (sol.status != OptStatus::optimal) throw Infeasible{describe(*sol.infeasibility)};
        if (!sol.diagnostics.complementarity_violations.empty()) {
            out << fmt::format("note: {} steps had simultaneous charge and discharge in the LP point; netted\n",
                               sol.diagnostics.complementarity_violations.size());
        }
        sched = sol.schedule;
        p_set = p.p_set;
    }

    const auto report = score(sc, z, sched, prices, tariff.ppc_table, p_set, b0, spec, cfg.tariff.ppc_rate_type);
    std::filesystem::create_directories(cfg.out_dir);
    write_text(cfg.out_dir / "schedule.csv", series_text(sc.grid, sched.s));
    write_text(cfg.out_dir / "trajectory.csv", series_text(sc.grid, sched.b));
    CsvTable t;
    t.header = report_csv_header();
    t.rows.push_back(report_csv_row(cfg.mode == RunMode::greedy ? "greedy" : "deterministic", report));
    write_text(cfg.out_dir / "report.csv", table_text(t));
    write_text(cfg.out_dir / "plot.csv", plot_text(sc, z, sched, prices));
    out << fmt::format("{}: energy cost {:.4f} EUR, G_arb {:.4f} EUR, PPC {} kVA, output in {}\n",
                       to_string(cfg.mode), energy_cost(sched.theta, prices), report.g_arb.value_or(0.0),
                       format_number(report.ppc_after), cfg.out_dir.string());
    return kExitOk;
}

SweepTariff sweep_tariff(const std::string& name) {
    if (name == "single") return {"1-level", single_rate_schedule()};
    if (name == "dual") return {"2-level", dual_rate_schedule()};
    if (name == "triple") return {"3-level", triple_rate_schedule()};
    const std::filesystem::path p(name);
    if (!std::filesystem::exists(p)) throw ConfigError(fmt::format("tariff file not found: {}", name));
    return {p.stem().string(), load_tariff(p).schedule};
}

int sweep(const RunConfig& cfg, const std::vector<std::string>& batteries, const std::vector<std::string>& tariffs,
          std::ostream& out) {
    if (batteries.empty() || tariffs.empty()) throw ConfigError("sweep needs at least one battery and one tariff");
    const auto sc = build_scenario(cfg);
    const PpcTable table = cfg.tariff.file ? load_tariff(*cfg.tariff.file).ppc_table : default_ppc_table();
    check_b0(cfg.battery.b0, cfg.battery.spec);
    for (const auto& b : batteries) parse_c_rating(b, cfg.battery.spec);
    std::vector<SweepTariff> ts;
    for (const auto& t : tariffs) ts.push_back(sweep_tariff(t));

    SweepOptions opt;
    opt.include_baselines = cfg.sweep.baselines;
    opt.ppc_rate_type = cfg.tariff.ppc_rate_type;
    opt.days = cfg.sweep.days;
    opt.jobs = cfg.jobs;
    const auto rows = run_sweep(sc, cfg.battery.spec, cfg.battery.b0, batteries, ts, table, opt);
    std::filesystem::create_directories(cfg.out_dir);
    write_text(cfg.out_dir / "sweep.csv", table_text(sweep_table(rows)));
    const auto bad = std::count_if(rows.begin(), rows.end(), [](const SweepRow& r) { return !r.feasible; });
    out << fmt::format("sweep: {} rows ({} infeasible), output in {}\n", rows.size(), bad, cfg.out_dir.string());
    return kExitOk;
}

int mpc(const RunConfig& cfg, std::ostream& out) {
    const auto sc = build_scenario(cfg);
    const auto n_day = sc.grid.steps_per_day();
    const std::size_t total_days = sc.size() / n_day;
    const std::size_t hist_days = cfg.mpc.history_days ? cfg.mpc.history_days : kMinHistoryDays;
    if (hist_days < kMinHistoryDays) {
        throw ConfigError(fmt::format("MPC requires at least {} days of history before the evaluation window; "
                                      "mpc.history_days = {}",
                                      kMinHistoryDays, hist_days));
    }
    if (sc.size() % n_day != 0 || total_days < hist_days + 1) {
        throw ConfigError(fmt::format("MPC requires {} whole history days plus at least one evaluation day; "
                                      "the scenario covers {} steps ({} whole days)",
                                      hist_days, sc.size(), total_days));
    }
    const auto tariff = build_tariff(cfg);
    const auto& spec = cfg.battery.spec;
    const double b0 = cfg.battery.b0;
    check_b0(b0, spec);

    const std::size_t first = hist_days * n_day;
    const auto hist = sc.slice(0, first);
    const auto eval = sc.slice(first, sc.size() - first);
    const auto hist_z = net_load(hist).z;
    const auto z = net_load(eval);
    const auto prices = price_signal(tariff.schedule, eval.grid);

    ForecastModel model;
    FitReport fit;
    if (cfg.mpc.model) {
        model = load_model(*cfg.mpc.model);
        if (model.steps_per_day() != n_day) {
            throw ConfigError(fmt::format("model has {} steps per day, scenario has {}", model.steps_per_day(), n_day));
        }
    } else {
        FitOptions fo;
        fo.ridge = cfg.mpc.ridge;
        model = fit_arma(HistoryBuffer(n_day, hist_z), fo, &fit);
        if (!fit.warning.empty()) out << "warning: " << fit.warning << '\n';
    }

    OptProblem det;
    det.z = z;
    det.prices = prices;
    det.spec = spec;
    det.b0 = b0;
    det.grid = eval.grid;
    det.p_set = resolve_p_set(cfg, z, eval, tariff.ppc_table, b0, spec);
    det.backup = build_backup(cfg, eval, first);
    det.validate();
    const auto det_sol = solve(det);
    if (det_sol.status != OptStatus::optimal) throw Infeasible{describe(*det_sol.infeasibility)};

    MpcTemplate tpl{prices, spec, det.p_set, det.backup};
    MpcOptions mo;
    mo.window = cfg.mpc.window;
    mo.rolling_mean = cfg.mpc.rolling_mean;
    mo.lookback_days = cfg.mpc.lookback_days;
    MpcRun run;
    if (cfg.mpc.perfect_forecast) {
        auto full = hist_z;
        full.insert(full.end(), z.z.begin(), z.z.end());
        run = run_mpc(eval, hist_z, perfect_forecaster(std::move(full)), tpl, b0, mo);
    } else {
        run = run_mpc(eval, hist_z, model, tpl, b0, mo);
    }

    const double idle = zero_storage_cost(z, prices);
    const double det_gain = idle - det_sol.objective;
    const double mpc_gain = idle - run.objective;
    std::optional<double> loo;
    if (det_gain > 0.0) {
        loo = loss_of_opportunity(mpc_gain, det_gain);
        // Perfect foresight can only differ from the optimum by solver round-off.
        if (cfg.mpc.perfect_forecast && std::abs(*loo) < 1e-6) loo = 0.0;
    } else {
        out << "note: the deterministic run gains nothing over an idle battery; LoO left blank\n";
    }

    std::filesystem::create_directories(cfg.out_dir);
    {
        std::ostringstream os;
        write_run_log(os, eval.grid, run);
        write_text(cfg.out_dir / "run_log.csv", os.str());
    }
    {
        std::ostringstream os;
        save_model(os, model);
        write_text(cfg.out_dir / "model.txt", os.str());
    }
    CsvTable cmp;
    cmp.header = {"quantity", "deterministic", "mpc"};
    auto row = [&cmp](const char* name, double a, double b) {
        cmp.rows.push_back({name, format_number(a), format_number(b)});
    };
    row("energy_cost", det_sol.energy_cost, run.energy_cost);
    row("backup_reward", det_sol.backup_reward, run.backup_reward);
    row("objective", det_sol.objective, run.objective);
    row("gain", det_gain, mpc_gain);
    row("cycles", count_cycles(b0, det_sol.schedule.b, spec), count_cycles(b0, run.committed.b, spec));
    row("peak_kw", peak_kw(det_sol.schedule.theta, eval.grid.h), run.committed_peak_kw);
    row("contract_violations", 0.0, static_cast<double>(run.contract_violations));
    write_text(cfg.out_dir / "comparison.csv", table_text(cmp));

    auto report = score(eval, z, run.committed, prices, tariff.ppc_table, det.p_set, b0, spec, cfg.tariff.ppc_rate_type);
    report.loo = loo;
    CsvTable t;
    t.header = report_csv_header();
    t.rows.push_back(report_csv_row("mpc", report));
    write_text(cfg.out_dir / "report.csv", table_text(t));

    out << fmt::format("mpc: deterministic gain {:.4f} EUR, MPC gain {:.4f} EUR, LoO {}, output in {}\n", det_gain,
                       mpc_gain, loo ? format_number(*loo) : std::string("n/a"), cfg.out_dir.string());
    if (run.contract_violations) {
        out << fmt::format("warning: realised grid import exceeded the contracted cap at {} steps\n",
                           run.contract_violations);
    }
    return kExitOk;
}

template <class F>
int guarded(std::ostream& err, F&& body) {
    try {
        return body();
    } catch (const Infeasible& e) {
        err << "infeasible: " << e.message << '\n';
        return kExitInfeasible;
    } catch (const std::exception& e) {
        err << "error: " << e.what() << '\n';
        return kExitConfig;
    }
}

}  // namespace

int cmd_simulate(const RunConfig& cfg, std::ostream& out, std::ostream& err) {
    return guarded(err, [&] {
        if (cfg.mode != RunMode::deterministic && cfg.mode != RunMode::greedy) {
            throw ConfigError("simulate needs deterministic or greedy mode");
        }
        cfg.validate();
        return simulate(cfg, out);
    });
}

int cmd_sweep(const RunConfig& cfg, const std::vector<std::string>& batteries,
              const std::vector<std::string>& tariffs, std::ostream& out, std::ostream& err) {
    return guarded(err, [&] {
        auto c = cfg;
        c.mode = RunMode::sweep;
        c.sweep.batteries = batteries;
        c.sweep.tariffs = tariffs;
        c.validate();
        return sweep(c, batteries, tariffs, out);
    });
}

int cmd_mpc(const RunConfig& cfg, std::ostream& out, std::ostream& err) {
    return guarded(err, [&] {
        cfg.validate();
        return mpc(cfg, out);
    });
}

int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
    CLI::App app{"Prosumer battery dispatch: deterministic LP, greedy backup, MPC backtests and contract sweeps"};
    std::string config_path;
    std::string mode;
    int jobs = 0;
    std::string out_dir;
    bool perfect = false;
    std::optional<std::uint64_t> seed;
    std::string dump_lp;
    app.add_option("--config", config_path, "Run configuration (INI)")->required();
    app.add_option("--mode", mode, "Override the configured mode")
        ->check(CLI::IsMember({"simulate", "deterministic", "greedy", "mpc", "sweep"}));
    app.add_option("--jobs", jobs, "Concurrent sweep cases (0: all cores)")->check(CLI::NonNegativeNumber);
    app.add_option("--out", out_dir, "Output directory");
    app.add_flag("--perfect-forecast", perfect, "MPC with the realised net load as forecast");
    app.add_option("--seed", seed, "Seed of the synthetic scenario generator");
    app.add_option("--dump-lp", dump_lp, "Write the deterministic LP in CPLEX LP format");

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        out << app.help();
        return kExitOk;
    } catch (const CLI::ParseError& e) {
        err << "error: " << e.what() << '\n' << "run with --help for usage\n";
        return kExitConfig;
    }

    RunConfig cfg;
    try {
        cfg = load_run_config(config_path);
        if (!mode.empty()) cfg.mode = parse_mode(mode);
        if (!out_dir.empty()) cfg.out_dir = out_dir;
        if (jobs > 0) cfg.jobs = jobs;
        if (perfect) cfg.mpc.perfect_forecast = true;
        if (seed) cfg.scenario.seed = *seed;
        if (!dump_lp.empty()) cfg.dump_lp = dump_lp;
    } catch (const std::exception& e) {
        err << "error: " << e.what() << '\n';
        return kExitConfig;
    }

    switch (cfg.mode) {
        case RunMode::deterministic:
        case RunMode::greedy: return cmd_simulate(cfg, out, err);
        case RunMode::mpc: return cmd_mpc(cfg, out, err);
        case RunMode::sweep: return cmd_sweep(cfg, cfg.sweep.batteries, cfg.sweep.tariffs, out, err);
    }
    return kExitConfig;
}

}  // namespace mstor
