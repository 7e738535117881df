#include "mstor/config.hpp"

#include <cmath>
#include <fstream>

#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>
#include <fmt/core.h>

#include "mstor/errors.hpp"

namespace mstor {

namespace pt = boost::property_tree;

RunMode parse_mode(std::string_view s) {
    if (s == "deterministic" || s == "simulate") return RunMode::deterministic;
    if (s == "greedy") return RunMode::greedy;
    if (s == "mpc") return RunMode::mpc;
    if (s == "sweep") return RunMode::sweep;
    throw ConfigError(fmt::format("unknown mode '{}'", s));
}

const char* to_string(RunMode m) {
    switch (m) {
        case RunMode::deterministic: return "deterministic";
        case RunMode::greedy: return "greedy";
        case RunMode::mpc: return "mpc";
        case RunMode::sweep: return "sweep";
    }
    return "?";
}

std::vector<Incident> parse_incidents(const std::string& text) {
    std::vector<Incident> out;
    for (const auto& item : split_csv_line(text)) {
        if (item.empty()) continue;
        const auto colon = item.find(':');
        if (colon == std::string::npos) {
            throw ConfigError(fmt::format("incident '{}' should look like 'step:b_set'", item));
        }
        const double step = parse_number(item.substr(0, colon), "backup.incidents");
        if (step < 0 || step != std::floor(step)) {
            throw ConfigError(fmt::format("incident step '{}' must be a non-negative integer", item));
        }
        out.push_back({static_cast<std::size_t>(step), parse_number(item.substr(colon + 1), "backup.incidents")});
    }
    return out;
}

namespace {

class Section {
public:
    Section(const pt::ptree* node, std::string name) : node_(node), name_(std::move(name)) {}

    bool present() const { return node_ != nullptr; }

    std::optional<std::string> str(const std::string& key) const {
        if (!node_) return std::nullopt;
        auto v = node_->get_optional<std::string>(pt::ptree::path_type(key, '/'));
        if (!v) return std::nullopt;
        return *v;
    }

    std::optional<double> num(const std::string& key) const {
        auto s = str(key);
        if (!s) return std::nullopt;
        return parse_number(*s, name_ + "." + key);
    }

    double num_or(const std::string& key, double fallback) const { return num(key).value_or(fallback); }

    double required(const std::string& key) const {
        auto v = num(key);
        if (!v) throw ConfigError(fmt::format("missing required key {}.{}", name_, key));
        return *v;
    }

    std::size_t count_or(const std::string& key, std::size_t fallback) const {
        auto v = num(key);
        if (!v) return fallback;
        if (*v < 0 || *v != std::floor(*v)) {
            throw ConfigError(fmt::format("{}.{} must be a non-negative integer", name_, key));
        }
        return static_cast<std::size_t>(*v);
    }

    bool flag_or(const std::string& key, bool fallback) const {
        auto s = str(key);
        if (!s) return fallback;
        if (*s == "true" || *s == "yes" || *s == "1") return true;
        if (*s == "false" || *s == "no" || *s == "0") return false;
        throw ConfigError(fmt::format("{}.{}: expected true/false, got '{}'", name_, key, *s));
    }

private:
    const pt::ptree* node_;
    std::string name_;
};

Section section(const pt::ptree& root, const std::string& name) {
    auto it = root.find(name);
    return Section(it == root.not_found() ? nullptr : &it->second, name);
}

std::filesystem::path resolve(const std::filesystem::path& base, const std::string& p) {
    std::filesystem::path path(p);
    return path.is_absolute() ? path : base / path;
}

}  // namespace

RunConfig parse_run_config(std::istream& in, const std::filesystem::path& base_dir) {
    pt::ptree root;
    try {
        pt::read_ini(in, root);
    } catch (const pt::ini_parser_error& e) {
        throw ConfigError(fmt::format("config: {}", e.what()));
    }
    RunConfig cfg;

    const auto run = section(root, "run");
    if (auto m = run.str("mode")) cfg.mode = parse_mode(*m);
    if (auto o = run.str("out")) cfg.out_dir = resolve(base_dir, *o);
    if (auto d = run.str("dump_lp")) cfg.dump_lp = resolve(base_dir, *d);
    cfg.jobs = static_cast<int>(run.count_or("jobs", 0));

    const auto sc = section(root, "scenario");
    if (!sc.present()) throw ConfigError("config has no [scenario] section");
    cfg.scenario.h = sc.num_or("h", 0.25);
    cfg.scenario.synthetic = sc.flag_or("synthetic", false);
    cfg.scenario.synthetic_days = sc.count_or("synthetic_days", 7);
    cfg.scenario.seed = sc.count_or("seed", 1);
    if (auto d = sc.str("demand")) cfg.scenario.demand = resolve(base_dir, *d);
    if (auto g = sc.str("generation")) cfg.scenario.generation = resolve(base_dir, *g);

    const auto bat = section(root, "battery");
    if (bat.present()) {
        auto& spec = cfg.battery.spec;
        spec.eta_ch = bat.num_or("eta_ch", 1.0);
        spec.eta_dis = bat.num_or("eta_dis", 1.0);
        spec.b_min = bat.required("b_min");
        spec.b_max = bat.required("b_max");
        cfg.battery.b0 = bat.num_or("b0", spec.b_min);
        cfg.battery.c_rating = bat.str("c_rating");
        const auto dmin = bat.num("delta_min");
        const auto dmax = bat.num("delta_max");
        if (cfg.battery.c_rating) {
            if (dmin || dmax) throw ConfigError("battery: give either c_rating or delta_min/delta_max, not both");
            spec = parse_c_rating(*cfg.battery.c_rating, spec);
        } else if (dmin && dmax) {
            spec.delta_min = *dmin;
            spec.delta_max = *dmax;
        } else if (dmin || dmax) {
            throw ConfigError("battery: delta_min and delta_max must be given together");
        }
    }

    const auto tar = section(root, "tariff");
    if (auto f = tar.str("file")) cfg.tariff.file = resolve(base_dir, *f);
    if (auto r = tar.str("rate_type")) cfg.tariff.rate_type = parse_rate_type(*r);
    if (auto r = tar.str("ppc_rate_type")) cfg.tariff.ppc_rate_type = parse_rate_type(*r);
    if (auto p = tar.str("ppc")) {
        if (*p == "auto") {
            cfg.tariff.ppc_auto = true;
        } else if (*p == "none") {
            cfg.tariff.ppc_auto = false;
            cfg.tariff.ppc_kva.reset();
        } else {
            cfg.tariff.ppc_auto = false;
            cfg.tariff.ppc_kva = parse_number(*p, "tariff.ppc");
        }
    }

    const auto bk = section(root, "backup");
    if (auto p = bk.str("outage_prob")) cfg.backup.outage_prob = resolve(base_dir, *p);
    cfg.backup.lambda = bk.num_or("lambda", 0.0);
    if (auto i = bk.str("incidents")) cfg.backup.incidents = parse_incidents(*i);
    cfg.backup.window = bk.count_or("window", 1);

    const auto mpc = section(root, "mpc");
    cfg.mpc.history_days = mpc.count_or("history_days", 0);
    cfg.mpc.lookback_days = mpc.count_or("lookback_days", 0);
    cfg.mpc.window = mpc.count_or("window", 0);
    cfg.mpc.rolling_mean = mpc.flag_or("rolling_mean", true);
    cfg.mpc.perfect_forecast = mpc.flag_or("perfect_forecast", false);
    cfg.mpc.ridge = mpc.num_or("ridge", 0.0);
    if (auto m = mpc.str("model")) cfg.mpc.model = resolve(base_dir, *m);

    const auto sw = section(root, "sweep");
    if (auto b = sw.str("batteries")) cfg.sweep.batteries = split_csv_line(*b);
    if (auto t = sw.str("tariffs")) {
        for (auto& name : split_csv_line(*t)) {
            if (name == "single" || name == "dual" || name == "triple") {
                cfg.sweep.tariffs.push_back(name);
            } else {
                cfg.sweep.tariffs.push_back(resolve(base_dir, name).string());
            }
        }
    }
    cfg.sweep.baselines = sw.flag_or("baselines", true);
    cfg.sweep.days = sw.num_or("days", 0.0);
    return cfg;
}

RunConfig load_run_config(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError(fmt::format("cannot open config '{}'", path.string()));
    return parse_run_config(in, path.parent_path().empty() ? std::filesystem::path(".") : path.parent_path());
}

void RunConfig::validate() const {
    if (!scenario.synthetic) {
        if (scenario.demand.empty() || scenario.generation.empty()) {
            throw ConfigError("scenario needs demand and generation paths (or synthetic = true)");
        }
        for (const auto& p : {scenario.demand, scenario.generation}) {
            if (!std::filesystem::exists(p)) throw ConfigError(fmt::format("file not found: {}", p.string()));
        }
    }
    if (battery.spec.b_max <= 0.0) throw ConfigError("config has no usable [battery] block");
    battery.spec.validate();
    if (tariff.file && !std::filesystem::exists(*tariff.file)) {
        throw ConfigError(fmt::format("tariff file not found: {}", tariff.file->string()));
    }
    if (backup.outage_prob && !std::filesystem::exists(*backup.outage_prob)) {
        throw ConfigError(fmt::format("outage probability file not found: {}", backup.outage_prob->string()));
    }
    if (mode == RunMode::sweep && sweep.batteries.empty()) throw ConfigError("sweep mode needs sweep.batteries");
    if (mode == RunMode::sweep && sweep.tariffs.empty()) throw ConfigError("sweep mode needs sweep.tariffs");
    if (mode == RunMode::mpc && mpc.model && !std::filesystem::exists(*mpc.model)) {
        throw ConfigError(fmt::format("model file not found: {}", mpc.model->string()));
    }
}

}  // namespace mstor
