#include <fstream>
#include <random>
#include <sstream>

#include <gtest/gtest.h>

#include "mstor/battery.hpp"
#include "mstor/commands.hpp"
#include "mstor/synthetic.hpp"

using namespace mstor;
namespace fs = std::filesystem;

namespace {

class CliTest : public ::testing::Test {
protected:
    void SetUp() override {
        std::random_device rd;
        dir_ = fs::temp_directory_path() / ("mstor_cli_" + std::to_string(rd()));
        fs::create_directories(dir_);
        SyntheticOptions o;
        o.days = 1;
        const auto sc = synthetic_scenario(o);
        write_series_csv(dir_ / "demand.csv", sc.grid, sc.demand);
        write_series_csv(dir_ / "generation.csv", sc.grid, sc.generation);
    }
    void TearDown() override { fs::remove_all(dir_); }

    fs::path write_config(const std::string& body) {
        const auto p = dir_ / "run.ini";
        std::ofstream(p) << body;
        return p;
    }

    int run(std::vector<std::string> args) {
        args.insert(args.begin(), "mstor");
        std::vector<const char*> argv;
        for (const auto& a : args) argv.push_back(a.c_str());
        out_.str("");
        err_.str("");
        return run_cli(static_cast<int>(argv.size()), argv.data(), out_, err_);
    }

    static std::string battery_block() {
        return "[battery]\neta_ch = 0.95\neta_dis = 0.95\nb_min = 0.2\nb_max = 2\nb0 = 1\nc_rating = 1C-1C\n";
    }

    std::string file_config(const std::string& mode, const std::string& extra = "") {
        return "[run]\nmode = " + mode + "\nout = out\n[scenario]\ndemand = demand.csv\ngeneration = generation.csv\n" +
               "h = 0.25\n" + battery_block() + "[tariff]\nrate_type = triple\n" + extra;
    }

    fs::path dir_;
    std::ostringstream out_;
    std::ostringstream err_;
};

}  // namespace

TEST_F(CliTest, SimulateWritesOutputs) {
    const auto cfg = write_config(file_config("deterministic"));
    ASSERT_EQ(run({"--config", cfg.string()}), kExitOk) << err_.str();
    const auto out = dir_ / "out";
    const auto sched = read_series_csv(out / "schedule.csv");
    const auto traj = read_series_csv(out / "trajectory.csv");
    EXPECT_EQ(sched.value.size(), 96u);
    EXPECT_EQ(traj.value.size(), 96u);
    const auto report = read_table_csv(out / "report.csv");
    ASSERT_EQ(report.rows.size(), 1u);
    EXPECT_NE(report.rows[0][report.column("G_arb")], "");
    std::ifstream plot(out / "plot.csv");
    const auto long_rows = read_long_csv(plot);
    EXPECT_EQ(long_rows.size(), 7u * 96u);
}

TEST_F(CliTest, PeakCapBelowIrreducibleExitsTwo) {
    const auto cfg = write_config(file_config("deterministic", "ppc = 0.1\n"));
    EXPECT_EQ(run({"--config", cfg.string()}), kExitInfeasible);
    EXPECT_NE(err_.str().find("peak"), std::string::npos) << err_.str();
}

TEST_F(CliTest, GreedyModeSkipsTheLp) {
    const auto cfg = write_config(file_config("greedy"));
    const auto lp = dir_ / "model.lp";
    ASSERT_EQ(run({"--config", cfg.string(), "--dump-lp", lp.string()}), kExitOk) << err_.str();
    EXPECT_FALSE(fs::exists(lp));
    const auto sched = read_series_csv(dir_ / "out" / "schedule.csv");
    const auto sc = load_scenario(dir_ / "demand.csv", dir_ / "generation.csv", 0.25);
    BatterySpec spec;
    spec.eta_ch = spec.eta_dis = 0.95;
    spec.b_min = 0.2;
    spec.b_max = 2.0;
    const auto g = greedy_backup(net_load(sc), parse_c_rating("1C-1C", spec), 1.0, 0.25);
    EXPECT_EQ(sched.value, g.s);
}

TEST_F(CliTest, DumpLpInDeterministicMode) {
    const auto cfg = write_config(file_config("deterministic"));
    const auto lp = dir_ / "model.lp";
    ASSERT_EQ(run({"--config", cfg.string(), "--dump-lp", lp.string()}), kExitOk) << err_.str();
    EXPECT_TRUE(fs::exists(lp));
}

TEST_F(CliTest, SweepEmitsTable) {
    const auto cfg = write_config(file_config(
        "sweep", "[sweep]\nbatteries = 0.5C-0.5C, 1C-1C, 2C-2C, 4C-4C\ntariffs = dual, triple\n"));
    ASSERT_EQ(run({"--config", cfg.string(), "--jobs", "2"}), kExitOk) << err_.str();
    const auto t = read_table_csv(dir_ / "out" / "sweep.csv");
    EXPECT_EQ(t.rows.size(), 10u);
    EXPECT_EQ(t.rows[0][t.column("G_arb")], "");
    EXPECT_EQ(t.header[0], "case");
}

TEST_F(CliTest, MpcPerfectForecastReportsZeroLoss) {
    const auto cfg = write_config("[run]\nmode = mpc\nout = out\n[scenario]\nsynthetic = true\nsynthetic_days = 5\n"
                                  "h = 1\n" +
                                  battery_block() + "[tariff]\nrate_type = triple\n");
    ASSERT_EQ(run({"--config", cfg.string(), "--perfect-forecast"}), kExitOk) << err_.str();
    const auto t = read_table_csv(dir_ / "out" / "report.csv");
    EXPECT_EQ(t.rows[0][t.column("LoO")], "0");
    EXPECT_TRUE(fs::exists(dir_ / "out" / "run_log.csv"));
    EXPECT_TRUE(fs::exists(dir_ / "out" / "comparison.csv"));
    EXPECT_TRUE(fs::exists(dir_ / "out" / "model.txt"));
}

TEST_F(CliTest, MpcWeekBacktestReportsLossInUnitInterval) {
    const auto cfg = write_config("[run]\nmode = mpc\nout = out\n[scenario]\nsynthetic = true\nsynthetic_days = 11\n"
                                  "h = 1\n" +
                                  battery_block() + "[tariff]\nrate_type = triple\n");
    ASSERT_EQ(run({"--config", cfg.string(), "--seed", "3"}), kExitOk) << err_.str();
    const auto t = read_table_csv(dir_ / "out" / "report.csv");
    const double loo = parse_number(t.rows[0][t.column("LoO")], "LoO");
    EXPECT_GE(loo, 0.0);
    EXPECT_LE(loo, 1.0);
    const auto log = read_table_csv(dir_ / "out" / "run_log.csv");
    EXPECT_EQ(log.rows.size(), 7u * 24u);
}

TEST_F(CliTest, MpcWithoutEnoughHistoryExitsOne) {
    const auto cfg = write_config("[run]\nmode = mpc\nout = out\n[scenario]\nsynthetic = true\nsynthetic_days = 3\n"
                                  "h = 1\n" +
                                  battery_block());
    EXPECT_EQ(run({"--config", cfg.string()}), kExitConfig);
    EXPECT_NE(err_.str().find("4 whole history days"), std::string::npos) << err_.str();
}

TEST_F(CliTest, UsageErrorsExitOne) {
    EXPECT_EQ(run({}), kExitConfig);
    EXPECT_EQ(run({"--config", (dir_ / "none.ini").string()}), kExitConfig);
    const auto cfg = write_config(file_config("deterministic"));
    EXPECT_EQ(run({"--config", cfg.string(), "--mode", "fly"}), kExitConfig);
    const auto bad = write_config("[scenario]\ndemand = nope.csv\ngeneration = nope.csv\n" + battery_block());
    EXPECT_EQ(run({"--config", bad.string()}), kExitConfig);
    EXPECT_NE(err_.str().find("not found"), std::string::npos);
}

TEST_F(CliTest, ModeOverrideAndHelp) {
    const auto cfg = write_config(file_config("deterministic"));
    EXPECT_EQ(run({"--config", cfg.string(), "--mode", "greedy"}), kExitOk) << err_.str();
    EXPECT_NE(out_.str().find("greedy"), std::string::npos);
    EXPECT_EQ(run({"--help"}), kExitOk);
    EXPECT_NE(out_.str().find("--config"), std::string::npos);
}
