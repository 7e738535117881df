// Writes the bundled synthetic scenario and built-in tariff files into a directory.
#include <filesystem>
#include <fstream>
#include <iostream>

#include "mstor/synthetic.hpp"
#include "mstor/tariff.hpp"

namespace fs = std::filesystem;

int main(int argc, char** argv) {
    if (argc != 2) {
        std::cerr << "usage: mstor_gen_data <dir>\n";
        return 1;
    }
    const fs::path dir = argv[1];
    fs::create_directories(dir);
    const auto sc = mstor::synthetic_scenario({});
    mstor::write_series_csv(dir / "synthetic_demand.csv", sc.grid, sc.demand);
    mstor::write_series_csv(dir / "synthetic_generation.csv", sc.grid, sc.generation);
    const std::pair<const char*, mstor::TouSchedule> tariffs[] = {
        {"single.ini", mstor::single_rate_schedule()},
        {"dual.ini", mstor::dual_rate_schedule()},
        {"triple.ini", mstor::triple_rate_schedule()},
    };
    for (const auto& [name, schedule] : tariffs) {
        std::ofstream out(dir / name);
        mstor::save_tariff(out, {schedule, mstor::default_ppc_table()});
    }
    return 0;
}
