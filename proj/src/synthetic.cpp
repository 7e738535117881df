#include "mstor/synthetic.hpp"

#include <cmath>
#include <numbers>
#include <random>

namespace mstor {

namespace {

double bump(double hour, double centre, double width) {
    const double d = (hour - centre) / width;
    return std::exp(-0.5 * d * d);
}

}  // namespace

Scenario synthetic_scenario(const SyntheticOptions& opt) {
    TimeGrid probe{opt.h, 1, opt.start};
    const std::size_t per_day = probe.steps_per_day();
    TimeGrid grid{opt.h, per_day * opt.days, opt.start};

    std::mt19937_64 rng(opt.seed);
    std::normal_distribution<double> noise(0.0, opt.noise_kw);
    std::uniform_real_distribution<double> cloud(opt.cloud_min, 1.0);

    std::vector<double> demand(grid.n), generation(grid.n);
    double ar = 0.0;
    double day_cloud = 1.0;
    for (std::size_t i = 0; i < grid.n; ++i) {
        if (i % per_day == 0) day_cloud = cloud(rng);
        const double hour = hour_of_day(grid.time_at(i)) + opt.h / 2.0;
        ar = opt.noise_ar * ar + noise(rng);
        const double load_kw = opt.base_kw + opt.morning_kw * bump(hour, 7.5, 0.6) +
                               opt.midday_kw * bump(hour, 13.0, 0.5) + opt.evening_kw * bump(hour, 20.0, 1.0) + ar;
        demand[i] = std::max(0.05, load_kw) * opt.h;

        const double solar = std::sin(std::numbers::pi * (hour - 6.5) / 13.0);
        const double pv_kw = solar > 0.0 ? opt.pv_kwp * 0.85 * std::pow(solar, 1.2) * day_cloud : 0.0;
        generation[i] = pv_kw * opt.h;
    }
    return Scenario{grid, std::move(demand), std::move(generation)};
}

}  // namespace mstor
