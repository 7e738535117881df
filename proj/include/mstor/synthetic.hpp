#pragma once

#include <cstdint>

#include "mstor/ts_core.hpp"

namespace mstor {

// Residential load with morning, midday and evening peaks plus AR(1) noise,
// and clear-sky-shaped PV scaled by a random daily cloud factor.
struct SyntheticOptions {
    std::size_t days = 7;
    double h = 0.25;
    Timestamp start = parse_timestamp("2018-06-01T00:00:00");
    std::uint64_t seed = 1;
    double pv_kwp = 6.25;
    double base_kw = 0.35;
    double morning_kw = 1.2;
    double midday_kw = 6.0;
    double evening_kw = 3.5;
    double noise_kw = 0.10;   // innovation std-dev of the load noise
    double noise_ar = 0.7;    // AR(1) coefficient of the load noise
    double cloud_min = 0.6;   // daily PV factor drawn from [cloud_min, 1]
};

Scenario synthetic_scenario(const SyntheticOptions& opt);

}  // namespace mstor
