#include "mstor/battery.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <string>

#include <fmt/core.h>

#include "mstor/errors.hpp"

namespace mstor {

void BatterySpec::validate() const {
    if (!(eta_ch > 0.0 && eta_ch <= 1.0)) throw ValidationError(fmt::format("eta_ch {} not in (0,1]", eta_ch));
    if (!(eta_dis > 0.0 && eta_dis <= 1.0)) throw ValidationError(fmt::format("eta_dis {} not in (0,1]", eta_dis));
    if (!(delta_min <= 0.0)) throw ValidationError(fmt::format("delta_min {} must be <= 0", delta_min));
    if (!(delta_max >= 0.0)) throw ValidationError(fmt::format("delta_max {} must be >= 0", delta_max));
    if (!(b_min >= 0.0 && b_min <= b_max)) {
        throw ValidationError(fmt::format("need 0 <= b_min <= b_max, got [{}, {}]", b_min, b_max));
    }
    if (!std::isfinite(delta_min) || !std::isfinite(delta_max) || !std::isfinite(b_max)) {
        throw ValidationError("battery parameters must be finite");
    }
}

namespace {

double parse_rate(std::string_view text, std::string_view whole) {
    double v = 0.0;
    auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), v);
    if (text.empty() || ec != std::errc{} || ptr != text.data() + text.size() || !std::isfinite(v)) {
        throw ParseError(fmt::format("malformed C-rating '{}'", whole));
    }
    if (!(v > 0.0)) {
        throw ParseError(fmt::format("C-rating '{}' needs positive rates", whole));
    }
    return v;
}

}  // namespace

BatterySpec parse_c_rating(std::string_view tag, BatterySpec spec) {
    // <x>C-<y>C
    const auto dash = tag.find("C-");
    if (dash == std::string_view::npos || tag.size() < dash + 3 || tag.back() != 'C') {
        throw ParseError(fmt::format("malformed C-rating '{}'", tag));
    }
    const double x = parse_rate(tag.substr(0, dash), tag);
    const double y = parse_rate(tag.substr(dash + 2, tag.size() - dash - 3), tag);
    spec.delta_max = x * spec.usable();
    spec.delta_min = -y * spec.usable();
    return spec;
}

StepBounds step_bounds(const BatterySpec& spec, double h) {
    return {spec.delta_min * h * spec.eta_dis, spec.delta_max * h / spec.eta_ch};
}

double internal_delta(double s, const BatterySpec& spec) {
    return std::max(0.0, s) * spec.eta_ch - std::max(0.0, -s) / spec.eta_dis;
}

BatteryState apply_action(BatteryState state, double s, const BatterySpec& spec, double h) {
    const auto bounds = step_bounds(spec, h);
    if (s < bounds.lo - kFeasibilityTol || s > bounds.hi + kFeasibilityTol) {
        throw InfeasibleActionError(
            "ramp", fmt::format("action {} kWh outside ramp bounds [{}, {}]", s, bounds.lo, bounds.hi));
    }
    const double next = state.b + internal_delta(s, spec);
    if (next < spec.b_min - kFeasibilityTol) {
        throw InfeasibleActionError("capacity_min",
                                    fmt::format("charge {} kWh below b_min {}", next, spec.b_min));
    }
    if (next > spec.b_max + kFeasibilityTol) {
        throw InfeasibleActionError("capacity_max",
                                    fmt::format("charge {} kWh above b_max {}", next, spec.b_max));
    }
    return BatteryState{next};
}

StorageSchedule greedy_backup(const NetLoadSeries& z, const BatterySpec& spec, double b0, double h) {
    spec.validate();
    if (b0 < spec.b_min - kFeasibilityTol || b0 > spec.b_max + kFeasibilityTol) {
        throw ValidationError(fmt::format("b0 {} outside [{}, {}]", b0, spec.b_min, spec.b_max));
    }
    const auto bounds = step_bounds(spec, h);
    StorageSchedule out;
    out.s.reserve(z.size());
    out.b.reserve(z.size());
    out.theta.reserve(z.size());
    BatteryState state{b0};
    for (std::size_t i = 0; i < z.size(); ++i) {
        double s = 0.0;
        if (z[i] >= 0.0) {
            s = std::max({-z[i], bounds.lo, -(state.b - spec.b_min) * spec.eta_dis});
            // rounding can leave b a hair below b_min
            s = std::min(s, 0.0);
        } else {
            s = std::min({-z[i], bounds.hi, (spec.b_max - state.b) / spec.eta_ch});
            s = std::max(s, 0.0);
        }
        state = apply_action(state, s, spec, h);
        out.s.push_back(s);
        out.b.push_back(state.b);
        out.theta.push_back(std::max(0.0, z[i] + s));
    }
    return out;
}

StorageSchedule replay(const NetLoadSeries& z, const std::vector<double>& s, const BatterySpec& spec, double b0,
                       double h) {
    if (z.size() != s.size()) {
        throw AlignmentError(fmt::format("{} actions for {} steps", s.size(), z.size()));
    }
    StorageSchedule out;
    out.s = s;
    BatteryState state{b0};
    for (std::size_t i = 0; i < s.size(); ++i) {
        state = apply_action(state, s[i], spec, h);
        out.b.push_back(state.b);
        out.theta.push_back(std::max(0.0, z[i] + s[i]));
    }
    return out;
}

}  // namespace mstor
