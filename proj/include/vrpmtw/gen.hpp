#pragma once

// Seeded instance generator for the vending-machine replenishment setting:
// uniform coordinates, truncated-normal demands, and service windows drawn
// from three daily periods (morning, midday, evening).

#include <array>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>

#include "model.hpp"
#include "rng.hpp"

namespace vrpmtw {

enum class WindowMode { One, Two, Three, Mix };

inline std::string_view to_string(WindowMode m) {
    switch (m) {
        case WindowMode::One: return "1tw";
        case WindowMode::Two: return "2tw";
        case WindowMode::Three: return "3tw";
        case WindowMode::Mix: return "mix";
    }
    return "?";
}

inline std::optional<WindowMode> parse_window_mode(std::string_view s) {
    if (s == "1tw" || s == "1-TW") return WindowMode::One;
    if (s == "2tw" || s == "2-TW") return WindowMode::Two;
    if (s == "3tw" || s == "3-TW") return WindowMode::Three;
    if (s == "mix" || s == "Mix-TW") return WindowMode::Mix;
    return std::nullopt;
}

struct GenConfig {
    int n_customers = 10;
    WindowMode window_mode = WindowMode::Three;
    std::uint64_t seed = 0;
    double capacity = 100.0;
    TimeWindow horizon{0.0, 1000.0};
    double service_time = 10.0;
    double demand_mean = 15.0;
    double demand_std = 10.0;
    double demand_min = 1.0;
    double demand_max = 42.0;
};

/// Replenishment periods in clock hours.
inline constexpr std::array<std::array<double, 2>, 3> kPeriodHours{{{6.0, 9.0}, {11.0, 14.0}, {17.0, 20.0}}};

/// The three periods mapped linearly from a 24 h day onto the horizon.
inline std::array<TimeWindow, 3> canonical_periods(const TimeWindow& horizon) {
    std::array<TimeWindow, 3> out{};
    const double span = horizon.close - horizon.open;
    for (std::size_t p = 0; p < 3; ++p)
        out[p] = {horizon.open + span * kPeriodHours[p][0] / 24.0, horizon.open + span * kPeriodHours[p][1] / 24.0};
    return out;
}

inline std::string instance_name(const GenConfig& cfg) {
    return std::string(to_string(cfg.window_mode)) + "-n" + std::to_string(cfg.n_customers) + "-s" +
           std::to_string(cfg.seed);
}

inline Instance generate(const GenConfig& cfg) {
    if (cfg.n_customers < 1) throw StructuralError("n_customers must be >= 1");
    if (!(cfg.demand_min > 0 && cfg.demand_min <= cfg.demand_max && cfg.demand_max <= cfg.capacity))
        throw StructuralError("demand bounds must lie within (0, capacity]");

    Rng coords(cfg.seed, "coords");
    Rng demands(cfg.seed, "demands");
    Rng windows(cfg.seed, "windows");
    const auto periods = canonical_periods(cfg.horizon);

    const double depot_x = coords.uniform(0.0, 100.0);
    const double depot_y = coords.uniform(0.0, 100.0);

    std::vector<Customer> customers;
    customers.reserve(static_cast<std::size_t>(cfg.n_customers));
    for (int i = 1; i <= cfg.n_customers; ++i) {
        Customer c;
        c.id = i;
        c.x = coords.uniform(0.0, 100.0);
        c.y = coords.uniform(0.0, 100.0);
        c.demand = demands.truncated_normal(cfg.demand_mean, cfg.demand_std, cfg.demand_min, cfg.demand_max);
        c.service_time = cfg.service_time;

        std::array<bool, 3> use{false, false, false};
        switch (cfg.window_mode) {
            case WindowMode::One:
                use[windows.below(3)] = true;
                break;
            case WindowMode::Two:
                use = {true, true, true};
                use[windows.below(3)] = false;
                break;
            case WindowMode::Three:
                use = {true, true, true};
                break;
            case WindowMode::Mix:
                use = {true, true, true};
                // Always draw the dropped period so both branches consume the same stream.
                if (const auto dropped = windows.below(3); windows.coin()) use[dropped] = false;
                break;
        }
        for (std::size_t p = 0; p < 3; ++p)
            if (use[p]) c.windows.push_back(periods[p]);
        customers.push_back(std::move(c));
    }
    return Instance(instance_name(cfg), cfg.seed, depot_x, depot_y, cfg.horizon, cfg.capacity, std::move(customers));
}

}  // namespace vrpmtw
