#pragma once

#include <limits>
#include <string>

#include "model.hpp"

namespace vrpmtw {

/// Nearest-feasible-customer construction. Routes are grown one at a time from
/// the depot; each step appends the unrouted customer closest to the vehicle's
/// current position (ties to the lowest id) that fits the remaining capacity,
/// admits the arrival in some window, and still lets the vehicle reach the
/// depot before the horizon closes. A new route is opened when no customer
/// qualifies.
inline Solution greedy_construct(const Instance& inst) {
    for (const Customer& c : inst.customers()) {
        const CustomerId solo[] = {c.id};
        if (!route_feasible(inst, solo))
            throw InfeasibleError("customer " + std::to_string(c.id) + " cannot be served even on a dedicated route");
    }

    const auto n = static_cast<std::size_t>(inst.size());
    std::vector<bool> routed(n + 1, false);
    std::size_t remaining = n;
    Solution sol;

    while (remaining > 0) {
        Route route;
        int pos = 0;
        double t = inst.horizon().open;
        double load = 0.0;
        for (;;) {
            CustomerId pick = 0;
            double pick_dist = std::numeric_limits<double>::infinity();
            double pick_departure = 0.0;
            for (const Customer& c : inst.customers()) {
                if (routed[static_cast<std::size_t>(c.id)] || load + c.demand > inst.capacity()) continue;
                const double d = inst.dist(pos, c.id);
                if (!(d < pick_dist)) continue;
                const double arrival = t + d;
                const auto m = earliest_window(c, arrival);
                if (!m) continue;
                const double departure =
                    std::max(arrival, c.windows[static_cast<std::size_t>(*m)].open) + c.service_time;
                if (departure + inst.dist(c.id, 0) > inst.horizon().close) continue;
                pick = c.id;
                pick_dist = d;
                pick_departure = departure;
            }
            if (pick == 0) break;
            route.push_back(pick);
            routed[static_cast<std::size_t>(pick)] = true;
            --remaining;
            load += inst.customer(pick).demand;
            t = pick_departure;
            pos = pick;
        }
        sol.routes.push_back(std::move(route));
    }
    return sol;
}

}  // namespace vrpmtw
