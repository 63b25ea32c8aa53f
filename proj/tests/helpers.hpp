#pragma once

#include <vector>

#include "vrpmtw/gen.hpp"
#include "vrpmtw/model.hpp"
#include "vrpmtw/rng.hpp"

namespace testing_helpers {

using namespace vrpmtw;

struct Spot {
    double x, y;
    double demand = 10;
    std::vector<TimeWindow> windows = {{0, 1000}};
    double service = 10;
};

inline Instance make_instance(double depot_x, double depot_y, const std::vector<Spot>& spots, double capacity = 100,
                              TimeWindow horizon = {0, 1000}) {
    std::vector<Customer> cs;
    int id = 1;
    for (const Spot& s : spots) cs.push_back({id++, s.x, s.y, s.demand, s.service, s.windows});
    return Instance("test", 0, depot_x, depot_y, horizon, capacity, std::move(cs));
}

/// Wide single window, random coordinates; feasible in any order.
inline Instance random_wide_instance(int n, std::uint64_t seed, double demand = 10) {
    Rng rng(seed, "wide");
    std::vector<Spot> spots;
    for (int i = 0; i < n; ++i) spots.push_back({rng.uniform(0, 100), rng.uniform(0, 100), demand});
    return make_instance(rng.uniform(0, 100), rng.uniform(0, 100), spots);
}

/// A random feasible solution: a random permutation cut into routes
/// wherever the next customer would break feasibility.
inline Solution random_feasible_solution(const Instance& inst, Rng& rng, int max_route_len = 1000) {
    std::vector<CustomerId> perm(static_cast<std::size_t>(inst.size()));
    for (int i = 0; i < inst.size(); ++i) perm[static_cast<std::size_t>(i)] = i + 1;
    for (std::size_t i = perm.size(); i > 1; --i) std::swap(perm[i - 1], perm[rng.below(i)]);
    Solution sol;
    Route cur;
    for (CustomerId c : perm) {
        Route trial = cur;
        trial.push_back(c);
        if (!cur.empty() && (!route_feasible(inst, trial) || static_cast<int>(cur.size()) >= max_route_len)) {
            sol.routes.push_back(cur);
            cur = {c};
        } else {
            cur = std::move(trial);
        }
    }
    if (!cur.empty()) sol.routes.push_back(cur);
    return sol;
}

}  // namespace testing_helpers
