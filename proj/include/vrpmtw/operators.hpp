#pragma once

// Neighborhood operators and the fitness-guided shaking operator.
//
// Every local search is best-improvement: each pass scans the operator's whole
// neighborhood of the current solution, applies the move with the largest
// strict length decrease among the feasible ones, and repeats until no move
// improves. Candidate moves are checked by re-evaluating the one or two routes
// they touch.

#include <algorithm>
#include <array>
#include <cstdint>
#include <limits>
#include <optional>
#include <span>
#include <string_view>

#include "model.hpp"
#include "rng.hpp"

namespace vrpmtw {

enum class OperatorId : int {
    Shake = 0,
    TwoOpt,
    Move1,
    TwoOptStar,
    Swap1,
    Swap2,
    Swap3,
    Swap12,
    Swap13,
    Swap23,
    Relocate1,
    Relocate2,
    Relocate3,
};

inline constexpr int kOperatorCount = 13;
inline constexpr int kLocalSearchCount = 12;

inline constexpr std::array<std::string_view, kOperatorCount> kOperatorNames{
    "shake",   "2opt",    "move1",   "2opt-star", "swap1",     "swap2",     "swap3",
    "swap1-2", "swap1-3", "swap2-3", "relocate1", "relocate2", "relocate3"};

inline constexpr std::string_view operator_name(OperatorId op) { return kOperatorNames[static_cast<int>(op)]; }

inline std::optional<OperatorId> parse_operator(std::string_view name) {
    for (int i = 0; i < kOperatorCount; ++i)
        if (kOperatorNames[static_cast<std::size_t>(i)] == name) return static_cast<OperatorId>(i);
    return std::nullopt;
}

/// The local-search operators in catalog order (Shake excluded).
inline constexpr std::array<OperatorId, kLocalSearchCount> kLocalSearchOperators{
    OperatorId::TwoOpt,  OperatorId::Move1,  OperatorId::TwoOptStar, OperatorId::Swap1,
    OperatorId::Swap2,   OperatorId::Swap3,  OperatorId::Swap12,     OperatorId::Swap13,
    OperatorId::Swap23,  OperatorId::Relocate1, OperatorId::Relocate2, OperatorId::Relocate3};

/// Work counters, used by the virtual clock.
struct OperatorStats {
    std::int64_t moves_evaluated = 0;
    std::int64_t moves_applied = 0;

    OperatorStats& operator+=(const OperatorStats& o) {
        moves_evaluated += o.moves_evaluated;
        moves_applied += o.moves_applied;
        return *this;
    }
};

/// Improvement threshold and tie tolerance on length deltas.
inline constexpr double kImproveEps = 1e-9;

namespace detail {

struct SegmentMove {
    int m = 1;  // segment length taken from the first route
    int n = 1;  // segment length taken from the second route
};

inline SegmentMove segment_lengths(OperatorId op) {
    switch (op) {
        case OperatorId::Swap1: return {1, 1};
        case OperatorId::Swap2: return {2, 2};
        case OperatorId::Swap3: return {3, 3};
        case OperatorId::Swap12: return {1, 2};
        case OperatorId::Swap13: return {1, 3};
        case OperatorId::Swap23: return {2, 3};
        case OperatorId::Relocate1: return {1, 0};
        case OperatorId::Relocate2: return {2, 0};
        case OperatorId::Relocate3: return {3, 0};
        default: return {0, 0};
    }
}

/// Calls `fn(a, new_a, b, new_b)` for every move of `op` on `sol`. `b` is -1
/// for intra-route moves. The route buffers are reused between calls.
template <class Fn>
void for_each_move(const Solution& sol, OperatorId op, Fn&& fn) {
    Route na, nb;
    const int R = static_cast<int>(sol.routes.size());
    switch (op) {
        case OperatorId::TwoOpt:
            for (int a = 0; a < R; ++a) {
                const Route& A = sol.routes[static_cast<std::size_t>(a)];
                const int L = static_cast<int>(A.size());
                for (int i = 0; i < L; ++i)
                    for (int j = i + 1; j < L; ++j) {
                        na = A;
                        std::reverse(na.begin() + i, na.begin() + j + 1);
                        fn(a, na, -1, nb);
                    }
            }
            break;
        case OperatorId::Move1:
            for (int a = 0; a < R; ++a) {
                const Route& A = sol.routes[static_cast<std::size_t>(a)];
                const int L = static_cast<int>(A.size());
                for (int i = 0; i < L; ++i)
                    for (int j = 0; j < L; ++j) {
                        if (j == i) continue;
                        na = A;
                        const CustomerId c = na[static_cast<std::size_t>(i)];
                        na.erase(na.begin() + i);
                        na.insert(na.begin() + j, c);
                        fn(a, na, -1, nb);
                    }
            }
            break;
        case OperatorId::TwoOptStar:
            for (int a = 0; a < R; ++a)
                for (int b = a + 1; b < R; ++b) {
                    const Route& A = sol.routes[static_cast<std::size_t>(a)];
                    const Route& B = sol.routes[static_cast<std::size_t>(b)];
                    const int La = static_cast<int>(A.size()), Lb = static_cast<int>(B.size());
                    for (int i = 0; i <= La; ++i)
                        for (int j = 0; j <= Lb; ++j) {
                            if ((i == 0 && j == 0) || (i == La && j == Lb)) continue;
                            na.assign(A.begin(), A.begin() + i);
                            na.insert(na.end(), B.begin() + j, B.end());
                            nb.assign(B.begin(), B.begin() + j);
                            nb.insert(nb.end(), A.begin() + i, A.end());
                            fn(a, na, b, nb);
                        }
                }
            break;
        case OperatorId::Relocate1:
        case OperatorId::Relocate2:
        case OperatorId::Relocate3: {
            const int m = segment_lengths(op).m;
            for (int a = 0; a < R; ++a)
                for (int b = 0; b < R; ++b) {
                    if (a == b) continue;
                    const Route& A = sol.routes[static_cast<std::size_t>(a)];
                    const Route& B = sol.routes[static_cast<std::size_t>(b)];
                    const int La = static_cast<int>(A.size()), Lb = static_cast<int>(B.size());
                    for (int i = 0; i + m <= La; ++i)
                        for (int p = 0; p <= Lb; ++p) {
                            na.assign(A.begin(), A.begin() + i);
                            na.insert(na.end(), A.begin() + i + m, A.end());
                            nb.assign(B.begin(), B.begin() + p);
                            nb.insert(nb.end(), A.begin() + i, A.begin() + i + m);
                            nb.insert(nb.end(), B.begin() + p, B.end());
                            fn(a, na, b, nb);
                        }
                }
            break;
        }
        case OperatorId::Swap1:
        case OperatorId::Swap2:
        case OperatorId::Swap3:
        case OperatorId::Swap12:
        case OperatorId::Swap13:
        case OperatorId::Swap23: {
            const auto [m, n] = segment_lengths(op);
            for (int a = 0; a < R; ++a)
                for (int b = 0; b < R; ++b) {
                    // Equal lengths are symmetric in the route pair.
                    if (a == b || (m == n && b < a)) continue;
                    const Route& A = sol.routes[static_cast<std::size_t>(a)];
                    const Route& B = sol.routes[static_cast<std::size_t>(b)];
                    const int La = static_cast<int>(A.size()), Lb = static_cast<int>(B.size());
                    for (int i = 0; i + m <= La; ++i)
                        for (int j = 0; j + n <= Lb; ++j) {
                            na.assign(A.begin(), A.begin() + i);
                            na.insert(na.end(), B.begin() + j, B.begin() + j + n);
                            na.insert(na.end(), A.begin() + i + m, A.end());
                            nb.assign(B.begin(), B.begin() + j);
                            nb.insert(nb.end(), A.begin() + i, A.begin() + i + m);
                            nb.insert(nb.end(), B.begin() + j + n, B.end());
                            fn(a, na, b, nb);
                        }
                }
            break;
        }
        case OperatorId::Shake:
            break;
    }
}

inline Solution apply_move(const Solution& sol, int a, const Route& na, int b, const Route& nb) {
    Solution out = sol;
    out.routes[static_cast<std::size_t>(a)] = na;
    if (b >= 0) out.routes[static_cast<std::size_t>(b)] = nb;
    out.prune();
    return out;
}

}  // namespace detail

/// One best-improvement step. Returns the neighbor with the largest feasible
/// length decrease (ties within kImproveEps go to the lexicographically
/// smallest solution), or nothing at a local optimum.
inline std::optional<Solution> best_improving_move(const Instance& inst, const Solution& sol, OperatorId op,
                                                   OperatorStats* stats = nullptr) {
    std::vector<double> lengths;
    lengths.reserve(sol.routes.size());
    for (const Route& r : sol.routes) lengths.push_back(route_length(inst, r));

    double best_delta = -kImproveEps;
    std::optional<Solution> best;
    std::int64_t evaluated = 0;
    detail::for_each_move(sol, op, [&](int a, const Route& na, int b, const Route& nb) {
        ++evaluated;
        double delta = route_length(inst, na) - lengths[static_cast<std::size_t>(a)];
        if (b >= 0) delta += route_length(inst, nb) - lengths[static_cast<std::size_t>(b)];
        if (delta >= best_delta + kImproveEps) return;
        if (delta >= -kImproveEps) return;
        if (!route_feasible(inst, na) || (b >= 0 && !route_feasible(inst, nb))) return;
        Solution cand = detail::apply_move(sol, a, na, b, nb);
        if (!best || delta < best_delta - kImproveEps || cand < *best) {
            best_delta = std::min(best_delta, delta);
            best = std::move(cand);
        }
    });
    if (stats != nullptr) stats->moves_evaluated += evaluated;
    return best;
}

/// Runs `op` to a local optimum. `op` must not be Shake.
inline Solution local_search(const Instance& inst, Solution sol, OperatorId op, OperatorStats* stats = nullptr) {
    if (op == OperatorId::Shake) throw Error("local_search: Shake is not a local-search operator");
    require_feasible(inst, sol, "local_search");
    sol.prune();
    while (auto next = best_improving_move(inst, sol, op, stats)) {
        sol = std::move(*next);
        if (stats != nullptr) ++stats->moves_applied;
    }
    return sol;
}

enum class ShakeMode {
    FitnessGuided,  // remove the customers with the highest fitness
    RandomRemoval,  // remove uniformly random customers (comparison baseline)
};

/// ceil(0.2 * n), in integer arithmetic.
constexpr int shake_count(int n) noexcept { return (n + 4) / 5; }

/// The customers a fitness-guided shake removes, in reinsertion order.
inline std::vector<CustomerId> shake_removal_set(const Instance& inst, const Solution& sol) {
    auto ranking = fitness_table(inst, sol).ranking();
    ranking.resize(static_cast<std::size_t>(shake_count(inst.size())));
    return ranking;
}

/// Removes ceil(20%) of the customers and reinserts them one at a time, in
/// descending fitness order, at the cheapest feasible position in a route other
/// than the one they came from. A customer with no such position gets its own
/// route. `rng` breaks ties between equal-cost positions (and picks the
/// customers in RandomRemoval mode).
inline Solution shake(const Instance& inst, const Solution& sol, Rng& rng, ShakeMode mode = ShakeMode::FitnessGuided,
                      OperatorStats* stats = nullptr) {
    const FitnessTable fit = fitness_table(inst, sol);
    const int k = shake_count(inst.size());

    std::vector<CustomerId> removed;
    if (mode == ShakeMode::FitnessGuided) {
        removed = fit.ranking();
        removed.resize(static_cast<std::size_t>(k));
    } else {
        std::vector<CustomerId> pool(static_cast<std::size_t>(inst.size()));
        std::iota(pool.begin(), pool.end(), 1);
        for (int i = 0; i < k; ++i) {
            const auto j = static_cast<std::size_t>(i) + rng.below(pool.size() - static_cast<std::size_t>(i));
            std::swap(pool[static_cast<std::size_t>(i)], pool[j]);
        }
        pool.resize(static_cast<std::size_t>(k));
        std::stable_sort(pool.begin(), pool.end(), [&](CustomerId a, CustomerId b) {
            return fit[a] > fit[b] || (fit[a] == fit[b] && a < b);
        });
        removed = std::move(pool);
    }

    Solution work = sol;
    std::vector<int> origin(static_cast<std::size_t>(inst.size()) + 1, -1);
    for (std::size_t r = 0; r < work.routes.size(); ++r)
        for (CustomerId c : work.routes[r]) origin[static_cast<std::size_t>(c)] = static_cast<int>(r);
    for (CustomerId c : removed) std::erase(work.routes[static_cast<std::size_t>(origin[static_cast<std::size_t>(c)])], c);

    Route cand;
    for (CustomerId c : removed) {
        const int from = origin[static_cast<std::size_t>(c)];
        double best_cost = std::numeric_limits<double>::infinity();
        int best_route = -1, best_pos = -1, ties = 0;
        for (int r = 0; r < static_cast<int>(work.routes.size()); ++r) {
            const Route& route = work.routes[static_cast<std::size_t>(r)];
            if (r == from || route.empty()) continue;
            for (int p = 0; p <= static_cast<int>(route.size()); ++p) {
                if (stats != nullptr) ++stats->moves_evaluated;
                const int prev = p == 0 ? 0 : route[static_cast<std::size_t>(p - 1)];
                const int next = p == static_cast<int>(route.size()) ? 0 : route[static_cast<std::size_t>(p)];
                const double cost = inst.dist(prev, c) + inst.dist(c, next) - inst.dist(prev, next);
                if (cost > best_cost + 1e-12) continue;
                cand = route;
                cand.insert(cand.begin() + p, c);
                if (!route_feasible(inst, cand)) continue;
                if (cost < best_cost - 1e-12) {
                    best_cost = cost;
                    best_route = r;
                    best_pos = p;
                    ties = 1;
                } else if (rng.below(static_cast<std::uint64_t>(++ties)) == 0) {
                    best_route = r;
                    best_pos = p;
                }
            }
        }
        if (best_route < 0) {
            work.routes.push_back({c});
        } else {
            Route& route = work.routes[static_cast<std::size_t>(best_route)];
            route.insert(route.begin() + best_pos, c);
        }
        if (stats != nullptr) ++stats->moves_applied;
    }
    work.prune();
    return work;
}

/// Applies catalog entry `op`: a shake or a local search run to its optimum.
inline Solution apply_operator(const Instance& inst, const Solution& sol, OperatorId op, Rng& rng,
                               OperatorStats* stats = nullptr, ShakeMode mode = ShakeMode::FitnessGuided) {
    if (op == OperatorId::Shake) return shake(inst, sol, rng, mode, stats);
    return local_search(inst, sol, op, stats);
}

}  // namespace vrpmtw
