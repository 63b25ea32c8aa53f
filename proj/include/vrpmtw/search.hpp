#pragma once

// Search drivers: VNS with a fixed operator order, RVNS with uniformly random
// operator choice, and AVNS with weight-adaptive ordering. One iteration is one
// operator application (a shake or a local search run to its optimum).

#include <algorithm>
#include <array>
#include <chrono>
#include <cstdint>
#include <numeric>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "model.hpp"
#include "operators.hpp"
#include "rng.hpp"

namespace vrpmtw {

struct SearchBudget {
    int max_iterations = 2000;
    double time_limit = 0.0;  // seconds; <= 0 disables the wall-clock limit
    std::uint64_t seed = 0;
    ShakeMode shake_mode = ShakeMode::FitnessGuided;
    /// RVNS/AVNS shake after this many consecutive non-improving applications.
    int shake_patience = 10;
};

struct TraceRow {
    int iteration = 0;
    double elapsed_seconds = 0.0;
    OperatorId op = OperatorId::Shake;
    double current_length = 0.0;
    double best_length = 0.0;
    bool improved = false;
    std::vector<double> weights;  // AVNS only, after this row's update
};

struct Trace {
    std::vector<TraceRow> rows;

    std::string to_csv() const {
        std::ostringstream os;
        os.precision(17);
        os << "iteration,elapsed_seconds,operator,current_length,best_length\n";
        for (const TraceRow& r : rows)
            os << r.iteration << ',' << r.elapsed_seconds << ',' << operator_name(r.op) << ',' << r.current_length
               << ',' << r.best_length << '\n';
        return os.str();
    }
};

struct SearchResult {
    Solution best;
    Trace trace;
};

namespace detail {

/// Best-so-far bookkeeping, budget accounting and trace recording shared by
/// every driver.
class SearchState {
public:
    SearchState(const Instance& inst, const Solution& x0, const SearchBudget& budget, const char* who)
        : inst_(inst), budget_(budget), start_(std::chrono::steady_clock::now()) {
        require_feasible(inst, x0, who);
        best_ = x0;
        best_.prune();
        best_len_ = total_length(inst, best_);
    }

    bool exhausted() const {
        if (iteration_ >= budget_.max_iterations) return true;
        return budget_.time_limit > 0 && elapsed() >= budget_.time_limit;
    }

    double elapsed() const {
        return std::chrono::duration<double>(std::chrono::steady_clock::now() - start_).count();
    }

    /// Records one application whose output is `current`; returns whether it
    /// strictly improved the best solution.
    bool record(OperatorId op, const Solution& current, double current_len) {
        const bool improved = current_len < best_len_ - kImproveEps;
        if (improved) {
            best_ = current;
            best_len_ = current_len;
        }
        trace_.rows.push_back({++iteration_, elapsed(), op, current_len, best_len_, improved, {}});
        return improved;
    }

    const Solution& best() const noexcept { return best_; }
    double best_length() const noexcept { return best_len_; }
    Trace& trace() noexcept { return trace_; }

    SearchResult finish() { return {std::move(best_), std::move(trace_)}; }

private:
    const Instance& inst_;
    SearchBudget budget_;
    std::chrono::steady_clock::time_point start_;
    Solution best_;
    double best_len_ = 0.0;
    int iteration_ = 0;
    Trace trace_;
};

}  // namespace detail

/// Basic VNS: for k over the fixed catalog order, shake the best solution and
/// run local search k on the result; on improvement accept and restart at the
/// first operator, otherwise move on to the next.
inline SearchResult vns(const Instance& inst, const Solution& x0, const SearchBudget& budget) {
    detail::SearchState st(inst, x0, budget, "vns");
    Rng rng(budget.seed, "vns");
    while (!st.exhausted()) {
        std::size_t k = 0;
        while (k < kLocalSearchOperators.size() && !st.exhausted()) {
            const double incumbent = st.best_length();
            Solution shaken = shake(inst, st.best(), rng, budget.shake_mode);
            st.record(OperatorId::Shake, shaken, total_length(inst, shaken));
            if (st.exhausted()) break;
            const OperatorId op = kLocalSearchOperators[k];
            Solution improved = local_search(inst, std::move(shaken), op);
            const double len = total_length(inst, improved);
            st.record(op, improved, len);
            k = len < incumbent - kImproveEps ? 0 : k + 1;
        }
    }
    return st.finish();
}

/// Random VNS: each iteration applies a uniformly drawn local-search operator
/// to the working solution; after `shake_patience` consecutive non-improving
/// applications the best solution is shaken into a new working solution.
inline SearchResult rvns(const Instance& inst, const Solution& x0, const SearchBudget& budget) {
    detail::SearchState st(inst, x0, budget, "rvns");
    Rng rng(budget.seed, "rvns");
    Rng shake_rng(budget.seed, "rvns-shake");
    Solution cur = st.best();
    int stale = 0;
    while (!st.exhausted()) {
        if (stale >= budget.shake_patience) {
            cur = shake(inst, st.best(), shake_rng, budget.shake_mode);
            st.record(OperatorId::Shake, cur, total_length(inst, cur));
            stale = 0;
            continue;
        }
        const OperatorId op = kLocalSearchOperators[rng.below(kLocalSearchCount)];
        cur = local_search(inst, std::move(cur), op);
        stale = st.record(op, cur, total_length(inst, cur)) ? 0 : stale + 1;
    }
    return st.finish();
}

/// Reward and penalty of the adaptive weight rule.
inline constexpr double kAvnsReward = 5.0;
inline constexpr double kAvnsPenalty = 1.0;

inline double avns_update(double weight, bool improved) noexcept {
    return improved ? weight + kAvnsReward : std::max(0.0, weight - kAvnsPenalty);
}

/// Weight-adaptive VNS. Every sweep visits the local-search operators in
/// descending weight order (ties by catalog index, order fixed at sweep
/// start). An operator that produces a new best solution gains 5, any other
/// loses 1 (floored at 0). Shaking follows the RVNS patience rule.
inline SearchResult avns(const Instance& inst, const Solution& x0, const SearchBudget& budget) {
    detail::SearchState st(inst, x0, budget, "avns");
    Rng rng(budget.seed, "avns-shake");
    std::vector<double> w(kLocalSearchCount, 1.0);
    Solution cur = st.best();
    int stale = 0;
    std::array<std::size_t, kLocalSearchCount> order{};
    while (!st.exhausted()) {
        std::iota(order.begin(), order.end(), std::size_t{0});
        std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return w[a] > w[b]; });
        for (std::size_t k : order) {
            if (st.exhausted()) break;
            if (stale >= budget.shake_patience) {
                cur = shake(inst, st.best(), rng, budget.shake_mode);
                st.record(OperatorId::Shake, cur, total_length(inst, cur));
                st.trace().rows.back().weights = w;
                stale = 0;
                if (st.exhausted()) break;
            }
            const OperatorId op = kLocalSearchOperators[k];
            cur = local_search(inst, std::move(cur), op);
            const bool improved = st.record(op, cur, total_length(inst, cur));
            w[k] = avns_update(w[k], improved);
            st.trace().rows.back().weights = w;
            stale = improved ? 0 : stale + 1;
        }
    }
    return st.finish();
}

}  // namespace vrpmtw
