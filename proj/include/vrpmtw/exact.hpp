#pragma once

// Exact solver for small instances: depth-first enumeration of ordered
// customer partitions into routes, under the same schedule semantics as
// evaluate(), with optional pruning.

#include <algorithm>
#include <chrono>
#include <cstdint>
#include <limits>
#include <optional>

#include "model.hpp"

namespace vrpmtw {

struct ExactOptions {
    double time_limit = 60.0;  // seconds; <= 0 means unlimited
    /// Bound, capacity and partial-schedule pruning plus route-symmetry
    /// breaking. Disabling all of it gives plain enumeration of every ordered
    /// partition, checked only at the leaves.
    bool prune = true;
};

struct ExactResult {
    std::optional<Solution> solution;
    Metrics metrics;
    bool proven_optimal = false;
    /// Search completed without finding any feasible solution.
    bool infeasible = false;
    std::int64_t nodes = 0;
};

namespace detail {

class ExactSearch {
public:
    ExactSearch(const Instance& inst, const ExactOptions& opt)
        : inst_(inst),
          opt_(opt),
          n_(inst.size()),
          assigned_(static_cast<std::size_t>(n_) + 1, false),
          min_in_(static_cast<std::size_t>(n_) + 1, 0.0),
          start_(std::chrono::steady_clock::now()) {
        for (int u = 1; u <= n_; ++u) {
            double m = inst.dist(0, u);
            for (int v = 1; v <= n_; ++v)
                if (v != u) m = std::min(m, inst.dist(v, u));
            min_in_[static_cast<std::size_t>(u)] = m;
        }
        // Candidate successors of each node, nearest first.
        order_.resize(static_cast<std::size_t>(n_) + 1);
        for (int p = 0; p <= n_; ++p) {
            auto& o = order_[static_cast<std::size_t>(p)];
            for (int c = 1; c <= n_; ++c) o.push_back(c);
            std::stable_sort(o.begin(), o.end(), [&](int a, int b) { return inst.dist(p, a) < inst.dist(p, b); });
        }
    }

    ExactResult run() {
        ExactResult res;
        if (n_ == 0) {
            res.solution = Solution{};
            res.proven_optimal = true;
            return res;
        }
        if (opt_.prune)
            for (const Customer& c : inst_.customers()) {
                const CustomerId solo[] = {c.id};
                if (!route_feasible(inst_, solo)) {
                    res.infeasible = true;
                    res.proven_optimal = true;
                    return res;
                }
            }
        open_route();
        res.nodes = nodes_;
        res.proven_optimal = !timed_out_;
        if (best_) {
            res.solution = best_;
            res.metrics = metrics(inst_, *best_);
        } else {
            res.infeasible = !timed_out_;
        }
        return res;
    }

private:
    bool out_of_time() {
        if (timed_out_) return true;
        if (opt_.time_limit > 0 && (++nodes_ & 1023) == 0) {
            const std::chrono::duration<double> el = std::chrono::steady_clock::now() - start_;
            if (el.count() > opt_.time_limit) timed_out_ = true;
        } else if (opt_.time_limit <= 0) {
            ++nodes_;
        }
        return timed_out_;
    }

    int min_unassigned() const {
        for (int u = 1; u <= n_; ++u)
            if (!assigned_[static_cast<std::size_t>(u)]) return u;
        return 0;
    }

    /// Lower bound on the cost still to be added from the current state.
    double completion_bound() const {
        double in_sum = 0.0;
        double to_depot = cur_.empty() ? std::numeric_limits<double>::infinity() : inst_.dist(pos_, 0);
        for (int u = 1; u <= n_; ++u)
            if (!assigned_[static_cast<std::size_t>(u)]) {
                in_sum += min_in_[static_cast<std::size_t>(u)];
                to_depot = std::min(to_depot, inst_.dist(u, 0));
            }
        const double a = in_sum + (std::isfinite(to_depot) ? to_depot : 0.0);
        const double b = cur_.empty() ? 0.0 : inst_.dist(pos_, 0);
        return std::max(a, b);
    }

    void open_route() {
        required_ = opt_.prune ? min_unassigned() : 0;
        cur_.clear();
        pos_ = 0;
        time_ = inst_.horizon().open;
        load_ = 0.0;
        extend();
    }

    void extend() {
        if (out_of_time()) return;
        if (opt_.prune && best_ && closed_len_ + cur_len_ + completion_bound() >= best_len_ - kTol) return;

        // Close the current route.
        if (!cur_.empty() && (required_ == 0 || std::find(cur_.begin(), cur_.end(), required_) != cur_.end()))
            close_route();

        for (int c : order_[static_cast<std::size_t>(pos_)]) {
            if (assigned_[static_cast<std::size_t>(c)]) continue;
            const Customer& cu = inst_.customer(c);
            const double arrival = time_ + inst_.dist(pos_, c);
            double departure = arrival + cu.service_time;
            if (opt_.prune) {
                if (load_ + cu.demand > inst_.capacity()) continue;
                const auto m = earliest_window(cu, arrival);
                if (!m) continue;
                departure = std::max(arrival, cu.windows[static_cast<std::size_t>(*m)].open) + cu.service_time;
                if (departure + inst_.dist(c, 0) > inst_.horizon().close) continue;
            }
            const int saved_pos = pos_;
            const double saved_time = time_, saved_load = load_, saved_len = cur_len_;
            assigned_[static_cast<std::size_t>(c)] = true;
            cur_.push_back(c);
            cur_len_ += inst_.dist(pos_, c);
            pos_ = c;
            time_ = departure;
            load_ += cu.demand;
            extend();
            cur_.pop_back();
            assigned_[static_cast<std::size_t>(c)] = false;
            pos_ = saved_pos;
            time_ = saved_time;
            load_ = saved_load;
            cur_len_ = saved_len;
            if (timed_out_) return;
        }
    }

    void close_route() {
        const double len = cur_len_ + inst_.dist(pos_, 0);
        routes_.push_back(cur_);
        const double saved_closed = closed_len_;
        closed_len_ += len;

        const Route saved_cur = cur_;
        const int saved_pos = pos_, saved_required = required_;
        const double saved_time = time_, saved_load = load_, saved_len = cur_len_;
        if (min_unassigned() == 0) {
            record();
        } else {
            cur_len_ = 0.0;
            open_route();
        }
        cur_ = saved_cur;
        pos_ = saved_pos;
        required_ = saved_required;
        time_ = saved_time;
        load_ = saved_load;
        cur_len_ = saved_len;
        closed_len_ = saved_closed;
        routes_.pop_back();
    }

    void record() {
        Solution s{routes_};
        if (!opt_.prune && !is_feasible(inst_, s)) return;
        const double len = total_length(inst_, s);
        if (!best_ || len < best_len_ - kTol) {
            best_ = std::move(s);
            best_len_ = len;
        }
    }

    static constexpr double kTol = 1e-9;

    const Instance& inst_;
    ExactOptions opt_;
    int n_;
    std::vector<bool> assigned_;
    std::vector<double> min_in_;
    std::vector<std::vector<int>> order_;
    std::chrono::steady_clock::time_point start_;

    std::vector<Route> routes_;
    Route cur_;
    int pos_ = 0;
    int required_ = 0;
    double time_ = 0.0;
    double load_ = 0.0;
    double cur_len_ = 0.0;
    double closed_len_ = 0.0;

    std::optional<Solution> best_;
    double best_len_ = std::numeric_limits<double>::infinity();
    std::int64_t nodes_ = 0;
    bool timed_out_ = false;
};

}  // namespace detail

/// Minimum-length feasible solution, or the best found before the time limit.
inline ExactResult solve_exact(const Instance& inst, const ExactOptions& opt = {}) {
    const auto t0 = std::chrono::steady_clock::now();
    ExactResult res = detail::ExactSearch(inst, opt).run();
    res.metrics.solve_time = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    return res;
}

}  // namespace vrpmtw
