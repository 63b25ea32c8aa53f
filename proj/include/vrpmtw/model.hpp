#pragma once

// Instances, solutions, schedule propagation and the temporal-flexibility
// (fitness) metric for the vehicle routing problem with multiple time windows.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <numeric>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace vrpmtw {

class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Malformed data: bad ids, broken invariants, unparsable files.
class StructuralError : public Error {
public:
    using Error::Error;
};

/// An operation that requires a feasible solution was given an infeasible one.
class InfeasibleError : public Error {
public:
    using Error::Error;
};

using CustomerId = int;

struct TimeWindow {
    double open = 0.0;
    double close = 0.0;

    bool contains(double t) const noexcept { return t >= open && t <= close; }
    friend bool operator==(const TimeWindow&, const TimeWindow&) = default;
};

struct Customer {
    CustomerId id = 0;
    double x = 0.0;
    double y = 0.0;
    double demand = 0.0;
    double service_time = 0.0;
    std::vector<TimeWindow> windows;

    friend bool operator==(const Customer&, const Customer&) = default;
};

/// Immutable problem data. Node 0 is the depot, node i is customer i.
class Instance {
public:
    Instance() = default;

    Instance(std::string name, std::uint64_t seed, double depot_x, double depot_y, TimeWindow horizon,
             double capacity, std::vector<Customer> customers)
        : name_(std::move(name)),
          seed_(seed),
          depot_x_(depot_x),
          depot_y_(depot_y),
          horizon_(horizon),
          capacity_(capacity),
          customers_(std::move(customers)) {
        validate();
        build_distances();
    }

    const std::string& name() const noexcept { return name_; }
    std::uint64_t seed() const noexcept { return seed_; }
    double depot_x() const noexcept { return depot_x_; }
    double depot_y() const noexcept { return depot_y_; }
    const TimeWindow& horizon() const noexcept { return horizon_; }
    double capacity() const noexcept { return capacity_; }
    std::span<const Customer> customers() const noexcept { return customers_; }
    int size() const noexcept { return static_cast<int>(customers_.size()); }

    bool has_customer(CustomerId id) const noexcept { return id >= 1 && id <= size(); }

    const Customer& customer(CustomerId id) const {
        if (!has_customer(id)) throw StructuralError("unknown customer id " + std::to_string(id));
        return customers_[static_cast<std::size_t>(id - 1)];
    }

    /// Euclidean distance between nodes (0 = depot). Also the travel time.
    double dist(int from, int to) const noexcept {
        return dist_[static_cast<std::size_t>(from) * static_cast<std::size_t>(size() + 1) +
                     static_cast<std::size_t>(to)];
    }

    double node_x(int node) const noexcept { return node == 0 ? depot_x_ : customers_[node - 1].x; }
    double node_y(int node) const noexcept { return node == 0 ? depot_y_ : customers_[node - 1].y; }

    friend bool operator==(const Instance& a, const Instance& b) {
        return a.name_ == b.name_ && a.seed_ == b.seed_ && a.depot_x_ == b.depot_x_ && a.depot_y_ == b.depot_y_ &&
               a.horizon_ == b.horizon_ && a.capacity_ == b.capacity_ && a.customers_ == b.customers_;
    }

private:
    void validate() const {
        if (!(horizon_.open < horizon_.close)) throw StructuralError("horizon must satisfy open < close");
        if (!(capacity_ > 0)) throw StructuralError("capacity must be positive");
        for (std::size_t i = 0; i < customers_.size(); ++i) {
            const Customer& c = customers_[i];
            const std::string who = "customer " + std::to_string(c.id);
            if (c.id != static_cast<int>(i) + 1) throw StructuralError("customer ids must be 1..N in order");
            if (c.demand < 1 || c.demand > capacity_) throw StructuralError(who + ": demand outside [1, capacity]");
            if (c.service_time < 0) throw StructuralError(who + ": negative service time");
            if (c.windows.empty()) throw StructuralError(who + ": no time windows");
            for (std::size_t m = 0; m < c.windows.size(); ++m) {
                const TimeWindow& w = c.windows[m];
                if (!(w.open < w.close)) throw StructuralError(who + ": window with open >= close");
                if (w.open < horizon_.open || w.close > horizon_.close)
                    throw StructuralError(who + ": window outside the horizon");
                if (m > 0 && !(c.windows[m - 1].close < w.open))
                    throw StructuralError(who + ": windows must be sorted and disjoint");
            }
        }
    }

    void build_distances() {
        const std::size_t n = customers_.size() + 1;
        dist_.assign(n * n, 0.0);
        for (std::size_t i = 0; i < n; ++i)
            for (std::size_t j = i + 1; j < n; ++j) {
                const double d = std::hypot(node_x(static_cast<int>(i)) - node_x(static_cast<int>(j)),
                                            node_y(static_cast<int>(i)) - node_y(static_cast<int>(j)));
                dist_[i * n + j] = d;
                dist_[j * n + i] = d;
            }
    }

    std::string name_;
    std::uint64_t seed_ = 0;
    double depot_x_ = 0.0;
    double depot_y_ = 0.0;
    TimeWindow horizon_{0.0, 1000.0};
    double capacity_ = 100.0;
    std::vector<Customer> customers_;
    std::vector<double> dist_;
};

/// Customer ids in visiting order. The depot is implicit at both ends.
using Route = std::vector<CustomerId>;

struct Solution {
    std::vector<Route> routes;

    /// Drops routes that no longer visit anyone.
    void prune() {
        std::erase_if(routes, [](const Route& r) { return r.empty(); });
    }

    friend bool operator==(const Solution&, const Solution&) = default;
    friend auto operator<=>(const Solution&, const Solution&) = default;
};

struct Visit {
    CustomerId customer = 0;
    double arrival = 0.0;
    double start = 0.0;
    int window_index = -1;  // -1 when no window admits the arrival
};

struct RouteSchedule {
    std::vector<Visit> visits;
    double load = 0.0;
    double length = 0.0;
    double return_time = 0.0;
    bool feasible = true;
};

struct Schedule {
    std::vector<RouteSchedule> routes;
    bool feasible = true;

    /// The visit of `id`, or nullptr if the customer is not scheduled.
    const Visit* find(CustomerId id) const noexcept {
        for (const auto& r : routes)
            for (const auto& v : r.visits)
                if (v.customer == id) return &v;
        return nullptr;
    }
};

struct Metrics {
    double length = 0.0;
    double duration = 0.0;
    int vehicles_used = 0;
    double solve_time = 0.0;
};

/// Index of the earliest window of `c` whose close is not before `arrival`.
inline std::optional<int> earliest_window(const Customer& c, double arrival) noexcept {
    for (std::size_t m = 0; m < c.windows.size(); ++m)
        if (c.windows[m].close >= arrival) return static_cast<int>(m);
    return std::nullopt;
}

/// Length of a single route including both depot legs.
inline double route_length(const Instance& inst, std::span<const CustomerId> route) {
    if (route.empty()) return 0.0;
    double len = inst.dist(0, route.front());
    for (std::size_t i = 1; i < route.size(); ++i) len += inst.dist(route[i - 1], route[i]);
    return len + inst.dist(route.back(), 0);
}

/// Forward-propagates one route from the depot at horizon open. Throws
/// StructuralError on ids outside the instance; infeasibility is reported in
/// the result.
inline RouteSchedule evaluate_route(const Instance& inst, std::span<const CustomerId> route) {
    RouteSchedule rs;
    rs.visits.reserve(route.size());
    double t = inst.horizon().open;
    int prev = 0;
    for (CustomerId id : route) {
        const Customer& c = inst.customer(id);
        Visit v;
        v.customer = id;
        v.arrival = t + inst.dist(prev, id);
        rs.length += inst.dist(prev, id);
        rs.load += c.demand;
        if (auto m = earliest_window(c, v.arrival)) {
            v.window_index = *m;
            v.start = std::max(v.arrival, c.windows[static_cast<std::size_t>(*m)].open);
        } else {
            rs.feasible = false;
            v.start = v.arrival;
        }
        t = v.start + c.service_time;
        prev = id;
        rs.visits.push_back(v);
    }
    rs.length += inst.dist(prev, 0);
    rs.return_time = route.empty() ? inst.horizon().open : t + inst.dist(prev, 0);
    if (rs.load > inst.capacity()) rs.feasible = false;
    if (rs.return_time > inst.horizon().close) rs.feasible = false;
    return rs;
}

/// Feasibility of one route without building the schedule.
inline bool route_feasible(const Instance& inst, std::span<const CustomerId> route) {
    double t = inst.horizon().open;
    double load = 0.0;
    int prev = 0;
    for (CustomerId id : route) {
        const Customer& c = inst.customer(id);
        load += c.demand;
        if (load > inst.capacity()) return false;
        const double arrival = t + inst.dist(prev, id);
        const auto m = earliest_window(c, arrival);
        if (!m) return false;
        t = std::max(arrival, c.windows[static_cast<std::size_t>(*m)].open) + c.service_time;
        prev = id;
    }
    return route.empty() || t + inst.dist(prev, 0) <= inst.horizon().close;
}

inline Schedule evaluate(const Instance& inst, const Solution& sol) {
    Schedule s;
    s.routes.reserve(sol.routes.size());
    for (const Route& r : sol.routes) {
        s.routes.push_back(evaluate_route(inst, r));
        s.feasible = s.feasible && s.routes.back().feasible;
    }
    return s;
}

inline double total_length(const Instance& inst, const Solution& sol) {
    double len = 0.0;
    for (const Route& r : sol.routes) len += route_length(inst, r);
    return len;
}

/// Checks that every customer appears exactly once and no unknown id is used.
inline bool covers_exactly_once(const Instance& inst, const Solution& sol) {
    std::vector<int> seen(static_cast<std::size_t>(inst.size()) + 1, 0);
    for (const Route& r : sol.routes)
        for (CustomerId id : r) {
            if (!inst.has_customer(id)) return false;
            if (++seen[static_cast<std::size_t>(id)] > 1) return false;
        }
    return std::all_of(seen.begin() + 1, seen.end(), [](int n) { return n == 1; });
}

/// Coverage + schedule feasibility.
inline bool is_feasible(const Instance& inst, const Solution& sol) {
    if (!covers_exactly_once(inst, sol)) return false;
    for (const Route& r : sol.routes)
        if (!route_feasible(inst, r)) return false;
    return true;
}

inline void require_feasible(const Instance& inst, const Solution& sol, const char* what) {
    if (!is_feasible(inst, sol)) throw InfeasibleError(std::string(what) + ": solution is infeasible");
}

inline Metrics metrics(const Instance& inst, const Solution& sol, double solve_time = 0.0) {
    Metrics m;
    m.solve_time = solve_time;
    for (const Route& r : sol.routes) {
        if (r.empty()) continue;
        const RouteSchedule rs = evaluate_route(inst, r);
        m.length += rs.length;
        m.duration += rs.return_time - inst.horizon().open;
        ++m.vehicles_used;
    }
    return m;
}

/// Temporal flexibility of a customer reached at `arrival`: distance to the
/// nearer boundary of the window containing the arrival, otherwise the wait
/// until the next window opens. Empty when every window has already closed.
inline std::optional<double> fitness(std::span<const TimeWindow> windows, double arrival) noexcept {
    for (const TimeWindow& w : windows)
        if (w.contains(arrival)) return std::min(arrival - w.open, w.close - arrival);
    std::optional<double> best;
    for (const TimeWindow& w : windows)
        if (w.open > arrival && (!best || w.open - arrival < *best)) best = w.open - arrival;
    return best;
}

inline std::optional<double> fitness(const Instance& inst, const Schedule& sched, CustomerId id) {
    const Visit* v = sched.find(id);
    if (v == nullptr) throw StructuralError("customer " + std::to_string(id) + " is not scheduled");
    return fitness(inst.customer(id).windows, v->arrival);
}

/// Fitness of every customer, indexed by id (entry 0 unused).
struct FitnessTable {
    std::vector<double> values;

    double operator[](CustomerId id) const { return values.at(static_cast<std::size_t>(id)); }
    int size() const noexcept { return static_cast<int>(values.size()) - 1; }

    /// Customer ids by descending fitness, ties by ascending id.
    std::vector<CustomerId> ranking() const {
        std::vector<CustomerId> ids(values.size() - 1);
        std::iota(ids.begin(), ids.end(), 1);
        std::stable_sort(ids.begin(), ids.end(), [&](CustomerId a, CustomerId b) {
            return values[static_cast<std::size_t>(a)] > values[static_cast<std::size_t>(b)];
        });
        return ids;
    }
};

inline FitnessTable fitness_table(const Instance& inst, const Solution& sol) {
    require_feasible(inst, sol, "fitness_table");
    const Schedule sched = evaluate(inst, sol);
    FitnessTable t;
    t.values.assign(static_cast<std::size_t>(inst.size()) + 1, 0.0);
    for (const RouteSchedule& r : sched.routes)
        for (const Visit& v : r.visits) {
            const auto f = fitness(inst.customer(v.customer).windows, v.arrival);
            if (!f) throw InfeasibleError("fitness undefined for customer " + std::to_string(v.customer));
            t.values[static_cast<std::size_t>(v.customer)] = *f;
        }
    return t;
}

}  // namespace vrpmtw
