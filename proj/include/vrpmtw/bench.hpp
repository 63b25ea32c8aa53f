#pragma once

// Method dispatch, the benchmark harness and run manifests.

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cstdlib>
#include <ctime>
#include <iomanip>
#include <map>
#include <mutex>
#include <optional>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include "construct.hpp"
#include "exact.hpp"
#include "gen.hpp"
#include "io.hpp"
#include "neural.hpp"
#include "search.hpp"

namespace vrpmtw {

inline constexpr const char* kVersion = "0.1.0";

enum class Method { Greedy, Vns, Rvns, Avns, RlAvns, Exact };

inline constexpr std::array<Method, 6> kMethods{Method::Greedy, Method::Vns,    Method::Rvns,
                                                Method::Avns,   Method::RlAvns, Method::Exact};

inline std::string_view to_string(Method m) {
    switch (m) {
        case Method::Greedy: return "greedy";
        case Method::Vns: return "vns";
        case Method::Rvns: return "rvns";
        case Method::Avns: return "avns";
        case Method::RlAvns: return "rl-avns";
        case Method::Exact: return "exact";
    }
    return "?";
}

inline std::optional<Method> parse_method(std::string_view s) {
    for (Method m : kMethods)
        if (to_string(m) == s) return m;
    return std::nullopt;
}

struct RunResult {
    Solution solution;
    Metrics metrics;
    Trace trace;
};

/// Runs one method from a greedy start (the exact solver ignores the start).
/// `policy` is required for RL-AVNS. The reported solve time covers the
/// construction as well.
inline RunResult run_method(Method method, const Instance& inst, const SearchBudget& budget,
                            const nn::Network* policy = nullptr, const ExactOptions& exact = {}) {
    const auto t0 = std::chrono::steady_clock::now();
    RunResult out;
    if (method == Method::Exact) {
        ExactResult r = solve_exact(inst, exact);
        if (!r.solution) throw InfeasibleError(r.infeasible ? "exact: instance is infeasible" : "exact: no solution within the time limit");
        out.solution = std::move(*r.solution);
    } else {
        const Solution x0 = greedy_construct(inst);
        SearchResult r{x0, {}};
        switch (method) {
            case Method::Vns: r = vns(inst, x0, budget); break;
            case Method::Rvns: r = rvns(inst, x0, budget); break;
            case Method::Avns: r = avns(inst, x0, budget); break;
            case Method::RlAvns:
                if (policy == nullptr) throw Error("rl-avns requires a trained policy checkpoint");
                r = rl_avns(inst, x0, budget, *policy);
                break;
            default: break;
        }
        out.solution = std::move(r.best);
        out.trace = std::move(r.trace);
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    require_feasible(inst, out.solution, "run_method");
    out.metrics = metrics(inst, out.solution, secs);
    return out;
}

/// Percent improvement of `method` over `baseline`.
inline double gain(double baseline, double method) { return (baseline - method) / baseline * 100.0; }

/// Worker count: VRPMTW_WORKERS if set to a positive integer, otherwise the
/// hardware concurrency.
inline int worker_count() {
    if (const char* env = std::getenv("VRPMTW_WORKERS")) {
        const int n = std::atoi(env);
        if (n > 0) return n;
    }
    return std::max(1u, std::thread::hardware_concurrency());
}

/// Calls fn(i) for i in [0, n) on up to `workers` threads. The first
/// exception thrown is rethrown after all workers stop.
template <class F>
void parallel_for(int n, int workers, F&& fn) {
    std::atomic<int> next{0};
    std::exception_ptr error;
    std::mutex mu;
    auto work = [&] {
        for (int i; (i = next.fetch_add(1)) < n;) {
            try {
                fn(i);
            } catch (...) {
                std::lock_guard lock(mu);
                if (!error) error = std::current_exception();
                next = n;
            }
        }
    };
    {
        std::vector<std::jthread> pool;
        for (int w = 1; w < std::min(workers, n); ++w) pool.emplace_back(work);
        work();
    }
    if (error) std::rethrow_exception(error);
}

struct BenchRow {
    std::string instance;
    Method method = Method::Greedy;
    std::uint64_t seed = 0;
    Metrics metrics;
};

struct BenchConfig {
    std::vector<Method> methods;
    std::vector<std::uint64_t> seeds{0};
    SearchBudget budget{};
    ExactOptions exact{};
    int workers = 1;
};

/// Runs every instance x method x seed combination. Rows come back in a
/// fixed order regardless of scheduling.
inline std::vector<BenchRow> run_bench(const std::vector<Instance>& instances, const BenchConfig& cfg,
                                       const nn::Network* policy = nullptr) {
    if (instances.empty()) throw Error("bench: no instances");
    if (cfg.methods.empty()) throw Error("bench: no methods");
    struct Job {
        std::size_t inst;
        Method method;
        std::uint64_t seed;
    };
    std::vector<Job> jobs;
    for (std::size_t i = 0; i < instances.size(); ++i)
        for (Method m : cfg.methods)
            for (std::uint64_t s : cfg.seeds) jobs.push_back({i, m, s});
    std::vector<BenchRow> rows(jobs.size());
    parallel_for(static_cast<int>(jobs.size()), cfg.workers, [&](int j) {
        const Job& job = jobs[static_cast<std::size_t>(j)];
        SearchBudget b = cfg.budget;
        b.seed = job.seed;
        const RunResult r = run_method(job.method, instances[job.inst], b, policy, cfg.exact);
        rows[static_cast<std::size_t>(j)] = {instances[job.inst].name(), job.method, job.seed, r.metrics};
    });
    return rows;
}

struct MethodSummary {
    Method method = Method::Greedy;
    int runs = 0;
    double length = 0.0;
    double duration = 0.0;
    double vehicles = 0.0;
    double solve_time = 0.0;
};

/// Per-method means, in first-appearance order.
inline std::vector<MethodSummary> summarize(const std::vector<BenchRow>& rows) {
    std::vector<MethodSummary> out;
    for (const BenchRow& r : rows) {
        auto it = std::find_if(out.begin(), out.end(), [&](const MethodSummary& s) { return s.method == r.method; });
        if (it == out.end()) it = out.insert(out.end(), MethodSummary{r.method});
        ++it->runs;
        it->length += r.metrics.length;
        it->duration += r.metrics.duration;
        it->vehicles += r.metrics.vehicles_used;
        it->solve_time += r.metrics.solve_time;
    }
    for (MethodSummary& s : out) {
        s.length /= s.runs;
        s.duration /= s.runs;
        s.vehicles /= s.runs;
        s.solve_time /= s.runs;
    }
    return out;
}

/// Gain of RL-AVNS over AVNS in length and duration, when both were run.
inline std::optional<std::pair<double, double>> rl_gain(const std::vector<MethodSummary>& s) {
    auto find = [&](Method m) { return std::find_if(s.begin(), s.end(), [&](const MethodSummary& x) { return x.method == m; }); };
    const auto base = find(Method::Avns), rl = find(Method::RlAvns);
    if (base == s.end() || rl == s.end()) return std::nullopt;
    return std::pair{gain(base->length, rl->length), gain(base->duration, rl->duration)};
}

inline std::string summary_csv(const std::vector<MethodSummary>& s) {
    std::ostringstream os;
    os.precision(17);
    os << "method,runs,length,duration,vehicles,solve_time\n";
    for (const MethodSummary& m : s)
        os << to_string(m.method) << ',' << m.runs << ',' << m.length << ',' << m.duration << ',' << m.vehicles << ','
           << m.solve_time << '\n';
    if (const auto g = rl_gain(s)) os << "gain_pct,," << g->first << ',' << g->second << ",,\n";
    return os.str();
}

inline std::string summary_text(const std::vector<MethodSummary>& s) {
    std::ostringstream os;
    os << std::left << std::setw(10) << "method" << std::right << std::setw(6) << "runs" << std::setw(12) << "Length"
       << std::setw(12) << "Duration" << std::setw(8) << "K" << std::setw(12) << "t_solve" << '\n';
    os << std::fixed;
    for (const MethodSummary& m : s)
        os << std::left << std::setw(10) << to_string(m.method) << std::right << std::setw(6) << m.runs
           << std::setprecision(2) << std::setw(12) << m.length << std::setw(12) << m.duration << std::setw(8)
           << m.vehicles << std::setprecision(4) << std::setw(12) << m.solve_time << '\n';
    if (const auto g = rl_gain(s))
        os << std::left << std::setw(10) << "Gain(%)" << std::right << std::setw(6) << "" << std::setprecision(1)
           << std::setw(12) << g->first << std::setw(12) << g->second << '\n';
    return os.str();
}

inline std::string rows_csv(const std::vector<BenchRow>& rows) {
    std::ostringstream os;
    os.precision(17);
    os << "instance,method,seed,length,duration,vehicles,solve_time\n";
    for (const BenchRow& r : rows)
        os << r.instance << ',' << to_string(r.method) << ',' << r.seed << ',' << r.metrics.length << ','
           << r.metrics.duration << ',' << r.metrics.vehicles_used << ',' << r.metrics.solve_time << '\n';
    return os.str();
}

/// Paired comparison of fitness-guided and random-removal shaking.
struct ShakeStudy {
    std::vector<double> fitness_lengths;
    std::vector<double> random_lengths;
    int fitness_wins = 0;
    int random_wins = 0;
    int ties = 0;

    double mean_fitness() const { return mean(fitness_lengths); }
    double mean_random() const { return mean(random_lengths); }

    std::string direction() const {
        if (mean_fitness() < mean_random()) return "fitness-guided shaking shorter";
        if (mean_fitness() > mean_random()) return "random-removal shaking shorter";
        return "no difference";
    }

private:
    static double mean(const std::vector<double>& v) {
        double s = 0.0;
        for (double x : v) s += x;
        return v.empty() ? 0.0 : s / static_cast<double>(v.size());
    }
};

/// For each seed, generates an instance from `gen` and runs VNS with both
/// shaking modes under the same budget and search seed.
inline ShakeStudy shake_study(GenConfig gen, int seeds, SearchBudget budget, int workers = 1) {
    ShakeStudy st;
    st.fitness_lengths.resize(static_cast<std::size_t>(seeds));
    st.random_lengths.resize(static_cast<std::size_t>(seeds));
    parallel_for(seeds, workers, [&](int i) {
        GenConfig g = gen;
        g.seed = gen.seed + static_cast<std::uint64_t>(i);
        const Instance inst = generate(g);
        const Solution x0 = greedy_construct(inst);
        SearchBudget b = budget;
        b.seed = static_cast<std::uint64_t>(i);
        b.shake_mode = ShakeMode::FitnessGuided;
        st.fitness_lengths[static_cast<std::size_t>(i)] = total_length(inst, vns(inst, x0, b).best);
        b.shake_mode = ShakeMode::RandomRemoval;
        st.random_lengths[static_cast<std::size_t>(i)] = total_length(inst, vns(inst, x0, b).best);
    });
    for (int i = 0; i < seeds; ++i) {
        const double f = st.fitness_lengths[static_cast<std::size_t>(i)], r = st.random_lengths[static_cast<std::size_t>(i)];
        if (f < r - kImproveEps)
            ++st.fitness_wins;
        else if (r < f - kImproveEps)
            ++st.random_wins;
        else
            ++st.ties;
    }
    return st;
}

inline std::string shake_study_csv(const ShakeStudy& st) {
    std::ostringstream os;
    os.precision(17);
    os << "seed,fitness_guided,random_removal\n";
    for (std::size_t i = 0; i < st.fitness_lengths.size(); ++i)
        os << i << ',' << st.fitness_lengths[i] << ',' << st.random_lengths[i] << '\n';
    return os.str();
}

/// Reproducibility record written next to every result.
struct RunManifest {
    std::string command_line;
    std::uint64_t seed = 0;
    Json config = Json::object();
    std::string started_at;
    double wall_seconds = 0.0;
    std::vector<Json> rows;

    /// FNV-1a of the canonical config dump.
    std::string config_hash() const {
        std::ostringstream os;
        os << std::hex << std::setw(16) << std::setfill('0') << tag_hash(config.dump());
        return os.str();
    }

    Json to_json() const {
        return {{"command_line", command_line},
                {"seed", seed},
                {"config", config},
                {"config_hash", config_hash()},
                {"versions", {{"vrpmtw", kVersion}, {"schema", kSchemaVersion}}},
                {"started_at", started_at},
                {"wall_seconds", wall_seconds},
                {"rows", rows}};
    }
};

inline std::string utc_timestamp() {
    const std::time_t now = std::time(nullptr);
    std::tm tm{};
    gmtime_r(&now, &tm);
    char buf[32];
    std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
    return buf;
}

inline Json metrics_row(const std::string& instance, Method method, std::uint64_t seed, const Metrics& m) {
    Json j = to_json(m);
    j["instance"] = instance;
    j["method"] = std::string(to_string(method));
    j["seed"] = seed;
    return j;
}

}  // namespace vrpmtw
