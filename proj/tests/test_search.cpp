#include <gtest/gtest.h>

#include <cmath>

#include "vrpmtw/construct.hpp"
#include "vrpmtw/exact.hpp"
#include "vrpmtw/gen.hpp"
#include "vrpmtw/search.hpp"

using namespace vrpmtw;

namespace {

using Driver = SearchResult (*)(const Instance&, const Solution&, const SearchBudget&);

const std::pair<const char*, Driver> kDrivers[] = {{"vns", vns}, {"rvns", rvns}, {"avns", avns}};

void expect_monotone(const Trace& t) {
    for (std::size_t i = 1; i < t.rows.size(); ++i) EXPECT_LE(t.rows[i].best_length, t.rows[i - 1].best_length);
}

}  // namespace

TEST(Search, ZeroBudgetReturnsStart) {
    const Instance inst = generate({.n_customers = 10, .seed = 1});
    const Solution x0 = greedy_construct(inst);
    for (auto [name, run] : kDrivers) {
        const SearchResult r = run(inst, x0, {.max_iterations = 0});
        EXPECT_EQ(r.best, x0) << name;
        EXPECT_TRUE(r.trace.rows.empty());
    }
}

TEST(Search, NeverWorseFeasibleDeterministic) {
    for (std::uint64_t seed = 0; seed < 5; ++seed) {
        const Instance inst = generate({.n_customers = 12, .window_mode = WindowMode::Mix, .seed = seed});
        const Solution x0 = greedy_construct(inst);
        for (auto [name, run] : kDrivers) {
            const SearchBudget b{.max_iterations = 60, .seed = seed};
            const SearchResult r = run(inst, x0, b);
            EXPECT_TRUE(is_feasible(inst, r.best)) << name;
            EXPECT_LE(total_length(inst, r.best), total_length(inst, x0) + 1e-9) << name;
            EXPECT_EQ(r.trace.rows.size(), 60u) << name;
            expect_monotone(r.trace);
            EXPECT_NEAR(r.trace.rows.back().best_length, total_length(inst, r.best), 1e-9);
            EXPECT_EQ(run(inst, x0, b).best, r.best) << name;
        }
    }
}

TEST(Search, InfeasibleStartRejected) {
    const Instance inst = generate({.n_customers = 5, .seed = 1});
    const Solution bad{{{1, 2, 3, 4, 5}, {1}}};
    for (auto [name, run] : kDrivers) EXPECT_THROW(run(inst, bad, {}), InfeasibleError) << name;
}

TEST(Vns, AlternatesShakeAndCatalogOrder) {
    const Instance inst = generate({.n_customers = 10, .seed = 6});
    const SearchResult r = vns(inst, greedy_construct(inst), {.max_iterations = 8});
    ASSERT_EQ(r.trace.rows.size(), 8u);
    for (std::size_t i = 0; i < 8; i += 2) EXPECT_EQ(r.trace.rows[i].op, OperatorId::Shake);
    // k advances on failure and resets to the first operator on success.
    std::size_t k = 0;
    double incumbent = total_length(inst, greedy_construct(inst));
    for (std::size_t i = 1; i < 8; i += 2) {
        EXPECT_EQ(r.trace.rows[i].op, kLocalSearchOperators[k]);
        k = r.trace.rows[i].current_length < incumbent - 1e-9 ? 0 : k + 1;
        incumbent = r.trace.rows[i].best_length;
    }
}

TEST(Vns, CloseToExactOnSmallInstances) {
    double sum_vns = 0, sum_opt = 0;
    for (std::uint64_t seed = 0; seed < 20; ++seed) {
        const Instance inst = generate({.n_customers = 10, .window_mode = WindowMode::Three, .seed = 900 + seed});
        const ExactResult ex = solve_exact(inst, {.time_limit = 60});
        ASSERT_TRUE(ex.proven_optimal);
        const SearchResult r = vns(inst, greedy_construct(inst), {.max_iterations = 300, .seed = seed});
        const double len = total_length(inst, r.best);
        EXPECT_GE(len, ex.metrics.length - 1e-9);
        sum_vns += len;
        sum_opt += ex.metrics.length;
    }
    EXPECT_LE(sum_vns, 1.15 * sum_opt);
}

TEST(Rvns, OperatorDrawsAreUniform) {
    // The operator stream is independent of the search outcome, so the draws
    // can be replayed directly.
    Rng rng(42, "rvns");
    std::vector<int> hist(kLocalSearchCount, 0);
    const int n = 10000;
    for (int i = 0; i < n; ++i) ++hist[rng.below(kLocalSearchCount)];
    const double p = 1.0 / kLocalSearchCount, mean = n * p, sd = std::sqrt(n * p * (1 - p));
    for (int c : hist) EXPECT_NEAR(c, mean, 3 * sd);
}

TEST(Rvns, ShakesAfterPatienceRunsOut) {
    const Instance inst = generate({.n_customers = 10, .seed = 2});
    const SearchResult r = rvns(inst, greedy_construct(inst), {.max_iterations = 200, .seed = 2});
    int stale = 0;
    for (const TraceRow& row : r.trace.rows) {
        if (row.op == OperatorId::Shake) {
            EXPECT_EQ(stale, 10);
            stale = 0;
            continue;
        }
        stale = row.improved ? 0 : stale + 1;
        EXPECT_LE(stale, 10);
    }
}

TEST(Avns, WeightRule) {
    EXPECT_EQ(avns_update(1, true), 6);
    EXPECT_EQ(avns_update(0, false), 0);
    EXPECT_EQ(avns_update(3, false), 2);
}

TEST(Avns, WeightsReplayFromImprovementFlags) {
    for (std::uint64_t seed = 0; seed < 5; ++seed) {
        const Instance inst = generate({.n_customers = 12, .window_mode = WindowMode::Two, .seed = seed});
        const SearchResult r = avns(inst, greedy_construct(inst), {.max_iterations = 150, .seed = seed});
        std::vector<double> w(kLocalSearchCount, 1.0);
        for (const TraceRow& row : r.trace.rows) {
            if (row.op != OperatorId::Shake) {
                auto& wk = w[static_cast<std::size_t>(static_cast<int>(row.op) - 1)];
                wk = avns_update(wk, row.improved);
            }
            EXPECT_EQ(row.weights, w);
        }
    }
}

TEST(Avns, SweepsFollowDescendingWeights) {
    const Instance inst = generate({.n_customers = 12, .window_mode = WindowMode::Mix, .seed = 17});
    const SearchResult r = avns(inst, greedy_construct(inst), {.max_iterations = 12});
    // First sweep: all weights equal, catalog order.
    std::size_t k = 0;
    for (const TraceRow& row : r.trace.rows)
        if (row.op != OperatorId::Shake) {
            EXPECT_EQ(row.op, kLocalSearchOperators[k++]);
        }
}

TEST(Trace, CsvLayout) {
    const Instance inst = generate({.n_customers = 6, .seed = 3});
    const SearchResult r = rvns(inst, greedy_construct(inst), {.max_iterations = 3});
    const std::string csv = r.trace.to_csv();
    EXPECT_EQ(csv.substr(0, csv.find('\n')), "iteration,elapsed_seconds,operator,current_length,best_length");
    EXPECT_EQ(std::count(csv.begin(), csv.end(), '\n'), 4);
}
