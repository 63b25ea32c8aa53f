#pragma once

// Small statistics used by the acceptance checks.

#include <algorithm>
#include <cmath>
#include <numeric>
#include <vector>

namespace stats {

struct WilcoxonResult {
    double statistic = 0.0;  // min(W+, W-)
    double p_value = 1.0;    // two-sided
    int n = 0;               // non-zero differences
};

/// Two-sided Wilcoxon signed-rank test on paired differences. Zero
/// differences are dropped. The null distribution is exact for n <= 25
/// without tied magnitudes, otherwise the normal approximation with tie and
/// continuity corrections is used.
inline WilcoxonResult wilcoxon(const std::vector<double>& diffs) {
    std::vector<double> d;
    for (double x : diffs)
        if (x != 0.0) d.push_back(x);
    WilcoxonResult res;
    res.n = static_cast<int>(d.size());
    if (d.empty()) return res;

    const std::size_t n = d.size();
    std::vector<std::size_t> idx(n);
    std::iota(idx.begin(), idx.end(), std::size_t{0});
    std::sort(idx.begin(), idx.end(), [&](std::size_t a, std::size_t b) { return std::abs(d[a]) < std::abs(d[b]); });
    std::vector<double> rank(n);
    bool ties = false;
    double tie_term = 0.0;
    for (std::size_t i = 0; i < n;) {
        std::size_t j = i;
        while (j + 1 < n && std::abs(d[idx[j + 1]]) == std::abs(d[idx[i]])) ++j;
        const double avg = (static_cast<double>(i + 1) + static_cast<double>(j + 1)) / 2.0;
        for (std::size_t k = i; k <= j; ++k) rank[idx[k]] = avg;
        const double t = static_cast<double>(j - i + 1);
        if (t > 1) {
            ties = true;
            tie_term += t * t * t - t;
        }
        i = j + 1;
    }
    double w_plus = 0.0, w_minus = 0.0;
    for (std::size_t i = 0; i < n; ++i) (d[i] > 0 ? w_plus : w_minus) += rank[i];
    res.statistic = std::min(w_plus, w_minus);

    const double nn = static_cast<double>(n);
    if (n <= 25 && !ties) {
        // counts[s] = number of sign assignments with W+ = s.
        const int max_sum = static_cast<int>(n * (n + 1) / 2);
        std::vector<double> counts(static_cast<std::size_t>(max_sum) + 1, 0.0);
        counts[0] = 1.0;
        for (int r = 1; r <= static_cast<int>(n); ++r)
            for (int s = max_sum; s >= r; --s) counts[static_cast<std::size_t>(s)] += counts[static_cast<std::size_t>(s - r)];
        double below = 0.0;
        for (int s = 0; s <= static_cast<int>(res.statistic); ++s) below += counts[static_cast<std::size_t>(s)];
        res.p_value = std::min(1.0, 2.0 * below / std::pow(2.0, nn));
        return res;
    }
    const double mean = nn * (nn + 1) / 4.0;
    const double sd = std::sqrt(nn * (nn + 1) * (2 * nn + 1) / 24.0 - tie_term / 48.0);
    double dev = res.statistic - mean;
    if (dev != 0.0) dev -= 0.5 * (dev > 0 ? 1.0 : -1.0);
    res.p_value = std::min(1.0, std::erfc(std::abs(dev / sd) / std::sqrt(2.0)));
    return res;
}

/// Least-squares slope of y against x.
inline double slope(const std::vector<double>& x, const std::vector<double>& y) {
    const double n = static_cast<double>(x.size());
    const double mx = std::accumulate(x.begin(), x.end(), 0.0) / n, my = std::accumulate(y.begin(), y.end(), 0.0) / n;
    double sxy = 0.0, sxx = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        sxy += (x[i] - mx) * (y[i] - my);
        sxx += (x[i] - mx) * (x[i] - mx);
    }
    return sxy / sxx;
}

inline double mean(const std::vector<double>& v) { return std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(v.size()); }

}  // namespace stats
