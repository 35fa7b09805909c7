#include "myobench/stats.hpp"

#include "myobench/error.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace myobench {

namespace {

/// Number of sign assignments reaching each doubled rank sum.
std::vector<double> signed_rank_counts(std::span<const int> doubled_ranks) {
    const int total = std::accumulate(doubled_ranks.begin(), doubled_ranks.end(), 0);
    std::vector<double> ways(static_cast<std::size_t>(total) + 1, 0.0);
    ways[0] = 1.0;
    int reach = 0;
    for (int r : doubled_ranks) {
        for (int s = reach; s >= 0; --s)
            if (ways[static_cast<std::size_t>(s)] != 0.0) ways[static_cast<std::size_t>(s + r)] += ways[static_cast<std::size_t>(s)];
        reach += r;
    }
    return ways;
}

}  // namespace

double signed_rank_cdf(std::span<const int> doubled_ranks, int doubled_w) {
    const auto ways = signed_rank_counts(doubled_ranks);
    const double total = std::ldexp(1.0, static_cast<int>(doubled_ranks.size()));
    double acc = 0.0;
    for (int s = 0; s <= doubled_w && s < static_cast<int>(ways.size()); ++s) acc += ways[static_cast<std::size_t>(s)];
    return acc / total;
}

ComparisonResult compare_paired(std::span<const double> a, std::span<const double> b) {
    if (a.size() != b.size()) throw DataError("paired comparison needs vectors of equal length");
    if (a.size() < 6) throw DataError("paired comparison needs at least 6 subjects, got " + std::to_string(a.size()));

    ComparisonResult r;
    r.a.assign(a.begin(), a.end());
    r.b.assign(b.begin(), b.end());

    std::vector<double> d;
    for (std::size_t i = 0; i < a.size(); ++i)
        if (a[i] - b[i] != 0.0) d.push_back(a[i] - b[i]);
    r.nonzero = static_cast<int>(d.size());
    if (d.empty()) {
        r.method = "exact";
        r.p_value = 1.0;
        return r;
    }

    // Average ranks of |d|, kept doubled so they stay integral.
    std::vector<std::size_t> order(d.size());
    std::iota(order.begin(), order.end(), 0);
    std::sort(order.begin(), order.end(), [&](std::size_t x, std::size_t y) { return std::abs(d[x]) < std::abs(d[y]); });
    std::vector<int> doubled(d.size());
    double tie_term = 0.0;
    for (std::size_t i = 0; i < order.size();) {
        std::size_t j = i;
        while (j + 1 < order.size() && std::abs(d[order[j + 1]]) == std::abs(d[order[i]])) ++j;
        const int twice_avg = static_cast<int>(i + j + 2);  // 2 * ((i+1 + j+1) / 2)
        for (std::size_t k = i; k <= j; ++k) doubled[order[k]] = twice_avg;
        const double t = static_cast<double>(j - i + 1);
        tie_term += t * t * t - t;
        i = j + 1;
    }
    int doubled_w = 0;
    for (std::size_t i = 0; i < d.size(); ++i)
        if (d[i] > 0) doubled_w += doubled[i];
    r.statistic = doubled_w / 2.0;

    const auto n = static_cast<double>(d.size());
    if (d.size() <= 25) {
        r.method = "exact";
        const int total = std::accumulate(doubled.begin(), doubled.end(), 0);
        const double lower = signed_rank_cdf(doubled, doubled_w);
        // P(W >= w) = P(W' <= total - w) by the symmetry W' = total - W.
        const double upper = signed_rank_cdf(doubled, total - doubled_w);
        r.p_value = std::min(1.0, 2.0 * std::min(lower, upper));
    } else {
        r.method = "normal";
        const double mean = n * (n + 1.0) / 4.0;
        const double var = n * (n + 1.0) * (2.0 * n + 1.0) / 24.0 - tie_term / 48.0;
        const double dev = std::abs(r.statistic - mean);
        const double z = var > 0.0 ? std::max(0.0, dev - 0.5) / std::sqrt(var) : 0.0;
        r.p_value = std::min(1.0, std::erfc(z / std::sqrt(2.0)));
    }
    r.significant = r.p_value < kSignificanceLevel;
    return r;
}

}  // namespace myobench
