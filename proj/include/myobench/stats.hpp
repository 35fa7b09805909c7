#pragma once

#include <span>
#include <string>
#include <vector>

namespace myobench {

struct ComparisonResult {
    std::vector<double> a;
    std::vector<double> b;
    double statistic = 0.0;  // W+: sum of ranks of positive differences a - b
    int nonzero = 0;         // differences entering the ranking
    double p_value = 1.0;    // two-sided
    bool significant = false;
    std::string method;      // "exact" or "normal"
};

inline constexpr double kSignificanceLevel = 0.05;

/// Two-sided Wilcoxon signed-rank test on paired per-subject accuracies.
/// Zero differences are dropped; tied magnitudes get average ranks. The
/// null distribution is enumerated exactly for up to 25 nonzero pairs,
/// otherwise a tie-corrected normal approximation with continuity
/// correction is used. All-zero differences give p = 1.
/// Throws DataError unless |a| == |b| >= 6.
ComparisonResult compare_paired(std::span<const double> a, std::span<const double> b);

/// P(W+ <= w) under the null for the given doubled ranks (exact).
double signed_rank_cdf(std::span<const int> doubled_ranks, int doubled_w);

}  // namespace myobench
