#pragma once

#include <cstddef>
#include <span>
#include <vector>

namespace sentdyn {

struct MannWhitneyResult {
    double u = 0.0;       // pairs (x > y) plus half the ties
    double p_value = 1.0; // one-sided, alternative: x stochastically greater than y
    bool exact = false;
};

// Combined sample sizes up to this limit use the exact permutation
// distribution (midranks for ties); larger samples use the normal
// approximation with tie and continuity corrections.
inline constexpr std::size_t kMannWhitneyExactLimit = 50;

MannWhitneyResult mann_whitney_greater(std::span<const double> x, std::span<const double> y);

// Sentiment distribution over uniform bins on [-1, 1] (same binning rule as
// the joint histograms).
struct BinnedDistribution {
    double bin_width = 0.05;
    std::vector<double> mass;
};

BinnedDistribution binned_distribution(std::span<const double> values, double bin_width = 0.05);

// w * sum_i |sum_{j <= i} (O_j - P_j)|. Throws on a binning mismatch.
double wasserstein_1(const BinnedDistribution& observed, const BinnedDistribution& predicted);

} // namespace sentdyn
