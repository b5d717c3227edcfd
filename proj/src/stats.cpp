#include "sentdyn/stats.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <numeric>
#include <stdexcept>

#include "sentdyn/homophily.hpp"

namespace sentdyn {

MannWhitneyResult mann_whitney_greater(std::span<const double> x, std::span<const double> y) {
    const std::size_t m = x.size();
    const std::size_t n = y.size();
    if (m == 0 || n == 0) throw std::invalid_argument("Mann-Whitney test needs two non-empty samples");
    const std::size_t total = m + n;

    std::vector<std::pair<double, bool>> pooled; // (value, from x)
    pooled.reserve(total);
    for (double v : x) pooled.emplace_back(v, true);
    for (double v : y) pooled.emplace_back(v, false);
    std::sort(pooled.begin(), pooled.end(), [](const auto& a, const auto& b) { return a.first < b.first; });

    // Doubled midranks are integers.
    std::vector<std::uint64_t> rank2(total);
    double tie_term = 0.0;
    std::uint64_t rank_sum2_x = 0;
    for (std::size_t i = 0; i < total;) {
        std::size_t j = i;
        while (j + 1 < total && pooled[j + 1].first == pooled[i].first) ++j;
        const std::uint64_t r2 = (i + 1) + (j + 1);
        for (std::size_t k = i; k <= j; ++k) {
            rank2[k] = r2;
            if (pooled[k].second) rank_sum2_x += r2;
        }
        const double t = static_cast<double>(j - i + 1);
        tie_term += t * t * t - t;
        i = j + 1;
    }

    MannWhitneyResult r;
    const double md = static_cast<double>(m);
    const double nd = static_cast<double>(n);
    r.u = static_cast<double>(rank_sum2_x) / 2.0 - md * (md + 1.0) / 2.0;

    if (total <= kMannWhitneyExactLimit) {
        // ways[k][s]: subsets of size k with doubled rank sum s.
        const std::uint64_t max_sum = std::accumulate(rank2.begin(), rank2.end(), std::uint64_t{0});
        std::vector<std::vector<double>> ways(m + 1, std::vector<double>(max_sum + 1, 0.0));
        ways[0][0] = 1.0;
        for (std::size_t item = 0; item < total; ++item) {
            const std::uint64_t r2 = rank2[item];
            for (std::size_t k = std::min(item + 1, m); k >= 1; --k) {
                auto& dst = ways[k];
                const auto& src = ways[k - 1];
                for (std::uint64_t s = max_sum; s >= r2; --s) {
                    if (src[s - r2] != 0.0) dst[s] += src[s - r2];
                }
            }
        }
        double tail = 0.0;
        double all = 0.0;
        for (std::uint64_t s = 0; s <= max_sum; ++s) {
            all += ways[m][s];
            if (s >= rank_sum2_x) tail += ways[m][s];
        }
        r.p_value = tail / all;
        r.exact = true;
        return r;
    }

    const double mean = md * nd / 2.0;
    const double var = md * nd / 12.0 * ((static_cast<double>(total) + 1.0) -
                                         tie_term / (static_cast<double>(total) * (static_cast<double>(total) - 1.0)));
    if (var <= 0.0) {
        r.p_value = 1.0;
        return r;
    }
    const double z = (r.u - mean - 0.5) / std::sqrt(var);
    r.p_value = 0.5 * std::erfc(z / std::sqrt(2.0));
    return r;
}

BinnedDistribution binned_distribution(std::span<const double> values, double bin_width) {
    if (values.empty()) throw std::invalid_argument("binned_distribution of no values");
    const HistogramGrid grid(bin_width);
    BinnedDistribution d{bin_width, std::vector<double>(grid.bins(), 0.0)};
    for (double v : values) {
        if (!(v >= -1.0 && v <= 1.0)) throw std::invalid_argument("sentiment outside [-1, 1]");
        d.mass[grid.bin_of(v)] += 1.0;
    }
    for (double& m : d.mass) m /= static_cast<double>(values.size());
    return d;
}

double wasserstein_1(const BinnedDistribution& observed, const BinnedDistribution& predicted) {
    if (observed.mass.size() != predicted.mass.size() || observed.bin_width != predicted.bin_width) {
        throw std::invalid_argument("wasserstein_1: distributions use different binnings");
    }
    double cumulative = 0.0;
    double total = 0.0;
    for (std::size_t i = 0; i < observed.mass.size(); ++i) {
        cumulative += observed.mass[i] - predicted.mass[i];
        total += std::abs(cumulative);
    }
    return observed.bin_width * total;
}

} // namespace sentdyn
