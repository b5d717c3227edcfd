#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <vector>

#include "sentdyn/rng.hpp"
#include "sentdyn/stats.hpp"

using namespace sentdyn;

namespace {

double u_statistic(const std::vector<double>& x, const std::vector<double>& y) {
    double u = 0.0;
    for (double a : x) {
        for (double b : y) u += a > b ? 1.0 : (a == b ? 0.5 : 0.0);
    }
    return u;
}

// P(U >= u_obs) over every relabelling of the pooled sample.
double permutation_p(const std::vector<double>& x, const std::vector<double>& y) {
    std::vector<double> pooled(x);
    pooled.insert(pooled.end(), y.begin(), y.end());
    const unsigned n = static_cast<unsigned>(pooled.size());
    const double observed = u_statistic(x, y);
    double hits = 0.0;
    double total = 0.0;
    for (unsigned mask = 0; mask < (1u << n); ++mask) {
        if (static_cast<std::size_t>(__builtin_popcount(mask)) != x.size()) continue;
        std::vector<double> a;
        std::vector<double> b;
        for (unsigned k = 0; k < n; ++k) (mask >> k & 1u ? a : b).push_back(pooled[k]);
        total += 1.0;
        if (u_statistic(a, b) >= observed - 1e-9) hits += 1.0;
    }
    return hits / total;
}

BinnedDistribution random_distribution(Rng& rng, std::size_t bins, double w) {
    BinnedDistribution d{w, std::vector<double>(bins)};
    double sum = 0.0;
    for (auto& v : d.mass) {
        v = rng.uniform() < 0.3 ? 0.0 : rng.uniform();
        sum += v;
    }
    if (sum == 0.0) {
        d.mass[0] = 1.0;
        return d;
    }
    for (auto& v : d.mass) v /= sum;
    return d;
}

} // namespace

TEST_CASE("Mann-Whitney hand example") {
    const std::vector<double> x{3, 4};
    const std::vector<double> y{1, 2};
    const auto r = mann_whitney_greater(x, y);
    CHECK(r.exact);
    CHECK(r.u == 4.0);
    CHECK(std::abs(r.p_value - 1.0 / 6.0) < 1e-15);
}

TEST_CASE("Mann-Whitney exact p-values match enumeration") {
    Rng rng(1);
    for (std::size_t m = 1; m <= 9; ++m) {
        for (std::size_t n = 1; m + n <= 10; ++n) {
            for (int trial = 0; trial < 6; ++trial) {
                // Few distinct values so that ties are common.
                const double levels = trial % 2 ? 4.0 : 1000.0;
                std::vector<double> x(m);
                std::vector<double> y(n);
                for (auto& v : x) v = std::floor(rng.uniform() * levels);
                for (auto& v : y) v = std::floor(rng.uniform() * levels);
                const auto r = mann_whitney_greater(x, y);
                CHECK(r.exact);
                CHECK(r.u == u_statistic(x, y));
                CHECK(std::abs(r.p_value - permutation_p(x, y)) < 1e-12);
            }
        }
    }
}

TEST_CASE("Mann-Whitney large samples") {
    std::vector<double> x(3000);
    std::vector<double> y(3000);
    for (std::size_t k = 0; k < 3000; ++k) {
        x[k] = 1.0 + static_cast<double>(k) * 1e-4;
        y[k] = 0.5 - static_cast<double>(k) * 1e-4;
    }
    const auto sep = mann_whitney_greater(x, y);
    CHECK_FALSE(sep.exact);
    CHECK(sep.p_value < 1e-12);
    const auto same = mann_whitney_greater(x, x);
    CHECK(same.p_value > 0.4);
    CHECK(mann_whitney_greater(y, x).p_value > 0.999);

    SUBCASE("normal approximation tracks the exact law at the boundary") {
        Rng rng(3);
        std::vector<double> a(25);
        std::vector<double> b(25);
        for (auto& v : a) v = rng.normal() + 0.3;
        for (auto& v : b) v = rng.normal();
        std::vector<double> a2(a);
        a2.push_back(100.0); // 51 values switch to the approximation
        std::vector<double> b2(b);
        b2.push_back(-100.0);
        const auto exact = mann_whitney_greater(a, b);
        const auto approx = mann_whitney_greater(a2, b2);
        CHECK(exact.exact);
        CHECK_FALSE(approx.exact);
        CHECK(approx.p_value == doctest::Approx(exact.p_value).epsilon(0.5));
    }
    SUBCASE("invariant under a common monotone transform") {
        Rng rng(9);
        std::vector<double> a(80);
        std::vector<double> b(70);
        for (auto& v : a) v = rng.uniform();
        for (auto& v : b) v = rng.uniform() * 0.9;
        auto ta = a;
        auto tb = b;
        for (auto& v : ta) v = std::exp(3 * v) - 7;
        for (auto& v : tb) v = std::exp(3 * v) - 7;
        CHECK(mann_whitney_greater(a, b).p_value == mann_whitney_greater(ta, tb).p_value);
    }
    CHECK_THROWS(mann_whitney_greater(std::vector<double>{}, x));
}

TEST_CASE("binned distributions and W1") {
    const std::vector<double> one{0.0};
    const auto d0 = binned_distribution(one);
    CHECK(d0.mass.size() == 40);
    CHECK(d0.mass[20] == 1.0);
    CHECK(binned_distribution(std::vector<double>{1.0}).mass[39] == 1.0);

    SUBCASE("examples") {
        BinnedDistribution a{0.05, std::vector<double>(40, 0.0)};
        BinnedDistribution b = a;
        a.mass[10] = 1.0;
        b.mass[11] = 1.0;
        CHECK(wasserstein_1(a, a) == 0.0);
        CHECK(std::abs(wasserstein_1(a, b) - 0.05) < 1e-15);
        for (std::size_t k = 0; k < 40; ++k) {
            BinnedDistribution c{0.05, std::vector<double>(40, 0.0)};
            c.mass[k] = 1.0;
            CHECK(std::abs(wasserstein_1(a, c) - 0.05 * std::abs(static_cast<double>(k) - 10.0)) < 1e-12);
        }
    }
    SUBCASE("metric axioms") {
        Rng rng(15);
        for (int trial = 0; trial < 1000; ++trial) {
            const auto p = random_distribution(rng, 40, 0.05);
            const auto q = random_distribution(rng, 40, 0.05);
            const auto r = random_distribution(rng, 40, 0.05);
            const double pq = wasserstein_1(p, q);
            CHECK(pq >= 0.0);
            CHECK(std::abs(pq - wasserstein_1(q, p)) < 1e-12);
            CHECK(wasserstein_1(p, p) == 0.0);
            CHECK(pq <= wasserstein_1(p, r) + wasserstein_1(r, q) + 1e-12);
        }
    }
    SUBCASE("binning mismatch") {
        CHECK_THROWS(wasserstein_1(BinnedDistribution{0.05, std::vector<double>(40, 0.025)},
                                   BinnedDistribution{0.1, std::vector<double>(20, 0.05)}));
    }
}
