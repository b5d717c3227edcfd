#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <string>

#include "fixtures.hpp"
#include "sentdyn/homophily.hpp"
#include "sentdyn/rng.hpp"

using namespace sentdyn;
using fixtures::comment;
using fixtures::submission;

namespace {

HistogramGrid random_grid(Rng& rng) {
    HistogramGrid g;
    for (auto& v : g.values()) v = rng.uniform(-0.01, 0.01);
    return g;
}

// Threads of constant sentiment; two authors alternate down each chain, so
// every deep comment matches all of its ancestral and user context.
Corpus echo_corpus(std::size_t threads, std::size_t depth, std::uint64_t seed) {
    Rng rng(seed);
    std::vector<Post> posts;
    std::int64_t t = 0;
    for (std::size_t k = 0; k < threads; ++k) {
        const double v = rng.uniform(-1.0, 1.0);
        const std::string s = "s" + std::to_string(k);
        posts.push_back(submission(s, "op" + std::to_string(k), t++, Topic::mask, v));
        std::string parent = s;
        for (std::size_t d = 1; d <= depth; ++d) {
            const std::string id = s + "c" + std::to_string(d);
            posts.push_back(comment(id, parent, "u" + std::to_string(k) + (d % 2 ? "a" : "b"), t++, Topic::mask, v));
            parent = id;
        }
    }
    return Corpus::from_posts(posts);
}

} // namespace

TEST_CASE("histogram grid binning") {
    const HistogramGrid g;
    CHECK(g.bins() == 40);
    CHECK(g.bin_of(-1.0) == 0);
    CHECK(g.bin_of(1.0) == 39);
    CHECK(g.bin_of(0.0) == 20);
    CHECK(g.bin_of(-1e-12) == 19);
    CHECK(g.bin_of(-0.95) == 1);
    CHECK(g.midpoint(0) == doctest::Approx(-0.975).epsilon(1e-15));
    CHECK(g.midpoint(39) == doctest::Approx(0.975).epsilon(1e-15));
    CHECK(HistogramGrid(0.1).bins() == 20);
    CHECK(HistogramGrid(0.3).bins() == 7);
    CHECK_THROWS(HistogramGrid(0.0));
}

TEST_CASE("joint_histogram") {
    SUBCASE("single bin") {
        const std::vector<SentimentPair> pairs(7, {0.0, 0.0});
        const auto h = joint_histogram(pairs);
        CHECK(h.total_pairs == 7);
        CHECK(h.grid.at(20, 20) == 1.0);
        CHECK(h.grid.sum() == 1.0);
    }
    SUBCASE("corners") {
        const std::vector<SentimentPair> pairs{{-1.0, -1.0}, {1.0, 1.0}};
        const auto h = joint_histogram(pairs);
        CHECK(h.grid.at(0, 0) == 0.5);
        CHECK(h.grid.at(39, 39) == 0.5);
    }
    SUBCASE("rows are comments, columns are contexts") {
        const std::vector<SentimentPair> pairs{{-1.0, 1.0}};
        CHECK(joint_histogram(pairs).grid.at(0, 39) == 1.0);
    }
    SUBCASE("uniform pairs within binomial error") {
        Rng rng(12);
        std::vector<SentimentPair> pairs(1000);
        for (auto& p : pairs) p = {rng.uniform(-1, 1), rng.uniform(-1, 1)};
        const auto h = joint_histogram(pairs);
        const double p = 1.0 / 1600.0;
        const double se = std::sqrt(p * (1 - p) / 1000.0);
        // With 0.625 expected pairs per bin the count is far from normal, so
        // compare the number of bins outside the 4-sigma band with the exact
        // binomial probability of landing there.
        double outside_prob = 0.0;
        for (int k = 0; k <= 1000; ++k) {
            const double log_pmf = std::lgamma(1001.0) - std::lgamma(k + 1.0) - std::lgamma(1001.0 - k) +
                                   k * std::log(p) + (1000 - k) * std::log1p(-p);
            if (std::abs(k / 1000.0 - p) > 4 * se) outside_prob += std::exp(log_pmf);
        }
        const double expected = 1600.0 * outside_prob;
        int outside = 0;
        for (double v : h.grid.values()) outside += std::abs(v - p) > 4 * se;
        CHECK(outside <= expected + 4 * std::sqrt(expected) + 1);
        for (double v : h.grid.values()) CHECK(v <= 0.01); // P(count >= 10) is below 1e-9 per bin
        CHECK(std::abs(h.grid.sum() - 1.0) < 1e-12);
    }
    SUBCASE("errors") {
        CHECK_THROWS(joint_histogram({}));
        const std::vector<SentimentPair> bad{{1.5, 0.0}};
        CHECK_THROWS(joint_histogram(bad));
    }
}

TEST_CASE("null_histogram") {
    SUBCASE("degenerate pools") {
        const auto h = null_histogram({{0.5}, {-0.5}, 1}, 100, 1);
        const HistogramGrid g;
        CHECK(h.grid.at(g.bin_of(0.5), g.bin_of(-0.5)) == 1.0);
    }
    SUBCASE("mean of two draws from {-1, 1}") {
        const std::size_t n = 100000;
        const auto h = null_histogram({{0.0}, {-1.0, 1.0}, 2}, n, 7);
        const HistogramGrid& g = h.grid;
        const double lo = g.at(20, 0);
        const double mid = g.at(20, 20);
        const double hi = g.at(20, 39);
        CHECK(std::abs(lo + mid + hi - 1.0) < 1e-12);
        CHECK(std::abs(lo - 0.25) < 4 * std::sqrt(0.25 * 0.75 / n));
        CHECK(std::abs(mid - 0.5) < 4 * std::sqrt(0.25 / n));
        CHECK(std::abs(hi - 0.25) < 4 * std::sqrt(0.25 * 0.75 / n));
    }
    SUBCASE("comment marginal follows the pool") {
        const std::size_t n = 50000;
        const auto h = null_histogram({{-0.9, -0.9, 0.3, 0.7}, {0.0}, 1}, n, 3);
        const HistogramGrid& g = h.grid;
        double row_lo = 0.0;
        for (std::size_t j = 0; j < g.bins(); ++j) row_lo += g.at(g.bin_of(-0.9), j);
        CHECK(std::abs(row_lo - 0.5) < 4 * std::sqrt(0.25 / n));
    }
    SUBCASE("seeded") {
        const NullSpec spec{{-0.3, 0.1, 0.8}, {-1.0, 0.2, 0.4, 0.9}, 3};
        CHECK(null_histogram(spec, 500, 9).grid.values() == null_histogram(spec, 500, 9).grid.values());
        CHECK(null_histogram(spec, 500, 9).grid.values() != null_histogram(spec, 500, 10).grid.values());
    }
    SUBCASE("errors") {
        CHECK_THROWS(null_histogram({{}, {0.0}, 1}, 10, 0));
        CHECK_THROWS(null_histogram({{0.0}, {0.0}, 0}, 10, 0));
    }
}

TEST_CASE("difference_histogram") {
    SUBCASE("observed equal to a degenerate null gives zero") {
        const NullSpec spec{{0.25}, {-0.6}, 1};
        const auto observed = null_histogram(spec, 300, 1);
        const auto d = difference_histogram(observed, spec, {200, 0.05, 4});
        for (double v : d.delta.values()) CHECK(v == 0.0);
        CHECK(d.replicates == 200);
    }
    SUBCASE("diagonal excess is significant") {
        Rng rng(2);
        std::vector<SentimentPair> pairs(4000);
        NullSpec spec;
        for (auto& p : pairs) {
            const double v = rng.uniform(-1, 1);
            p = {v, v};
            spec.comment_pool.push_back(v);
            spec.context_pool.push_back(v);
        }
        const auto d = difference_histogram(joint_histogram(pairs), spec, {200, 0.05, 5});
        for (std::size_t i = 0; i < d.delta.bins(); ++i) CHECK(d.delta.at(i, i) > 0.0);
        CHECK(homophily_measure(d) > 0.5);
    }
    SUBCASE("entries with p above alpha are zero and bounded") {
        Rng rng(6);
        std::vector<SentimentPair> pairs(800);
        NullSpec spec;
        for (auto& p : pairs) {
            const double v = rng.uniform(-1, 1);
            p = {v, std::clamp(v + rng.normal() * 0.3, -1.0, 1.0)};
            spec.comment_pool.push_back(p.first);
            spec.context_pool.push_back(p.second);
        }
        const auto d = difference_histogram(joint_histogram(pairs), spec, {150, 0.05, 8});
        for (std::size_t k = 0; k < d.delta.values().size(); ++k) {
            if (d.p_values.values()[k] > 0.05) CHECK(d.delta.values()[k] == 0.0);
            CHECK(std::abs(d.delta.values()[k]) <= 1.0);
            CHECK(d.p_values.values()[k] >= 0.0);
            CHECK(d.p_values.values()[k] <= 1.0);
        }
    }
    SUBCASE("result does not depend on the worker count") {
        const NullSpec spec{{-0.5, 0.0, 0.5, 0.9}, {-0.8, -0.1, 0.3}, 2};
        const auto observed = null_histogram(spec, 400, 77);
        const char* old = std::getenv("THREADS");
        const std::string saved = old ? old : "";
        setenv("THREADS", "1", 1);
        const auto one = difference_histogram(observed, spec, {120, 0.05, 3});
        setenv("THREADS", "4", 1);
        const auto four = difference_histogram(observed, spec, {120, 0.05, 3});
        if (old) {
            setenv("THREADS", saved.c_str(), 1);
        } else {
            unsetenv("THREADS");
        }
        CHECK(one.delta.values() == four.delta.values());
        CHECK(one.p_values.values() == four.p_values.values());
        CHECK(one.null_mean.values() == four.null_mean.values());
    }
    SUBCASE("needs at least 100 replicates") {
        const NullSpec spec{{0.0}, {0.0}, 1};
        CHECK_THROWS(difference_histogram(null_histogram(spec, 10, 0), spec, {99, 0.05, 0}));
    }
}

TEST_CASE("homophily_measure") {
    HistogramGrid g;
    CHECK(homophily_measure(g) == 0.0);
    g.at(13, 13) = 1.0;
    CHECK(std::abs(homophily_measure(g) - 1.0) < 1e-12);
    HistogramGrid corner;
    corner.at(0, 39) = 1.0;
    CHECK(std::abs(homophily_measure(corner) + 2.9) < 1e-12);

    Rng rng(31);
    for (int trial = 0; trial < 50; ++trial) {
        const HistogramGrid a = random_grid(rng);
        const HistogramGrid b = random_grid(rng);
        const double x = rng.uniform(-3, 3);
        const double y = rng.uniform(-3, 3);
        HistogramGrid mix;
        for (std::size_t k = 0; k < mix.values().size(); ++k) mix.values()[k] = x * a.values()[k] + y * b.values()[k];
        CHECK(std::abs(homophily_measure(mix) - (x * homophily_measure(a) + y * homophily_measure(b))) < 1e-12);
        CHECK(std::abs(homophily_measure(a.transposed()) - homophily_measure(a)) < 1e-12);
    }
}

TEST_CASE("comment_parent_pairs") {
    const Corpus c = Corpus::from_posts({
        submission("s", "x", 0, Topic::mask, 0.4),
        comment("a", "s", "y", 1, Topic::mask, -0.2),
        comment("b", "a", "z", 2, Topic::mask, 0.6),
        comment("n", "a", "z", 3, Topic::mask, std::nullopt),
        comment("q", "n", "z", 4, Topic::mask, 0.1),
        comment("l", "s", "z", 5, Topic::lockdown, 0.9),
    });
    const auto tp = comment_parent_pairs(c, Topic::mask);
    CHECK(tp.pairs == std::vector<SentimentPair>{{-0.2, 0.4}, {0.6, -0.2}});
    CHECK(tp.null.comment_pool == std::vector<double>{-0.2, 0.6});
    CHECK(tp.null.context_pool.size() == 3); // both comments plus the submission
    CHECK(tp.null.draws_per_context == 1);
}

TEST_CASE("context_homophily") {
    SUBCASE("comments equal to their contexts are homophilic at every n") {
        const Corpus c = echo_corpus(80, 12, 1);
        const auto r = context_homophily(c, Topic::mask, 5, {200, 0.05, 1});
        REQUIRE(r.curve.size() == 10);
        for (const auto& row : r.curve) {
            CHECK(row.h > 0.0);
            CHECK(row.pairs == r.curve.front().pairs);
        }
    }
    SUBCASE("n = 1 ancestral context is the parent") {
        const Corpus c = echo_corpus(5, 12, 2);
        for (const auto& p : build_contexts(c, 5).pairs) {
            CHECK(p.ancestral.prefix_mean(1) == *c.post(c.parent(p.focal)).sentiment);
        }
    }
    SUBCASE("independent sentiments stay near zero") {
        Rng rng(40);
        std::vector<Post> posts;
        std::int64_t t = 0;
        for (int k = 0; k < 150; ++k) {
            const std::string s = "s" + std::to_string(k);
            posts.push_back(submission(s, "op", t++, Topic::mask, rng.uniform(-1, 1)));
            std::string parent = s;
            for (int d = 1; d <= 12; ++d) {
                const std::string id = s + "c" + std::to_string(d);
                posts.push_back(comment(id, parent, "u" + std::to_string(rng.index(30)), t++, Topic::mask, rng.uniform(-1, 1)));
                parent = id;
            }
        }
        const auto r = context_homophily(Corpus::from_posts(posts), Topic::mask, 5, {200, 0.05, 2});
        REQUIRE_FALSE(r.curve.empty());
        for (const auto& row : r.curve) CHECK(std::abs(row.h) < 0.1);
    }
    SUBCASE("empty eligible set is not an error") {
        const Corpus c = echo_corpus(3, 2, 3);
        const auto r = context_homophily(c, Topic::mask, 5, {200, 0.05, 1});
        CHECK(r.curve.empty());
        CHECK(r.report.candidates == 6);
    }
}
