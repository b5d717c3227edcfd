#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <utility>
#include <vector>

#include "sentdyn/corpus.hpp"

namespace sentdyn {

inline constexpr double kDefaultBinWidth = 0.05;

// Square grid of bins over [-1, 1]^2. Row index = comment sentiment, column
// index = context (parent) sentiment. Bins are half-open [a, a + w) except the
// last, which also holds +1.
class HistogramGrid {
public:
    HistogramGrid() : HistogramGrid(kDefaultBinWidth) {}
    explicit HistogramGrid(double bin_width);

    double bin_width() const { return bin_width_; }
    std::size_t bins() const { return bins_; }
    std::size_t bin_of(double s) const;
    double midpoint(std::size_t k) const;

    double& at(std::size_t i, std::size_t j) { return mass_[i * bins_ + j]; }
    double at(std::size_t i, std::size_t j) const { return mass_[i * bins_ + j]; }
    std::vector<double>& values() { return mass_; }
    const std::vector<double>& values() const { return mass_; }

    double sum() const;
    HistogramGrid transposed() const;
    bool same_binning(const HistogramGrid& other) const;

private:
    double bin_width_;
    std::size_t bins_;
    std::vector<double> mass_;
};

using SentimentPair = std::pair<double, double>; // (comment, context)

struct SentimentHistogram {
    HistogramGrid grid; // normalised: sums to 1
    std::size_t total_pairs = 0;
};

SentimentHistogram joint_histogram(std::span<const SentimentPair> pairs, double bin_width = kDefaultBinWidth);

// Randomly connected pairs: comment value drawn from comment_pool, context
// value the mean of `draws_per_context` draws from context_pool, all with
// replacement.
struct NullSpec {
    std::vector<double> comment_pool;
    std::vector<double> context_pool;
    std::size_t draws_per_context = 1;
};

SentimentHistogram null_histogram(const NullSpec& spec, std::size_t total_pairs, std::uint64_t seed,
                                  double bin_width = kDefaultBinWidth);

struct DifferenceHistogram {
    HistogramGrid delta;     // H - mean null, zeroed where p > alpha
    HistogramGrid null_mean; // mean of the null replicates
    HistogramGrid p_values;  // two-sided empirical p-value per bin
    std::size_t replicates = 0;
};

struct DifferenceConfig {
    std::size_t replicates = 1000;
    double alpha = 0.05;
    std::uint64_t seed = 0;
};

// Replicate b draws from its own stream derive_seed(seed, b); replicates run
// in parallel and the result does not depend on the worker count.
DifferenceHistogram difference_histogram(const SentimentHistogram& observed, const NullSpec& spec,
                                         const DifferenceConfig& cfg);

// h = sum over bins of mass * (1 - 2 |m_i - m_j|), m the bin midpoints. This
// equals w^2 * sum(density * (1 - 2|m_i - m_j|)) with density = mass / w^2.
double homophily_measure(const HistogramGrid& delta);
inline double homophily_measure(const DifferenceHistogram& d) { return homophily_measure(d.delta); }

// Comment-parent pairs on one topic plus the matching null pools: comment
// pool = paired comment sentiments, context pool = those plus the topic's
// submission sentiments.
struct TopicPairs {
    std::vector<SentimentPair> pairs;
    NullSpec null;
};

TopicPairs comment_parent_pairs(const Corpus& corpus, Topic topic);

struct ContextHomophily {
    std::size_t n = 0;
    ContextKind kind = ContextKind::ancestral;
    std::size_t pairs = 0;
    double h = 0.0;
};

struct ContextHomophilyResult {
    std::vector<ContextHomophily> curve; // empty if no eligible comments
    ContextReport report;
};

// h against the mean of the n nearest context members for n = 1..max_n. The
// eligible set is fixed at max_n for every n.
ContextHomophilyResult context_homophily(const Corpus& corpus, Topic topic, std::size_t max_n,
                                         const DifferenceConfig& cfg, double bin_width = kDefaultBinWidth);

} // namespace sentdyn
