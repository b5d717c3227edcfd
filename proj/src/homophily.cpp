#include "sentdyn/homophily.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "sentdyn/parallel.hpp"
#include "sentdyn/rng.hpp"

namespace sentdyn {

HistogramGrid::HistogramGrid(double bin_width)
    : bin_width_(bin_width),
      // Tolerance keeps widths that divide 2 exactly (0.05 -> 40) from rounding up.
      bins_(static_cast<std::size_t>(std::ceil(2.0 / bin_width - 1e-9))),
      mass_(bins_ * bins_, 0.0) {
    if (!(bin_width > 0.0 && bin_width <= 2.0)) throw std::invalid_argument("bin width must lie in (0, 2]");
}

std::size_t HistogramGrid::bin_of(double s) const {
    const double k = std::floor((s + 1.0) / bin_width_);
    if (k <= 0.0) return 0;
    return std::min(static_cast<std::size_t>(k), bins_ - 1);
}

double HistogramGrid::midpoint(std::size_t k) const {
    return -1.0 + (static_cast<double>(k) + 0.5) * bin_width_;
}

double HistogramGrid::sum() const {
    double s = 0.0;
    for (double v : mass_) s += v;
    return s;
}

HistogramGrid HistogramGrid::transposed() const {
    HistogramGrid t(bin_width_);
    for (std::size_t i = 0; i < bins_; ++i) {
        for (std::size_t j = 0; j < bins_; ++j) t.at(j, i) = at(i, j);
    }
    return t;
}

bool HistogramGrid::same_binning(const HistogramGrid& other) const {
    return bins_ == other.bins_ && bin_width_ == other.bin_width_;
}

SentimentHistogram joint_histogram(std::span<const SentimentPair> pairs, double bin_width) {
    if (pairs.empty()) throw std::invalid_argument("joint_histogram of no pairs");
    SentimentHistogram h{HistogramGrid(bin_width), pairs.size()};
    for (const auto& [c, p] : pairs) {
        if (!(c >= -1.0 && c <= 1.0 && p >= -1.0 && p <= 1.0)) {
            throw std::invalid_argument("sentiment outside [-1, 1]");
        }
        h.grid.at(h.grid.bin_of(c), h.grid.bin_of(p)) += 1.0;
    }
    const double total = static_cast<double>(pairs.size());
    for (double& v : h.grid.values()) v /= total;
    return h;
}

namespace {

void check_pools(const NullSpec& spec) {
    if (spec.comment_pool.empty() || spec.context_pool.empty()) throw std::invalid_argument("null pools must be non-empty");
    if (spec.draws_per_context == 0) throw std::invalid_argument("draws per context must be at least 1");
}

// Bin counts (row-major) of total_pairs synthetic pairs.
void sample_null_counts(const NullSpec& spec, std::size_t total_pairs, Rng& rng, const HistogramGrid& grid,
                        std::uint32_t* counts) {
    const std::size_t nb = grid.bins();
    const auto nc = spec.comment_pool.size();
    const auto np = spec.context_pool.size();
    const auto draws = spec.draws_per_context;
    for (std::size_t k = 0; k < total_pairs; ++k) {
        const double c = spec.comment_pool[rng.index(nc)];
        double ctx = 0.0;
        for (std::size_t d = 0; d < draws; ++d) ctx += spec.context_pool[rng.index(np)];
        ctx /= static_cast<double>(draws);
        ++counts[grid.bin_of(c) * nb + grid.bin_of(ctx)];
    }
}

} // namespace

SentimentHistogram null_histogram(const NullSpec& spec, std::size_t total_pairs, std::uint64_t seed, double bin_width) {
    check_pools(spec);
    if (total_pairs == 0) throw std::invalid_argument("null histogram needs at least one pair");
    SentimentHistogram h{HistogramGrid(bin_width), total_pairs};
    std::vector<std::uint32_t> counts(h.grid.values().size(), 0);
    Rng rng(derive_seed(seed));
    sample_null_counts(spec, total_pairs, rng, h.grid, counts.data());
    const double total = static_cast<double>(total_pairs);
    for (std::size_t k = 0; k < counts.size(); ++k) h.grid.values()[k] = counts[k] / total;
    return h;
}

DifferenceHistogram difference_histogram(const SentimentHistogram& observed, const NullSpec& spec,
                                         const DifferenceConfig& cfg) {
    check_pools(spec);
    if (cfg.replicates < 100) throw std::invalid_argument("difference_histogram needs at least 100 replicates");
    const HistogramGrid& obs = observed.grid;
    const std::size_t cells = obs.values().size();
    const std::size_t reps = cfg.replicates;

    std::vector<std::uint32_t> counts(reps * cells, 0);
    parallel_for(reps, [&](std::size_t b) {
        Rng rng(derive_seed(cfg.seed, b));
        sample_null_counts(spec, observed.total_pairs, rng, obs, counts.data() + b * cells);
    });

    const double total = static_cast<double>(observed.total_pairs);
    DifferenceHistogram out{HistogramGrid(obs.bin_width()), HistogramGrid(obs.bin_width()),
                            HistogramGrid(obs.bin_width()), reps};
    for (std::size_t k = 0; k < cells; ++k) {
        double mean = 0.0;
        for (std::size_t b = 0; b < reps; ++b) mean += counts[b * cells + k];
        mean /= static_cast<double>(reps);
        // Work in count space so that ties between observed and replicate
        // counts compare exactly.
        const double obs_count = std::round(obs.values()[k] * total);
        const double dev = std::abs(obs_count - mean);
        std::size_t extreme = 0;
        for (std::size_t b = 0; b < reps; ++b) {
            if (std::abs(counts[b * cells + k] - mean) >= dev - 1e-9) ++extreme;
        }
        const double p = static_cast<double>(extreme) / static_cast<double>(reps);
        const double null_mass = mean / total;
        out.null_mean.values()[k] = null_mass;
        out.p_values.values()[k] = p;
        out.delta.values()[k] = p <= cfg.alpha ? obs.values()[k] - null_mass : 0.0;
    }
    return out;
}

double homophily_measure(const HistogramGrid& delta) {
    double h = 0.0;
    for (std::size_t i = 0; i < delta.bins(); ++i) {
        for (std::size_t j = 0; j < delta.bins(); ++j) {
            const double v = delta.at(i, j);
            if (v != 0.0) h += v * (1.0 - 2.0 * std::abs(delta.midpoint(i) - delta.midpoint(j)));
        }
    }
    return h;
}

TopicPairs comment_parent_pairs(const Corpus& corpus, Topic topic) {
    TopicPairs out;
    for (std::size_t i = 0; i < corpus.size(); ++i) {
        const Post& p = corpus.post(i);
        if (p.topic != topic || !p.sentiment) continue;
        if (p.is_submission) {
            out.null.context_pool.push_back(*p.sentiment);
            continue;
        }
        const auto& parent = corpus.post(corpus.parent(i)).sentiment;
        if (!parent) continue;
        out.pairs.emplace_back(*p.sentiment, *parent);
        out.null.comment_pool.push_back(*p.sentiment);
        out.null.context_pool.push_back(*p.sentiment);
    }
    return out;
}

ContextHomophilyResult context_homophily(const Corpus& corpus, Topic topic, std::size_t max_n,
                                         const DifferenceConfig& cfg, double bin_width) {
    if (max_n == 0) throw std::invalid_argument("context size must be positive");
    ContextHomophilyResult out;
    const ContextSet set = build_contexts(corpus, max_n, topic);
    out.report = set.report;

    std::vector<const ContextPair*> eligible;
    for (const auto& cp : set.pairs) {
        if (cp.topic == topic) eligible.push_back(&cp);
    }
    if (eligible.empty()) return out;

    const TopicPairs topic_pairs = comment_parent_pairs(corpus, topic);
    NullSpec null;
    for (const auto* cp : eligible) null.comment_pool.push_back(cp->focal_sentiment);
    null.context_pool = topic_pairs.null.context_pool;

    std::uint64_t stream = 0;
    for (std::size_t n = 1; n <= max_n; ++n) {
        for (ContextKind kind : {ContextKind::ancestral, ContextKind::user}) {
            std::vector<SentimentPair> pairs;
            pairs.reserve(eligible.size());
            for (const auto* cp : eligible) {
                const Context& ctx = kind == ContextKind::ancestral ? cp->ancestral : cp->user;
                pairs.emplace_back(cp->focal_sentiment, ctx.prefix_mean(n));
            }
            null.draws_per_context = n;
            DifferenceConfig sub = cfg;
            sub.seed = derive_seed(cfg.seed, static_cast<std::uint64_t>(topic), ++stream);
            const auto observed = joint_histogram(pairs, bin_width);
            const auto diff = difference_histogram(observed, null, sub);
            out.curve.push_back({n, kind, pairs.size(), homophily_measure(diff)});
        }
    }
    return out;
}

} // namespace sentdyn
