#pragma once

#include <cstddef>
#include <cstdint>
#include <vector>

#include "sentdyn/homophily.hpp"
#include "sentdyn/siebc/fit.hpp"
#include "sentdyn/stats.hpp"
#include "sentdyn/temporal.hpp"

namespace sentdyn::siebc {

struct KappaResult {
    double kappa = 0.0;
    std::vector<double> p_values; // per user, one-sided alpha_e > alpha_u
};

// Fraction of users whose alpha_e draws are stochastically larger than their
// alpha_u draws (Mann-Whitney, p < p_threshold).
KappaResult kappa(const PosteriorDraws& draws, double p_threshold = 0.05);

struct BoxSummary {
    double min = 0.0;
    double q1 = 0.0;
    double median = 0.0;
    double q3 = 0.0;
    double max = 0.0;
};

BoxSummary box_summary(std::vector<double> values);

struct PredictiveConfig {
    std::size_t max_draws = 0;        // per chain, over stored trajectories; 0 = all
    std::size_t homophily_draws = 50; // draws for the h distribution
    DifferenceConfig homophily{200, 0.05, 0};
    double bin_width = kDefaultBinWidth;
    std::uint64_t seed = 0;
};

struct PredictiveSummary {
    BinnedDistribution observed;
    BinnedDistribution predicted;
    double w1 = 0.0;
    std::vector<double> h_samples;
    BoxSummary h;
    double observed_h = 0.0;
    std::size_t draws_used = 0;
};

// Re-simulates every user's expressed values under posterior draws (each
// draw starts from its own sampled initial internal state) over the observed
// interaction skeletons. `timelines` must be aligned with draws.users.
PredictiveSummary posterior_predictive(const PosteriorDraws& draws, const std::vector<UserTimeline>& timelines,
                                       const PredictiveConfig& cfg);

struct DailyInternal {
    Date date;
    std::size_t users = 0;
    double median = 0.0;
    double q1 = 0.0;
    double q3 = 0.0;
};

// Posterior-median internal state of each user after each own comment,
// carried forward to a daily grid; per day the median and quartiles across
// users that have commented so far.
std::vector<DailyInternal> reconstruct_internal(const PosteriorDraws& draws);

// Same daily aggregation over explicit per-user trajectories (values[k] holds
// the state after the comment at times[k]).
std::vector<DailyInternal> aggregate_daily(const std::vector<std::vector<std::int64_t>>& times,
                                           const std::vector<std::vector<double>>& values);

} // namespace sentdyn::siebc
