#include "sentdyn/siebc/evaluation.hpp"

#include <algorithm>
#include <stdexcept>

#include "sentdyn/parallel.hpp"
#include "sentdyn/rng.hpp"

namespace sentdyn::siebc {

KappaResult kappa(const PosteriorDraws& draws, double p_threshold) {
    KappaResult out;
    if (draws.users.empty()) return out;
    std::size_t counted = 0;
    for (const auto& u : draws.users) {
        if (u.samples.size() < 2) throw std::invalid_argument("kappa needs at least two draws per user");
        const auto ae = u.parameter_draws(0);
        const auto au = u.parameter_draws(1);
        const double p = mann_whitney_greater(ae, au).p_value;
        out.p_values.push_back(p);
        if (p < p_threshold) ++counted;
    }
    out.kappa = static_cast<double>(counted) / static_cast<double>(draws.users.size());
    return out;
}

BoxSummary box_summary(std::vector<double> values) {
    if (values.empty()) return {};
    BoxSummary b;
    b.min = *std::min_element(values.begin(), values.end());
    b.max = *std::max_element(values.begin(), values.end());
    b.q1 = quantile(values, 0.25);
    b.median = quantile(values, 0.5);
    b.q3 = quantile(std::move(values), 0.75);
    return b;
}

namespace {

double homophily_of(const std::vector<double>& expressed, const std::vector<double>& parents,
                    const DifferenceConfig& cfg, double bin_width) {
    std::vector<SentimentPair> pairs(expressed.size());
    for (std::size_t i = 0; i < expressed.size(); ++i) pairs[i] = {expressed[i], parents[i]};
    const NullSpec null{expressed, parents, 1};
    const auto observed = joint_histogram(pairs, bin_width);
    return homophily_measure(difference_histogram(observed, null, cfg));
}

} // namespace

PredictiveSummary posterior_predictive(const PosteriorDraws& draws, const std::vector<UserTimeline>& timelines,
                                       const PredictiveConfig& cfg) {
    if (draws.users.size() != timelines.size()) throw std::invalid_argument("timelines do not match posterior users");
    if (draws.users.empty()) throw std::invalid_argument("posterior_predictive needs at least one user");

    std::vector<UserSeries> series;
    std::vector<double> observed;
    std::vector<double> parents;
    for (std::size_t i = 0; i < timelines.size(); ++i) {
        series.push_back(to_series(timelines[i]));
        if (series.back().user != draws.users[i].user || series.back().steps() + 1 != draws.users[i].latent_length) {
            throw std::invalid_argument("timeline '" + timelines[i].user + "' does not match its posterior");
        }
        observed.insert(observed.end(), series.back().expressed.begin(), series.back().expressed.end());
        parents.insert(parents.end(), series.back().parent.begin(), series.back().parent.end());
    }

    const UserPosterior& first = draws.users.front();
    const std::size_t chains = first.chains;
    const std::size_t stored = cfg.max_draws == 0 ? first.latent_draws : std::min(cfg.max_draws, first.latent_draws);
    const std::size_t thin = std::max<std::size_t>(draws.config.sampler.latent_thin, 1);
    const std::size_t n_draws = chains * stored;

    // predicted[d]: expressed values of all users, concatenated, under draw d.
    std::vector<std::vector<double>> predicted(n_draws);
    parallel_for(n_draws, [&](std::size_t d) {
        const std::size_t c = d / stored;
        const std::size_t s = d % stored;
        auto& out = predicted[d];
        out.reserve(observed.size());
        for (std::size_t i = 0; i < series.size(); ++i) {
            const UserPosterior& up = draws.users[i];
            const Params& p = up.sample(c, up.trajectory_draw(s, thin));
            const double u0 = up.trajectory(c, s)[0];
            const auto tr = simulate_series(series[i], p, u0, draws.config.model,
                                            derive_seed(cfg.seed, hash_string(up.user), c, s));
            out.insert(out.end(), tr.expressed.begin(), tr.expressed.end());
        }
    });

    PredictiveSummary sum;
    sum.draws_used = n_draws;
    sum.observed = binned_distribution(observed, cfg.bin_width);
    std::vector<double> pooled;
    pooled.reserve(n_draws * observed.size());
    for (const auto& p : predicted) pooled.insert(pooled.end(), p.begin(), p.end());
    sum.predicted = binned_distribution(pooled, cfg.bin_width);
    sum.w1 = wasserstein_1(sum.observed, sum.predicted);

    DifferenceConfig hc = cfg.homophily;
    hc.seed = derive_seed(cfg.seed, 0x6f6273ULL);
    sum.observed_h = homophily_of(observed, parents, hc, cfg.bin_width);
    const std::size_t hd = std::min(cfg.homophily_draws, n_draws);
    for (std::size_t k = 0; k < hd; ++k) {
        // Evenly spaced over the predictive draws.
        const std::size_t d = k * n_draws / hd;
        hc.seed = derive_seed(cfg.seed, 0x707265ULL, d);
        sum.h_samples.push_back(homophily_of(predicted[d], parents, hc, cfg.bin_width));
    }
    sum.h = box_summary(sum.h_samples);
    return sum;
}

std::vector<DailyInternal> aggregate_daily(const std::vector<std::vector<std::int64_t>>& times,
                                           const std::vector<std::vector<double>>& values) {
    if (times.size() != values.size()) throw std::invalid_argument("times and values differ in length");
    bool any = false;
    Date first{};
    Date last{};
    for (const auto& t : times) {
        if (t.empty()) continue;
        const Date a = Date::from_epoch_seconds(t.front());
        const Date b = Date::from_epoch_seconds(t.back());
        if (!any || a < first) first = a;
        if (!any || last < b) last = b;
        any = true;
    }
    std::vector<DailyInternal> out;
    if (!any) return out;

    std::vector<std::size_t> cursor(times.size(), 0);
    std::vector<double> today;
    for (Date d = first; !(last < d); d = d + 1) {
        const std::int64_t day_end = (d.days + 1) * 86400;
        today.clear();
        for (std::size_t u = 0; u < times.size(); ++u) {
            while (cursor[u] < times[u].size() && times[u][cursor[u]] < day_end) ++cursor[u];
            if (cursor[u] > 0) today.push_back(values[u][cursor[u] - 1]);
        }
        if (today.empty()) continue;
        DailyInternal row{d, today.size(), quantile(today, 0.5), quantile(today, 0.25), quantile(today, 0.75)};
        out.push_back(row);
    }
    return out;
}

std::vector<DailyInternal> reconstruct_internal(const PosteriorDraws& draws) {
    std::vector<std::vector<std::int64_t>> times;
    std::vector<std::vector<double>> medians;
    for (const auto& up : draws.users) {
        const std::size_t steps = up.latent_length - 1;
        std::vector<double> med(steps);
        std::vector<double> column;
        column.reserve(up.chains * up.latent_draws);
        for (std::size_t k = 1; k <= steps; ++k) {
            column.clear();
            for (std::size_t c = 0; c < up.chains; ++c) {
                for (std::size_t s = 0; s < up.latent_draws; ++s) column.push_back(up.trajectory(c, s)[k]);
            }
            med[k - 1] = quantile(column, 0.5);
        }
        times.push_back(up.times);
        medians.push_back(std::move(med));
    }
    return aggregate_daily(times, medians);
}

} // namespace sentdyn::siebc
