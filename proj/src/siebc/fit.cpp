#include "sentdyn/siebc/fit.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <stdexcept>

#include "sentdyn/parallel.hpp"
#include "sentdyn/rng.hpp"
#include "sentdyn/siebc/truncated_normal.hpp"

namespace sentdyn::siebc {

namespace {

constexpr double kNegInf = -std::numeric_limits<double>::infinity();
constexpr double kLogLo = -20.0;
constexpr double kLogHi = 6.0;
constexpr double kLogitBound = 30.0;

enum ParamIndex : std::size_t { kAlphaE = 0, kAlphaU = 1, kEpsilon = 2, kSigmaE = 3, kSigmaU = 4 };

// Unconstrained coordinates: log for strengths and scales, scaled logit for
// the threshold.
double to_unconstrained(std::size_t k, double v, const Priors& pr) {
    if (k == kEpsilon) {
        const double f = std::clamp(v / pr.epsilon_max, 1e-12, 1.0 - 1e-12);
        return std::log(f) - std::log1p(-f);
    }
    return std::log(v);
}

double from_unconstrained(std::size_t k, double y, const Priors& pr) {
    if (k == kEpsilon) return pr.epsilon_max / (1.0 + std::exp(-y));
    return std::exp(y);
}

std::pair<double, double> unconstrained_bounds(std::size_t k) {
    if (k == kEpsilon) return {-kLogitBound, kLogitBound};
    return {kLogLo, kLogHi};
}

// Log prior density of the constrained value plus the log Jacobian of the
// transform, as a function of the unconstrained coordinate.
double log_prior_unconstrained(std::size_t k, double y, const Priors& pr) {
    if (k == kEpsilon) {
        // eps = m * s(y); d eps / dy = m * s(y) * (1 - s(y)); prior density 1 / m.
        const double log_s = -std::log1p(std::exp(-y));
        const double log_1ms = -std::log1p(std::exp(y));
        return log_s + log_1ms;
    }
    const double mean = (k == kAlphaE || k == kAlphaU) ? pr.alpha_mean : pr.sigma_mean;
    const double v = std::exp(y);
    return -std::log(mean) - v / mean + y;
}

double log_prior(const Params& p, const Priors& pr) {
    if (!p.valid() || p.epsilon > pr.epsilon_max) return kNegInf;
    return -std::log(pr.alpha_mean) * 2 - (p.alpha_e + p.alpha_u) / pr.alpha_mean - std::log(pr.sigma_mean) * 2 -
           (p.sigma_e + p.sigma_u) / pr.sigma_mean - std::log(pr.epsilon_max);
}

struct Welford {
    std::size_t n = 0;
    double mean = 0.0;
    double m2 = 0.0;

    void add(double x) {
        ++n;
        const double d = x - mean;
        mean += d / static_cast<double>(n);
        m2 += d * (x - mean);
    }
    double sd() const { return n > 1 ? std::sqrt(m2 / static_cast<double>(n - 1)) : 0.0; }
};

// Univariate slice sampler with stepping out and shrinkage (Neal, 2003).
// Returns the new point; `lp_x` holds its log density on entry and exit.
template <typename LogDensity>
double slice_step(double x0, double& lp_x, LogDensity&& lp, double w, double lo, double hi, Rng& rng) {
    constexpr int kMaxSteps = 10;
    const double level = lp_x - rng.exponential(1.0);
    double left = x0 - w * rng.uniform();
    double right = left + w;
    int j = static_cast<int>(std::floor(kMaxSteps * rng.uniform()));
    int k = kMaxSteps - 1 - j;
    while (j-- > 0 && left > lo && lp(left) > level) left -= w;
    while (k-- > 0 && right < hi && lp(right) > level) right += w;
    left = std::max(left, lo);
    right = std::min(right, hi);
    for (int iter = 0; iter < 200; ++iter) {
        const double x1 = left + (right - left) * rng.uniform();
        const double lp1 = lp(x1);
        if (lp1 > level) {
            lp_x = lp1;
            return x1;
        }
        if (x1 < x0) {
            left = x1;
        } else {
            right = x1;
        }
    }
    return x0;
}

class UserChain {
public:
    UserChain(const UserSeries& s, const FitConfig& cfg, std::uint64_t seed)
        : s_(s), cfg_(cfg), m_(cfg.model), pr_(cfg.priors), rng_(seed), steps_(s.steps()),
          u_(steps_ + 1), mu_u_(steps_), latent_width_(steps_ + 1, 0.25), latent_stats_(steps_ + 1),
          v_(steps_), trial_(steps_ + 1) {
        param_width_.fill(1.0);
        nc_width_.fill(0.5);
        initialise();
    }

    void sweep(bool adapting) {
        update_latents(adapting);
        for (std::size_t k = 0; k < kParamCount; ++k) update_param(k, adapting);
        for (std::size_t k : {kAlphaU, kSigmaU, kEpsilon}) update_param_noncentred(k, adapting);
    }

    void finish_warmup() { adapt_widths(); }

    const Params& params() const { return th_; }
    const std::vector<double>& internal() const { return u_; }

private:
    void initialise() {
        th_.alpha_e = rng_.uniform(0.2, 1.2);
        th_.alpha_u = rng_.uniform(0.2, 1.2);
        th_.epsilon = rng_.uniform(0.3, 1.7);
        th_.sigma_e = rng_.uniform(0.1, 0.5);
        th_.sigma_u = rng_.uniform(0.1, 0.5);
        // Start the trajectory near the next expressed value.
        for (std::size_t k = 0; k <= steps_; ++k) {
            const double anchor = s_.expressed[std::min(k, steps_ - 1)];
            u_[k] = std::clamp(anchor + 0.1 * rng_.normal(), -0.999, 0.999);
        }
        refresh_internal_means();
    }

    double internal_mean(std::size_t k, double from, const Params& p) const {
        return fold_interactions(m_, from, s_.interactions_at(k), p.alpha_u, p.epsilon);
    }

    void refresh_internal_means() {
        for (std::size_t k = 0; k < steps_; ++k) mu_u_[k] = internal_mean(k, u_[k], th_);
    }

    double expressed_term(std::size_t k, double from, const Params& p) const {
        const double mu = apply_kernel(m_, from, s_.parent[k], p.alpha_e, p.epsilon);
        return truncated_normal_log_density(s_.expressed[k], mu, p.sigma_e);
    }

    double expressed_terms(const Params& p) const {
        double lp = 0.0;
        for (std::size_t k = 0; k < steps_; ++k) lp += expressed_term(k, u_[k], p);
        return lp;
    }

    double internal_terms(const Params& p, bool cached_means) const {
        double lp = 0.0;
        for (std::size_t k = 0; k < steps_; ++k) {
            const double mu = cached_means ? mu_u_[k] : internal_mean(k, u_[k], p);
            lp += truncated_normal_log_density(u_[k + 1], mu, p.sigma_u);
        }
        return lp;
    }

    // Conditional of u_j given everything else.
    double latent_conditional(std::size_t j, double x) const {
        if (!(x >= -1.0 && x <= 1.0)) return kNegInf;
        double lp = 0.0;
        if (j > 0) {
            const double z = (x - mu_u_[j - 1]) / th_.sigma_u;
            lp -= 0.5 * z * z;
        }
        if (j < steps_) {
            lp += expressed_term(j, x, th_);
            lp += truncated_normal_log_density(u_[j + 1], internal_mean(j, x, th_), th_.sigma_u);
        }
        return lp;
    }

    void update_latents(bool adapting) {
        for (std::size_t j = 0; j <= steps_; ++j) {
            double lp = latent_conditional(j, u_[j]);
            u_[j] = slice_step(
                u_[j], lp, [&](double x) { return latent_conditional(j, x); }, latent_width_[j], -1.0, 1.0, rng_);
            if (j < steps_) mu_u_[j] = internal_mean(j, u_[j], th_);
            if (adapting) latent_stats_[j].add(u_[j]);
        }
    }

    double param_conditional(std::size_t k, double y) {
        Params p = th_;
        set(p, k, from_unconstrained(k, y, pr_));
        if (!p.valid()) return kNegInf;
        double lp = log_prior_unconstrained(k, y, pr_);
        switch (k) {
        case kAlphaE:
        case kSigmaE: return lp + expressed_terms(p);
        case kAlphaU: return lp + internal_terms(p, false);
        case kSigmaU: return lp + internal_terms(p, true);
        default: return lp + expressed_terms(p) + internal_terms(p, false);
        }
    }

    void update_param(std::size_t k, bool adapting) {
        const double y0 = to_unconstrained(k, get(th_, k), pr_);
        double lp = param_conditional(k, y0);
        const auto [lo, hi] = unconstrained_bounds(k);
        const double y = slice_step(
            y0, lp, [&](double v) { return param_conditional(k, v); }, param_width_[k], lo, hi, rng_);
        set(th_, k, from_unconstrained(k, y, pr_));
        if (k != kAlphaE && k != kSigmaE) refresh_internal_means();
        if (adapting) param_stats_[k].add(y);
    }

    // Rebuilds the trajectory in `trial_` from the innovations `v_` under p,
    // returning the expressed-value log-likelihood along it.
    double noncentred_likelihood(const Params& p) {
        trial_[0] = u_[0];
        double lp = 0.0;
        for (std::size_t k = 0; k < steps_; ++k) {
            lp += expressed_term(k, trial_[k], p);
            trial_[k + 1] = truncated_normal_quantile(v_[k], internal_mean(k, trial_[k], p), p.sigma_u);
        }
        return lp;
    }

    // Moves a parameter with the standardised internal innovations held
    // fixed, so the trajectory follows the parameter.
    void update_param_noncentred(std::size_t k, bool adapting) {
        constexpr double kTiny = 1e-300;
        for (std::size_t j = 0; j < steps_; ++j) {
            v_[j] = std::clamp(truncated_normal_cdf(u_[j + 1], mu_u_[j], th_.sigma_u), kTiny, 1.0 - 1e-16);
        }
        auto density = [&](double y) {
            Params p = th_;
            set(p, k, from_unconstrained(k, y, pr_));
            if (!p.valid()) return kNegInf;
            return log_prior_unconstrained(k, y, pr_) + noncentred_likelihood(p);
        };
        const double y0 = to_unconstrained(k, get(th_, k), pr_);
        double lp = density(y0);
        const auto [lo, hi] = unconstrained_bounds(k);
        const double y = slice_step(y0, lp, density, nc_width_[k], lo, hi, rng_);
        if (y != y0) {
            set(th_, k, from_unconstrained(k, y, pr_));
            noncentred_likelihood(th_);
            std::copy(trial_.begin(), trial_.end(), u_.begin());
        }
        refresh_internal_means();
        if (adapting) nc_stats_[k].add(y);
    }

    void adapt_widths() {
        for (std::size_t j = 0; j <= steps_; ++j) {
            if (latent_stats_[j].n > 10) latent_width_[j] = std::clamp(2.5 * latent_stats_[j].sd(), 1e-4, 2.0);
            latent_stats_[j] = {};
        }
        for (std::size_t k = 0; k < kParamCount; ++k) {
            if (param_stats_[k].n > 10) param_width_[k] = std::clamp(2.5 * param_stats_[k].sd(), 1e-3, 5.0);
            if (nc_stats_[k].n > 10) nc_width_[k] = std::clamp(2.5 * nc_stats_[k].sd(), 1e-3, 5.0);
            param_stats_[k] = {};
            nc_stats_[k] = {};
        }
    }

public:
    void adapt_checkpoint() { adapt_widths(); }

private:
    const UserSeries& s_;
    const FitConfig& cfg_;
    const ModelConfig& m_;
    const Priors& pr_;
    Rng rng_;
    std::size_t steps_;
    Params th_;
    std::vector<double> u_;
    std::vector<double> mu_u_;
    std::vector<double> latent_width_;
    std::vector<Welford> latent_stats_;
    std::array<double, kParamCount> param_width_{};
    std::array<Welford, kParamCount> param_stats_{};
    std::array<double, kParamCount> nc_width_{};
    std::array<Welford, kParamCount> nc_stats_{};
    std::vector<double> v_;
    std::vector<double> trial_;
};

void run_chain(const UserSeries& series, const FitConfig& cfg, std::uint64_t seed, std::size_t chain,
               UserPosterior& out) {
    const SamplerConfig& sc = cfg.sampler;
    UserChain sampler(series, cfg, seed);
    // Widths are re-estimated at doubling checkpoints during warmup and frozen
    // afterwards.
    std::size_t next_checkpoint = 25;
    for (std::size_t it = 0; it < sc.warmup; ++it) {
        sampler.sweep(true);
        if (it + 1 == next_checkpoint && it + 1 < sc.warmup) {
            sampler.adapt_checkpoint();
            next_checkpoint *= 2;
        }
    }
    if (sc.warmup > 0) sampler.finish_warmup();

    const std::size_t thin = std::max<std::size_t>(sc.latent_thin, 1);
    for (std::size_t d = 0; d < sc.draws; ++d) {
        sampler.sweep(false);
        out.samples[chain * out.draws + d] = sampler.params();
        if (d % thin == 0) {
            const std::size_t stored = d / thin;
            std::copy(sampler.internal().begin(), sampler.internal().end(),
                      out.latent.begin() + static_cast<std::ptrdiff_t>((chain * out.latent_draws + stored) * out.latent_length));
        }
    }
}

void prepare(UserPosterior& out, const UserSeries& series, const SamplerConfig& sc) {
    const std::size_t thin = std::max<std::size_t>(sc.latent_thin, 1);
    out.user = series.user;
    out.topic = series.topic;
    out.chains = sc.chains;
    out.draws = sc.draws;
    out.samples.assign(sc.chains * sc.draws, Params{});
    out.latent_length = series.steps() + 1;
    out.latent_draws = (sc.draws + thin - 1) / thin;
    out.latent.assign(sc.chains * out.latent_draws * out.latent_length, 0.0);
    out.times = series.times;
}

void diagnose(UserPosterior& out, double threshold) {
    out.converged = true;
    for (std::size_t k = 0; k < kParamCount; ++k) {
        const auto values = out.parameter_draws(k);
        out.rhat[k] = split_rhat(values, out.chains);
        if (!(out.rhat[k] <= threshold)) out.converged = false;
    }
}

void validate(const FitConfig& cfg) {
    if (cfg.sampler.chains == 0 || cfg.sampler.draws == 0) throw std::invalid_argument("sampler needs chains and draws");
    if (!(cfg.priors.alpha_mean > 0.0 && cfg.priors.sigma_mean > 0.0 && cfg.priors.epsilon_max > 0.0)) {
        throw std::invalid_argument("prior scales must be positive");
    }
}

std::uint64_t chain_seed(const FitConfig& cfg, const UserSeries& s, std::size_t chain) {
    return derive_seed(cfg.seed, static_cast<std::uint64_t>(s.topic), hash_string(s.user), chain);
}

} // namespace

std::vector<double> UserPosterior::parameter_draws(std::size_t k) const {
    std::vector<double> v(samples.size());
    for (std::size_t i = 0; i < samples.size(); ++i) v[i] = get(samples[i], k);
    return v;
}

double split_rhat(std::span<const double> values, std::size_t chains) {
    if (chains == 0 || values.size() % chains != 0) throw std::invalid_argument("values must split evenly into chains");
    const std::size_t n = values.size() / chains;
    const std::size_t half = n / 2;
    if (half < 2) return std::numeric_limits<double>::quiet_NaN();
    const std::size_t m = 2 * chains;
    std::vector<double> means(m);
    std::vector<double> vars(m);
    for (std::size_t c = 0; c < chains; ++c) {
        for (std::size_t h = 0; h < 2; ++h) {
            // With odd n the middle draw is dropped.
            const std::size_t start = c * n + (h == 0 ? 0 : n - half);
            double mean = 0.0;
            for (std::size_t i = 0; i < half; ++i) mean += values[start + i];
            mean /= static_cast<double>(half);
            double var = 0.0;
            for (std::size_t i = 0; i < half; ++i) var += (values[start + i] - mean) * (values[start + i] - mean);
            var /= static_cast<double>(half - 1);
            means[2 * c + h] = mean;
            vars[2 * c + h] = var;
        }
    }
    const double grand = std::accumulate(means.begin(), means.end(), 0.0) / static_cast<double>(m);
    double b = 0.0;
    for (double mu : means) b += (mu - grand) * (mu - grand);
    b *= static_cast<double>(half) / static_cast<double>(m - 1);
    const double w = std::accumulate(vars.begin(), vars.end(), 0.0) / static_cast<double>(m);
    if (w == 0.0) return b == 0.0 ? 1.0 : std::numeric_limits<double>::infinity();
    const double var_plus = (static_cast<double>(half) - 1.0) / static_cast<double>(half) * w + b / static_cast<double>(half);
    return std::sqrt(var_plus / w);
}

double log_posterior(const UserSeries& series, const Params& params, std::span<const double> internal,
                     const Priors& priors, const ModelConfig& model) {
    const double lp = log_prior(params, priors);
    if (lp == kNegInf) return kNegInf;
    for (double u : internal) {
        if (!(u >= -1.0 && u <= 1.0)) return kNegInf;
    }
    return lp - std::log(2.0) + log_likelihood(series, internal, params, model);
}

UserPosterior fit_user(const UserSeries& series, const FitConfig& config) {
    validate(config);
    if (series.steps() == 0) throw std::invalid_argument("user '" + series.user + "' has no own comments");
    UserPosterior out;
    prepare(out, series, config.sampler);
    parallel_for(config.sampler.chains, [&](std::size_t c) { run_chain(series, config, chain_seed(config, series, c), c, out); });
    diagnose(out, config.sampler.rhat_threshold);
    return out;
}

PosteriorDraws fit(const std::vector<UserTimeline>& timelines, const FitConfig& config) {
    if (timelines.empty()) throw std::invalid_argument("fit needs at least one timeline");
    validate(config);
    std::vector<UserSeries> series;
    series.reserve(timelines.size());
    for (const auto& tl : timelines) {
        series.push_back(to_series(tl));
        if (series.back().steps() == 0) throw std::invalid_argument("user '" + tl.user + "' has no own comments");
    }

    PosteriorDraws out;
    out.config = config;
    out.users.resize(series.size());
    for (std::size_t u = 0; u < series.size(); ++u) prepare(out.users[u], series[u], config.sampler);

    const std::size_t chains = config.sampler.chains;
    parallel_for(series.size() * chains, [&](std::size_t task) {
        const std::size_t u = task / chains;
        const std::size_t c = task % chains;
        run_chain(series[u], config, chain_seed(config, series[u], c), c, out.users[u]);
    });
    for (auto& up : out.users) diagnose(up, config.sampler.rhat_threshold);
    return out;
}

} // namespace sentdyn::siebc
