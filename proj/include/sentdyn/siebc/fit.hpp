#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "sentdyn/corpus.hpp"
#include "sentdyn/siebc/model.hpp"

namespace sentdyn::siebc {

// Exponential priors on update strengths and noise scales, uniform on
// [0, epsilon_max] for the confidence threshold, uniform on [-1, 1] for the
// initial internal state.
struct Priors {
    double alpha_mean = 0.5;
    double sigma_mean = 0.5;
    double epsilon_max = 2.0;
};

struct SamplerConfig {
    std::size_t chains = 6;
    std::size_t draws = 500; // retained per chain
    std::size_t warmup = 250;
    std::size_t latent_thin = 1; // keep the internal trajectory of every k-th draw
    double rhat_threshold = 1.1;
};

struct FitConfig {
    Priors priors;
    SamplerConfig sampler;
    ModelConfig model;
    std::uint64_t seed = 0;
};

struct UserPosterior {
    std::string user;
    Topic topic = Topic::lockdown;
    std::size_t chains = 0;
    std::size_t draws = 0;              // per chain
    std::vector<Params> samples;        // chain-major, chains * draws
    std::size_t latent_length = 0;      // steps + 1
    std::size_t latent_draws = 0;       // stored per chain
    std::vector<double> latent;         // chain-major, chains * latent_draws * latent_length
    std::array<double, kParamCount> rhat{};
    bool converged = true;
    std::vector<std::int64_t> times;    // own-comment timestamps, one per step

    const Params& sample(std::size_t chain, std::size_t draw) const { return samples[chain * draws + draw]; }
    std::span<const double> trajectory(std::size_t chain, std::size_t stored) const {
        return std::span<const double>(latent).subspan((chain * latent_draws + stored) * latent_length, latent_length);
    }
    // Draw index within the chain of stored trajectory `stored`.
    std::size_t trajectory_draw(std::size_t stored, std::size_t thin) const { return stored * thin; }

    std::vector<double> parameter_draws(std::size_t k) const;
};

struct PosteriorDraws {
    std::vector<UserPosterior> users;
    FitConfig config;
};

// Split-R-hat over equally long chains (chain-major values).
double split_rhat(std::span<const double> values, std::size_t chains);

// Log posterior of one user's parameters and internal trajectory, up to a
// constant.
double log_posterior(const UserSeries& series, const Params& params, std::span<const double> internal,
                     const Priors& priors, const ModelConfig& model);

// Per-user posterior over parameters and the internal trajectory. Each
// (user, chain) runs on its own stream keyed by (seed, topic, user, chain).
// Throws std::invalid_argument on an empty input or a user without comments.
PosteriorDraws fit(const std::vector<UserTimeline>& timelines, const FitConfig& config);

UserPosterior fit_user(const UserSeries& series, const FitConfig& config);

} // namespace sentdyn::siebc
