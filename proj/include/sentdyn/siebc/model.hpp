#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include "sentdyn/corpus.hpp"
#include "sentdyn/rng.hpp"
#include "sentdyn/siebc/kernel.hpp"

namespace sentdyn::siebc {

// Per-user parameters of the internal/expressed model.
struct Params {
    double alpha_e = 0.5; // expressed update strength
    double alpha_u = 0.5; // internal update strength
    double epsilon = 1.0; // confidence threshold, [0, 2]
    double sigma_e = 0.5; // expressed noise scale
    double sigma_u = 0.5; // internal noise scale

    bool valid() const;
    bool operator==(const Params&) const = default;
};

inline constexpr std::size_t kParamCount = 5;
inline constexpr const char* kParamNames[kParamCount] = {"alpha_e", "alpha_u", "epsilon", "sigma_e", "sigma_u"};

double get(const Params& p, std::size_t k);
void set(Params& p, std::size_t k, double v);

struct UserState {
    double internal = 0.0;  // u, latent
    double expressed = 0.0; // e, observed
    std::int64_t t_last = 0;
};

// Folds the kernel over interaction sentiments in order, starting at `from`.
double fold_interactions(const ModelConfig& m, double from, std::span<const double> interactions, double alpha,
                         double epsilon);

// One own comment: new expressed value from the previous internal state and
// the parent, new internal value from the previous internal state folded over
// the interactions since the last comment (replies received, then parent).
UserState step_user(const UserState& state, double parent_expressed, std::span<const double> interactions,
                    const Params& params, const ModelConfig& model, Rng& rng);

// Event-indexed view of one user's timeline. Step k carries the parent's
// expressed value, the observed expressed value, and the interactions that
// feed the internal update at that comment.
struct UserSeries {
    std::string user;
    Topic topic = Topic::lockdown;
    std::vector<std::int64_t> times;
    std::vector<double> parent;
    std::vector<double> expressed;
    std::vector<std::size_t> offsets{0}; // interactions of step k: [offsets[k], offsets[k + 1])
    std::vector<double> interactions;

    std::size_t steps() const { return parent.size(); }
    std::span<const double> interactions_at(std::size_t k) const {
        return std::span<const double>(interactions).subspan(offsets[k], offsets[k + 1] - offsets[k]);
    }
};

// Replies received after the final own comment are dropped.
UserSeries to_series(const UserTimeline& timeline);

struct Trajectory {
    std::vector<double> expressed; // one per step
    std::vector<double> internal;  // steps + 1 values: initial state, then after each step
};

// Forward pass over a skeleton; observed expressed values are ignored.
Trajectory simulate_series(const UserSeries& skeleton, const Params& params, double initial_internal,
                           const ModelConfig& model, std::uint64_t seed);

// Same pass on a timeline; returns the timeline with expressed values
// replaced by simulated ones.
UserTimeline simulate(const UserTimeline& skeleton, const Params& params, double initial_internal,
                      const ModelConfig& model, std::uint64_t seed);

// Complete-data log-likelihood of observed expressed values and the given
// internal trajectory (steps + 1 values).
double log_likelihood(const UserSeries& series, std::span<const double> internal, const Params& params,
                      const ModelConfig& model);

// Expressed-value terms only.
double log_likelihood_expressed(const UserSeries& series, std::span<const double> internal, const Params& params,
                                const ModelConfig& model);

} // namespace sentdyn::siebc
