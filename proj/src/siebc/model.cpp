#include "sentdyn/siebc/model.hpp"

#include <cmath>
#include <stdexcept>

#include "sentdyn/siebc/truncated_normal.hpp"

namespace sentdyn::siebc {

bool Params::valid() const {
    return alpha_e >= 0.0 && alpha_u >= 0.0 && epsilon >= 0.0 && epsilon <= 2.0 && sigma_e > 0.0 && sigma_u > 0.0 &&
           std::isfinite(alpha_e) && std::isfinite(alpha_u) && std::isfinite(sigma_e) && std::isfinite(sigma_u);
}

double get(const Params& p, std::size_t k) {
    switch (k) {
    case 0: return p.alpha_e;
    case 1: return p.alpha_u;
    case 2: return p.epsilon;
    case 3: return p.sigma_e;
    case 4: return p.sigma_u;
    }
    throw std::out_of_range("parameter index");
}

void set(Params& p, std::size_t k, double v) {
    switch (k) {
    case 0: p.alpha_e = v; return;
    case 1: p.alpha_u = v; return;
    case 2: p.epsilon = v; return;
    case 3: p.sigma_e = v; return;
    case 4: p.sigma_u = v; return;
    }
    throw std::out_of_range("parameter index");
}

double fold_interactions(const ModelConfig& m, double from, std::span<const double> interactions, double alpha,
                         double epsilon) {
    double s = from;
    for (double x : interactions) s = apply_kernel(m, s, x, alpha, epsilon);
    return s;
}

UserState step_user(const UserState& state, double parent_expressed, std::span<const double> interactions,
                    const Params& params, const ModelConfig& model, Rng& rng) {
    UserState next = state;
    const double mu_e = apply_kernel(model, state.internal, parent_expressed, params.alpha_e, params.epsilon);
    const double mu_u = fold_interactions(model, state.internal, interactions, params.alpha_u, params.epsilon);
    next.expressed = truncated_normal_sample(mu_e, params.sigma_e, rng);
    next.internal = truncated_normal_sample(mu_u, params.sigma_u, rng);
    return next;
}

UserSeries to_series(const UserTimeline& timeline) {
    UserSeries s;
    s.user = timeline.user;
    s.topic = timeline.topic;
    std::vector<double> pending;
    for (const auto& ev : timeline.events) {
        if (const auto* r = std::get_if<ReplyReceived>(&ev)) {
            pending.push_back(r->sentiment);
            continue;
        }
        const auto& c = std::get<OwnComment>(ev);
        s.times.push_back(c.t);
        s.parent.push_back(c.parent_sentiment);
        s.expressed.push_back(c.expressed_sentiment);
        s.interactions.insert(s.interactions.end(), pending.begin(), pending.end());
        s.interactions.push_back(c.parent_sentiment);
        s.offsets.push_back(s.interactions.size());
        pending.clear();
    }
    return s;
}

Trajectory simulate_series(const UserSeries& skeleton, const Params& params, double initial_internal,
                           const ModelConfig& model, std::uint64_t seed) {
    Rng rng(derive_seed(seed));
    Trajectory out;
    out.internal.reserve(skeleton.steps() + 1);
    out.expressed.reserve(skeleton.steps());
    UserState state{initial_internal, 0.0, 0};
    out.internal.push_back(initial_internal);
    for (std::size_t k = 0; k < skeleton.steps(); ++k) {
        state = step_user(state, skeleton.parent[k], skeleton.interactions_at(k), params, model, rng);
        state.t_last = skeleton.times[k];
        out.expressed.push_back(state.expressed);
        out.internal.push_back(state.internal);
    }
    return out;
}

UserTimeline simulate(const UserTimeline& skeleton, const Params& params, double initial_internal,
                      const ModelConfig& model, std::uint64_t seed) {
    const Trajectory tr = simulate_series(to_series(skeleton), params, initial_internal, model, seed);
    UserTimeline out = skeleton;
    std::size_t k = 0;
    for (auto& ev : out.events) {
        if (auto* c = std::get_if<OwnComment>(&ev)) c->expressed_sentiment = tr.expressed[k++];
    }
    return out;
}

double log_likelihood_expressed(const UserSeries& series, std::span<const double> internal, const Params& params,
                                const ModelConfig& model) {
    if (internal.size() != series.steps() + 1) throw std::invalid_argument("internal trajectory length mismatch");
    double ll = 0.0;
    for (std::size_t k = 0; k < series.steps(); ++k) {
        const double mu = apply_kernel(model, internal[k], series.parent[k], params.alpha_e, params.epsilon);
        ll += truncated_normal_log_density(series.expressed[k], mu, params.sigma_e);
    }
    return ll;
}

double log_likelihood(const UserSeries& series, std::span<const double> internal, const Params& params,
                      const ModelConfig& model) {
    double ll = log_likelihood_expressed(series, internal, params, model);
    for (std::size_t k = 0; k < series.steps(); ++k) {
        const double mu = fold_interactions(model, internal[k], series.interactions_at(k), params.alpha_u, params.epsilon);
        ll += truncated_normal_log_density(internal[k + 1], mu, params.sigma_u);
    }
    return ll;
}

} // namespace sentdyn::siebc
