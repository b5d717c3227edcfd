#include "sentdyn/siebc/synthetic.hpp"

#include <algorithm>
#include <cstdio>
#include <stdexcept>

#include "sentdyn/siebc/truncated_normal.hpp"

namespace sentdyn::siebc {

namespace {

std::string padded(const char* prefix, std::size_t k) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%s%07zu", prefix, k);
    return buf;
}

double draw_sentiment(SentimentLaw law, const SyntheticSpec& spec, Rng& rng) {
    if (law == SentimentLaw::uniform) return rng.uniform(-1.0, 1.0);
    const double sign = rng.uniform() < 0.5 ? -1.0 : 1.0;
    return std::clamp(sign * spec.pole + spec.pole_spread * rng.normal(), -1.0, 1.0);
}

} // namespace

SyntheticCorpus generate_synthetic(const SyntheticSpec& spec, std::uint64_t seed) {
    if (spec.n_users == 0) throw std::invalid_argument("synthetic corpus needs at least one user");
    if (spec.comments_per_user == 0) throw std::invalid_argument("synthetic corpus needs at least one comment per user");
    if (spec.n_background == 0) throw std::invalid_argument("synthetic corpus needs at least one background post");
    if (!spec.params.valid()) throw std::invalid_argument("invalid synthetic parameters");

    Rng rng(derive_seed(seed));
    SyntheticCorpus out;

    struct Agent {
        std::string name;
        Params params;
        double internal = 0.0;
        std::vector<double> pending; // replies received since the last own comment
        SyntheticTruth truth;
    };
    std::vector<Agent> agents(spec.n_users);
    for (std::size_t i = 0; i < spec.n_users; ++i) {
        Agent& a = agents[i];
        a.name = padded("user", i);
        a.params = spec.params;
        if (spec.param_jitter > 0.0) {
            for (std::size_t k = 0; k < kParamCount; ++k) {
                set(a.params, k, get(spec.params, k) * rng.uniform(1.0 - spec.param_jitter, 1.0 + spec.param_jitter));
            }
            a.params.epsilon = std::clamp(a.params.epsilon, 0.0, 2.0);
        }
        a.internal = draw_sentiment(spec.initial_law, spec, rng);
        a.truth.user = a.name;
        a.truth.params = a.params;
        a.truth.internal.push_back(a.internal);
    }

    struct Target {
        std::string id;
        double sentiment;
        std::size_t agent; // npos for background posts
    };
    std::vector<Target> background;
    for (std::size_t k = 0; k < spec.n_background; ++k) {
        const double s = draw_sentiment(spec.background_law, spec, rng);
        Post p{padded("s", k), std::nullopt, padded("bg", k), spec.start_utc, 1, spec.topic, s, true};
        background.push_back({p.id, s, npos});
        out.posts.push_back(std::move(p));
    }

    std::vector<std::size_t> order;
    order.reserve(spec.n_users * spec.comments_per_user);
    for (std::size_t i = 0; i < spec.n_users; ++i) order.insert(order.end(), spec.comments_per_user, i);
    for (std::size_t k = order.size(); k > 1; --k) std::swap(order[k - 1], order[rng.index(k)]);

    std::vector<Target> user_comments;
    for (std::size_t step = 0; step < order.size(); ++step) {
        const std::size_t i = order[step];
        Agent& a = agents[i];

        const Target* parent = nullptr;
        if (!user_comments.empty() && rng.uniform() < spec.reply_to_user) {
            // A few retries to find another user's comment; self-replies are skipped.
            for (int attempt = 0; attempt < 8 && parent == nullptr; ++attempt) {
                const Target& t = user_comments[rng.index(user_comments.size())];
                if (t.agent != i) parent = &t;
            }
        }
        if (parent == nullptr) parent = &background[rng.index(background.size())];

        a.pending.push_back(parent->sentiment);
        UserState state{a.internal, 0.0, 0};
        state = step_user(state, parent->sentiment, a.pending, a.params, spec.model, rng);
        a.pending.clear();
        a.internal = state.internal;

        const std::int64_t t = spec.start_utc + static_cast<std::int64_t>(step + 1) * spec.step_seconds;
        Post p{padded("c", step), parent->id, a.name, t, 1, spec.topic, state.expressed, false};
        a.truth.internal.push_back(state.internal);
        a.truth.times.push_back(t);
        if (parent->agent != npos) agents[parent->agent].pending.push_back(state.expressed);
        // `parent` may point into user_comments, so push after its last use.
        user_comments.push_back({p.id, state.expressed, i});
        out.posts.push_back(std::move(p));
    }

    const Corpus corpus = Corpus::from_posts(out.posts);
    out.timelines = build_timelines(corpus, spec.topic, 1);
    for (const auto& tl : out.timelines) {
        const auto it = std::find_if(agents.begin(), agents.end(), [&](const Agent& a) { return a.name == tl.user; });
        out.truth.push_back(it->truth);
    }
    return out;
}

} // namespace sentdyn::siebc
