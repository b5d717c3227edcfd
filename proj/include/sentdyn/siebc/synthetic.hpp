#pragma once

#include <cstddef>
#include <cstdint>
#include <string>
#include <vector>

#include "sentdyn/corpus.hpp"
#include "sentdyn/siebc/model.hpp"

namespace sentdyn::siebc {

enum class SentimentLaw { uniform, polarized };

struct SyntheticSpec {
    std::size_t n_users = 20;
    std::size_t comments_per_user = 200;
    Params params{0.8, 0.4, 0.6, 0.1, 0.1};
    double param_jitter = 0.0; // per-user relative jitter, uniform in [1 - j, 1 + j]
    ModelConfig model;
    Topic topic = Topic::lockdown;

    // Interaction topology: each comment replies to another simulated user's
    // comment with probability reply_to_user (when one exists), otherwise to
    // a background submission.
    std::size_t n_background = 200;
    double reply_to_user = 0.3;
    SentimentLaw background_law = SentimentLaw::uniform;
    SentimentLaw initial_law = SentimentLaw::uniform;
    double pole = 0.7;         // centre of each mode under the polarized law
    double pole_spread = 0.15; // normal spread around the pole

    std::int64_t start_utc = 1583020800; // 2020-03-01
    std::int64_t step_seconds = 600;
};

struct SyntheticTruth {
    std::string user;
    Params params;
    std::vector<double> internal; // initial state, then after each own comment
    std::vector<std::int64_t> times;
};

struct SyntheticCorpus {
    std::vector<Post> posts;
    std::vector<UserTimeline> timelines; // sorted by user
    std::vector<SyntheticTruth> truth;   // aligned with timelines
};

// Multi-agent forward simulation: users reply to background submissions and
// to one another, so replies received are other users' simulated
// expressions. Deterministic in `seed`.
SyntheticCorpus generate_synthetic(const SyntheticSpec& spec, std::uint64_t seed);

} // namespace sentdyn::siebc
