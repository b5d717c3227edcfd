#pragma once

#include <optional>
#include <string>
#include <vector>

#include "sentdyn/corpus.hpp"

namespace fixtures {

inline sentdyn::Post submission(std::string id, std::string author, std::int64_t t, sentdyn::Topic topic,
                                std::optional<double> s = 0.0, std::int64_t score = 1) {
    sentdyn::Post p;
    p.id = std::move(id);
    p.author = std::move(author);
    p.created_utc = t;
    p.topic = topic;
    p.sentiment = s;
    p.score = score;
    p.is_submission = true;
    return p;
}

inline sentdyn::Post comment(std::string id, std::string parent, std::string author, std::int64_t t,
                             sentdyn::Topic topic, std::optional<double> s = 0.0, std::int64_t score = 1) {
    sentdyn::Post p;
    p.id = std::move(id);
    p.parent_id = std::move(parent);
    p.author = std::move(author);
    p.created_utc = t;
    p.topic = topic;
    p.sentiment = s;
    p.score = score;
    return p;
}

// A single chain s -> c1 -> c2 -> ... of the given length (comments only).
inline std::vector<sentdyn::Post> chain(std::size_t comments, sentdyn::Topic topic = sentdyn::Topic::lockdown) {
    std::vector<sentdyn::Post> out{submission("s", "root", 0, topic, 0.0)};
    std::string parent = "s";
    for (std::size_t k = 1; k <= comments; ++k) {
        const std::string id = "c" + std::to_string(k);
        out.push_back(comment(id, parent, "a" + std::to_string(k), static_cast<std::int64_t>(k), topic,
                              static_cast<double>(k) / 10.0));
        parent = id;
    }
    return out;
}

} // namespace fixtures
