#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <limits>
#include <optional>
#include <string>
#include <string_view>
#include <unordered_map>
#include <variant>
#include <vector>

namespace sentdyn {

enum class Topic { lockdown, mask, vaccination, other, not_applicable };

inline constexpr std::array<Topic, 3> kStudiedTopics{Topic::lockdown, Topic::mask, Topic::vaccination};

std::string_view to_string(Topic topic);
Topic parse_topic(std::string_view name);

inline bool is_studied(Topic t) {
    return t == Topic::lockdown || t == Topic::mask || t == Topic::vaccination;
}

// Author value used upstream for deleted or unknown accounts.
inline constexpr std::string_view kDeletedAuthor = "[deleted]";

inline constexpr std::size_t npos = std::numeric_limits<std::size_t>::max();

struct Post {
    std::string id;
    std::optional<std::string> parent_id;
    std::string author;
    std::int64_t created_utc = 0;
    std::int64_t score = 0;
    Topic topic = Topic::not_applicable;
    std::optional<double> sentiment;
    bool is_submission = false;

    bool operator==(const Post&) const = default;
};

// Positive-minus-negative classifier score.
double combine_sentiment(double pos, double neg);

// Newline-delimited JSON, one Post per line. Unknown fields are ignored;
// malformed lines raise DataError naming the 1-based line number.
std::vector<Post> read_posts_jsonl(std::istream& in);
std::vector<Post> read_posts_jsonl_file(const std::string& path);
void write_posts_jsonl(std::ostream& out, const std::vector<Post>& posts);

// An immutable forest of thread trees. Posts are stored sorted by
// (created_utc, id); all cross references are indices into posts().
class Corpus {
public:
    Corpus() = default;

    // Validates invariants (unique ids, resolvable parents, one root per
    // thread, no cycles, sentiment range) and builds the tree index.
    static Corpus from_posts(std::vector<Post> posts);

    const std::vector<Post>& posts() const { return posts_; }
    std::size_t size() const { return posts_.size(); }
    const Post& post(std::size_t i) const { return posts_[i]; }

    std::size_t find(std::string_view id) const;
    std::size_t parent(std::size_t i) const { return parent_[i]; }
    const std::vector<std::size_t>& children(std::size_t i) const { return children_[i]; }
    std::size_t depth(std::size_t i) const { return depth_[i]; }
    std::size_t root(std::size_t i) const { return root_[i]; }

    // Submission indices, ordered by (created_utc, id).
    const std::vector<std::size_t>& roots() const { return roots_; }

    // Pre-order traversal of one thread, children visited in time order.
    std::vector<std::size_t> thread_posts(std::size_t root) const;

private:
    std::vector<Post> posts_;
    std::unordered_map<std::string, std::size_t> index_;
    std::vector<std::size_t> parent_;
    std::vector<std::vector<std::size_t>> children_;
    std::vector<std::size_t> depth_;
    std::vector<std::size_t> root_;
    std::vector<std::size_t> roots_;
};

struct FilterResult {
    Corpus corpus;
    std::size_t removed_threads = 0;
};

// Drops threads whose submission is not_applicable and whose comments are at
// least `threshold` not_applicable. Uses raw labels, so run before
// inherit_topics.
FilterResult filter_na_submissions(const Corpus& corpus, double threshold = 0.9);

// Single top-down pass: comments labelled other/not_applicable take the
// already-resolved topic of their parent. Submissions never change.
Corpus inherit_topics(const Corpus& corpus);

enum class Role { none, initiating, participating };

struct Discussion {
    Topic topic = Topic::lockdown;
    std::size_t initiating_post = npos;
    std::vector<std::size_t> posts; // includes the initiating post, pre-order
};

struct Segmentation {
    std::vector<Role> role;              // per post
    std::vector<std::size_t> discussion; // per post; npos for unstudied topics
    std::vector<Discussion> discussions;
};

Segmentation segment_discussions(const Corpus& corpus);

enum class Label { initiation, participation };

struct DiscussionSequence {
    std::string user;
    Topic topic = Topic::lockdown;
    std::vector<Label> labels;
    std::size_t n_initiations = 0;
    std::size_t n_participations = 0;
};

// One sequence per (user, topic), sorted by topic then user.
std::vector<DiscussionSequence> build_sequences(const Corpus& corpus, const Segmentation& seg);

enum class ContextKind { ancestral, user };

std::string_view to_string(ContextKind kind);

struct Context {
    std::size_t focal = npos;
    ContextKind kind = ContextKind::ancestral;
    std::vector<double> members; // nearest first
    double mean = 0.0;

    std::size_t size() const { return members.size(); }
    // Mean of the `n` nearest members.
    double prefix_mean(std::size_t n) const;
};

struct ContextPair {
    std::size_t focal = npos;
    Topic topic = Topic::lockdown;
    double focal_sentiment = 0.0;
    Context ancestral;
    Context user;
};

struct ContextReport {
    std::size_t candidates = 0;
    std::size_t insufficient_ancestors = 0;
    std::size_t ancestor_without_sentiment = 0;
    std::size_t insufficient_history = 0;
    std::size_t history_parent_without_sentiment = 0;
    std::size_t emitted = 0;
};

struct ContextSet {
    std::vector<ContextPair> pairs;
    ContextReport report;
};

// Focal comments (studied topic, with sentiment, known author) having both
// an ancestral and a user context of size n. Prior comments are those by the
// same author on the same topic with created_utc strictly before the focal.
// With `only` set, focal comments of other topics are skipped uncounted.
ContextSet build_contexts(const Corpus& corpus, std::size_t n, std::optional<Topic> only = std::nullopt);

struct OwnComment {
    std::int64_t t = 0;
    std::string post_id;
    double parent_sentiment = 0.0;
    double expressed_sentiment = 0.0;
};

struct ReplyReceived {
    std::int64_t t = 0;
    std::string post_id;
    double sentiment = 0.0;
};

using TimelineEvent = std::variant<OwnComment, ReplyReceived>;

struct UserTimeline {
    std::string user;
    Topic topic = Topic::lockdown;
    std::vector<TimelineEvent> events; // ordered by (t, post_id)

    std::size_t own_comment_count() const;
};

std::int64_t event_time(const TimelineEvent& e);
const std::string& event_post_id(const TimelineEvent& e);

// Users with at least min_comments usable comments on `topic` (comment with
// sentiment whose parent has sentiment). Replies are direct replies by other
// authors, with sentiment, to those comments.
std::vector<UserTimeline> build_timelines(const Corpus& corpus, Topic topic, std::size_t min_comments);

struct TopicCounts {
    std::size_t users = 0;
    std::size_t comments = 0;
    std::size_t submissions = 0;
};

struct CorpusSummary {
    std::array<TopicCounts, 5> per_topic{}; // indexed by Topic
    TopicCounts total;
};

CorpusSummary summarize(const Corpus& corpus);

} // namespace sentdyn
