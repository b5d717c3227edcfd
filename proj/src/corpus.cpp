#include "sentdyn/corpus.hpp"

#include <algorithm>
#include <fstream>
#include <istream>
#include <map>
#include <ostream>
#include <set>
#include <sstream>
#include <tuple>

#include <json.hpp>

#include "sentdyn/error.hpp"

namespace sentdyn {

namespace {

bool time_order(const Post& a, const Post& b) {
    return std::tie(a.created_utc, a.id) < std::tie(b.created_utc, b.id);
}

} // namespace

std::string_view to_string(Topic topic) {
    switch (topic) {
    case Topic::lockdown: return "lockdown";
    case Topic::mask: return "mask";
    case Topic::vaccination: return "vaccination";
    case Topic::other: return "other";
    case Topic::not_applicable: return "not_applicable";
    }
    return "not_applicable";
}

Topic parse_topic(std::string_view name) {
    for (Topic t : {Topic::lockdown, Topic::mask, Topic::vaccination, Topic::other, Topic::not_applicable}) {
        if (to_string(t) == name) return t;
    }
    throw DataError("unknown topic '" + std::string(name) + "'");
}

std::string_view to_string(ContextKind kind) {
    return kind == ContextKind::ancestral ? "ancestral" : "user";
}

double combine_sentiment(double pos, double neg) {
    if (!(pos >= 0.0 && pos <= 1.0) || !(neg >= 0.0 && neg <= 1.0)) {
        throw std::invalid_argument("sentiment scores must lie in [0, 1]");
    }
    return pos - neg;
}

// ---------------------------------------------------------------------------
// JSONL

namespace {

Post post_from_json(const nlohmann::json& j) {
    Post p;
    p.id = j.at("id").get<std::string>();
    const auto& parent = j.at("parent_id");
    if (!parent.is_null()) p.parent_id = parent.get<std::string>();
    p.author = j.at("author").get<std::string>();
    p.created_utc = j.at("created_utc").get<std::int64_t>();
    p.score = j.at("score").get<std::int64_t>();
    p.topic = parse_topic(j.at("topic").get<std::string>());
    const auto& s = j.at("sentiment");
    if (!s.is_null()) p.sentiment = s.get<double>();
    p.is_submission = j.at("is_submission").get<bool>();
    return p;
}

} // namespace

std::vector<Post> read_posts_jsonl(std::istream& in) {
    std::vector<Post> posts;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
        try {
            posts.push_back(post_from_json(nlohmann::json::parse(line)));
        } catch (const nlohmann::json::exception& e) {
            throw DataError("line " + std::to_string(line_no) + ": " + e.what());
        } catch (const DataError& e) {
            throw DataError("line " + std::to_string(line_no) + ": " + e.what());
        }
    }
    return posts;
}

std::vector<Post> read_posts_jsonl_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw DataError("cannot open corpus file '" + path + "'");
    return read_posts_jsonl(in);
}

void write_posts_jsonl(std::ostream& out, const std::vector<Post>& posts) {
    for (const auto& p : posts) {
        nlohmann::ordered_json j;
        j["id"] = p.id;
        j["parent_id"] = p.parent_id ? nlohmann::ordered_json(*p.parent_id) : nlohmann::ordered_json(nullptr);
        j["author"] = p.author;
        j["created_utc"] = p.created_utc;
        j["score"] = p.score;
        j["topic"] = std::string(to_string(p.topic));
        j["sentiment"] = p.sentiment ? nlohmann::ordered_json(*p.sentiment) : nlohmann::ordered_json(nullptr);
        j["is_submission"] = p.is_submission;
        out << j.dump() << '\n';
    }
}

// ---------------------------------------------------------------------------
// Corpus

Corpus Corpus::from_posts(std::vector<Post> posts) {
    std::sort(posts.begin(), posts.end(), time_order);

    Corpus c;
    c.posts_ = std::move(posts);
    const std::size_t n = c.posts_.size();
    c.index_.reserve(n);
    for (std::size_t i = 0; i < n; ++i) {
        const Post& p = c.posts_[i];
        if (!c.index_.emplace(p.id, i).second) throw DataError("duplicate post id '" + p.id + "'");
        if (p.parent_id.has_value() == p.is_submission) {
            throw DataError("post '" + p.id + "': parent_id must be null exactly for submissions");
        }
        if (p.sentiment && !(*p.sentiment >= -1.0 && *p.sentiment <= 1.0)) {
            throw DataError("post '" + p.id + "': sentiment outside [-1, 1]");
        }
    }

    c.parent_.assign(n, npos);
    c.children_.assign(n, {});
    std::vector<std::string> dangling;
    for (std::size_t i = 0; i < n; ++i) {
        const Post& p = c.posts_[i];
        if (!p.parent_id) {
            c.roots_.push_back(i);
            continue;
        }
        auto it = c.index_.find(*p.parent_id);
        if (it == c.index_.end()) {
            dangling.push_back(p.id);
            continue;
        }
        c.parent_[i] = it->second;
        // Posts are visited in time order, so children lists come out sorted.
        c.children_[it->second].push_back(i);
    }
    if (!dangling.empty()) {
        std::string msg = "dangling parent for post(s):";
        for (const auto& id : dangling) msg += " " + id;
        throw DataError(msg);
    }

    c.depth_.assign(n, npos);
    c.root_.assign(n, npos);
    std::size_t reached = 0;
    for (std::size_t r : c.roots_) {
        std::vector<std::size_t> stack{r};
        c.depth_[r] = 0;
        c.root_[r] = r;
        while (!stack.empty()) {
            const std::size_t u = stack.back();
            stack.pop_back();
            ++reached;
            for (std::size_t v : c.children_[u]) {
                c.depth_[v] = c.depth_[u] + 1;
                c.root_[v] = r;
                stack.push_back(v);
            }
        }
    }
    if (reached != n) throw DataError("corpus contains a parent cycle not rooted at a submission");
    return c;
}

std::size_t Corpus::find(std::string_view id) const {
    auto it = index_.find(std::string(id));
    return it == index_.end() ? npos : it->second;
}

std::vector<std::size_t> Corpus::thread_posts(std::size_t root) const {
    std::vector<std::size_t> order;
    std::vector<std::size_t> stack{root};
    while (!stack.empty()) {
        const std::size_t u = stack.back();
        stack.pop_back();
        order.push_back(u);
        const auto& ch = children_[u];
        for (auto it = ch.rbegin(); it != ch.rend(); ++it) stack.push_back(*it);
    }
    return order;
}

FilterResult filter_na_submissions(const Corpus& corpus, double threshold) {
    std::vector<bool> drop_root(corpus.size(), false);
    std::size_t removed = 0;
    for (std::size_t r : corpus.roots()) {
        if (corpus.post(r).topic != Topic::not_applicable) continue;
        const auto thread = corpus.thread_posts(r);
        const std::size_t comments = thread.size() - 1;
        std::size_t na = 0;
        for (std::size_t i = 1; i < thread.size(); ++i) {
            if (corpus.post(thread[i]).topic == Topic::not_applicable) ++na;
        }
        // A thread without comments has no on-topic evidence; treated as 100%.
        if (comments == 0 || static_cast<double>(na) >= threshold * static_cast<double>(comments)) {
            drop_root[r] = true;
            ++removed;
        }
    }
    std::vector<Post> kept;
    kept.reserve(corpus.size());
    for (std::size_t i = 0; i < corpus.size(); ++i) {
        if (!drop_root[corpus.root(i)]) kept.push_back(corpus.post(i));
    }
    return {Corpus::from_posts(std::move(kept)), removed};
}

Corpus inherit_topics(const Corpus& corpus) {
    std::vector<Post> posts = corpus.posts();
    for (std::size_t r : corpus.roots()) {
        for (std::size_t i : corpus.thread_posts(r)) {
            if (posts[i].is_submission) continue;
            if (posts[i].topic == Topic::other || posts[i].topic == Topic::not_applicable) {
                posts[i].topic = posts[corpus.parent(i)].topic;
            }
        }
    }
    return Corpus::from_posts(std::move(posts));
}

// ---------------------------------------------------------------------------
// Discussions

namespace {

std::size_t topic_slot(Topic t) { return static_cast<std::size_t>(t); }

} // namespace

Segmentation segment_discussions(const Corpus& corpus) {
    Segmentation seg;
    seg.role.assign(corpus.size(), Role::none);
    seg.discussion.assign(corpus.size(), npos);

    using Open = std::array<std::size_t, 3>; // nearest discussion per studied topic
    for (std::size_t r : corpus.roots()) {
        std::vector<std::pair<std::size_t, Open>> stack{{r, Open{npos, npos, npos}}};
        while (!stack.empty()) {
            auto [u, open] = stack.back();
            stack.pop_back();
            const Topic t = corpus.post(u).topic;
            if (is_studied(t)) {
                std::size_t& d = open[topic_slot(t)];
                if (d == npos) {
                    d = seg.discussions.size();
                    seg.discussions.push_back(Discussion{t, u, {}});
                    seg.role[u] = Role::initiating;
                } else {
                    seg.role[u] = Role::participating;
                }
                seg.discussion[u] = d;
                seg.discussions[d].posts.push_back(u);
            }
            const auto& ch = corpus.children(u);
            for (auto it = ch.rbegin(); it != ch.rend(); ++it) stack.emplace_back(*it, open);
        }
    }
    return seg;
}

std::vector<DiscussionSequence> build_sequences(const Corpus& corpus, const Segmentation& seg) {
    struct Entry {
        std::int64_t t;
        std::string first_id;
        Label label;
    };
    std::map<std::pair<Topic, std::string>, std::vector<Entry>> per_user;

    for (const Discussion& d : seg.discussions) {
        const std::string& initiator = corpus.post(d.initiating_post).author;
        // First post of each author within this discussion.
        std::map<std::string, std::size_t> first;
        for (std::size_t i : d.posts) {
            const Post& p = corpus.post(i);
            if (p.author == kDeletedAuthor) continue;
            auto [it, inserted] = first.emplace(p.author, i);
            if (!inserted && time_order(p, corpus.post(it->second))) it->second = i;
        }
        for (const auto& [author, i] : first) {
            const Label label = author == initiator ? Label::initiation : Label::participation;
            per_user[{d.topic, author}].push_back({corpus.post(i).created_utc, corpus.post(i).id, label});
        }
    }

    std::vector<DiscussionSequence> out;
    out.reserve(per_user.size());
    for (auto& [key, entries] : per_user) {
        std::sort(entries.begin(), entries.end(), [](const Entry& a, const Entry& b) {
            return std::tie(a.t, a.first_id) < std::tie(b.t, b.first_id);
        });
        DiscussionSequence s;
        s.topic = key.first;
        s.user = key.second;
        for (const auto& e : entries) {
            s.labels.push_back(e.label);
            if (e.label == Label::initiation) {
                ++s.n_initiations;
            } else {
                ++s.n_participations;
            }
        }
        out.push_back(std::move(s));
    }
    return out;
}

// ---------------------------------------------------------------------------
// Contexts

double Context::prefix_mean(std::size_t n) const {
    if (n == 0 || n > members.size()) throw std::out_of_range("context prefix size");
    double sum = 0.0;
    for (std::size_t k = 0; k < n; ++k) sum += members[k];
    return sum / static_cast<double>(n);
}

namespace {

double mean_of(const std::vector<double>& v) {
    double sum = 0.0;
    for (double x : v) sum += x;
    return sum / static_cast<double>(v.size());
}

} // namespace

ContextSet build_contexts(const Corpus& corpus, std::size_t n, std::optional<Topic> only) {
    if (n == 0) throw std::invalid_argument("context size must be positive");
    ContextSet out;

    // Per (author, topic): comment indices in time order.
    std::map<std::pair<std::string, Topic>, std::vector<std::size_t>> history;
    for (std::size_t i = 0; i < corpus.size(); ++i) {
        const Post& p = corpus.post(i);
        if (p.is_submission || !is_studied(p.topic) || p.author == kDeletedAuthor) continue;
        history[{p.author, p.topic}].push_back(i);
    }

    for (std::size_t i = 0; i < corpus.size(); ++i) {
        const Post& p = corpus.post(i);
        if (p.is_submission || !is_studied(p.topic) || !p.sentiment || p.author == kDeletedAuthor) continue;
        if (only && p.topic != *only) continue;
        ++out.report.candidates;

        if (corpus.depth(i) < n) {
            ++out.report.insufficient_ancestors;
            continue;
        }
        Context anc{i, ContextKind::ancestral, {}, 0.0};
        bool ok = true;
        for (std::size_t a = corpus.parent(i); anc.members.size() < n; a = corpus.parent(a)) {
            const auto& s = corpus.post(a).sentiment;
            if (!s) {
                ok = false;
                break;
            }
            anc.members.push_back(*s);
        }
        if (!ok) {
            ++out.report.ancestor_without_sentiment;
            continue;
        }

        const auto& own = history.at({p.author, p.topic});
        // Comments strictly earlier than the focal timestamp, most recent first.
        auto end = std::lower_bound(own.begin(), own.end(), p.created_utc,
                                    [&](std::size_t k, std::int64_t t) { return corpus.post(k).created_utc < t; });
        const auto prior = static_cast<std::size_t>(end - own.begin());
        if (prior + 1 < n) {
            ++out.report.insufficient_history;
            continue;
        }
        Context usr{i, ContextKind::user, {}, 0.0};
        std::vector<std::size_t> sources{i};
        for (std::size_t k = 0; k + 1 < n; ++k) sources.push_back(own[prior - 1 - k]);
        for (std::size_t src : sources) {
            const auto& s = corpus.post(corpus.parent(src)).sentiment;
            if (!s) {
                ok = false;
                break;
            }
            usr.members.push_back(*s);
        }
        if (!ok) {
            ++out.report.history_parent_without_sentiment;
            continue;
        }

        anc.mean = mean_of(anc.members);
        usr.mean = mean_of(usr.members);
        out.pairs.push_back(ContextPair{i, p.topic, *p.sentiment, std::move(anc), std::move(usr)});
        ++out.report.emitted;
    }
    return out;
}

// ---------------------------------------------------------------------------
// Timelines

std::int64_t event_time(const TimelineEvent& e) {
    return std::visit([](const auto& v) { return v.t; }, e);
}

const std::string& event_post_id(const TimelineEvent& e) {
    return std::visit([](const auto& v) -> const std::string& { return v.post_id; }, e);
}

std::size_t UserTimeline::own_comment_count() const {
    return static_cast<std::size_t>(std::count_if(events.begin(), events.end(), [](const TimelineEvent& e) {
        return std::holds_alternative<OwnComment>(e);
    }));
}

std::vector<UserTimeline> build_timelines(const Corpus& corpus, Topic topic, std::size_t min_comments) {
    if (min_comments == 0) throw std::invalid_argument("min_comments must be at least 1");

    std::map<std::string, std::vector<std::size_t>> own;
    for (std::size_t i = 0; i < corpus.size(); ++i) {
        const Post& p = corpus.post(i);
        if (p.is_submission || p.topic != topic || !p.sentiment || p.author == kDeletedAuthor) continue;
        if (!corpus.post(corpus.parent(i)).sentiment) continue;
        own[p.author].push_back(i);
    }

    std::vector<UserTimeline> out;
    for (const auto& [user, comments] : own) {
        if (comments.size() < min_comments) continue;
        UserTimeline tl{user, topic, {}};
        for (std::size_t i : comments) {
            const Post& p = corpus.post(i);
            tl.events.emplace_back(OwnComment{p.created_utc, p.id, *corpus.post(corpus.parent(i)).sentiment, *p.sentiment});
            for (std::size_t c : corpus.children(i)) {
                const Post& r = corpus.post(c);
                if (r.author == user || !r.sentiment) continue;
                tl.events.emplace_back(ReplyReceived{r.created_utc, r.id, *r.sentiment});
            }
        }
        std::sort(tl.events.begin(), tl.events.end(), [](const TimelineEvent& a, const TimelineEvent& b) {
            const auto ta = event_time(a);
            const auto tb = event_time(b);
            if (ta != tb) return ta < tb;
            return event_post_id(a) < event_post_id(b);
        });
        out.push_back(std::move(tl));
    }
    return out;
}

CorpusSummary summarize(const Corpus& corpus) {
    CorpusSummary s;
    std::array<std::set<std::string>, 5> users;
    std::set<std::string> all_users;
    for (const Post& p : corpus.posts()) {
        auto& c = s.per_topic[static_cast<std::size_t>(p.topic)];
        if (p.is_submission) {
            ++c.submissions;
            ++s.total.submissions;
        } else {
            ++c.comments;
            ++s.total.comments;
        }
        if (p.author != kDeletedAuthor) {
            users[static_cast<std::size_t>(p.topic)].insert(p.author);
            all_users.insert(p.author);
        }
    }
    for (std::size_t t = 0; t < users.size(); ++t) s.per_topic[t].users = users[t].size();
    s.total.users = all_users.size();
    return s;
}

} // namespace sentdyn
