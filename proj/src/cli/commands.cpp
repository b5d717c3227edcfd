#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <map>
#include <ostream>
#include <set>

#include <json.hpp>

#include "sentdyn/cli.hpp"
#include "sentdyn/csv.hpp"
#include "sentdyn/error.hpp"
#include "sentdyn/homophily.hpp"
#include "sentdyn/initiation.hpp"
#include "sentdyn/rng.hpp"
#include "sentdyn/siebc/persist.hpp"

namespace sentdyn::cli {

namespace fs = std::filesystem;
using Json = nlohmann::ordered_json;

std::string cache_path(const RunConfig& cfg) { return (fs::path(cfg.out_dir) / "corpus.jsonl").string(); }

namespace {

std::string out_file(const RunConfig& cfg, const std::string& name) { return (fs::path(cfg.out_dir) / name).string(); }

void ensure_out_dir(const RunConfig& cfg) {
    std::error_code ec;
    fs::create_directories(cfg.out_dir, ec);
    if (ec) throw ConfigError("cannot create output directory '" + cfg.out_dir + "': " + ec.message());
}

Corpus load_cache(const RunConfig& cfg) {
    const std::string path = cache_path(cfg);
    if (!fs::exists(path)) throw DataError("missing corpus cache '" + path + "'; run ingest first");
    return Corpus::from_posts(read_posts_jsonl_file(path));
}

void write_json(const std::string& path, const Json& j) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw ConfigError("cannot write '" + path + "'");
    out << j.dump(2) << '\n';
}

std::string topic_name(Topic t) { return std::string(to_string(t)); }

Json parameters_json(const RunConfig& cfg) {
    Json p;
    p["seed"] = cfg.seed;
    Json topics = Json::array();
    for (Topic t : cfg.topics) topics.push_back(topic_name(t));
    p["topics"] = topics;
    p["rolling_window"] = cfg.rolling_window;
    p["rolling_align"] = cfg.rolling_align == RollingAlignment::trailing ? "trailing" : "centered";
    p["negative_q"] = cfg.negative.q;
    p["negative_min_posts"] = cfg.negative.min_posts;
    p["quantile_type"] = cfg.negative.quantile_type == QuantileType::type7 ? "type7" : "type1";
    p["max_i"] = cfg.max_i;
    p["bin_width"] = cfg.bin_width;
    p["replicates"] = cfg.replicates;
    p["context_max_n"] = cfg.context_max_n;
    p["min_comments"] = cfg.min_comments;
    p["kernel"] = std::string(siebc::to_string(cfg.fit.model.kernel));
    p["gamma"] = cfg.fit.model.gamma;
    p["chains"] = cfg.fit.sampler.chains;
    p["draws"] = cfg.fit.sampler.draws;
    p["warmup"] = cfg.fit.sampler.warmup;
    p["latent_thin"] = cfg.fit.sampler.latent_thin;
    p["alpha_prior_mean"] = cfg.fit.priors.alpha_mean;
    p["sigma_prior_mean"] = cfg.fit.priors.sigma_mean;
    p["epsilon_max"] = cfg.fit.priors.epsilon_max;
    return p;
}

// ---------------------------------------------------------------------------
// ingest

void write_summary(const RunConfig& cfg, const CorpusSummary& s) {
    CsvWriter w(out_file(cfg, "ingest_summary.csv"));
    w.header({"topic", "users", "comments", "submissions"});
    for (Topic t : {Topic::lockdown, Topic::mask, Topic::vaccination, Topic::other, Topic::not_applicable}) {
        const auto& c = s.per_topic[static_cast<std::size_t>(t)];
        w.cell(to_string(t)).cell(c.users).cell(c.comments).cell(c.submissions).end_row();
    }
    w.cell("total").cell(s.total.users).cell(s.total.comments).cell(s.total.submissions).end_row();
}

// ---------------------------------------------------------------------------
// analyze

struct Overlay {
    std::vector<std::string> columns;
    std::map<Date, std::vector<std::string>> rows;
};

Overlay read_overlay(const std::string& path) {
    Overlay o;
    if (path.empty()) return o;
    const CsvTable t = read_csv(path);
    if (t.columns.empty() || t.columns[0] != "date") throw DataError("overlay '" + path + "' must start with a date column");
    o.columns.assign(t.columns.begin() + 1, t.columns.end());
    for (const auto& r : t.rows) o.rows[Date::parse(r[0])] = std::vector<std::string>(r.begin() + 1, r.end());
    return o;
}

std::pair<Date, Date> study_window(const RunConfig& cfg, const Corpus& corpus) {
    Date lo{0};
    Date hi{0};
    if (corpus.size() > 0) {
        lo = Date::from_epoch_seconds(corpus.posts().front().created_utc);
        hi = Date::from_epoch_seconds(corpus.posts().back().created_utc);
    }
    return {cfg.window_start.value_or(lo), cfg.window_end.value_or(hi)};
}

void write_grid(const std::string& path, const HistogramGrid& g) {
    CsvWriter w(path);
    w.header({"i_mid", "j_mid", "value"});
    for (std::size_t i = 0; i < g.bins(); ++i) {
        for (std::size_t j = 0; j < g.bins(); ++j) w.cell(g.midpoint(i)).cell(g.midpoint(j)).cell(g.at(i, j)).end_row();
    }
}

// ---------------------------------------------------------------------------
// fit

struct Moments {
    double mean = 0.0;
    double sd = 0.0;
};

Moments pooled_moments(const siebc::PosteriorDraws& d, std::size_t k) {
    double sum = 0.0;
    double sq = 0.0;
    std::size_t n = 0;
    for (const auto& u : d.users) {
        for (const auto& p : u.samples) {
            const double v = siebc::get(p, k);
            sum += v;
            sq += v * v;
            ++n;
        }
    }
    if (n == 0) return {};
    const double mean = sum / static_cast<double>(n);
    const double var = n > 1 ? (sq - static_cast<double>(n) * mean * mean) / static_cast<double>(n - 1) : 0.0;
    return {mean, std::sqrt(std::max(var, 0.0))};
}

} // namespace

int cmd_ingest(const RunConfig& cfg, std::ostream& log) {
    validate(cfg, true);
    std::vector<Post> posts = read_posts_jsonl_file(cfg.corpus);
    if (posts.empty()) throw DataError("no posts in '" + cfg.corpus + "'");
    const std::size_t read = posts.size();
    const Corpus raw = Corpus::from_posts(std::move(posts));
    const FilterResult filtered = filter_na_submissions(raw);
    const Corpus resolved = inherit_topics(filtered.corpus);

    ensure_out_dir(cfg);
    {
        std::ofstream out(cache_path(cfg), std::ios::binary);
        if (!out) throw ConfigError("cannot write '" + cache_path(cfg) + "'");
        write_posts_jsonl(out, resolved.posts());
    }
    const CorpusSummary summary = summarize(resolved);
    write_summary(cfg, summary);

    Json report;
    report["command"] = "ingest";
    report["posts_read"] = read;
    report["threads_removed"] = filtered.removed_threads;
    report["posts_kept"] = resolved.size();
    report["submissions"] = summary.total.submissions;
    report["comments"] = summary.total.comments;
    report["users"] = summary.total.users;
    report["artifacts"] = Json::array({"corpus.jsonl", "ingest_summary.csv", "ingest_report.json"});
    write_json(out_file(cfg, "ingest_report.json"), report);

    log << "ingest: " << resolved.size() << " posts kept, " << filtered.removed_threads << " thread(s) removed\n";
    return kOk;
}

int cmd_analyze(const RunConfig& cfg, std::ostream& log) {
    validate(cfg, false);
    const Corpus corpus = load_cache(cfg);
    ensure_out_dir(cfg);
    const auto [first, last] = study_window(cfg, corpus);
    if (last < first) throw ConfigError("study window is empty");
    const Overlay overlay = read_overlay(cfg.overlay);
    const Segmentation seg = segment_discussions(corpus);
    const auto sequences = build_sequences(corpus, seg);

    std::vector<std::string> artifacts;
    Json notes = Json::array();
    CsvWriter summary(out_file(cfg, "homophily_summary.csv"));
    summary.header({"topic", "kind", "n", "pairs", "h"});
    CsvWriter ctx_report(out_file(cfg, "context_report.csv"));
    ctx_report.header({"topic", "candidates", "insufficient_ancestors", "ancestor_without_sentiment",
                       "insufficient_history", "history_parent_without_sentiment", "eligible"});
    Json negative = Json::object();

    for (Topic t : cfg.topics) {
        const std::string name = topic_name(t);

        // Volume, trends, negative days.
        const DailySeries daily = daily_counts(corpus, t, first, last);
        const auto rolling = rolling_mean(daily.values, cfg.rolling_window, cfg.rolling_align);
        const WeightedSentimentSet ws = weighted_sentiments(corpus, t);
        std::set<Date> flagged;
        if (ws.size() > 0) {
            for (Date d : negative_days(ws, cfg.negative)) flagged.insert(d);
        } else {
            notes.push_back(name + ": no posts with sentiment, negative-day detection skipped");
        }
        Json days = Json::array();
        for (Date d : flagged) days.push_back(d.str());
        negative[name] = days;
        {
            const std::string file = "temporal_" + name + ".csv";
            CsvWriter w(out_file(cfg, file));
            std::vector<std::string> cols{"date", "count", "rolling_mean", "flagged"};
            cols.insert(cols.end(), overlay.columns.begin(), overlay.columns.end());
            w.header(cols);
            for (std::size_t k = 0; k < daily.values.size(); ++k) {
                const Date d = daily.start + static_cast<std::int64_t>(k);
                w.cell(d.str()).cell(static_cast<std::int64_t>(daily.values[k])).cell(rolling[k]).cell(flagged.count(d) > 0);
                if (!overlay.columns.empty()) {
                    const auto it = overlay.rows.find(d);
                    for (std::size_t c = 0; c < overlay.columns.size(); ++c) {
                        w.cell(it == overlay.rows.end() ? std::string_view{} : std::string_view(it->second[c]));
                    }
                }
                w.end_row();
            }
            artifacts.push_back(file);
        }
        {
            EventCalendar cal;
            const auto it = cfg.topic_events.find(t);
            const std::string events = it != cfg.topic_events.end() ? it->second : cfg.events;
            if (!events.empty()) cal = read_event_calendar_file(events);
            const std::string file = "trends_" + name + ".csv";
            CsvWriter w(out_file(cfg, file));
            w.header({"segment_start", "segment_end", "points", "fitted", "slope", "intercept"});
            for (const auto& s : piecewise_trend(daily, cal)) {
                w.cell(s.begin.str()).cell((s.end + -1).str()).cell(s.points).cell(s.fitted);
                if (s.fitted) {
                    w.cell(s.slope).cell(s.intercept);
                } else {
                    w.cell("").cell("");
                }
                w.end_row();
            }
            artifacts.push_back(file);
        }

        // Initiation curves.
        std::vector<DiscussionSequence> topic_seqs;
        for (const auto& s : sequences) {
            if (s.topic == t) topic_seqs.push_back(s);
        }
        if (!topic_seqs.empty()) {
            const RhoCurves rho = rho_curves(topic_seqs, cfg.max_i);
            const std::string file = "rho_" + name + ".csv";
            CsvWriter w(out_file(cfg, file));
            w.header({"i", "rho_observed", "rho_expected"});
            for (std::size_t i = 0; i < cfg.max_i; ++i) w.cell(i + 1).cell(rho.observed[i]).cell(rho.expected[i]).end_row();
            artifacts.push_back(file);
        } else {
            notes.push_back(name + ": no discussion sequences");
        }

        // Comment-parent homophily.
        DifferenceConfig dc{cfg.replicates, 0.05, derive_seed(cfg.seed, hash_string("histogram"), static_cast<std::uint64_t>(t))};
        const TopicPairs tp = comment_parent_pairs(corpus, t);
        if (!tp.pairs.empty()) {
            const auto observed = joint_histogram(tp.pairs, cfg.bin_width);
            const auto diff = difference_histogram(observed, tp.null, dc);
            const std::pair<const char*, const HistogramGrid*> grids[] = {
                {"H", &observed.grid}, {"null", &diff.null_mean}, {"delta", &diff.delta}, {"p", &diff.p_values}};
            for (const auto& [kind, grid] : grids) {
                const std::string file = std::string("hist_") + kind + "_" + name + ".csv";
                write_grid(out_file(cfg, file), *grid);
                artifacts.push_back(file);
            }
            summary.cell(name).cell("parent").cell(1).cell(tp.pairs.size()).cell(homophily_measure(diff)).end_row();
        } else {
            notes.push_back(name + ": no comment-parent pairs with sentiment");
        }

        // Context homophily curves.
        dc.seed = derive_seed(cfg.seed, hash_string("context"), static_cast<std::uint64_t>(t));
        const auto ctx = context_homophily(corpus, t, cfg.context_max_n, dc, cfg.bin_width);
        for (const auto& row : ctx.curve) {
            summary.cell(name).cell(to_string(row.kind)).cell(row.n).cell(row.pairs).cell(row.h).end_row();
        }
        if (ctx.curve.empty()) notes.push_back(name + ": no comments with full contexts");
        const auto& r = ctx.report;
        std::size_t eligible = ctx.curve.empty() ? 0 : ctx.curve.front().pairs;
        ctx_report.cell(name).cell(r.candidates).cell(r.insufficient_ancestors).cell(r.ancestor_without_sentiment)
            .cell(r.insufficient_history).cell(r.history_parent_without_sentiment).cell(eligible).end_row();
    }
    artifacts.push_back("homophily_summary.csv");
    artifacts.push_back("context_report.csv");
    std::sort(artifacts.begin(), artifacts.end());

    Json manifest;
    manifest["command"] = "analyze";
    manifest["window"] = {{"start", first.str()}, {"end", last.str()}};
    manifest["parameters"] = parameters_json(cfg);
    manifest["negative_days"] = negative;
    manifest["artifacts"] = artifacts;
    manifest["notes"] = notes;
    write_json(out_file(cfg, "manifest.json"), manifest);
    log << "analyze: wrote " << artifacts.size() << " artifacts to " << cfg.out_dir << "\n";
    return kOk;
}

int cmd_fit(const RunConfig& cfg, std::ostream& log) {
    validate(cfg, false);
    const Corpus corpus = load_cache(cfg);
    ensure_out_dir(cfg);

    Json summary;
    summary["command"] = "fit";
    summary["parameters"] = parameters_json(cfg);
    Json topics = Json::object();
    bool any = false;
    bool all_converged = true;

    for (Topic t : cfg.topics) {
        const std::string name = topic_name(t);
        const auto timelines = build_timelines(corpus, t, cfg.min_comments);
        if (timelines.empty()) {
            topics[name] = {{"users", 0}, {"note", "no user with at least " + std::to_string(cfg.min_comments) + " comments"}};
            continue;
        }
        any = true;
        siebc::FitConfig fc = cfg.fit;
        fc.seed = derive_seed(cfg.seed, hash_string("fit"), static_cast<std::uint64_t>(t));
        const siebc::PosteriorDraws draws = siebc::fit(timelines, fc);
        siebc::write_draws(draws, out_file(cfg, "draws_" + name + ".csv"), out_file(cfg, "latent_" + name + ".csv"));

        const auto kap = siebc::kappa(draws, cfg.kappa_p);
        siebc::PredictiveConfig pc;
        pc.max_draws = cfg.ppc_draws;
        pc.homophily_draws = cfg.ppc_homophily_draws;
        pc.homophily = DifferenceConfig{cfg.ppc_replicates, 0.05, 0};
        pc.bin_width = cfg.bin_width;
        pc.seed = derive_seed(cfg.seed, hash_string("predictive"), static_cast<std::uint64_t>(t));
        const auto ppc = siebc::posterior_predictive(draws, timelines, pc);

        {
            CsvWriter w(out_file(cfg, "rhat_" + name + ".csv"));
            w.header({"user", "alpha_e", "alpha_u", "epsilon", "sigma_e", "sigma_u", "converged", "kappa_p_value"});
            for (std::size_t i = 0; i < draws.users.size(); ++i) {
                const auto& u = draws.users[i];
                w.cell(u.user);
                for (double r : u.rhat) w.cell(r);
                w.cell(u.converged).cell(kap.p_values[i]).end_row();
            }
        }
        {
            CsvWriter w(out_file(cfg, "predictive_" + name + ".csv"));
            w.header({"bin_mid", "observed", "predicted"});
            const HistogramGrid grid(cfg.bin_width);
            for (std::size_t b = 0; b < ppc.observed.mass.size(); ++b) {
                w.cell(grid.midpoint(b)).cell(ppc.observed.mass[b]).cell(ppc.predicted.mass[b]).end_row();
            }
        }

        Json j;
        std::size_t comments = 0;
        Json unconverged = Json::array();
        double max_rhat = 0.0;
        for (const auto& u : draws.users) {
            comments += u.latent_length - 1;
            if (!u.converged) {
                unconverged.push_back(u.user);
                all_converged = false;
                log << "warning: " << name << "/" << u.user << " did not converge (R-hat > "
                    << cfg.fit.sampler.rhat_threshold << ")\n";
            }
            for (double r : u.rhat) max_rhat = std::max(max_rhat, std::isfinite(r) ? r : max_rhat);
        }
        j["users"] = draws.users.size();
        j["comments"] = comments;
        for (std::size_t k = 0; k < siebc::kParamCount; ++k) {
            const Moments m = pooled_moments(draws, k);
            j[siebc::kParamNames[k]] = {{"mean", m.mean}, {"sd", m.sd}};
        }
        j["kappa"] = kap.kappa;
        j["w1"] = ppc.w1;
        j["h_observed"] = ppc.observed_h;
        j["h_predicted"] = {{"min", ppc.h.min}, {"q1", ppc.h.q1}, {"median", ppc.h.median}, {"q3", ppc.h.q3}, {"max", ppc.h.max}};
        j["max_rhat"] = max_rhat;
        j["unconverged_users"] = unconverged;
        j["artifacts"] = Json::array({"draws_" + name + ".csv", "latent_" + name + ".csv", "rhat_" + name + ".csv",
                                      "predictive_" + name + ".csv"});
        topics[name] = j;
        log << "fit: " << name << " users=" << draws.users.size() << " kappa=" << kap.kappa << " W1=" << ppc.w1 << "\n";
    }
    if (!any) {
        throw DataError("no user has at least " + std::to_string(cfg.min_comments) +
                        " usable comments on the requested topics (min_comments)");
    }
    summary["topics"] = topics;
    write_json(out_file(cfg, "fit_summary.json"), summary);
    if (cfg.strict && !all_converged) return kNotConverged;
    return kOk;
}

int cmd_simulate(const RunConfig& cfg, std::ostream& log) {
    validate(cfg, false);
    ensure_out_dir(cfg);
    const auto syn = siebc::generate_synthetic(cfg.synthetic, derive_seed(cfg.seed, hash_string("simulate")));
    {
        std::ofstream out(out_file(cfg, "synthetic_corpus.jsonl"), std::ios::binary);
        write_posts_jsonl(out, syn.posts);
    }
    CsvWriter params(out_file(cfg, "truth_params.csv"));
    params.header({"user", "alpha_e", "alpha_u", "epsilon", "sigma_e", "sigma_u"});
    CsvWriter internal(out_file(cfg, "truth_internal.csv"));
    internal.header({"user", "event_index", "t", "u"});
    for (const auto& tr : syn.truth) {
        params.cell(tr.user);
        for (std::size_t k = 0; k < siebc::kParamCount; ++k) params.cell(siebc::get(tr.params, k));
        params.end_row();
        for (std::size_t e = 0; e < tr.internal.size(); ++e) {
            internal.cell(tr.user).cell(e);
            if (e == 0) {
                internal.cell("");
            } else {
                internal.cell(tr.times[e - 1]);
            }
            internal.cell(tr.internal[e]).end_row();
        }
    }
    log << "simulate: " << syn.posts.size() << " posts, " << syn.truth.size() << " users\n";
    return kOk;
}

int cmd_reconstruct(const RunConfig& cfg, std::ostream& log) {
    validate(cfg, false);
    const Corpus corpus = load_cache(cfg);
    bool any = false;
    for (Topic t : cfg.topics) {
        const std::string name = topic_name(t);
        const std::string dpath = out_file(cfg, "draws_" + name + ".csv");
        const std::string lpath = out_file(cfg, "latent_" + name + ".csv");
        if (!fs::exists(dpath) || !fs::exists(lpath)) continue;
        siebc::PosteriorDraws draws = siebc::read_draws(dpath, lpath, t);
        const auto timelines = build_timelines(corpus, t, 1);
        for (auto& u : draws.users) {
            const auto it = std::find_if(timelines.begin(), timelines.end(), [&](const UserTimeline& tl) { return tl.user == u.user; });
            if (it == timelines.end()) throw DataError("posterior user '" + u.user + "' not found in the corpus");
            u.times = siebc::to_series(*it).times;
            if (u.times.size() + 1 != u.latent_length) throw DataError("posterior for '" + u.user + "' does not match the corpus");
        }
        CsvWriter w(out_file(cfg, "internal_" + name + ".csv"));
        w.header({"date", "users", "median", "q1", "q3"});
        for (const auto& row : siebc::reconstruct_internal(draws)) {
            w.cell(row.date.str()).cell(row.users).cell(row.median).cell(row.q1).cell(row.q3).end_row();
        }
        any = true;
        log << "reconstruct: " << name << " (" << draws.users.size() << " users)\n";
    }
    if (!any) throw DataError("no posterior draws found in '" + cfg.out_dir + "'; run fit first");
    return kOk;
}

int run_command(const std::string& name, const RunConfig& cfg, std::ostream& log, std::ostream& err) {
    try {
        if (name == "ingest") return cmd_ingest(cfg, log);
        if (name == "analyze") return cmd_analyze(cfg, log);
        if (name == "fit") return cmd_fit(cfg, log);
        if (name == "simulate") return cmd_simulate(cfg, log);
        if (name == "reconstruct") return cmd_reconstruct(cfg, log);
        err << "error: unknown command '" << name << "'\n";
        return kUsage;
    } catch (const ConfigError& e) {
        err << "error: " << e.what() << "\n";
        return kUsage;
    } catch (const DataError& e) {
        err << "error: " << e.what() << "\n";
        return kDataError;
    }
}

} // namespace sentdyn::cli
