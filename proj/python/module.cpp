#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <map>
#include <sstream>

#include "sentdyn/cli.hpp"
#include "sentdyn/corpus.hpp"
#include "sentdyn/error.hpp"
#include "sentdyn/homophily.hpp"
#include "sentdyn/initiation.hpp"
#include "sentdyn/siebc/evaluation.hpp"
#include "sentdyn/siebc/fit.hpp"
#include "sentdyn/siebc/kernel.hpp"
#include "sentdyn/siebc/synthetic.hpp"
#include "sentdyn/stats.hpp"
#include "sentdyn/temporal.hpp"

namespace py = pybind11;
using namespace sentdyn;

namespace {

py::array_t<double> grid_to_array(const HistogramGrid& g) {
    py::array_t<double> out({g.bins(), g.bins()});
    auto view = out.mutable_unchecked<2>();
    for (std::size_t i = 0; i < g.bins(); ++i) {
        for (std::size_t j = 0; j < g.bins(); ++j) view(i, j) = g.at(i, j);
    }
    return out;
}

HistogramGrid array_to_grid(const py::array_t<double, py::array::c_style | py::array::forcecast>& a, double bin_width) {
    HistogramGrid g(bin_width);
    if (a.ndim() != 2 || static_cast<std::size_t>(a.shape(0)) != g.bins() ||
        static_cast<std::size_t>(a.shape(1)) != g.bins()) {
        throw py::value_error("expected a square array with " + std::to_string(g.bins()) + " bins per side");
    }
    auto view = a.unchecked<2>();
    for (std::size_t i = 0; i < g.bins(); ++i) {
        for (std::size_t j = 0; j < g.bins(); ++j) g.at(i, j) = view(i, j);
    }
    return g;
}

py::dict counts_dict(const TopicCounts& c) {
    py::dict d;
    d["users"] = c.users;
    d["comments"] = c.comments;
    d["submissions"] = c.submissions;
    return d;
}

} // namespace

PYBIND11_MODULE(_sentdyn, m) {
    m.doc() = "Topic initiation, sentiment homophily and SIEBC opinion-model calibration";

    py::register_exception<ConfigError>(m, "ConfigError", PyExc_ValueError);
    py::register_exception<DataError>(m, "DataError", PyExc_ValueError);

    py::enum_<Topic>(m, "Topic")
        .value("lockdown", Topic::lockdown)
        .value("mask", Topic::mask)
        .value("vaccination", Topic::vaccination)
        .value("other", Topic::other)
        .value("not_applicable", Topic::not_applicable);

    py::class_<Post>(m, "Post")
        .def(py::init<>())
        .def_readwrite("id", &Post::id)
        .def_readwrite("parent_id", &Post::parent_id)
        .def_readwrite("author", &Post::author)
        .def_readwrite("created_utc", &Post::created_utc)
        .def_readwrite("score", &Post::score)
        .def_readwrite("topic", &Post::topic)
        .def_readwrite("sentiment", &Post::sentiment)
        .def_readwrite("is_submission", &Post::is_submission)
        .def("__eq__", [](const Post& a, const Post& b) { return a == b; })
        .def("__repr__", [](const Post& p) { return "<Post " + p.id + ">"; });

    m.def("read_posts", &read_posts_jsonl_file, py::arg("path"));
    m.def("combine_sentiment", &combine_sentiment, py::arg("positive"), py::arg("negative"));

    py::class_<Corpus>(m, "Corpus")
        .def_static("from_posts", &Corpus::from_posts, py::arg("posts"))
        .def_property_readonly("posts", &Corpus::posts)
        .def("__len__", &Corpus::size)
        .def("summary", [](const Corpus& c) {
            const CorpusSummary s = summarize(c);
            py::dict out;
            for (Topic t : {Topic::lockdown, Topic::mask, Topic::vaccination, Topic::other, Topic::not_applicable}) {
                out[py::str(std::string(to_string(t)))] = counts_dict(s.per_topic[static_cast<std::size_t>(t)]);
            }
            out["total"] = counts_dict(s.total);
            return out;
        });

    m.def(
        "prepare_corpus",
        [](std::vector<Post> posts, double threshold) {
            const Corpus raw = Corpus::from_posts(std::move(posts));
            return inherit_topics(filter_na_submissions(raw, threshold).corpus);
        },
        py::arg("posts"), py::arg("na_threshold") = 0.9,
        "Drops mostly-NA threads and resolves inherited topics.");

    m.def(
        "first_initiation_pmf",
        [](std::size_t n_i, std::size_t n_p) { return first_initiation_pmf(n_i, n_p).pmf; },
        py::arg("n_initiations"), py::arg("n_participations"));

    m.def("bc_kernel", &siebc::bc_kernel, py::arg("s1"), py::arg("s2"), py::arg("alpha"), py::arg("epsilon"),
          py::arg("gamma") = siebc::kDefaultGamma);
    m.def("linear_kernel", &siebc::linear_kernel, py::arg("s1"), py::arg("s2"), py::arg("alpha"));

    m.def(
        "homophily_measure",
        [](const py::array_t<double, py::array::c_style | py::array::forcecast>& delta, double bin_width) {
            return homophily_measure(array_to_grid(delta, bin_width));
        },
        py::arg("delta"), py::arg("bin_width") = kDefaultBinWidth);

    m.def(
        "joint_histogram",
        [](const std::vector<SentimentPair>& pairs, double bin_width) {
            return grid_to_array(joint_histogram(pairs, bin_width).grid);
        },
        py::arg("pairs"), py::arg("bin_width") = kDefaultBinWidth);

    m.def(
        "topic_homophily",
        [](const Corpus& corpus, Topic topic, std::size_t replicates, double alpha, std::uint64_t seed,
           double bin_width) {
            const TopicPairs tp = comment_parent_pairs(corpus, topic);
            if (tp.pairs.empty()) throw DataError("no comment-parent pairs with sentiment on this topic");
            DifferenceHistogram d;
            {
                py::gil_scoped_release release;
                d = difference_histogram(joint_histogram(tp.pairs, bin_width), tp.null, {replicates, alpha, seed});
            }
            py::dict out;
            out["h"] = homophily_measure(d);
            out["pairs"] = tp.pairs.size();
            out["delta"] = grid_to_array(d.delta);
            out["p_values"] = grid_to_array(d.p_values);
            return out;
        },
        py::arg("corpus"), py::arg("topic"), py::arg("replicates") = 1000, py::arg("alpha") = 0.05,
        py::arg("seed") = 0, py::arg("bin_width") = kDefaultBinWidth);

    m.def(
        "mann_whitney_greater",
        [](const std::vector<double>& x, const std::vector<double>& y) {
            const auto r = mann_whitney_greater(x, y);
            return py::make_tuple(r.u, r.p_value, r.exact);
        },
        py::arg("x"), py::arg("y"), "Returns (U, one-sided p-value, exact).");

    m.def(
        "wasserstein_1",
        [](const std::vector<double>& p, const std::vector<double>& q, double bin_width) {
            return wasserstein_1(BinnedDistribution{bin_width, p}, BinnedDistribution{bin_width, q});
        },
        py::arg("p"), py::arg("q"), py::arg("bin_width") = 0.05);

    m.def(
        "quantile",
        [](std::vector<double> values, double q, const std::string& type) {
            if (type != "type7" && type != "type1") throw py::value_error("type must be 'type7' or 'type1'");
            return quantile(std::move(values), q, type == "type7" ? QuantileType::type7 : QuantileType::type1);
        },
        py::arg("values"), py::arg("q"), py::arg("type") = "type7");

    m.def(
        "negative_days",
        [](const std::map<std::string, std::vector<double>>& by_day, double q, std::size_t min_posts) {
            WeightedSentimentSet ws;
            for (const auto& [day, values] : by_day) ws.by_day[Date::parse(day)] = values;
            std::vector<std::string> out;
            for (Date d : negative_days(ws, {q, min_posts})) out.push_back(d.str());
            return out;
        },
        py::arg("by_day"), py::arg("q") = 0.275, py::arg("min_posts") = 50);

    py::class_<siebc::Params>(m, "Params")
        .def(py::init([](double ae, double au, double eps, double se, double su) {
                 return siebc::Params{ae, au, eps, se, su};
             }),
             py::arg("alpha_e") = 0.5, py::arg("alpha_u") = 0.5, py::arg("epsilon") = 1.0, py::arg("sigma_e") = 0.5,
             py::arg("sigma_u") = 0.5)
        .def_readwrite("alpha_e", &siebc::Params::alpha_e)
        .def_readwrite("alpha_u", &siebc::Params::alpha_u)
        .def_readwrite("epsilon", &siebc::Params::epsilon)
        .def_readwrite("sigma_e", &siebc::Params::sigma_e)
        .def_readwrite("sigma_u", &siebc::Params::sigma_u);

    py::class_<UserTimeline>(m, "UserTimeline")
        .def_readonly("user", &UserTimeline::user)
        .def_readonly("topic", &UserTimeline::topic)
        .def_property_readonly("own_comments", &UserTimeline::own_comment_count);

    m.def("build_timelines", &build_timelines, py::arg("corpus"), py::arg("topic"), py::arg("min_comments") = 40);

    py::class_<siebc::SyntheticCorpus>(m, "SyntheticCorpus")
        .def_readonly("posts", &siebc::SyntheticCorpus::posts)
        .def_readonly("timelines", &siebc::SyntheticCorpus::timelines)
        .def_property_readonly("true_params", [](const siebc::SyntheticCorpus& s) {
            std::vector<siebc::Params> out;
            for (const auto& t : s.truth) out.push_back(t.params);
            return out;
        });

    m.def(
        "generate_synthetic",
        [](std::size_t n_users, std::size_t comments_per_user, const siebc::Params& params, bool polarized,
           const std::string& kernel, std::uint64_t seed) {
            siebc::SyntheticSpec spec;
            spec.n_users = n_users;
            spec.comments_per_user = comments_per_user;
            spec.params = params;
            spec.model.kernel = siebc::parse_kernel(kernel);
            if (polarized) {
                spec.background_law = siebc::SentimentLaw::polarized;
                spec.initial_law = siebc::SentimentLaw::polarized;
            }
            return siebc::generate_synthetic(spec, seed);
        },
        py::arg("n_users") = 20, py::arg("comments_per_user") = 200,
        py::arg("params") = siebc::Params{0.8, 0.4, 0.6, 0.1, 0.1}, py::arg("polarized") = false,
        py::arg("kernel") = "bounded", py::arg("seed") = 0);

    py::class_<siebc::UserPosterior>(m, "UserPosterior")
        .def_readonly("user", &siebc::UserPosterior::user)
        .def_readonly("converged", &siebc::UserPosterior::converged)
        .def_readonly("rhat", &siebc::UserPosterior::rhat)
        .def(
            "draws",
            [](const siebc::UserPosterior& up, const std::string& name) {
                for (std::size_t k = 0; k < siebc::kParamCount; ++k) {
                    if (name == siebc::kParamNames[k]) {
                        const auto v = up.parameter_draws(k);
                        return py::array_t<double>(static_cast<py::ssize_t>(v.size()), v.data());
                    }
                }
                throw py::key_error("unknown parameter '" + name + "'");
            },
            py::arg("name"));

    py::class_<siebc::PosteriorDraws>(m, "PosteriorDraws")
        .def_readonly("users", &siebc::PosteriorDraws::users)
        .def("kappa", [](const siebc::PosteriorDraws& d, double p) { return siebc::kappa(d, p).kappa; },
             py::arg("p_threshold") = 0.05);

    m.def(
        "fit",
        [](const std::vector<UserTimeline>& timelines, std::size_t chains, std::size_t draws, std::size_t warmup,
           const std::string& kernel, std::uint64_t seed) {
            siebc::FitConfig cfg;
            cfg.sampler.chains = chains;
            cfg.sampler.draws = draws;
            cfg.sampler.warmup = warmup;
            cfg.model.kernel = siebc::parse_kernel(kernel);
            cfg.seed = seed;
            py::gil_scoped_release release;
            return siebc::fit(timelines, cfg);
        },
        py::arg("timelines"), py::arg("chains") = 6, py::arg("draws") = 500, py::arg("warmup") = 250,
        py::arg("kernel") = "bounded", py::arg("seed") = 0);

    m.def(
        "run_command",
        [](const std::string& command, const std::map<std::string, std::string>& settings) {
            cli::RunConfig cfg;
            for (const auto& [k, v] : settings) cli::apply_setting(cfg, k, v);
            std::ostringstream log;
            std::ostringstream err;
            int rc = 0;
            {
                py::gil_scoped_release release;
                rc = cli::run_command(command, cfg, log, err);
            }
            return py::make_tuple(rc, log.str(), err.str());
        },
        py::arg("command"), py::arg("settings"),
        "Runs a CLI subcommand with key = value settings; returns (exit code, log, errors).");
}
