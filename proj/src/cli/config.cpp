#include <algorithm>
#include <charconv>
#include <filesystem>
#include <fstream>
#include <functional>
#include <istream>
#include <sstream>

#include "sentdyn/cli.hpp"
#include "sentdyn/error.hpp"

namespace sentdyn::cli {

namespace {

std::string trim(const std::string& s) {
    const auto a = s.find_first_not_of(" \t\r");
    if (a == std::string::npos) return {};
    const auto b = s.find_last_not_of(" \t\r");
    return s.substr(a, b - a + 1);
}

std::uint64_t as_u64(const std::string& key, const std::string& v) {
    std::uint64_t out = 0;
    auto [ptr, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
    if (ec != std::errc{} || ptr != v.data() + v.size()) throw ConfigError(key + ": expected a non-negative integer, got '" + v + "'");
    return out;
}

std::size_t as_size(const std::string& key, const std::string& v) { return static_cast<std::size_t>(as_u64(key, v)); }

double as_double(const std::string& key, const std::string& v) {
    try {
        std::size_t used = 0;
        const double d = std::stod(v, &used);
        if (used != v.size()) throw std::invalid_argument(v);
        return d;
    } catch (const std::exception&) {
        throw ConfigError(key + ": expected a number, got '" + v + "'");
    }
}

bool as_bool(const std::string& key, const std::string& v) {
    if (v == "true" || v == "1" || v == "yes") return true;
    if (v == "false" || v == "0" || v == "no") return false;
    throw ConfigError(key + ": expected true or false, got '" + v + "'");
}

Date as_date(const std::string& key, const std::string& v) {
    try {
        return Date::parse(v);
    } catch (const DataError& e) {
        throw ConfigError(key + ": " + e.what());
    }
}

Topic as_topic(const std::string& key, const std::string& v) {
    try {
        const Topic t = parse_topic(v);
        if (!is_studied(t)) throw DataError("not a studied topic");
        return t;
    } catch (const DataError&) {
        throw ConfigError(key + ": unknown topic '" + v + "' (expected lockdown, mask or vaccination)");
    }
}

std::vector<Topic> as_topics(const std::string& key, const std::string& v) {
    std::vector<Topic> out;
    std::stringstream ss(v);
    std::string item;
    while (std::getline(ss, item, ',')) {
        item = trim(item);
        if (!item.empty()) out.push_back(as_topic(key, item));
    }
    if (out.empty()) throw ConfigError(key + ": no topics given");
    return out;
}

siebc::SentimentLaw as_law(const std::string& key, const std::string& v) {
    if (v == "uniform") return siebc::SentimentLaw::uniform;
    if (v == "polarized") return siebc::SentimentLaw::polarized;
    throw ConfigError(key + ": expected uniform or polarized, got '" + v + "'");
}

using Setter = std::function<void(RunConfig&, const std::string&, const std::string&)>;

const std::map<std::string, Setter>& setters() {
    static const std::map<std::string, Setter> table = {
        {"corpus", [](RunConfig& c, auto&, auto& v) { c.corpus = v; }},
        {"topics", [](RunConfig& c, auto& k, auto& v) { c.topics = as_topics(k, v); }},
        {"out", [](RunConfig& c, auto&, auto& v) { c.out_dir = v; }},
        {"seed", [](RunConfig& c, auto& k, auto& v) { c.seed = as_u64(k, v); }},
        {"strict", [](RunConfig& c, auto& k, auto& v) { c.strict = as_bool(k, v); }},
        {"window_start", [](RunConfig& c, auto& k, auto& v) { c.window_start = as_date(k, v); }},
        {"window_end", [](RunConfig& c, auto& k, auto& v) { c.window_end = as_date(k, v); }},
        {"rolling_window", [](RunConfig& c, auto& k, auto& v) { c.rolling_window = as_size(k, v); }},
        {"rolling_align",
         [](RunConfig& c, auto& k, auto& v) {
             if (v == "trailing") {
                 c.rolling_align = RollingAlignment::trailing;
             } else if (v == "centered") {
                 c.rolling_align = RollingAlignment::centered;
             } else {
                 throw ConfigError(k + ": expected trailing or centered");
             }
         }},
        {"events", [](RunConfig& c, auto&, auto& v) { c.events = v; }},
        {"overlay", [](RunConfig& c, auto&, auto& v) { c.overlay = v; }},
        {"negative_q", [](RunConfig& c, auto& k, auto& v) { c.negative.q = as_double(k, v); }},
        {"negative_min_posts", [](RunConfig& c, auto& k, auto& v) { c.negative.min_posts = as_size(k, v); }},
        {"quantile_type",
         [](RunConfig& c, auto& k, auto& v) {
             if (v == "type7") {
                 c.negative.quantile_type = QuantileType::type7;
             } else if (v == "type1") {
                 c.negative.quantile_type = QuantileType::type1;
             } else {
                 throw ConfigError(k + ": expected type7 or type1");
             }
         }},
        {"max_i", [](RunConfig& c, auto& k, auto& v) { c.max_i = as_size(k, v); }},
        {"bin_width", [](RunConfig& c, auto& k, auto& v) { c.bin_width = as_double(k, v); }},
        {"replicates", [](RunConfig& c, auto& k, auto& v) { c.replicates = as_size(k, v); }},
        {"context_max_n", [](RunConfig& c, auto& k, auto& v) { c.context_max_n = as_size(k, v); }},
        {"min_comments", [](RunConfig& c, auto& k, auto& v) { c.min_comments = as_size(k, v); }},
        {"alpha_prior_mean", [](RunConfig& c, auto& k, auto& v) { c.fit.priors.alpha_mean = as_double(k, v); }},
        {"sigma_prior_mean", [](RunConfig& c, auto& k, auto& v) { c.fit.priors.sigma_mean = as_double(k, v); }},
        {"epsilon_max", [](RunConfig& c, auto& k, auto& v) { c.fit.priors.epsilon_max = as_double(k, v); }},
        {"chains", [](RunConfig& c, auto& k, auto& v) { c.fit.sampler.chains = as_size(k, v); }},
        {"draws", [](RunConfig& c, auto& k, auto& v) { c.fit.sampler.draws = as_size(k, v); }},
        {"warmup", [](RunConfig& c, auto& k, auto& v) { c.fit.sampler.warmup = as_size(k, v); }},
        {"latent_thin", [](RunConfig& c, auto& k, auto& v) { c.fit.sampler.latent_thin = as_size(k, v); }},
        {"rhat_threshold", [](RunConfig& c, auto& k, auto& v) { c.fit.sampler.rhat_threshold = as_double(k, v); }},
        {"gamma",
         [](RunConfig& c, auto& k, auto& v) {
             c.fit.model.gamma = as_double(k, v);
             c.synthetic.model.gamma = c.fit.model.gamma;
         }},
        {"kernel", [](RunConfig& c, auto&, auto& v) { c.fit.model.kernel = siebc::parse_kernel(v); }},
        {"kappa_p", [](RunConfig& c, auto& k, auto& v) { c.kappa_p = as_double(k, v); }},
        {"ppc_draws", [](RunConfig& c, auto& k, auto& v) { c.ppc_draws = as_size(k, v); }},
        {"ppc_homophily_draws", [](RunConfig& c, auto& k, auto& v) { c.ppc_homophily_draws = as_size(k, v); }},
        {"ppc_replicates", [](RunConfig& c, auto& k, auto& v) { c.ppc_replicates = as_size(k, v); }},
        {"sim_users", [](RunConfig& c, auto& k, auto& v) { c.synthetic.n_users = as_size(k, v); }},
        {"sim_comments", [](RunConfig& c, auto& k, auto& v) { c.synthetic.comments_per_user = as_size(k, v); }},
        {"sim_alpha_e", [](RunConfig& c, auto& k, auto& v) { c.synthetic.params.alpha_e = as_double(k, v); }},
        {"sim_alpha_u", [](RunConfig& c, auto& k, auto& v) { c.synthetic.params.alpha_u = as_double(k, v); }},
        {"sim_epsilon", [](RunConfig& c, auto& k, auto& v) { c.synthetic.params.epsilon = as_double(k, v); }},
        {"sim_sigma_e", [](RunConfig& c, auto& k, auto& v) { c.synthetic.params.sigma_e = as_double(k, v); }},
        {"sim_sigma_u", [](RunConfig& c, auto& k, auto& v) { c.synthetic.params.sigma_u = as_double(k, v); }},
        {"sim_jitter", [](RunConfig& c, auto& k, auto& v) { c.synthetic.param_jitter = as_double(k, v); }},
        {"sim_kernel", [](RunConfig& c, auto&, auto& v) { c.synthetic.model.kernel = siebc::parse_kernel(v); }},
        {"sim_topic", [](RunConfig& c, auto& k, auto& v) { c.synthetic.topic = as_topic(k, v); }},
        {"sim_background", [](RunConfig& c, auto& k, auto& v) { c.synthetic.n_background = as_size(k, v); }},
        {"sim_reply_to_user", [](RunConfig& c, auto& k, auto& v) { c.synthetic.reply_to_user = as_double(k, v); }},
        {"sim_background_law", [](RunConfig& c, auto& k, auto& v) { c.synthetic.background_law = as_law(k, v); }},
        {"sim_initial_law", [](RunConfig& c, auto& k, auto& v) { c.synthetic.initial_law = as_law(k, v); }},
        {"sim_pole", [](RunConfig& c, auto& k, auto& v) { c.synthetic.pole = as_double(k, v); }},
        {"sim_pole_spread", [](RunConfig& c, auto& k, auto& v) { c.synthetic.pole_spread = as_double(k, v); }},
        {"sim_start", [](RunConfig& c, auto& k, auto& v) { c.synthetic.start_utc = as_date(k, v).days * 86400; }},
        {"sim_step_seconds",
         [](RunConfig& c, auto& k, auto& v) { c.synthetic.step_seconds = static_cast<std::int64_t>(as_u64(k, v)); }},
    };
    return table;
}

} // namespace

void apply_setting(RunConfig& cfg, const std::string& key, const std::string& value) {
    if (key.rfind("events.", 0) == 0) {
        cfg.topic_events[as_topic(key, key.substr(7))] = value;
        return;
    }
    const auto& table = setters();
    const auto it = table.find(key);
    if (it == table.end()) throw ConfigError("unknown config key '" + key + "'");
    it->second(cfg, key, value);
}

RunConfig parse_config(std::istream& in) {
    RunConfig cfg;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        const auto hash = line.find('#');
        if (hash != std::string::npos) line.erase(hash);
        line = trim(line);
        if (line.empty()) continue;
        const auto eq = line.find('=');
        if (eq == std::string::npos) throw ConfigError("config line " + std::to_string(line_no) + ": expected key = value");
        apply_setting(cfg, trim(line.substr(0, eq)), trim(line.substr(eq + 1)));
    }
    return cfg;
}

RunConfig load_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open config '" + path + "'");
    return parse_config(in);
}

void validate(const RunConfig& cfg, bool needs_corpus) {
    namespace fs = std::filesystem;
    if (needs_corpus) {
        if (cfg.corpus.empty()) throw ConfigError("config key 'corpus' is required");
        if (!fs::exists(cfg.corpus)) throw ConfigError("corpus file '" + cfg.corpus + "' does not exist");
    }
    auto must_exist = [](const std::string& key, const std::string& path) {
        if (!path.empty() && !fs::exists(path)) throw ConfigError(key + ": file '" + path + "' does not exist");
    };
    must_exist("events", cfg.events);
    must_exist("overlay", cfg.overlay);
    for (const auto& [t, path] : cfg.topic_events) must_exist("events." + std::string(to_string(t)), path);

    if (cfg.window_start && cfg.window_end && *cfg.window_end < *cfg.window_start) {
        throw ConfigError("window_end precedes window_start");
    }
    if (cfg.rolling_window == 0) throw ConfigError("rolling_window must be at least 1");
    if (!(cfg.negative.q >= 0.0 && cfg.negative.q <= 1.0)) throw ConfigError("negative_q must lie in [0, 1]");
    if (cfg.negative.min_posts == 0) throw ConfigError("negative_min_posts must be at least 1");
    if (cfg.max_i == 0) throw ConfigError("max_i must be at least 1");
    if (!(cfg.bin_width > 0.0 && cfg.bin_width <= 2.0)) throw ConfigError("bin_width must lie in (0, 2]");
    if (cfg.replicates < 100) throw ConfigError("replicates must be at least 100");
    if (cfg.ppc_replicates < 100) throw ConfigError("ppc_replicates must be at least 100");
    if (cfg.context_max_n == 0) throw ConfigError("context_max_n must be at least 1");
    if (cfg.min_comments == 0) throw ConfigError("min_comments must be at least 1");
    const auto& s = cfg.fit.sampler;
    if (s.chains == 0 || s.draws == 0) throw ConfigError("chains and draws must be at least 1");
    if (s.latent_thin == 0) throw ConfigError("latent_thin must be at least 1");
    const auto& p = cfg.fit.priors;
    if (!(p.alpha_mean > 0.0 && p.sigma_mean > 0.0 && p.epsilon_max > 0.0)) throw ConfigError("prior scales must be positive");
    if (!(cfg.fit.model.gamma > 0.0)) throw ConfigError("gamma must be positive");
    if (!(cfg.kappa_p > 0.0 && cfg.kappa_p < 1.0)) throw ConfigError("kappa_p must lie in (0, 1)");
    if (!cfg.synthetic.params.valid()) throw ConfigError("synthetic parameters out of range");
    if (!(cfg.synthetic.reply_to_user >= 0.0 && cfg.synthetic.reply_to_user <= 1.0)) {
        throw ConfigError("sim_reply_to_user must lie in [0, 1]");
    }
}

} // namespace sentdyn::cli
