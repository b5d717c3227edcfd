#pragma once

#include <cstdint>
#include <iosfwd>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "sentdyn/corpus.hpp"
#include "sentdyn/siebc/evaluation.hpp"
#include "sentdyn/siebc/fit.hpp"
#include "sentdyn/siebc/synthetic.hpp"
#include "sentdyn/temporal.hpp"

namespace sentdyn::cli {

enum ExitCode : int { kOk = 0, kUsage = 1, kDataError = 2, kNotConverged = 3 };

struct RunConfig {
    RunConfig() { fit.sampler.latent_thin = 10; }

    std::string corpus;
    std::vector<Topic> topics{kStudiedTopics.begin(), kStudiedTopics.end()};
    std::string out_dir = "out";
    std::uint64_t seed = 0;
    bool strict = false;

    // temporal
    std::optional<Date> window_start;
    std::optional<Date> window_end;
    std::size_t rolling_window = 14;
    RollingAlignment rolling_align = RollingAlignment::trailing;
    std::string events;                        // calendar for all topics
    std::map<Topic, std::string> topic_events; // per-topic override
    std::string overlay;                       // optional CSV joined by date
    NegativeDayConfig negative;

    // initiation
    std::size_t max_i = 20;

    // homophily
    double bin_width = 0.05;
    std::size_t replicates = 1000;
    std::size_t context_max_n = 5;

    // model
    std::size_t min_comments = 40;
    siebc::FitConfig fit;
    double kappa_p = 0.05;
    std::size_t ppc_draws = 0;
    std::size_t ppc_homophily_draws = 50;
    std::size_t ppc_replicates = 200;

    // synthetic generation
    siebc::SyntheticSpec synthetic;
};

// key = value lines; '#' starts a comment. Unknown keys are rejected.
RunConfig parse_config(std::istream& in);
RunConfig load_config(const std::string& path);
void apply_setting(RunConfig& cfg, const std::string& key, const std::string& value);

// Checks ranges and that referenced input files exist.
void validate(const RunConfig& cfg, bool needs_corpus);

// Each command writes into cfg.out_dir and returns an exit code. Errors are
// raised as ConfigError / DataError; run_command maps them to exit codes and
// messages on `err`.
int cmd_ingest(const RunConfig& cfg, std::ostream& log);
int cmd_analyze(const RunConfig& cfg, std::ostream& log);
int cmd_fit(const RunConfig& cfg, std::ostream& log);
int cmd_simulate(const RunConfig& cfg, std::ostream& log);
int cmd_reconstruct(const RunConfig& cfg, std::ostream& log);

int run_command(const std::string& name, const RunConfig& cfg, std::ostream& log, std::ostream& err);

// Path of the normalised corpus written by ingest.
std::string cache_path(const RunConfig& cfg);

} // namespace sentdyn::cli
