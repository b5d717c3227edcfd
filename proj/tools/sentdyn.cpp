#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "sentdyn/cli.hpp"
#include "sentdyn/error.hpp"

int main(int argc, char** argv) {
    using namespace sentdyn;

    CLI::App app{"Topic-initiation, sentiment-homophily and SIEBC calibration toolkit"};
    app.require_subcommand(1, 1);

    std::string config_path;
    std::optional<std::uint64_t> seed;
    std::string out_dir;
    std::vector<std::string> topics;
    bool strict = false;
    std::vector<std::string> settings;

    app.add_option("--config", config_path, "key = value configuration file");
    app.add_option("--seed", seed, "master seed");
    app.add_option("--out", out_dir, "output directory");
    app.add_option("--topic", topics, "topic to process (repeatable)")->take_all();
    app.add_flag("--strict", strict, "exit 3 when a fitted user fails the R-hat check");
    app.add_option("--set", settings, "override a config key, KEY=VALUE (repeatable)");

    const char* commands[][2] = {
        {"ingest", "validate a JSONL corpus and write the normalised cache"},
        {"analyze", "temporal, initiation and homophily reports"},
        {"fit", "calibrate the SIEBC model per user"},
        {"simulate", "generate a synthetic corpus with known parameters"},
        {"reconstruct", "daily internal-sentiment summaries from stored draws"},
    };
    app.fallthrough();
    for (const auto& c : commands) app.add_subcommand(c[0], c[1]);

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int rc = app.exit(e);
        return rc == 0 ? 0 : cli::kUsage;
    }

    cli::RunConfig cfg;
    try {
        if (!config_path.empty()) cfg = cli::load_config(config_path);
        for (const auto& s : settings) {
            const auto eq = s.find('=');
            if (eq == std::string::npos) throw ConfigError("--set expects KEY=VALUE, got '" + s + "'");
            cli::apply_setting(cfg, s.substr(0, eq), s.substr(eq + 1));
        }
        if (seed) cfg.seed = *seed;
        if (!out_dir.empty()) cfg.out_dir = out_dir;
        if (strict) cfg.strict = true;
        if (!topics.empty()) {
            std::string joined;
            for (const auto& t : topics) joined += (joined.empty() ? "" : ",") + t;
            cli::apply_setting(cfg, "topics", joined);
        }
    } catch (const ConfigError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return cli::kUsage;
    }

    return cli::run_command(app.get_subcommands().front()->get_name(), cfg, std::cout, std::cerr);
}
