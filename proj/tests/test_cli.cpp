#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <map>
#include <sstream>
#include <string>

#include <json.hpp>

#include "fixtures.hpp"
#include "sentdyn/cli.hpp"
#include "sentdyn/csv.hpp"
#include "sentdyn/error.hpp"

using namespace sentdyn;
using namespace sentdyn::cli;
namespace fs = std::filesystem;

namespace {

class TempDir {
public:
    explicit TempDir(const std::string& name) : path_(fs::temp_directory_path() / ("sentdyn_cli_" + name)) {
        fs::remove_all(path_);
        fs::create_directories(path_);
    }
    ~TempDir() { fs::remove_all(path_); }
    std::string operator/(const std::string& name) const { return (path_ / name).string(); }

private:
    fs::path path_;
};

void write_posts(const std::string& path, const std::vector<Post>& posts) {
    std::ofstream out(path);
    write_posts_jsonl(out, posts);
}

std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

std::map<std::string, std::string> tree(const std::string& dir) {
    std::map<std::string, std::string> out;
    for (const auto& e : fs::recursive_directory_iterator(dir)) {
        if (e.is_regular_file()) out[fs::relative(e.path(), dir).string()] = slurp(e.path());
    }
    return out;
}

int run(const std::string& command, const RunConfig& cfg, std::string* err_text = nullptr) {
    std::ostringstream log;
    std::ostringstream err;
    const int rc = run_command(command, cfg, log, err);
    if (err_text) *err_text = err.str();
    return rc;
}

RunConfig quick_config(const std::string& corpus, const std::string& out) {
    std::istringstream text("corpus = " + corpus + "\n"
                            "out = " + out + "\n"
                            "seed = 17\n"
                            "replicates = 100\n"
                            "context_max_n = 2\n"
                            "min_comments = 20\n"
                            "chains = 2\n"
                            "draws = 40\n"
                            "warmup = 30\n"
                            "latent_thin = 4\n"
                            "ppc_homophily_draws = 4\n"
                            "ppc_replicates = 100\n"
                            "sim_users = 3\n"
                            "sim_comments = 30\n"
                            "sim_background = 40\n");
    return parse_config(text);
}

// A synthetic corpus written by `simulate`, already ingested into `out`.
RunConfig prepared(const TempDir& dir) {
    RunConfig sim = quick_config("", dir / "sim");
    REQUIRE(run("simulate", sim) == kOk);
    RunConfig cfg = quick_config(dir / "sim/synthetic_corpus.jsonl", dir / "out");
    REQUIRE(run("ingest", cfg) == kOk);
    return cfg;
}

CsvTable table(const std::string& path) { return read_csv(path); }

} // namespace

TEST_CASE("config parsing") {
    std::istringstream ok("# comment\n"
                          "seed = 5\n"
                          "\n"
                          "topics = mask, vaccination  # inline\n"
                          "negative_q = 0.1\n"
                          "kernel = linear\n"
                          "window_start = 2020-03-01\n");
    const auto cfg = parse_config(ok);
    CHECK(cfg.seed == 5);
    CHECK(cfg.topics == std::vector<Topic>{Topic::mask, Topic::vaccination});
    CHECK(cfg.negative.q == 0.1);
    CHECK(cfg.fit.model.kernel == siebc::KernelType::linear);
    CHECK(cfg.window_start == Date::parse("2020-03-01"));

    const RunConfig defaults;
    CHECK(defaults.topics.size() == 3);
    CHECK(defaults.min_comments == 40);
    CHECK(defaults.fit.model.kernel == siebc::KernelType::bounded);

    std::istringstream unknown("colour = blue\n");
    CHECK_THROWS_AS(parse_config(unknown), ConfigError);
    std::istringstream bad_number("seed = -3\n");
    CHECK_THROWS_AS(parse_config(bad_number), ConfigError);
    std::istringstream bad_topic("topics = weather\n");
    CHECK_THROWS_AS(parse_config(bad_topic), ConfigError);
    std::istringstream no_equals("seed 5\n");
    CHECK_THROWS_AS(parse_config(no_equals), ConfigError);
    CHECK_THROWS_AS(load_config("/nonexistent/sentdyn.conf"), ConfigError);

    RunConfig c;
    apply_setting(c, "kernel", "bounded");
    CHECK_THROWS_AS(apply_setting(c, "kernel", "cubic"), ConfigError);
    CHECK_THROWS_AS(validate(c, true), ConfigError);
    c.corpus = "/nonexistent/posts.jsonl";
    CHECK_THROWS_AS(validate(c, true), ConfigError);
}

TEST_CASE("ingest") {
    TempDir dir("ingest");
    RunConfig cfg;
    cfg.out_dir = dir / "out";

    SUBCASE("empty file") {
        std::ofstream(dir / "empty.jsonl").close();
        cfg.corpus = dir / "empty.jsonl";
        std::string err;
        CHECK(run("ingest", cfg, &err) == kDataError);
        CHECK(err.find("no posts") != std::string::npos);
    }
    SUBCASE("five posts") {
        using fixtures::comment;
        using fixtures::submission;
        write_posts(dir / "five.jsonl", {submission("s1", "A", 100, Topic::lockdown),
                                          comment("c1", "s1", "B", 200, Topic::lockdown, 0.2),
                                          comment("c2", "c1", "A", 300, Topic::lockdown, -0.1),
                                          submission("s2", "C", 400, Topic::mask),
                                          comment("c3", "s2", "B", 500, Topic::mask, 0.5)});
        cfg.corpus = dir / "five.jsonl";
        REQUIRE(run("ingest", cfg) == kOk);
        const auto t = table(dir / "out/ingest_summary.csv");
        CHECK(t.columns == std::vector<std::string>{"topic", "users", "comments", "submissions"});
        REQUIRE(t.rows.size() == 6);
        CHECK(t.rows[0] == std::vector<std::string>{"lockdown", "2", "2", "1"});
        CHECK(t.rows[1] == std::vector<std::string>{"mask", "2", "1", "1"});
        CHECK(t.rows[2] == std::vector<std::string>{"vaccination", "0", "0", "0"});
        CHECK(t.rows[5] == std::vector<std::string>{"total", "3", "3", "2"});
        CHECK(read_posts_jsonl_file(cache_path(cfg)).size() == 5);
    }
    SUBCASE("a fully NA thread is dropped") {
        using fixtures::comment;
        using fixtures::submission;
        write_posts(dir / "na.jsonl", {submission("s1", "A", 100, Topic::lockdown),
                                        comment("c1", "s1", "B", 200, Topic::lockdown),
                                        submission("s2", "C", 300, Topic::not_applicable),
                                        comment("c2", "s2", "D", 400, Topic::not_applicable),
                                        comment("c3", "c2", "E", 500, Topic::not_applicable)});
        cfg.corpus = dir / "na.jsonl";
        REQUIRE(run("ingest", cfg) == kOk);
        const auto t = table(dir / "out/ingest_summary.csv");
        CHECK(t.rows[5] == std::vector<std::string>{"total", "2", "1", "1"});
        const auto report = nlohmann::json::parse(slurp(dir / "out/ingest_report.json"));
        CHECK(report["threads_removed"] == 1);
    }
    SUBCASE("malformed and dangling input") {
        {
            std::ofstream out(dir / "bad.jsonl");
            write_posts_jsonl(out, {fixtures::submission("s1", "A", 1, Topic::lockdown)});
            out << "{not json\n";
        }
        cfg.corpus = dir / "bad.jsonl";
        std::string err;
        CHECK(run("ingest", cfg, &err) == kDataError);
        CHECK(err.find("line 2") != std::string::npos);

        write_posts(dir / "dangling.jsonl", {fixtures::submission("s1", "A", 1, Topic::lockdown),
                                              fixtures::comment("c1", "ghost", "B", 2, Topic::lockdown)});
        cfg.corpus = dir / "dangling.jsonl";
        CHECK(run("ingest", cfg, &err) == kDataError);
        CHECK(err.find("c1") != std::string::npos);
    }
    SUBCASE("missing corpus is a configuration error") {
        cfg.corpus = dir / "absent.jsonl";
        CHECK(run("ingest", cfg) == kUsage);
    }
}

TEST_CASE("analyze") {
    TempDir dir("analyze");
    SUBCASE("missing cache") {
        RunConfig cfg;
        cfg.out_dir = dir / "nothing";
        std::string err;
        CHECK(run("analyze", cfg, &err) == kDataError);
        CHECK(err.find("cache") != std::string::npos);
    }
    SUBCASE("report bundle") {
        RunConfig cfg = prepared(dir);
        REQUIRE(run("analyze", cfg) == kOk);
        const auto manifest = nlohmann::json::parse(slurp(dir / "out/manifest.json"));
        CHECK(manifest["command"] == "analyze");
        CHECK(manifest["artifacts"].size() >= 6);
        for (const auto& a : manifest["artifacts"]) CHECK(fs::exists(dir / ("out/" + a.get<std::string>())));
        CHECK(manifest["parameters"]["seed"] == 17);

        const auto temporal = table(dir / "out/temporal_lockdown.csv");
        CHECK(temporal.columns[0] == "date");
        CHECK(!temporal.rows.empty());
        const auto summary = table(dir / "out/homophily_summary.csv");
        CHECK(summary.columns == std::vector<std::string>{"topic", "kind", "n", "pairs", "h"});

        const auto before = tree(dir / "out");
        REQUIRE(run("analyze", cfg) == kOk);
        CHECK(tree(dir / "out") == before);
    }
    SUBCASE("q = 0 flags no day") {
        RunConfig cfg = prepared(dir);
        cfg.negative.q = 0.0;
        cfg.negative.min_posts = 1;
        REQUIRE(run("analyze", cfg) == kOk);
        for (const char* t : {"lockdown", "mask", "vaccination"}) {
            const auto rows = table(dir / ("out/temporal_" + std::string(t) + ".csv"));
            const std::size_t col = rows.column("flagged");
            for (const auto& r : rows.rows) CHECK(r[col] == "false");
        }
    }
}

TEST_CASE("fit and reconstruct") {
    TempDir dir("fit");
    RunConfig cfg = prepared(dir);
    cfg.topics = {Topic::lockdown};

    SUBCASE("threshold above every user") {
        cfg.min_comments = 1000;
        std::string err;
        CHECK(run("fit", cfg, &err) == kDataError);
        CHECK(err.find("1000") != std::string::npos);
    }
    SUBCASE("summary schema") {
        REQUIRE(run("fit", cfg) == kOk);
        const auto summary = nlohmann::json::parse(slurp(dir / "out/fit_summary.json"));
        const auto& t = summary["topics"]["lockdown"];
        const double kappa = t["kappa"];
        CHECK(kappa >= 0.0);
        CHECK(kappa <= 1.0);
        CHECK(t["users"] == 3);
        CHECK(t["w1"].get<double>() >= 0.0);

        const auto rhat = table(dir / "out/rhat_lockdown.csv");
        CHECK(rhat.rows.size() == 3);
        for (const char* c : {"user", "alpha_e", "alpha_u", "epsilon", "sigma_e", "sigma_u", "converged"}) {
            CHECK_NOTHROW(rhat.column(c));
        }
        CHECK(table(dir / "out/draws_lockdown.csv").rows.size() == 3 * 2 * 40);

        REQUIRE(run("reconstruct", cfg) == kOk);
        const auto internal = table(dir / "out/internal_lockdown.csv");
        CHECK(internal.columns == std::vector<std::string>{"date", "users", "median", "q1", "q3"});
        CHECK(!internal.rows.empty());
    }
    SUBCASE("strict escalates non-convergence") {
        cfg.fit.sampler.draws = 4;
        cfg.fit.sampler.warmup = 0;
        cfg.fit.sampler.rhat_threshold = 1.0;
        cfg.strict = true;
        CHECK(run("fit", cfg) == kNotConverged);
        cfg.strict = false;
        CHECK(run("fit", cfg) == kOk);
    }
    SUBCASE("reconstruct without draws") {
        std::string err;
        CHECK(run("reconstruct", cfg, &err) == kDataError);
    }
}

TEST_CASE("simulate") {
    TempDir dir("simulate");
    RunConfig cfg = quick_config("", dir / "sim");
    REQUIRE(run("simulate", cfg) == kOk);
    const auto posts = read_posts_jsonl_file(dir / "sim/synthetic_corpus.jsonl");
    CHECK(!posts.empty());
    const auto truth = table(dir / "sim/truth_params.csv");
    CHECK(truth.rows.size() == 3);
    const auto first = slurp(dir / "sim/synthetic_corpus.jsonl");
    REQUIRE(run("simulate", cfg) == kOk);
    CHECK(slurp(dir / "sim/synthetic_corpus.jsonl") == first);
    CHECK(run("unknown", cfg) == kUsage);
}

TEST_CASE("analyze and fit outputs do not depend on the thread count") {
    TempDir dir("determinism");
    RunConfig cfg = prepared(dir);
    cfg.topics = {Topic::lockdown};
    const char* old = std::getenv("THREADS");
    const std::string saved = old ? old : "";
    setenv("THREADS", "1", 1);
    REQUIRE(run("analyze", cfg) == kOk);
    REQUIRE(run("fit", cfg) == kOk);
    const auto one = tree(dir / "out");
    setenv("THREADS", "4", 1);
    REQUIRE(run("analyze", cfg) == kOk);
    REQUIRE(run("fit", cfg) == kOk);
    CHECK(tree(dir / "out") == one);
    if (old) {
        setenv("THREADS", saved.c_str(), 1);
    } else {
        unsetenv("THREADS");
    }
}
