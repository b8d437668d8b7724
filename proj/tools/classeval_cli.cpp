// classeval: build retrieval indexes, run evaluations, re-score from cache,
// render reports.

#include <cstdio>
#include <iostream>
#include <string>

#include <spdlog/spdlog.h>

#include "CLI11.hpp"
#include "json.hpp"

#include "classeval/config.hpp"
#include "classeval/digest.hpp"
#include "classeval/experiment.hpp"
#include "classeval/report.hpp"

namespace ce = classeval;

namespace {

struct Common {
    std::string config;
    std::string cache_dir;
    std::string mock;
    std::string out;
    std::vector<std::string> overrides;
    bool replay_only = false;
};

void add_common(CLI::App* app, Common& c, bool llm) {
    app->add_option("--config", c.config, "experiment config file")->required()->check(CLI::ExistingFile);
    app->add_option("--cache-dir", c.cache_dir, "response and lemma cache directory");
    app->add_option("--set", c.overrides, "override a config key (key=value), repeatable");
    if (llm) {
        app->add_flag("--replay-only", c.replay_only, "serve responses from the cache only");
        app->add_option("--mock", c.mock, "scripted mock backend (JSON)")->check(CLI::ExistingFile);
    }
}

ce::ExperimentConfig resolve(const Common& c) {
    ce::ExperimentConfig cfg = ce::load_config(c.config);
    const auto cwd = std::filesystem::current_path();
    for (const auto& kv : c.overrides) {
        const auto eq = kv.find('=');
        if (eq == std::string::npos) throw ce::ConfigError("--set expects key=value, got '" + kv + "'");
        cfg.set(kv.substr(0, eq), kv.substr(eq + 1), cwd);
    }
    if (!c.cache_dir.empty()) cfg.set("cache_dir", c.cache_dir, cwd);
    if (!c.mock.empty()) {
        cfg.set("llm.backend", "mock");
        cfg.set("llm.mock_script", c.mock, cwd);
    }
    return cfg;
}

int run(const Common& c, bool force_replay) {
    const ce::ExperimentConfig cfg = resolve(c);
    cfg.validate();
    // Replay-only changes where responses come from, not the experiment, so
    // it stays out of the recorded config and re-scoring reproduces a run.
    ce::ExperimentConfig client_cfg = cfg;
    if (force_replay || c.replay_only) client_cfg.llm.replay_only = true;
    auto client = ce::make_client(client_cfg);
    const ce::MetricReport report = ce::run_experiment(cfg, *client);
    ce::write_report(report, c.out);
    const auto stats = client->stats();
    spdlog::info("{} requests, {} cache hits, {} backend calls, {} retries", stats.requests, stats.cache_hits,
                 stats.backend_calls, stats.retries);
    for (const auto& [k, v] : report.aggregates) std::cout << k << " = " << ce::format_double(v) << "\n";
    if (report.failed_items) std::cout << "failed_items = " << report.failed_items << "\n";
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Evaluation harness for classical-language LLM tasks"};
    app.require_subcommand(1);
    bool verbose = false;
    app.add_flag("-v,--verbose", verbose, "debug logging");

    Common index_opts;
    auto* build = app.add_subcommand("build-index", "chunk, lemmatize and index the configured corpus");
    add_common(build, index_opts, false);
    build->add_option("--out", index_opts.out, "index file to write")->required();

    Common run_opts;
    auto* run_cmd = app.add_subcommand("run", "run the configured experiment");
    add_common(run_cmd, run_opts, true);
    run_cmd->add_option("--out", run_opts.out, "report directory")->required();

    Common score_opts;
    auto* score = app.add_subcommand("score", "re-score from cached responses without calling the model");
    add_common(score, score_opts, true);
    score->add_option("--out", score_opts.out, "report directory")->required();

    std::string report_dir;
    std::string reference;
    auto* report = app.add_subcommand("report", "render report.md for a report directory");
    report->add_option("--out", report_dir, "report directory")->required()->check(CLI::ExistingDirectory);
    report->add_option("--reference", reference, "published constants (JSON)");

    CLI11_PARSE(app, argc, argv);
    spdlog::set_level(verbose ? spdlog::level::debug : spdlog::level::warn);

    try {
        if (*build) {
            const ce::ExperimentConfig cfg = resolve(index_opts);
            const auto lemmatizer = ce::make_lemmatizer(cfg);
            const ce::RetrievalIndex index = ce::build_index(cfg, *lemmatizer);
            ce::save_index(index, index_opts.out);
            std::cout << index.size() << " chunks indexed\n";
            return 0;
        }
        if (*run_cmd) return run(run_opts, false);
        if (*score) return run(score_opts, true);
        if (*report) {
            const std::filesystem::path dir = report_dir;
            const auto summary = nlohmann::json::parse(ce::read_file((dir / "summary.json").string()));
            const std::filesystem::path ref_path =
                reference.empty() ? ce::data_dir() / "reference_constants.json" : std::filesystem::path(reference);
            nlohmann::json ref = nlohmann::json::object();
            if (std::filesystem::exists(ref_path)) ref = nlohmann::json::parse(ce::read_file(ref_path.string()));
            ce::write_file_atomic((dir / "report.md").string(), ce::render_markdown(summary, ref));
            std::cout << (dir / "report.md").string() << "\n";
            return 0;
        }
    } catch (const ce::Error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    }
    return 0;
}
