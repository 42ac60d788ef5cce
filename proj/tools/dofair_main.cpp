#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <set>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "dofair/errors.hpp"
#include "dofair/jsonl.hpp"
#include "dofair/orchestrator.hpp"
#include "dofair/pipeline.hpp"
#include "dofair/reporting.hpp"
#include "dofair/util.hpp"

namespace fs = std::filesystem;
using namespace dofair;

namespace {

fs::path resolve_run_dir(const std::string& run, const fs::path& runs_root) {
    fs::path direct(run);
    if (fs::is_directory(direct)) return direct;
    fs::path nested = runs_root / run;
    if (fs::is_directory(nested)) return nested;
    raise(Errc::ConfigError, "no run directory at " + direct.string() + " or " + nested.string());
}

std::string model_label(const Json& config) {
    std::string backend = "mock";
    if (config.contains("backends")) backend = config["backends"].value("t2i", backend);
    if (backend == "sim") return "sim-t2i";
    if (backend == "mock") return "mock-t2i";
    if (config.contains("models")) return config["models"].value("t2i", backend);
    return backend;
}

std::vector<TableRow> table_rows_for(const fs::path& run_dir) {
    Json manifest = Json::parse(read_file(run_dir / "manifest.json"));
    std::string model = model_label(manifest["config"]);
    std::vector<TableRow> rows;
    for (const auto& report : score_run(run_dir)) {
        rows.push_back({model, report.condition, report});
    }
    return rows;
}

void write_or_print(const std::string& text, const std::string& out_path) {
    if (out_path.empty()) {
        std::cout << text;
        return;
    }
    atomic_write_file(out_path, text);
    std::cout << "wrote " << out_path << "\n";
}

/// Keeps only records present under every condition involved, so the strict
/// matcher sees identical id sets even when some items failed.
std::vector<RecordOutcome> restrict_to(const std::vector<RecordOutcome>& outcomes,
                                       const std::set<std::string>& ids) {
    std::vector<RecordOutcome> kept;
    for (const auto& outcome : outcomes) {
        if (ids.count(outcome.record_id)) kept.push_back(outcome);
    }
    return kept;
}

int cmd_build_benchmark(const std::string& dimension, const ConstructionConfig& construction,
                        RunConfig backends) {
    ConstructionConfig config = construction;
    auto dim = parse_dim(dimension);
    if (!dim) raise(Errc::ConfigError, "dimension must be race or gender, got " + dimension);
    config.dimension = *dim;
    ClientSet clients = make_clients(backends, {});
    Benchmark benchmark = run_construction(config, *clients.llm, *clients.search);
    std::cout << "benchmark: " << (config.out_dir / "05_benchmark.jsonl").string() << "\n"
              << render_summary(summarize_benchmark(benchmark));
    return 0;
}

int cmd_run(const fs::path& config_path) {
    RunConfig config = load_run_config(config_path);
    RunManifest manifest = run_experiment(config);
    std::cout << "run " << manifest.run_id << ": " << manifest.done << " done, "
              << manifest.refused << " refused, " << manifest.failed << " failed\n"
              << "artifacts in " << run_dir_for(config).string() << "\n";
    return manifest.failed == 0 ? 0 : 1;
}

int cmd_score(const std::string& run, const fs::path& runs_root) {
    fs::path run_dir = resolve_run_dir(run, runs_root);
    std::cout << render_results_markdown(table_rows_for(run_dir));
    return 0;
}

int cmd_report(const std::string& run, const std::string& baseline_run, const fs::path& runs_root,
               const std::string& format, const std::string& out_path,
               const std::string& charts_dir) {
    fs::path run_dir = resolve_run_dir(run, runs_root);
    std::vector<TableRow> rows = table_rows_for(run_dir);

    auto outcomes = load_record_outcomes(run_dir);
    std::vector<RecordOutcome> baseline_outcomes;
    if (!baseline_run.empty()) {
        fs::path baseline_dir = resolve_run_dir(baseline_run, runs_root);
        std::vector<TableRow> baseline_rows = table_rows_for(baseline_dir);
        rows.insert(rows.begin(), baseline_rows.begin(), baseline_rows.end());
        auto baseline_map = load_record_outcomes(baseline_dir);
        if (auto it = baseline_map.find("baseline"); it != baseline_map.end()) {
            baseline_outcomes = it->second;
        }
    } else if (auto it = outcomes.find("baseline"); it != outcomes.end()) {
        baseline_outcomes = it->second;
    }

    std::string table =
        format == "csv" ? render_results_csv(rows) : render_results_markdown(rows);
    write_or_print(table, out_path);

    CooccurrenceResult cooccurrence;
    bool have_cooccurrence = false;
    if (!baseline_outcomes.empty()) {
        std::set<std::string> common;
        for (const auto& outcome : baseline_outcomes) common.insert(outcome.record_id);
        std::vector<std::vector<RecordOutcome>> interventions;
        for (const auto& [condition, list] : outcomes) {
            if (condition == "baseline") continue;
            std::set<std::string> ids;
            for (const auto& outcome : list) ids.insert(outcome.record_id);
            std::set<std::string> kept;
            for (const auto& id : common) {
                if (ids.count(id)) kept.insert(id);
            }
            common = std::move(kept);
            interventions.push_back(list);
        }
        if (!interventions.empty() && !common.empty()) {
            for (auto& list : interventions) list = restrict_to(list, common);
            cooccurrence =
                cooccurrence_analysis(restrict_to(baseline_outcomes, common), interventions);
            have_cooccurrence = true;
            std::cerr << "co-occurrence over " << cooccurrence.n_records << " records: "
                      << "diversity up " << format_fixed(cooccurrence.frac_diversity_up * 100, 2)
                      << "%, factuality down given up "
                      << format_fixed(cooccurrence.frac_factuality_down_given_up * 100, 2)
                      << "%, joint " << format_fixed(cooccurrence.frac_joint * 100, 2) << "%\n";
        }
    }

    if (!charts_dir.empty()) {
        fs::create_directories(charts_dir);
        atomic_write_file(fs::path(charts_dir) / "metric_bars.svg", render_metric_bars_svg(rows));
        if (have_cooccurrence) {
            atomic_write_file(fs::path(charts_dir) / "cooccurrence.svg",
                              render_cooccurrence_ring_svg(cooccurrence));
        }
        std::cerr << "charts in " << charts_dir << "\n";
    }
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"factuality-tax toolkit for diversity-intervened image generation"};
    app.require_subcommand(1);

    std::string dimension = "race";
    ConstructionConfig construction;
    RunConfig construction_backends;
    construction_backends.llm_backend = "hosted";
    construction_backends.search_backend = "hosted";
    auto* build = app.add_subcommand("build-benchmark", "construct a fact-labeled benchmark");
    build->add_option("--dimension", dimension, "race or gender")->required();
    build->add_option("--out", construction.out_dir, "output directory")->required();
    build->add_option("--workers", construction.workers, "parallel stub workers");
    build->add_option("--seed", construction.seed, "resampling seed");
    build->add_option("--max-seeds", construction.max_seeds,
                      "cap on seed combinations, 0 for all");
    build->add_option("--llm", construction_backends.llm_backend, "llm backend: mock|hosted");
    build->add_option("--llm-model", construction_backends.llm_model, "hosted llm model id");
    build->add_option("--llm-base-url", construction_backends.llm_base_url, "hosted llm endpoint");
    build->add_option("--search", construction_backends.search_backend,
                      "search backend: mock|snapshot|hosted");
    build->add_option("--search-base-url", construction_backends.search_base_url,
                      "hosted search endpoint");
    build->add_option("--snapshot", construction_backends.search_snapshot,
                      "recorded search results for --search snapshot");
    build->add_option("--cache", construction_backends.cache_dir,
                      "response cache directory, empty to disable");

    fs::path config_path;
    auto* run = app.add_subcommand("run", "execute a record x condition matrix");
    run->add_option("--config", config_path, "YAML or JSON run config")->required();

    std::string run_id;
    std::string baseline_run;
    fs::path runs_root = "runs";
    auto* score = app.add_subcommand("score", "aggregate one run's persisted scores");
    score->add_option("--run", run_id, "run id or run directory")->required();
    score->add_option("--runs-root", runs_root, "directory holding runs");

    std::string format = "md";
    std::string out_path;
    std::string charts_dir;
    auto* report = app.add_subcommand("report", "results table, deltas, and co-occurrence");
    report->add_option("--run", run_id, "run id or run directory")->required();
    report->add_option("--baseline-run", baseline_run, "separate run supplying the baseline row");
    report->add_option("--runs-root", runs_root, "directory holding runs");
    report->add_option("--format", format, "md or csv")->check(CLI::IsMember({"md", "csv"}));
    report->add_option("--out", out_path, "write the table here instead of stdout");
    report->add_option("--charts", charts_dir, "also emit SVG charts into this directory");

    CLI11_PARSE(app, argc, argv);

    try {
        if (build->parsed())
            return cmd_build_benchmark(dimension, construction, construction_backends);
        if (run->parsed()) return cmd_run(config_path);
        if (score->parsed()) return cmd_score(run_id, runs_root);
        return cmd_report(run_id, baseline_run, runs_root, format, out_path, charts_dir);
    } catch (const Error& e) {
        std::cerr << "error [" << errc_name(e.code()) << "]: " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    }
}
