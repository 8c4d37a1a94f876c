// Command-line entry point: `alrec run` executes one experiment and exports
// its results, `alrec compare` compares two exported summaries.

#include <chrono>
#include <iostream>
#include <string>

#include <CLI11.hpp>

#include "alrec/data.hpp"
#include "alrec/errors.hpp"
#include "alrec/report.hpp"
#include "alrec/simulation.hpp"

namespace {

constexpr int kOk = 0;
constexpr int kConfigError = 1;
constexpr int kDataError = 2;
constexpr int kRuntimeError = 3;

struct RunArgs {
    std::string config;
    std::string out = "results";
    std::vector<std::pair<std::string, std::string>> flags;
};

int run(const RunArgs& args) {
    using namespace alrec;
    const auto cfg = parse_config(args.config, args.flags);
    if (cfg.data_path.empty()) throw ConfigError("data_path is not set (config key or --data)");

    IngestStats stats;
    const auto matrix = cfg.dataset == DatasetKind::jester ? load_jester(cfg.data_path, &stats)
                                                           : load_bookcrossing(cfg.data_path, &stats);
    std::cerr << "loaded " << matrix.user_count() << " users, " << matrix.item_count() << " items, "
              << matrix.entry_count() << " ratings (" << stats.skipped << " rows skipped)\n";

    const auto start = std::chrono::steady_clock::now();
    const auto result = run_experiment(cfg, matrix);
    const std::chrono::duration<double> elapsed = std::chrono::steady_clock::now() - start;

    RunManifest manifest{cfg, fingerprint(matrix), std::string(kArtifactVersion), elapsed.count(), result.summaries};
    for (const auto& path : export_results(manifest, result.outcomes, args.out)) std::cout << path.string() << "\n";
    return kOk;
}

int compare(const std::string& a, const std::string& b, const std::string& metric_name) {
    using namespace alrec;
    const auto metric = parse_metric(metric_name);
    if (!metric) throw ConfigError("metric must be rmse, precision or ndcg");
    const auto c = compare_runs(read_summary(a), read_summary(b), *metric);
    std::cout << describe(c) << "\n";
    return kOk;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Active learning simulations for recommender cold start"};
    app.require_subcommand(1);

    RunArgs run_args;
    auto* run_cmd = app.add_subcommand("run", "Run one experiment and export per_user.csv, summary.json, boxplot.dat");
    run_cmd->add_option("--config", run_args.config, "Flat key = value config file");
    run_cmd->add_option("--out", run_args.out, "Output directory")->capture_default_str();

    // Flags map one-to-one onto config keys and override the file.
    const std::vector<std::pair<std::string, std::string>> flag_keys{
        {"--dataset", "dataset"},        {"--data", "data_path"},         {"--learner", "learner"},
        {"--predictor", "predictor"},    {"--final", "final_recommender"}, {"--mode", "mode"},
        {"--budget", "budget"},          {"--n-users", "n_users"},         {"--top-k", "top_k"},
        {"--seed", "rng_seed"},          {"--threads", "threads"},         {"--ask-cap", "ask_cap"},
        {"--relevance-threshold", "relevance_threshold"}, {"--min-ratings", "eligibility_min_ratings"},
    };
    std::vector<std::string> flag_values(flag_keys.size());
    for (std::size_t k = 0; k < flag_keys.size(); ++k) {
        run_cmd->add_option(flag_keys[k].first, flag_values[k], "Overrides `" + flag_keys[k].second + "`");
    }

    std::string cmp_a, cmp_b, cmp_metric;
    auto* cmp_cmd = app.add_subcommand("compare", "Compare the medians of two summary.json files");
    cmp_cmd->add_option("--a", cmp_a, "First summary.json")->required();
    cmp_cmd->add_option("--b", cmp_b, "Second summary.json")->required();
    cmp_cmd->add_option("--metric", cmp_metric, "rmse | precision | ndcg")->required();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int rc = app.exit(e);
        return rc == 0 ? kOk : kConfigError;
    }

    try {
        if (*run_cmd) {
            for (std::size_t k = 0; k < flag_keys.size(); ++k) {
                if (run_cmd->count(flag_keys[k].first) > 0) run_args.flags.emplace_back(flag_keys[k].second, flag_values[k]);
            }
            return run(run_args);
        }
        return compare(cmp_a, cmp_b, cmp_metric);
    } catch (const alrec::ConfigError& e) {
        std::cerr << "configuration error: " << e.what() << "\n";
        return kConfigError;
    } catch (const alrec::DataError& e) {
        std::cerr << "data error: " << e.what() << "\n";
        return kDataError;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kRuntimeError;
    }
}
