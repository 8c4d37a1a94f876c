#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "alrec/simulation.hpp"

namespace alrec {

inline constexpr std::string_view kArtifactVersion = "1.0.0";

/// (key, value) pairs applied after the file, in order.
using ConfigOverrides = std::vector<std::pair<std::string, std::string>>;

/// Flat `key = value` text; `#` starts a comment. Unknown keys, duplicate
/// keys, section headers, bad values and violated invariants all throw
/// ConfigError. A predictor given for a learner that takes none is ignored.
ExperimentConfig parse_config_text(std::string_view text, const ConfigOverrides& overrides = {});

/// Empty path means defaults plus overrides.
ExperimentConfig parse_config(const std::filesystem::path& path, const ConfigOverrides& overrides = {});

/// Every key of the config in parse_config_text's format; parsing it back
/// yields the same config.
std::string config_to_text(const ExperimentConfig& cfg);

std::map<std::string, std::string> config_to_map(const ExperimentConfig& cfg);

struct DatasetFingerprint {
    std::size_t users = 0;
    std::size_t items = 0;
    std::size_t entries = 0;
    std::uint64_t checksum = 0;
};
DatasetFingerprint fingerprint(const RatingMatrix& matrix);

struct RunManifest {
    ExperimentConfig config;
    DatasetFingerprint dataset;
    std::string version{kArtifactVersion};
    double duration_seconds = 0.0;
    MetricSummaries summaries;
};

/// Shortest text that parses back to the same double.
std::string format_double(double value);

std::string per_user_csv(const ExperimentConfig& cfg, const std::vector<SimulationOutcome>& outcomes);
std::string boxplot_dat(const MetricSummaries& summaries);
std::string summary_json(const RunManifest& manifest);

/// Writes per_user.csv, summary.json and boxplot.dat into `out_dir`,
/// creating it if needed. Throws IoError when it cannot.
std::vector<std::filesystem::path> export_results(const RunManifest& manifest,
                                                  const std::vector<SimulationOutcome>& outcomes,
                                                  const std::filesystem::path& out_dir);

enum class Metric { rmse, precision, ndcg };
std::string_view to_string(Metric metric);
std::optional<Metric> parse_metric(std::string_view text);
bool lower_is_better(Metric metric);

/// Reads the metric summaries back from a summary.json.
MetricSummaries read_summary(const std::filesystem::path& path);
MetricSummaries parse_summary_json(std::string_view text);

enum class Winner { first, second, none };

struct Comparison {
    Metric metric;
    double median_a = 0.0;
    double median_b = 0.0;
    /// median_a - median_b
    double difference = 0.0;
    Winner winner = Winner::none;
};

/// Compares box-plot medians. Throws ConfigError when a summary lacks the metric.
Comparison compare_runs(const MetricSummaries& a, const MetricSummaries& b, Metric metric);
std::string describe(const Comparison& c);

}  // namespace alrec
