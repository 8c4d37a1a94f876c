#include "alrec/report.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

#include <json.hpp>

#include "alrec/errors.hpp"

namespace alrec {

namespace {

using json = nlohmann::ordered_json;

std::string_view trim(std::string_view s) {
    while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
    while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
    return s;
}

std::uint64_t parse_unsigned(std::string_view key, std::string_view text) {
    std::uint64_t v = 0;
    auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), v);
    if (ec != std::errc{} || ptr != text.data() + text.size() || text.empty()) {
        throw ConfigError(std::string(key) + ": expected a non-negative integer, got '" + std::string(text) + "'");
    }
    return v;
}

double parse_real(std::string_view key, std::string_view text) {
    double v = 0.0;
    auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), v);
    if (ec != std::errc{} || ptr != text.data() + text.size() || text.empty() || !std::isfinite(v)) {
        throw ConfigError(std::string(key) + ": expected a number, got '" + std::string(text) + "'");
    }
    return v;
}

[[noreturn]] void bad_enum(std::string_view key, std::string_view value, std::string_view allowed) {
    throw ConfigError(std::string(key) + ": invalid value '" + std::string(value) + "' (expected " +
                      std::string(allowed) + ")");
}

struct RawConfig {
    std::optional<std::string> predictor;
};

void apply(ExperimentConfig& cfg, RawConfig& raw, std::string_view key, std::string_view value) {
    if (key == "dataset") {
        auto v = parse_dataset_kind(value);
        if (!v) bad_enum(key, value, "jester|bookcrossing");
        cfg.dataset = *v;
    } else if (key == "data_path") {
        cfg.data_path = std::string(value);
    } else if (key == "learner") {
        auto v = parse_learner_kind(value);
        if (!v) {
            bad_enum(key, value,
                     "binary-prediction|decision-tree|highest-prediction|impact-analysis|lowest-prediction|"
                     "random-baseline");
        }
        cfg.learner.kind = *v;
    } else if (key == "predictor") {
        if (value != "none" && !parse_predictor_kind(value)) bad_enum(key, value, "funk-svd|user-user|item-item|none");
        raw.predictor = std::string(value);
    } else if (key == "final_recommender") {
        auto v = parse_predictor_kind(value);
        if (!v) bad_enum(key, value, "funk-svd|user-user|item-item");
        cfg.final_recommender = *v;
    } else if (key == "mode") {
        auto v = parse_mode(value);
        if (!v) bad_enum(key, value, "batch|sequential");
        cfg.mode = *v;
    } else if (key == "budget") {
        cfg.budget = parse_unsigned(key, value);
    } else if (key == "n_users") {
        cfg.n_users = parse_unsigned(key, value);
    } else if (key == "top_k") {
        cfg.top_k = parse_unsigned(key, value);
    } else if (key == "relevance_threshold") {
        if (value == "global-mean") {
            cfg.relevance_threshold.reset();
        } else {
            cfg.relevance_threshold = parse_real(key, value);
        }
    } else if (key == "ask_cap") {
        cfg.ask_cap = parse_unsigned(key, value);
    } else if (key == "rng_seed") {
        cfg.rng_seed = parse_unsigned(key, value);
    } else if (key == "eligibility_min_ratings") {
        cfg.eligibility_min_ratings = parse_unsigned(key, value);
    } else if (key == "threads") {
        cfg.threads = parse_unsigned(key, value);
    } else {
        throw ConfigError("unknown configuration key '" + std::string(key) + "'");
    }
}

void resolve_predictor(ExperimentConfig& cfg, const RawConfig& raw) {
    if (!needs_predictor(cfg.learner.kind)) {
        cfg.learner.predictor.reset();
        return;
    }
    if (!raw.predictor) {
        cfg.learner.predictor = PredictorKind::funk_svd;
    } else if (*raw.predictor == "none") {
        throw ConfigError("predictor: " + std::string(to_string(cfg.learner.kind)) + " requires a predictor");
    } else {
        cfg.learner.predictor = parse_predictor_kind(*raw.predictor);
    }
}

json summary_to_json(const std::optional<BoxplotSummary>& s) {
    if (!s) return nullptr;
    return json{{"min", s->min}, {"q1", s->q1}, {"median", s->median},
                {"q3", s->q3},   {"max", s->max}, {"n", s->n}};
}

std::optional<BoxplotSummary> summary_from_json(const json& j) {
    if (j.is_null()) return std::nullopt;
    BoxplotSummary s;
    s.min = j.at("min").get<double>();
    s.q1 = j.at("q1").get<double>();
    s.median = j.at("median").get<double>();
    s.q3 = j.at("q3").get<double>();
    s.max = j.at("max").get<double>();
    s.n = j.at("n").get<std::size_t>();
    return s;
}

std::string csv_field(std::string_view s) {
    if (s.find_first_of(",\"\n\r") == std::string_view::npos) return std::string(s);
    std::string out = "\"";
    for (char c : s) {
        if (c == '"') out += '"';
        out += c;
    }
    out += '"';
    return out;
}

std::string optional_field(const std::optional<double>& v) { return v ? format_double(*v) : std::string(); }

void write_file(const std::filesystem::path& path, const std::string& content) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw IoError("cannot write " + path.string());
    out << content;
    out.flush();
    if (!out) throw IoError("failed writing " + path.string());
}

const std::optional<BoxplotSummary>& pick(const MetricSummaries& s, Metric m) {
    switch (m) {
        case Metric::rmse: return s.rmse;
        case Metric::precision: return s.precision;
        case Metric::ndcg: return s.ndcg;
    }
    return s.rmse;
}

}  // namespace

ExperimentConfig parse_config_text(std::string_view text, const ConfigOverrides& overrides) {
    ExperimentConfig cfg;
    RawConfig raw;
    std::set<std::string> seen;
    std::size_t line_no = 0;
    std::istringstream in{std::string(text)};
    std::string line;
    while (std::getline(in, line)) {
        ++line_no;
        std::string_view view = line;
        if (auto hash = view.find('#'); hash != std::string_view::npos) view = view.substr(0, hash);
        view = trim(view);
        if (view.empty()) continue;
        const auto eq = view.find('=');
        if (eq == std::string_view::npos) {
            throw ConfigError("config line " + std::to_string(line_no) + ": expected `key = value`");
        }
        const auto key = trim(view.substr(0, eq));
        const auto value = trim(view.substr(eq + 1));
        if (key.empty()) throw ConfigError("config line " + std::to_string(line_no) + ": empty key");
        if (!seen.insert(std::string(key)).second) {
            throw ConfigError("config line " + std::to_string(line_no) + ": duplicate key '" + std::string(key) + "'");
        }
        apply(cfg, raw, key, value);
    }
    for (const auto& [key, value] : overrides) apply(cfg, raw, key, value);
    resolve_predictor(cfg, raw);
    cfg.validate();
    return cfg;
}

ExperimentConfig parse_config(const std::filesystem::path& path, const ConfigOverrides& overrides) {
    if (path.empty()) return parse_config_text("", overrides);
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ConfigError("cannot read config file " + path.string());
    std::ostringstream buf;
    buf << in.rdbuf();
    return parse_config_text(buf.str(), overrides);
}

std::map<std::string, std::string> config_to_map(const ExperimentConfig& cfg) {
    std::map<std::string, std::string> m;
    m["dataset"] = to_string(cfg.dataset);
    m["data_path"] = cfg.data_path;
    m["learner"] = to_string(cfg.learner.kind);
    m["predictor"] = cfg.learner.predictor ? std::string(to_string(*cfg.learner.predictor)) : "none";
    m["final_recommender"] = to_string(cfg.final_recommender);
    m["mode"] = to_string(cfg.mode);
    m["budget"] = std::to_string(cfg.budget);
    m["n_users"] = std::to_string(cfg.n_users);
    m["top_k"] = std::to_string(cfg.top_k);
    m["relevance_threshold"] = cfg.relevance_threshold ? format_double(*cfg.relevance_threshold) : "global-mean";
    m["ask_cap"] = std::to_string(cfg.ask_cap);
    m["rng_seed"] = std::to_string(cfg.rng_seed);
    m["eligibility_min_ratings"] = std::to_string(cfg.eligibility_min_ratings);
    m["threads"] = std::to_string(cfg.threads);
    return m;
}

std::string config_to_text(const ExperimentConfig& cfg) {
    std::string out;
    for (const auto& [k, v] : config_to_map(cfg)) out += k + " = " + v + "\n";
    return out;
}

DatasetFingerprint fingerprint(const RatingMatrix& matrix) {
    return {matrix.user_count(), matrix.item_count(), matrix.entry_count(), matrix.checksum()};
}

std::string format_double(double value) {
    char buf[64];
    auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, value);
    if (ec != std::errc{}) throw Error("cannot format number");
    return std::string(buf, ptr);
}

std::string per_user_csv(const ExperimentConfig& cfg, const std::vector<SimulationOutcome>& outcomes) {
    const std::string mode(to_string(cfg.mode));
    const std::string learner(to_string(cfg.learner.kind));
    const std::string predictor = cfg.learner.predictor ? std::string(to_string(*cfg.learner.predictor)) : "none";
    std::string out = "user,mode,learner,predictor,acquired,asked,rmse,precision,ndcg\n";
    for (const auto& o : outcomes) {
        out += csv_field(o.user_id) + ',' + mode + ',' + learner + ',' + predictor + ',' +
               std::to_string(o.acquired_count) + ',' + std::to_string(o.asked.size()) + ',' +
               optional_field(o.rmse) + ',' + optional_field(o.precision) + ',' + optional_field(o.ndcg) + '\n';
    }
    return out;
}

std::string boxplot_dat(const MetricSummaries& summaries) {
    std::string out = "# metric min q1 median q3 max n\n";
    for (auto m : {Metric::rmse, Metric::precision, Metric::ndcg}) {
        const auto& s = pick(summaries, m);
        out += std::string(to_string(m));
        if (s) {
            for (double v : {s->min, s->q1, s->median, s->q3, s->max}) out += ' ' + format_double(v);
            out += ' ' + std::to_string(s->n);
        } else {
            out += " nan nan nan nan nan 0";
        }
        out += '\n';
    }
    return out;
}

std::string summary_json(const RunManifest& manifest) {
    json config = json::object();
    for (const auto& [k, v] : config_to_map(manifest.config)) config[k] = v;
    char checksum[17];
    std::snprintf(checksum, sizeof checksum, "%016llx", static_cast<unsigned long long>(manifest.dataset.checksum));
    json j{
        {"artifact", "alrec"},
        {"version", manifest.version},
        {"config", config},
        {"dataset",
         {{"users", manifest.dataset.users},
          {"items", manifest.dataset.items},
          {"entries", manifest.dataset.entries},
          {"checksum", checksum}}},
        {"duration_seconds", manifest.duration_seconds},
        {"metrics",
         {{"rmse", summary_to_json(manifest.summaries.rmse)},
          {"precision", summary_to_json(manifest.summaries.precision)},
          {"ndcg", summary_to_json(manifest.summaries.ndcg)}}},
    };
    return j.dump(2) + "\n";
}

std::vector<std::filesystem::path> export_results(const RunManifest& manifest,
                                                  const std::vector<SimulationOutcome>& outcomes,
                                                  const std::filesystem::path& out_dir) {
    std::error_code ec;
    std::filesystem::create_directories(out_dir, ec);
    if (ec || !std::filesystem::is_directory(out_dir)) {
        throw IoError("cannot create output directory " + out_dir.string() + (ec ? ": " + ec.message() : ""));
    }
    const std::vector<std::filesystem::path> files{out_dir / "per_user.csv", out_dir / "summary.json",
                                                   out_dir / "boxplot.dat"};
    write_file(files[0], per_user_csv(manifest.config, outcomes));
    write_file(files[1], summary_json(manifest));
    write_file(files[2], boxplot_dat(manifest.summaries));
    return files;
}

std::string_view to_string(Metric metric) {
    switch (metric) {
        case Metric::rmse: return "rmse";
        case Metric::precision: return "precision";
        case Metric::ndcg: return "ndcg";
    }
    return "?";
}

std::optional<Metric> parse_metric(std::string_view text) {
    if (text == "rmse") return Metric::rmse;
    if (text == "precision") return Metric::precision;
    if (text == "ndcg") return Metric::ndcg;
    return std::nullopt;
}

bool lower_is_better(Metric metric) { return metric == Metric::rmse; }

MetricSummaries parse_summary_json(std::string_view text) {
    try {
        const auto j = json::parse(text);
        const auto& m = j.at("metrics");
        return {summary_from_json(m.at("rmse")), summary_from_json(m.at("precision")),
                summary_from_json(m.at("ndcg"))};
    } catch (const json::exception& e) {
        throw DataError(std::string("malformed summary: ") + e.what());
    }
}

MetricSummaries read_summary(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw DataError("cannot read summary " + path.string());
    std::ostringstream buf;
    buf << in.rdbuf();
    return parse_summary_json(buf.str());
}

Comparison compare_runs(const MetricSummaries& a, const MetricSummaries& b, Metric metric) {
    const auto& sa = pick(a, metric);
    const auto& sb = pick(b, metric);
    if (!sa) throw ConfigError("first summary has no " + std::string(to_string(metric)) + " values");
    if (!sb) throw ConfigError("second summary has no " + std::string(to_string(metric)) + " values");
    Comparison c{metric, sa->median, sb->median, sa->median - sb->median, Winner::none};
    if (c.difference != 0.0) {
        const bool a_better = lower_is_better(metric) ? c.difference < 0.0 : c.difference > 0.0;
        c.winner = a_better ? Winner::first : Winner::second;
    }
    return c;
}

std::string describe(const Comparison& c) {
    std::string out = std::string(to_string(c.metric)) + ": median A " + format_double(c.median_a) + ", median B " +
                      format_double(c.median_b) + ", difference (A-B) " + format_double(c.difference) + " (" +
                      (lower_is_better(c.metric) ? "lower" : "higher") + " is better): ";
    switch (c.winner) {
        case Winner::first: out += "A wins by " + format_double(std::abs(c.difference)); break;
        case Winner::second: out += "B wins by " + format_double(std::abs(c.difference)); break;
        case Winner::none: out += "no winner"; break;
    }
    return out;
}

}  // namespace alrec
