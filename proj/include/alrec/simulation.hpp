#pragma once

#include <cstddef>
#include <cstdint>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "alrec/data.hpp"
#include "alrec/learners.hpp"
#include "alrec/metrics.hpp"
#include "alrec/predictors.hpp"

namespace alrec {

enum class Mode { batch, sequential };
enum class DatasetKind { jester, bookcrossing };

std::string_view to_string(Mode mode);
std::string_view to_string(DatasetKind kind);
std::optional<Mode> parse_mode(std::string_view text);
std::optional<DatasetKind> parse_dataset_kind(std::string_view text);

struct ExperimentConfig {
    DatasetKind dataset = DatasetKind::jester;
    std::string data_path;
    LearnerSpec learner{};
    PredictorKind final_recommender = PredictorKind::funk_svd;
    Mode mode = Mode::sequential;
    std::size_t budget = 6;
    std::size_t n_users = 100;
    std::size_t top_k = 10;
    /// Relevance cut-off for precision; empty means the training global mean.
    std::optional<double> relevance_threshold;
    std::size_t ask_cap = 500;
    std::uint64_t rng_seed = 42;
    std::size_t eligibility_min_ratings = 20;
    /// Worker threads for per-user simulations; output does not depend on it.
    std::size_t threads = 1;
    PredictorSettings predictors{};

    /// Throws ConfigError naming the violated invariant.
    void validate() const;
    /// One tree level per question, plus one.
    std::size_t tree_depth() const { return budget + 1; }
};

struct SimulationOutcome {
    UserIndex user = 0;
    std::string user_id;
    std::vector<AskOutcome> asked;
    std::size_t acquired_count = 0;
    std::size_t retrain_count = 0;
    std::optional<double> rmse;
    std::optional<double> precision;
    std::optional<double> ndcg;
};

struct FinalMetrics {
    std::optional<double> rmse;
    std::optional<double> precision;
    std::optional<double> ndcg;
};

/// What the final recommender was given, for leak and conservation checks.
struct EvaluationTrace {
    std::shared_ptr<const RatingMatrix> final_training;
    std::map<ItemIndex, double> remainder;
};

/// Stream seeds of one user's simulation, keyed by (experiment seed, user id).
struct UserSeeds {
    std::uint64_t holdout;
    std::uint64_t learner;
    std::uint64_t final_recommender;
};
UserSeeds user_seeds(std::uint64_t experiment_seed, std::string_view user_id);

/// Trains the final recommender on `augmented` and scores it on the
/// remainder of the control set: RMSE over predictable ratings, and
/// precision / nDCG of the top_k remainder items by predicted score. All
/// metrics are empty for an empty remainder.
FinalMetrics evaluate_final(const ExperimentConfig& cfg, std::shared_ptr<const RatingMatrix> augmented,
                            UserIndex user, const std::map<ItemIndex, double>& remainder,
                            std::uint64_t rng_seed);

/// One interview. The learner is fitted on the split's training set first;
/// in sequential mode it is refitted after every acquired rating.
SimulationOutcome simulate_user(const ExperimentConfig& cfg, const HoldoutSplit& split, ActiveLearner& learner,
                                Mode mode, std::uint64_t final_seed, EvaluationTrace* trace = nullptr);

SimulationOutcome simulate_user_batch(const ExperimentConfig& cfg, const HoldoutSplit& split,
                                      ActiveLearner& learner, std::uint64_t final_seed,
                                      EvaluationTrace* trace = nullptr);
SimulationOutcome simulate_user_sequential(const ExperimentConfig& cfg, const HoldoutSplit& split,
                                           ActiveLearner& learner, std::uint64_t final_seed,
                                           EvaluationTrace* trace = nullptr);

/// Holdout, learner construction, and interview for one user of `matrix`.
SimulationOutcome simulate_one(const ExperimentConfig& cfg, const RatingMatrix& matrix, UserIndex user,
                               EvaluationTrace* trace = nullptr);

/// `n` users with at least `min_ratings` ratings, drawn without replacement
/// by a partial Fisher-Yates shuffle of the eligible users (ascending index)
/// using Rng(derive_seed(seed, 0)); returned in ascending index order.
/// Throws ConfigError when fewer than `n` users are eligible.
std::vector<UserIndex> sample_users(const RatingMatrix& matrix, std::size_t n, std::size_t min_ratings,
                                    std::uint64_t seed);

struct MetricSummaries {
    std::optional<BoxplotSummary> rmse;
    std::optional<BoxplotSummary> precision;
    std::optional<BoxplotSummary> ndcg;
};

MetricSummaries summarize(const std::vector<SimulationOutcome>& outcomes);

struct ExperimentResult {
    std::vector<SimulationOutcome> outcomes;
    MetricSummaries summaries;
};

ExperimentResult run_experiment(const ExperimentConfig& cfg, const RatingMatrix& matrix);

}  // namespace alrec
