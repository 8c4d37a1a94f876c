#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <memory>
#include <optional>
#include <span>
#include <string_view>
#include <variant>
#include <vector>

#include "alrec/data.hpp"

namespace alrec {

enum class PredictorKind { user_user, item_item, funk_svd };

std::string_view to_string(PredictorKind kind);
std::optional<PredictorKind> parse_predictor_kind(std::string_view text);

struct NeighborhoodConfig {
    std::size_t min_neighbors = 10;
    std::size_t max_neighbors = 30;
    double min_similarity = 0.15;
    /// When true a neighbor needs similarity > min_similarity, else >=.
    bool strict_threshold = false;

    /// Throws ConfigError when the invariants do not hold.
    void validate() const;

    static NeighborhoodConfig user_user() { return {10, 30, 0.15, false}; }
    static NeighborhoodConfig item_item() { return {1, 20, 0.0, true}; }

    bool admits(double similarity) const {
        return strict_threshold ? similarity > min_similarity : similarity >= min_similarity;
    }
};

struct FactorConfig {
    std::size_t n_features = 25;
    std::size_t n_iterations = 100;
    double learn_rate = 0.001;
    double init_min = 0.05;
    double init_max = 0.15;

    void validate() const;
};

struct Neighbor {
    std::uint32_t index;
    double similarity;
};

enum class Direction { ascending, descending };

/// Pearson correlation over the co-rated indices of two sorted rating
/// vectors. nullopt with fewer than 2 co-rated entries or zero variance.
std::optional<double> pearson_similarity(std::span<const Entry> a, std::span<const Entry> b);

/// Adjusted cosine between two item columns; every rating is centred on its
/// user's mean (indexed by user). Same 2-co-rater and zero-norm rules as
/// pearson_similarity.
std::optional<double> adjusted_cosine(std::span<const Entry> a, std::span<const Entry> b,
                                      std::span<const double> user_means);

/// Neighbor tables for user-user or item-item CF. Only the rows listed in
/// `scope` are materialised; asking for any other row is unpredictable.
struct NeighborhoodModel {
    NeighborhoodConfig config;
    std::vector<double> user_means;  // NaN for users without ratings
    std::vector<std::vector<Neighbor>> neighbors;
    std::vector<bool> in_scope;
};

/// Latent factors, stored feature-major: user_factors[f * users + u].
struct FactorModel {
    FactorConfig config;
    double global_mean = 0.0;
    std::size_t users = 0;
    std::size_t items = 0;
    std::vector<double> user_factors;
    std::vector<double> item_factors;

    double p(std::size_t u, std::size_t f) const { return user_factors[f * users + u]; }
    double q(std::size_t i, std::size_t f) const { return item_factors[f * items + i]; }
    /// global_mean + <P_u, Q_i>, unclamped.
    double raw_prediction(std::size_t u, std::size_t i) const;
};

/// Trained state of one predictor. Immutable and shareable once trained.
class PredictorModel {
public:
    PredictorModel(PredictorKind kind, std::shared_ptr<const RatingMatrix> training,
                   std::variant<NeighborhoodModel, FactorModel> state);

    PredictorKind kind() const noexcept { return kind_; }
    const RatingMatrix& training() const noexcept { return *training_; }

    /// Clamped to the training scale; nullopt when unpredictable.
    std::optional<double> predict(UserIndex user, ItemIndex item) const;

    const NeighborhoodModel* neighborhood() const { return std::get_if<NeighborhoodModel>(&state_); }
    const FactorModel* factors() const { return std::get_if<FactorModel>(&state_); }

private:
    std::optional<double> predict_user_user(UserIndex user, ItemIndex item) const;
    std::optional<double> predict_item_item(UserIndex user, ItemIndex item) const;
    std::optional<double> predict_funk_svd(UserIndex user, ItemIndex item) const;

    PredictorKind kind_;
    std::shared_ptr<const RatingMatrix> training_;
    std::variant<NeighborhoodModel, FactorModel> state_;
};

/// Empty scope means every user.
PredictorModel train_user_user(std::shared_ptr<const RatingMatrix> matrix, const NeighborhoodConfig& cfg,
                               std::span<const UserIndex> scope = {});

/// Item neighbor lists are needed for every item a prediction may touch, so
/// item-item always trains all items.
PredictorModel train_item_item(std::shared_ptr<const RatingMatrix> matrix, const NeighborhoodConfig& cfg);

/// Called after every sweep with (feature, iteration, model).
using SweepObserver = std::function<void(std::size_t, std::size_t, const FactorModel&)>;

/// Funk-style SGD, one feature at a time. Throws TrainingDivergedError if a
/// factor becomes non-finite.
PredictorModel train_funk_svd(std::shared_ptr<const RatingMatrix> matrix, const FactorConfig& cfg,
                              std::uint64_t rng_seed, const SweepObserver& observer = {});

/// One SGD step on a single rating for feature f, given the prediction error.
/// Both updates use the pre-step values.
inline void sgd_step(double error, double learn_rate, double& p, double& q) noexcept {
    const double p_old = p;
    p += learn_rate * error * q;
    q += learn_rate * error * p_old;
}

/// Sum of squared training errors of the unclamped factor prediction.
double training_sse(const FactorModel& model, const RatingMatrix& matrix);

/// Settings bundle used wherever a predictor is trained by kind.
struct PredictorSettings {
    NeighborhoodConfig user_user = NeighborhoodConfig::user_user();
    NeighborhoodConfig item_item = NeighborhoodConfig::item_item();
    FactorConfig funk_svd{};
};

/// Train by kind. `target` restricts user-user tables to one user, which
/// gives that user the same predictions as full training.
PredictorModel train_predictor(PredictorKind kind, std::shared_ptr<const RatingMatrix> matrix,
                               const PredictorSettings& settings, std::uint64_t rng_seed,
                               std::optional<UserIndex> target = std::nullopt);

/// Candidates by predicted score in `direction`; unpredictable items after
/// all predictable ones; ties by ascending item index.
std::vector<ItemIndex> rank_items(const PredictorModel& model, UserIndex user,
                                  std::span<const ItemIndex> candidates, Direction direction);

}  // namespace alrec
