#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <functional>
#include <memory>
#include <optional>
#include <set>
#include <span>
#include <string_view>
#include <vector>

#include "alrec/data.hpp"
#include "alrec/predictors.hpp"
#include "alrec/rng.hpp"

namespace alrec {

enum class LearnerKind {
    binary_prediction,
    decision_tree,
    highest_prediction,
    impact_analysis,
    lowest_prediction,
    random_baseline,
};

std::string_view to_string(LearnerKind kind);
std::optional<LearnerKind> parse_learner_kind(std::string_view text);
bool needs_predictor(LearnerKind kind);

/// A learner kind plus the predictor it embeds, when it embeds one.
struct LearnerSpec {
    LearnerKind kind = LearnerKind::highest_prediction;
    std::optional<PredictorKind> predictor = PredictorKind::funk_svd;

    /// Throws ConfigError when a predictor is missing or superfluous.
    void validate() const;
};

/// One question of an interview; `response` is empty when the user could not
/// rate the item.
struct AskOutcome {
    ItemIndex item;
    std::optional<double> response;
};

/// Items the user has not rated, ascending.
std::vector<ItemIndex> unrated_items(const RatingMatrix& training, UserIndex user);

std::vector<ItemIndex> rank_binary_prediction(std::shared_ptr<const RatingMatrix> training, UserIndex user,
                                              PredictorKind predictor, const PredictorSettings& settings,
                                              std::uint64_t rng_seed);
std::vector<ItemIndex> rank_highest_prediction(std::shared_ptr<const RatingMatrix> training, UserIndex user,
                                               PredictorKind predictor, const PredictorSettings& settings,
                                               std::uint64_t rng_seed);
std::vector<ItemIndex> rank_lowest_prediction(std::shared_ptr<const RatingMatrix> training, UserIndex user,
                                              PredictorKind predictor, const PredictorSettings& settings,
                                              std::uint64_t rng_seed);

/// Number of paths user - item - v - j where v != user rated `item`, v rated
/// j != item, and the user has not rated j.
std::size_t impact_score(const RatingMatrix& training, UserIndex user, ItemIndex item);
std::vector<ItemIndex> rank_impact_analysis(const RatingMatrix& training, UserIndex user);

// ---------------------------------------------------------------------------
// Decision tree interview

enum class Edge : std::size_t { like = 0, dislike = 1, unknown = 2 };

/// Ratings at or above the dataset mean count as "like".
Edge classify(std::optional<double> response, double dataset_mean);

/// A node asks about `item` and routes users down one of three edges. A leaf
/// has no item and no children.
struct DecisionTreeNode {
    std::optional<ItemIndex> item;
    std::vector<UserIndex> users;
    double error = 0.0;
    std::array<std::unique_ptr<DecisionTreeNode>, 3> children;

    bool is_leaf() const noexcept { return !item.has_value(); }
    const DecisionTreeNode* child(Edge e) const { return children[static_cast<std::size_t>(e)].get(); }
};

struct DecisionTree {
    std::unique_ptr<DecisionTreeNode> root;
    double dataset_mean = 0.0;
    std::size_t depth_budget = 0;
};

/// Squared error of predicting every rating held by `users` with the mean
/// rating of its item among those users.
double partition_error(const RatingMatrix& training, std::span<const UserIndex> users);

/// Greedy top-down construction. Each node picks the item whose
/// like/dislike/unknown split has the smallest summed partition_error (ties
/// to the lower item index); children are only expanded when that split
/// lowers the node's error, the child has at least 2 users, and the depth
/// budget allows another question.
DecisionTree build_decision_tree(const RatingMatrix& training, std::size_t depth_budget);

/// Item at the node reached by following `path` from the root, or nullopt
/// once a leaf is reached.
std::optional<ItemIndex> dt_next_item(const DecisionTree& tree, std::span<const AskOutcome> path);

// ---------------------------------------------------------------------------
// Uniform strategy interface used by the simulation loop

class ActiveLearner {
public:
    virtual ~ActiveLearner() = default;

    /// (Re)train on a training snapshot for `user`.
    void fit(std::shared_ptr<const RatingMatrix> training, UserIndex user);

    /// Next item to ask, never one the user rated in the fitted snapshot nor
    /// one in `already_asked`; nullopt when nothing is left.
    virtual std::optional<ItemIndex> next_question(const std::set<ItemIndex>& already_asked) = 0;

    std::size_t fit_count() const noexcept { return fits_; }

protected:
    virtual void on_fit() = 0;

    std::shared_ptr<const RatingMatrix> training_;
    UserIndex user_ = 0;

private:
    std::size_t fits_ = 0;
};

/// Proposes items in the order of a ranking recomputed on every fit.
class RankingLearner : public ActiveLearner {
public:
    using Ranker = std::function<std::vector<ItemIndex>(std::shared_ptr<const RatingMatrix>, UserIndex)>;
    explicit RankingLearner(Ranker ranker) : ranker_(std::move(ranker)) {}

    std::optional<ItemIndex> next_question(const std::set<ItemIndex>& already_asked) override;
    const std::vector<ItemIndex>& ranking() const noexcept { return ranking_; }

protected:
    void on_fit() override;

private:
    Ranker ranker_;
    std::vector<ItemIndex> ranking_;
};

/// Walks a tree built on the first fit. Later fits only refresh the
/// snapshot used to read the user's answers; an asked item without a rating
/// in the snapshot follows the unknown edge.
class DecisionTreeLearner : public ActiveLearner {
public:
    explicit DecisionTreeLearner(std::size_t depth_budget) : depth_budget_(depth_budget) {}

    std::optional<ItemIndex> next_question(const std::set<ItemIndex>& already_asked) override;
    const DecisionTree& tree() const { return tree_; }

protected:
    void on_fit() override;

private:
    std::size_t depth_budget_;
    DecisionTree tree_;
};

/// Uniform draw from the remaining items. The stream survives refits.
class RandomLearner : public ActiveLearner {
public:
    explicit RandomLearner(std::uint64_t seed) : rng_(seed) {}
    std::optional<ItemIndex> next_question(const std::set<ItemIndex>& already_asked) override;

protected:
    void on_fit() override {}

private:
    Rng rng_;
};

std::unique_ptr<ActiveLearner> make_learner(const LearnerSpec& spec, const PredictorSettings& settings,
                                            std::uint64_t rng_seed, std::size_t tree_depth);

}  // namespace alrec
