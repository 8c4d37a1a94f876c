#include <algorithm>

#include "alrec/errors.hpp"
#include "alrec/learners.hpp"

namespace alrec {

std::string_view to_string(LearnerKind kind) {
    switch (kind) {
        case LearnerKind::binary_prediction: return "binary-prediction";
        case LearnerKind::decision_tree: return "decision-tree";
        case LearnerKind::highest_prediction: return "highest-prediction";
        case LearnerKind::impact_analysis: return "impact-analysis";
        case LearnerKind::lowest_prediction: return "lowest-prediction";
        case LearnerKind::random_baseline: return "random-baseline";
    }
    return "?";
}

std::optional<LearnerKind> parse_learner_kind(std::string_view text) {
    for (auto k : {LearnerKind::binary_prediction, LearnerKind::decision_tree, LearnerKind::highest_prediction,
                   LearnerKind::impact_analysis, LearnerKind::lowest_prediction, LearnerKind::random_baseline}) {
        if (text == to_string(k)) return k;
    }
    return std::nullopt;
}

bool needs_predictor(LearnerKind kind) {
    return kind == LearnerKind::binary_prediction || kind == LearnerKind::highest_prediction ||
           kind == LearnerKind::lowest_prediction;
}

void LearnerSpec::validate() const {
    if (needs_predictor(kind) && !predictor) {
        throw ConfigError(std::string(to_string(kind)) + " requires a predictor");
    }
    if (!needs_predictor(kind) && predictor) {
        throw ConfigError(std::string(to_string(kind)) + " does not take a predictor");
    }
}

std::vector<ItemIndex> unrated_items(const RatingMatrix& training, UserIndex user) {
    std::vector<ItemIndex> out;
    const auto row = training.user_row(user);
    auto it = row.begin();
    for (ItemIndex i = 0; i < training.item_count(); ++i) {
        if (it != row.end() && it->index == i) {
            ++it;
            continue;
        }
        out.push_back(i);
    }
    return out;
}

std::vector<ItemIndex> rank_binary_prediction(std::shared_ptr<const RatingMatrix> training, UserIndex user,
                                              PredictorKind predictor, const PredictorSettings& settings,
                                              std::uint64_t rng_seed) {
    const auto candidates = unrated_items(*training, user);
    auto binary = std::make_shared<const RatingMatrix>(binarize(*training));
    const auto model = train_predictor(predictor, std::move(binary), settings, rng_seed, user);
    return rank_items(model, user, candidates, Direction::descending);
}

std::vector<ItemIndex> rank_highest_prediction(std::shared_ptr<const RatingMatrix> training, UserIndex user,
                                               PredictorKind predictor, const PredictorSettings& settings,
                                               std::uint64_t rng_seed) {
    const auto candidates = unrated_items(*training, user);
    const auto model = train_predictor(predictor, std::move(training), settings, rng_seed, user);
    return rank_items(model, user, candidates, Direction::descending);
}

std::vector<ItemIndex> rank_lowest_prediction(std::shared_ptr<const RatingMatrix> training, UserIndex user,
                                              PredictorKind predictor, const PredictorSettings& settings,
                                              std::uint64_t rng_seed) {
    const auto candidates = unrated_items(*training, user);
    const auto model = train_predictor(predictor, std::move(training), settings, rng_seed, user);
    return rank_items(model, user, candidates, Direction::ascending);
}

std::size_t impact_score(const RatingMatrix& training, UserIndex user, ItemIndex item) {
    std::size_t score = 0;
    const auto mine = training.user_row(user);
    for (const auto& rater : training.item_column(item)) {
        if (rater.index == user) continue;
        const auto theirs = training.user_row(rater.index);
        // |theirs| minus `item` itself minus what the user already rated.
        std::size_t overlap = 0;
        for (std::size_t a = 0, b = 0; a < mine.size() && b < theirs.size();) {
            if (mine[a].index < theirs[b].index) {
                ++a;
            } else if (theirs[b].index < mine[a].index) {
                ++b;
            } else {
                if (mine[a].index != item) ++overlap;
                ++a;
                ++b;
            }
        }
        score += theirs.size() - 1 - overlap;
    }
    return score;
}

std::vector<ItemIndex> rank_impact_analysis(const RatingMatrix& training, UserIndex user) {
    const auto candidates = unrated_items(training, user);
    std::vector<std::pair<std::size_t, ItemIndex>> scored;
    scored.reserve(candidates.size());
    for (ItemIndex i : candidates) scored.emplace_back(impact_score(training, user, i), i);
    std::sort(scored.begin(), scored.end(), [](const auto& a, const auto& b) {
        if (a.first != b.first) return a.first > b.first;
        return a.second < b.second;
    });
    std::vector<ItemIndex> out;
    out.reserve(scored.size());
    for (const auto& s : scored) out.push_back(s.second);
    return out;
}

void ActiveLearner::fit(std::shared_ptr<const RatingMatrix> training, UserIndex user) {
    if (!training) throw Error("active learner: null training snapshot");
    training_ = std::move(training);
    user_ = user;
    ++fits_;
    on_fit();
}

void RankingLearner::on_fit() { ranking_ = ranker_(training_, user_); }

std::optional<ItemIndex> RankingLearner::next_question(const std::set<ItemIndex>& already_asked) {
    for (ItemIndex i : ranking_) {
        if (already_asked.contains(i) || training_->has(user_, i)) continue;
        return i;
    }
    return std::nullopt;
}

void DecisionTreeLearner::on_fit() {
    if (!tree_.root) tree_ = build_decision_tree(*training_, depth_budget_);
}

std::optional<ItemIndex> DecisionTreeLearner::next_question(const std::set<ItemIndex>& already_asked) {
    std::vector<AskOutcome> path;
    while (true) {
        const auto item = dt_next_item(tree_, path);
        if (!item) return std::nullopt;
        if (auto r = training_->rating(user_, *item)) {
            path.push_back({*item, r});
        } else if (already_asked.contains(*item)) {
            path.push_back({*item, std::nullopt});
        } else {
            return item;
        }
    }
}

std::optional<ItemIndex> RandomLearner::next_question(const std::set<ItemIndex>& already_asked) {
    std::vector<ItemIndex> remaining;
    for (ItemIndex i : unrated_items(*training_, user_)) {
        if (!already_asked.contains(i)) remaining.push_back(i);
    }
    if (remaining.empty()) return std::nullopt;
    return remaining[rng_.below(remaining.size())];
}

std::unique_ptr<ActiveLearner> make_learner(const LearnerSpec& spec, const PredictorSettings& settings,
                                            std::uint64_t rng_seed, std::size_t tree_depth) {
    spec.validate();
    switch (spec.kind) {
        case LearnerKind::decision_tree: return std::make_unique<DecisionTreeLearner>(tree_depth);
        case LearnerKind::random_baseline: return std::make_unique<RandomLearner>(rng_seed);
        case LearnerKind::impact_analysis:
            return std::make_unique<RankingLearner>(
                [](std::shared_ptr<const RatingMatrix> t, UserIndex u) { return rank_impact_analysis(*t, u); });
        case LearnerKind::binary_prediction:
        case LearnerKind::highest_prediction:
        case LearnerKind::lowest_prediction: break;
    }
    const auto predictor = *spec.predictor;
    auto rank = spec.kind == LearnerKind::binary_prediction    ? &rank_binary_prediction
                : spec.kind == LearnerKind::highest_prediction ? &rank_highest_prediction
                                                               : &rank_lowest_prediction;
    return std::make_unique<RankingLearner>(
        [rank, predictor, settings, rng_seed](std::shared_ptr<const RatingMatrix> t, UserIndex u) {
            return rank(std::move(t), u, predictor, settings, rng_seed);
        });
}

}  // namespace alrec
