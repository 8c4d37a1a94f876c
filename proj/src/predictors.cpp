#include <algorithm>

#include "alrec/errors.hpp"
#include "alrec/predictors.hpp"

namespace alrec {

std::string_view to_string(PredictorKind kind) {
    switch (kind) {
        case PredictorKind::user_user: return "user-user";
        case PredictorKind::item_item: return "item-item";
        case PredictorKind::funk_svd: return "funk-svd";
    }
    return "?";
}

std::optional<PredictorKind> parse_predictor_kind(std::string_view text) {
    if (text == "user-user") return PredictorKind::user_user;
    if (text == "item-item") return PredictorKind::item_item;
    if (text == "funk-svd") return PredictorKind::funk_svd;
    return std::nullopt;
}

PredictorModel::PredictorModel(PredictorKind kind, std::shared_ptr<const RatingMatrix> training,
                               std::variant<NeighborhoodModel, FactorModel> state)
    : kind_(kind), training_(std::move(training)), state_(std::move(state)) {
    if (!training_) throw Error("predictor model needs a training matrix");
}

std::optional<double> PredictorModel::predict(UserIndex user, ItemIndex item) const {
    switch (kind_) {
        case PredictorKind::user_user: return predict_user_user(user, item);
        case PredictorKind::item_item: return predict_item_item(user, item);
        case PredictorKind::funk_svd: return predict_funk_svd(user, item);
    }
    return std::nullopt;
}

PredictorModel train_predictor(PredictorKind kind, std::shared_ptr<const RatingMatrix> matrix,
                               const PredictorSettings& settings, std::uint64_t rng_seed,
                               std::optional<UserIndex> target) {
    switch (kind) {
        case PredictorKind::user_user: {
            if (target) {
                const UserIndex scope[] = {*target};
                return train_user_user(std::move(matrix), settings.user_user, scope);
            }
            return train_user_user(std::move(matrix), settings.user_user);
        }
        case PredictorKind::item_item: return train_item_item(std::move(matrix), settings.item_item);
        case PredictorKind::funk_svd: return train_funk_svd(std::move(matrix), settings.funk_svd, rng_seed);
    }
    throw Error("unknown predictor kind");
}

std::vector<ItemIndex> rank_items(const PredictorModel& model, UserIndex user,
                                  std::span<const ItemIndex> candidates, Direction direction) {
    struct Scored {
        ItemIndex item;
        std::optional<double> score;
    };
    std::vector<Scored> scored;
    scored.reserve(candidates.size());
    for (ItemIndex i : candidates) scored.push_back({i, model.predict(user, i)});

    std::sort(scored.begin(), scored.end(), [direction](const Scored& a, const Scored& b) {
        if (a.score.has_value() != b.score.has_value()) return a.score.has_value();
        if (a.score && *a.score != *b.score) {
            return direction == Direction::descending ? *a.score > *b.score : *a.score < *b.score;
        }
        return a.item < b.item;
    });

    std::vector<ItemIndex> out;
    out.reserve(scored.size());
    for (const auto& s : scored) out.push_back(s.item);
    return out;
}

}  // namespace alrec
