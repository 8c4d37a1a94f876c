#include <algorithm>
#include <cmath>
#include <limits>

#include "alrec/errors.hpp"
#include "alrec/predictors.hpp"

namespace alrec {

namespace {

void sort_and_truncate(std::vector<Neighbor>& list, std::size_t max_neighbors) {
    std::sort(list.begin(), list.end(), [](const Neighbor& a, const Neighbor& b) {
        if (a.similarity != b.similarity) return a.similarity > b.similarity;
        return a.index < b.index;
    });
    if (list.size() > max_neighbors) list.resize(max_neighbors);
}

std::vector<double> all_user_means(const RatingMatrix& m) {
    std::vector<double> means(m.user_count(), std::numeric_limits<double>::quiet_NaN());
    for (UserIndex u = 0; u < m.user_count(); ++u) {
        if (auto mean = m.user_mean(u)) means[u] = *mean;
    }
    return means;
}

}  // namespace

void NeighborhoodConfig::validate() const {
    if (min_neighbors > max_neighbors) {
        throw ConfigError("neighborhood: min_neighbors must not exceed max_neighbors");
    }
    if (!(min_similarity >= -1.0) || min_similarity > 1.0) {
        throw ConfigError("neighborhood: min_similarity must lie in [-1, 1]");
    }
}

std::optional<double> pearson_similarity(std::span<const Entry> a, std::span<const Entry> b) {
    std::vector<std::pair<double, double>> common;
    for (std::size_t x = 0, y = 0; x < a.size() && y < b.size();) {
        if (a[x].index < b[y].index) {
            ++x;
        } else if (b[y].index < a[x].index) {
            ++y;
        } else {
            common.emplace_back(a[x].value, b[y].value);
            ++x;
            ++y;
        }
    }
    if (common.size() < 2) return std::nullopt;

    double mean_a = 0.0, mean_b = 0.0;
    for (const auto& [va, vb] : common) {
        mean_a += va;
        mean_b += vb;
    }
    mean_a /= static_cast<double>(common.size());
    mean_b /= static_cast<double>(common.size());

    double cov = 0.0, var_a = 0.0, var_b = 0.0;
    for (const auto& [va, vb] : common) {
        const double da = va - mean_a;
        const double db = vb - mean_b;
        cov += da * db;
        var_a += da * da;
        var_b += db * db;
    }
    if (var_a == 0.0 || var_b == 0.0) return std::nullopt;
    return std::clamp(cov / std::sqrt(var_a * var_b), -1.0, 1.0);
}

std::optional<double> adjusted_cosine(std::span<const Entry> a, std::span<const Entry> b,
                                      std::span<const double> user_means) {
    double dot = 0.0, norm_a = 0.0, norm_b = 0.0;
    std::size_t common = 0;
    for (std::size_t x = 0, y = 0; x < a.size() && y < b.size();) {
        if (a[x].index < b[y].index) {
            ++x;
        } else if (b[y].index < a[x].index) {
            ++y;
        } else {
            const double mean = user_means[a[x].index];
            const double da = a[x].value - mean;
            const double db = b[y].value - mean;
            dot += da * db;
            norm_a += da * da;
            norm_b += db * db;
            ++common;
            ++x;
            ++y;
        }
    }
    if (common < 2 || norm_a == 0.0 || norm_b == 0.0) return std::nullopt;
    return std::clamp(dot / std::sqrt(norm_a * norm_b), -1.0, 1.0);
}

PredictorModel train_user_user(std::shared_ptr<const RatingMatrix> matrix, const NeighborhoodConfig& cfg,
                               std::span<const UserIndex> scope) {
    cfg.validate();
    const auto& m = *matrix;
    NeighborhoodModel model;
    model.config = cfg;
    model.user_means = all_user_means(m);
    model.neighbors.resize(m.user_count());
    model.in_scope.assign(m.user_count(), scope.empty());
    for (UserIndex u : scope) model.in_scope.at(u) = true;

    for (UserIndex u = 0; u < m.user_count(); ++u) {
        if (!model.in_scope[u]) continue;
        const auto row_u = m.user_row(u);
        if (row_u.size() < 2) continue;
        auto& list = model.neighbors[u];
        for (UserIndex v = 0; v < m.user_count(); ++v) {
            if (v == u) continue;
            const auto s = pearson_similarity(row_u, m.user_row(v));
            if (s && cfg.admits(*s)) list.push_back({v, *s});
        }
        sort_and_truncate(list, cfg.max_neighbors);
    }
    return PredictorModel(PredictorKind::user_user, std::move(matrix), std::move(model));
}

PredictorModel train_item_item(std::shared_ptr<const RatingMatrix> matrix, const NeighborhoodConfig& cfg) {
    cfg.validate();
    const auto& m = *matrix;
    NeighborhoodModel model;
    model.config = cfg;
    model.user_means = all_user_means(m);
    model.neighbors.resize(m.item_count());
    model.in_scope.assign(m.item_count(), true);

    std::vector<std::vector<Neighbor>> candidates(m.item_count());
    for (ItemIndex i = 0; i < m.item_count(); ++i) {
        const auto col_i = m.item_column(i);
        if (col_i.size() < 2) continue;
        for (ItemIndex j = i + 1; j < m.item_count(); ++j) {
            const auto s = adjusted_cosine(col_i, m.item_column(j), model.user_means);
            if (s && cfg.admits(*s)) {
                candidates[i].push_back({j, *s});
                candidates[j].push_back({i, *s});
            }
        }
    }
    for (ItemIndex i = 0; i < m.item_count(); ++i) {
        sort_and_truncate(candidates[i], cfg.max_neighbors);
        model.neighbors[i] = std::move(candidates[i]);
    }
    return PredictorModel(PredictorKind::item_item, std::move(matrix), std::move(model));
}

std::optional<double> PredictorModel::predict_user_user(UserIndex user, ItemIndex item) const {
    const auto& model = std::get<NeighborhoodModel>(state_);
    const auto& m = *training_;
    if (user >= m.user_count() || item >= m.item_count() || !model.in_scope[user]) return std::nullopt;
    const double mean_u = model.user_means[user];
    if (std::isnan(mean_u)) return std::nullopt;

    double num = 0.0, den = 0.0;
    std::size_t contributors = 0;
    for (const auto& n : model.neighbors[user]) {
        const auto r = m.rating(n.index, item);
        if (!r) continue;
        num += n.similarity * (*r - model.user_means[n.index]);
        den += std::abs(n.similarity);
        ++contributors;
    }
    if (contributors < model.config.min_neighbors) return std::nullopt;
    // With min_neighbors = 0 an empty neighborhood falls back to the user mean.
    if (den == 0.0) return contributors == 0 ? std::optional<double>(m.scale().clamp(mean_u)) : std::nullopt;
    return m.scale().clamp(mean_u + num / den);
}

std::optional<double> PredictorModel::predict_item_item(UserIndex user, ItemIndex item) const {
    const auto& model = std::get<NeighborhoodModel>(state_);
    const auto& m = *training_;
    if (user >= m.user_count() || item >= m.item_count()) return std::nullopt;

    double num = 0.0, den = 0.0;
    std::size_t contributors = 0;
    for (const auto& n : model.neighbors[item]) {
        const auto r = m.rating(user, n.index);
        if (!r) continue;
        num += n.similarity * *r;
        den += std::abs(n.similarity);
        ++contributors;
    }
    if (contributors == 0 || contributors < model.config.min_neighbors || den == 0.0) return std::nullopt;
    return m.scale().clamp(num / den);
}

}  // namespace alrec
