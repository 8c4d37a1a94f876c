#include "alrec/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <functional>

#include "alrec/errors.hpp"

namespace alrec {

double rmse(std::span<const PredictionPair> pairs) {
    if (pairs.empty()) throw UndefinedMetricError("rmse of no predictions");
    double sum = 0.0;
    for (const auto& p : pairs) {
        const double d = p.predicted - p.truth;
        sum += d * d;
    }
    return std::sqrt(sum / static_cast<double>(pairs.size()));
}

double precision(const std::set<ItemIndex>& recommended, const std::set<ItemIndex>& relevant) {
    if (recommended.empty()) throw UndefinedMetricError("precision of an empty recommendation list");
    std::size_t hits = 0;
    for (ItemIndex i : recommended) hits += relevant.contains(i) ? 1 : 0;
    return static_cast<double>(hits) / static_cast<double>(recommended.size());
}

namespace {

double dcg_of(std::span<const double> ratings, double gain_offset) {
    double total = 0.0;
    for (std::size_t k = 0; k < ratings.size(); ++k) {
        total += (ratings[k] + gain_offset) / std::log2(static_cast<double>(k + 2));
    }
    return total;
}

std::vector<double> true_ratings(const RankedList& list) {
    std::vector<double> r;
    r.reserve(list.size());
    for (const auto& e : list) r.push_back(e.true_rating);
    return r;
}

}  // namespace

double dcg(const RankedList& list, double gain_offset) {
    if (list.empty()) throw UndefinedMetricError("dcg of an empty list");
    return dcg_of(true_ratings(list), gain_offset);
}

double ndcg(const RankedList& list, double gain_offset) {
    if (list.empty()) throw UndefinedMetricError("ndcg of an empty list");
    return ndcg(list, true_ratings(list), gain_offset);
}

double ndcg(const RankedList& list, std::vector<double> ideal_ratings, double gain_offset) {
    if (list.empty()) throw UndefinedMetricError("ndcg of an empty list");
    std::sort(ideal_ratings.begin(), ideal_ratings.end(), std::greater<>());
    if (ideal_ratings.size() > list.size()) ideal_ratings.resize(list.size());
    const double ideal = dcg_of(ideal_ratings, gain_offset);
    if (!(ideal > 0.0)) throw UndefinedMetricError("ndcg undefined: ideal DCG is not positive");
    return dcg(list, gain_offset) / ideal;
}

double gain_offset_for(const RatingScale& scale) { return scale.min < 0.0 ? -scale.min : 0.0; }

double quantile_sorted(std::span<const double> sorted, double p) {
    if (sorted.empty()) throw UndefinedMetricError("quantile of no values");
    const double h = p * static_cast<double>(sorted.size() - 1);
    const auto lo = static_cast<std::size_t>(std::floor(h));
    const auto hi = std::min(lo + 1, sorted.size() - 1);
    return sorted[lo] + (h - static_cast<double>(lo)) * (sorted[hi] - sorted[lo]);
}

BoxplotSummary boxplot(std::vector<double> values) {
    if (values.empty()) throw UndefinedMetricError("box plot of no values");
    std::sort(values.begin(), values.end());
    return {values.front(),
            quantile_sorted(values, 0.25),
            quantile_sorted(values, 0.5),
            quantile_sorted(values, 0.75),
            values.back(),
            values.size()};
}

}  // namespace alrec
