#pragma once

#include <cstddef>
#include <set>
#include <span>
#include <utility>
#include <vector>

#include "alrec/data.hpp"

namespace alrec {

/// One recommended item: its true rating and the score it was ranked by.
struct RankedEntry {
    ItemIndex item;
    double true_rating;
    double predicted;
};

/// Items in presentation order; rank is the 1-based position.
using RankedList = std::vector<RankedEntry>;

struct PredictionPair {
    double predicted;
    double truth;
};

/// Square root of the mean squared error. Throws UndefinedMetricError when empty.
double rmse(std::span<const PredictionPair> pairs);

/// |recommended and relevant| / |recommended|.
double precision(const std::set<ItemIndex>& recommended, const std::set<ItemIndex>& relevant);

/// Sum of (true_rating + gain_offset) / log2(rank + 1).
double dcg(const RankedList& list, double gain_offset = 0.0);

/// DCG of `list` over the DCG of the same items sorted by true rating.
double ndcg(const RankedList& list, double gain_offset = 0.0);

/// DCG of `list` over the DCG of `ideal_ratings` (any order; sorted here and
/// truncated to the list length).
double ndcg(const RankedList& list, std::vector<double> ideal_ratings, double gain_offset = 0.0);

/// Offset that makes every gain of the scale non-negative: -min when the
/// scale goes below zero, else 0.
double gain_offset_for(const RatingScale& scale);

struct BoxplotSummary {
    double min = 0.0;
    double q1 = 0.0;
    double median = 0.0;
    double q3 = 0.0;
    double max = 0.0;
    std::size_t n = 0;
};

/// Linear-interpolation quantile (the usual "type 7" rule) of sorted data.
double quantile_sorted(std::span<const double> sorted, double p);

/// Five-number summary. Throws UndefinedMetricError when empty.
BoxplotSummary boxplot(std::vector<double> values);

}  // namespace alrec
