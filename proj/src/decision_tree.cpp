#include <algorithm>
#include <cmath>
#include <limits>

#include "alrec/errors.hpp"
#include "alrec/learners.hpp"

namespace alrec {

namespace {

struct ItemStats {
    double sum = 0.0;
    double sumsq = 0.0;
    std::size_t n = 0;
};

double stats_error(const ItemStats& s) {
    if (s.n == 0) return 0.0;
    return std::max(0.0, s.sumsq - s.sum * s.sum / static_cast<double>(s.n));
}

// Per-item accumulator that only visits the items it touched.
class StatsTable {
public:
    explicit StatsTable(std::size_t items) : stats_(items) {}

    void add_row(std::span<const Entry> row) {
        for (const auto& e : row) {
            auto& s = stats_[e.index];
            if (s.n == 0) touched_.push_back(e.index);
            s.sum += e.value;
            s.sumsq += e.value * e.value;
            ++s.n;
        }
    }

    double error() const {
        double total = 0.0;
        for (ItemIndex i : touched_) total += stats_error(stats_[i]);
        return total;
    }

    void clear() {
        for (ItemIndex i : touched_) stats_[i] = {};
        touched_.clear();
    }

    const ItemStats& operator[](ItemIndex i) const { return stats_[i]; }
    const std::vector<ItemIndex>& touched() const { return touched_; }

private:
    std::vector<ItemStats> stats_;
    std::vector<ItemIndex> touched_;
};

class TreeBuilder {
public:
    TreeBuilder(const RatingMatrix& m, std::size_t budget, double mean)
        : m_(m), budget_(budget), mean_(mean), in_node_(m.user_count(), 0),
          node_(m.item_count()), like_(m.item_count()), dislike_(m.item_count()) {}

    std::unique_ptr<DecisionTreeNode> build(std::vector<UserIndex> users, std::size_t depth,
                                            std::vector<ItemIndex>& used) {
        auto node = std::make_unique<DecisionTreeNode>();
        node->users = std::move(users);
        node_.clear();
        for (UserIndex u : node->users) node_.add_row(m_.user_row(u));
        node->error = node_.error();
        if (depth > budget_) return node;

        const auto best = choose_split(node->users, used);
        if (!best) return node;
        const auto [item, split_error] = *best;
        node->item = item;

        std::array<std::vector<UserIndex>, 3> parts;
        for (UserIndex u : node->users) {
            parts[static_cast<std::size_t>(classify(m_.rating(u, item), mean_))].push_back(u);
        }
        const bool reduces = split_error < node->error - tolerance(node->error);
        used.push_back(item);
        for (std::size_t e = 0; e < 3; ++e) {
            if (reduces && parts[e].size() >= 2 && depth + 1 <= budget_) {
                node->children[e] = build(std::move(parts[e]), depth + 1, used);
            } else {
                node->children[e] = leaf(std::move(parts[e]));
            }
        }
        used.pop_back();
        return node;
    }

private:
    static double tolerance(double magnitude) { return 1e-9 * std::max(1.0, std::abs(magnitude)); }

    std::unique_ptr<DecisionTreeNode> leaf(std::vector<UserIndex> users) {
        auto node = std::make_unique<DecisionTreeNode>();
        node->users = std::move(users);
        node->error = partition_error(m_, node->users);
        return node;
    }

    // Expects node_ to hold the statistics of `users`.
    std::optional<std::pair<ItemIndex, double>> choose_split(const std::vector<UserIndex>& users,
                                                             const std::vector<ItemIndex>& used) {
        for (UserIndex u : users) in_node_[u] = 1;

        std::vector<ItemIndex> candidates;
        for (ItemIndex i : node_.touched()) {
            if (std::find(used.begin(), used.end(), i) == used.end()) candidates.push_back(i);
        }
        std::sort(candidates.begin(), candidates.end());

        std::optional<std::pair<ItemIndex, double>> best;
        for (ItemIndex x : candidates) {
            like_.clear();
            dislike_.clear();
            for (const auto& e : m_.item_column(x)) {
                if (!in_node_[e.index]) continue;
                auto& side = classify(e.value, mean_) == Edge::like ? like_ : dislike_;
                side.add_row(m_.user_row(e.index));
            }
            double err = like_.error() + dislike_.error();
            for (ItemIndex j : node_.touched()) {
                const auto& a = node_[j];
                const auto& l = like_[j];
                const auto& d = dislike_[j];
                err += stats_error({a.sum - l.sum - d.sum, a.sumsq - l.sumsq - d.sumsq, a.n - l.n - d.n});
            }
            if (!best || err < best->second - tolerance(best->second)) best = {x, err};
        }

        for (UserIndex u : users) in_node_[u] = 0;
        return best;
    }

    const RatingMatrix& m_;
    std::size_t budget_;
    double mean_;
    std::vector<char> in_node_;
    StatsTable node_;
    StatsTable like_;
    StatsTable dislike_;
};

}  // namespace

Edge classify(std::optional<double> response, double dataset_mean) {
    if (!response) return Edge::unknown;
    return *response >= dataset_mean ? Edge::like : Edge::dislike;
}

double partition_error(const RatingMatrix& training, std::span<const UserIndex> users) {
    StatsTable table(training.item_count());
    for (UserIndex u : users) table.add_row(training.user_row(u));
    return table.error();
}

DecisionTree build_decision_tree(const RatingMatrix& training, std::size_t depth_budget) {
    if (training.empty()) throw DataError("decision tree: empty training matrix");
    if (depth_budget == 0) throw ConfigError("decision tree: depth budget must be at least 1");

    DecisionTree tree;
    tree.dataset_mean = global_mean(training);
    tree.depth_budget = depth_budget;

    std::vector<UserIndex> users(training.user_count());
    for (UserIndex u = 0; u < training.user_count(); ++u) users[u] = u;
    std::vector<ItemIndex> used;
    TreeBuilder builder(training, depth_budget, tree.dataset_mean);
    tree.root = builder.build(std::move(users), 1, used);
    return tree;
}

std::optional<ItemIndex> dt_next_item(const DecisionTree& tree, std::span<const AskOutcome> path) {
    const DecisionTreeNode* node = tree.root.get();
    for (const auto& step : path) {
        if (!node || node->is_leaf()) return std::nullopt;
        node = node->child(classify(step.response, tree.dataset_mean));
    }
    if (!node || node->is_leaf()) return std::nullopt;
    return node->item;
}

}  // namespace alrec
