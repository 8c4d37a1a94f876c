#include "alrec/data.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <numeric>

#include "alrec/errors.hpp"
#include "alrec/rng.hpp"

namespace alrec {

namespace {

auto lower(std::vector<Entry>& v, std::uint32_t index) {
    return std::lower_bound(v.begin(), v.end(), index,
                            [](const Entry& e, std::uint32_t k) { return e.index < k; });
}

auto lower(const std::vector<Entry>& v, std::uint32_t index) {
    return std::lower_bound(v.begin(), v.end(), index,
                            [](const Entry& e, std::uint32_t k) { return e.index < k; });
}

// Returns true when a new entry was created.
bool upsert(std::vector<Entry>& v, std::uint32_t index, double value) {
    auto it = lower(v, index);
    if (it != v.end() && it->index == index) {
        it->value = value;
        return false;
    }
    v.insert(it, Entry{index, value});
    return true;
}

bool erase(std::vector<Entry>& v, std::uint32_t index) {
    auto it = lower(v, index);
    if (it == v.end() || it->index != index) return false;
    v.erase(it);
    return true;
}

}  // namespace

RatingScale::RatingScale(double lo, double hi) : min(lo), max(hi) {
    if (!(lo < hi) || !std::isfinite(lo) || !std::isfinite(hi)) {
        throw ValidationError("rating scale requires finite min < max");
    }
}

double RatingScale::clamp(double r) const noexcept { return std::clamp(r, min, max); }

UserIndex RatingMatrix::add_user(std::string_view id) {
    std::string key(id);
    if (auto it = user_lookup_.find(key); it != user_lookup_.end()) return it->second;
    const auto idx = static_cast<UserIndex>(user_ids_.size());
    user_lookup_.emplace(key, idx);
    user_ids_.push_back(std::move(key));
    by_user_.emplace_back();
    return idx;
}

ItemIndex RatingMatrix::add_item(std::string_view id) {
    std::string key(id);
    if (auto it = item_lookup_.find(key); it != item_lookup_.end()) return it->second;
    const auto idx = static_cast<ItemIndex>(item_ids_.size());
    item_lookup_.emplace(key, idx);
    item_ids_.push_back(std::move(key));
    by_item_.emplace_back();
    return idx;
}

std::optional<UserIndex> RatingMatrix::find_user(std::string_view id) const {
    auto it = user_lookup_.find(std::string(id));
    if (it == user_lookup_.end()) return std::nullopt;
    return it->second;
}

std::optional<ItemIndex> RatingMatrix::find_item(std::string_view id) const {
    auto it = item_lookup_.find(std::string(id));
    if (it == item_lookup_.end()) return std::nullopt;
    return it->second;
}

void RatingMatrix::set(UserIndex u, ItemIndex i, double value) {
    if (u >= user_count() || i >= item_count()) {
        throw ValidationError("rating for unregistered user or item index");
    }
    if (!scale_.contains(value)) {
        throw ValidationError("rating " + std::to_string(value) + " outside scale [" +
                              std::to_string(scale_.min) + ", " + std::to_string(scale_.max) + "]");
    }
    if (upsert(by_user_[u], i, value)) ++entries_;
    upsert(by_item_[i], u, value);
}

void RatingMatrix::set(std::string_view user, std::string_view item, double value) {
    if (!scale_.contains(value)) {
        throw ValidationError("rating " + std::to_string(value) + " outside scale");
    }
    const auto u = add_user(user);
    const auto i = add_item(item);
    set(u, i, value);
}

bool RatingMatrix::remove(UserIndex u, ItemIndex i) {
    if (u >= user_count() || i >= item_count()) return false;
    if (!erase(by_user_[u], i)) return false;
    erase(by_item_[i], u);
    --entries_;
    return true;
}

std::optional<double> RatingMatrix::rating(UserIndex u, ItemIndex i) const {
    if (u >= user_count()) return std::nullopt;
    const auto& row = by_user_[u];
    auto it = lower(row, i);
    if (it == row.end() || it->index != i) return std::nullopt;
    return it->value;
}

std::optional<double> RatingMatrix::user_mean(UserIndex u) const {
    const auto& row = by_user_.at(u);
    if (row.empty()) return std::nullopt;
    double sum = 0.0;
    for (const auto& e : row) sum += e.value;
    return sum / static_cast<double>(row.size());
}

RatingMatrix RatingMatrix::subset_users(std::span<const UserIndex> users) const {
    RatingMatrix out(scale_);
    for (const auto& id : item_ids_) out.add_item(id);
    for (UserIndex u : users) {
        const auto nu = out.add_user(user_ids_.at(u));
        for (const auto& e : by_user_[u]) out.set(nu, e.index, e.value);
    }
    return out;
}

RatingMatrix RatingMatrix::subset_items(std::span<const ItemIndex> items) const {
    RatingMatrix out(scale_);
    for (const auto& id : user_ids_) out.add_user(id);
    for (ItemIndex i : items) {
        const auto ni = out.add_item(item_ids_.at(i));
        for (const auto& e : by_item_.at(i)) out.set(e.index, ni, e.value);
    }
    return out;
}

std::uint64_t RatingMatrix::checksum() const {
    std::uint64_t h = 0xcbf29ce484222325ULL;
    auto feed = [&h](const void* data, std::size_t n) {
        const auto* p = static_cast<const unsigned char*>(data);
        for (std::size_t k = 0; k < n; ++k) {
            h ^= p[k];
            h *= 0x100000001b3ULL;
        }
    };
    for (UserIndex u = 0; u < user_count(); ++u) {
        for (const auto& e : by_user_[u]) {
            feed(user_ids_[u].data(), user_ids_[u].size());
            feed("\x1f", 1);
            feed(item_ids_[e.index].data(), item_ids_[e.index].size());
            const auto bits = std::bit_cast<std::uint64_t>(e.value);
            feed(&bits, sizeof bits);
        }
    }
    return h;
}

HoldoutSplit holdout_user(const RatingMatrix& matrix, UserIndex user, std::uint64_t rng_seed) {
    if (user >= matrix.user_count()) {
        throw IneligibleUserError("unknown user index " + std::to_string(user));
    }
    const auto row = matrix.user_row(user);
    if (row.size() < 2) {
        throw IneligibleUserError("user " + matrix.user_id(user) + " has " +
                                  std::to_string(row.size()) + " rating(s), need at least 2");
    }
    Rng rng(rng_seed);
    const auto keep = rng.below(row.size());

    HoldoutSplit split;
    split.user = user;
    split.seed_item = row[keep].index;
    for (std::size_t k = 0; k < row.size(); ++k) {
        if (k != keep) split.control.emplace(row[k].index, row[k].value);
    }
    split.training = matrix;
    for (const auto& [item, value] : split.control) split.training.remove(user, item);
    return split;
}

RatingMatrix binarize(const RatingMatrix& matrix) {
    RatingMatrix out(RatingScale::binary());
    for (UserIndex u = 0; u < matrix.user_count(); ++u) out.add_user(matrix.user_id(u));
    for (ItemIndex i = 0; i < matrix.item_count(); ++i) out.add_item(matrix.item_id(i));
    for (UserIndex u = 0; u < matrix.user_count(); ++u) {
        const auto row = matrix.user_row(u);
        auto it = row.begin();
        for (ItemIndex i = 0; i < matrix.item_count(); ++i) {
            const bool rated = it != row.end() && it->index == i;
            if (rated) ++it;
            out.set(u, i, rated ? 1.0 : 0.0);
        }
    }
    return out;
}

double global_mean(const RatingMatrix& matrix) {
    if (matrix.empty()) throw UndefinedMetricError("global mean of an empty rating matrix");
    double sum = 0.0;
    for (UserIndex u = 0; u < matrix.user_count(); ++u) {
        for (const auto& e : matrix.user_row(u)) sum += e.value;
    }
    return sum / static_cast<double>(matrix.entry_count());
}

std::vector<UserIndex> users_by_density(const RatingMatrix& matrix) {
    std::vector<UserIndex> users(matrix.user_count());
    std::iota(users.begin(), users.end(), UserIndex{0});
    std::stable_sort(users.begin(), users.end(), [&](UserIndex a, UserIndex b) {
        return matrix.user_row(a).size() > matrix.user_row(b).size();
    });
    return users;
}

}  // namespace alrec
