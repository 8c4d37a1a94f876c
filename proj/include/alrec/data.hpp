#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

namespace alrec {

using UserIndex = std::uint32_t;
using ItemIndex = std::uint32_t;

struct RatingScale {
    double min = 0.0;
    double max = 1.0;

    RatingScale() = default;
    /// Throws ValidationError unless min < max.
    RatingScale(double lo, double hi);

    double midpoint() const noexcept { return 0.5 * (min + max); }
    bool contains(double r) const noexcept { return r >= min && r <= max; }
    double clamp(double r) const noexcept;

    bool operator==(const RatingScale&) const = default;

    static RatingScale jester() { return {-10.0, 10.0}; }
    static RatingScale bookcrossing() { return {1.0, 10.0}; }
    static RatingScale binary() { return {0.0, 1.0}; }
};

/// One stored rating, seen from either side: `index` is the item in a user
/// row and the user in an item column.
struct Entry {
    std::uint32_t index;
    double value;
};

/// Sparse user x item rating store. Identifiers are opaque strings mapped to
/// dense indices in order of first appearance. Rows and columns are kept
/// sorted by index, so lookups are binary searches and intersections merges.
class RatingMatrix {
public:
    RatingMatrix() = default;
    explicit RatingMatrix(RatingScale scale) : scale_(scale) {}

    const RatingScale& scale() const noexcept { return scale_; }

    std::size_t user_count() const noexcept { return user_ids_.size(); }
    std::size_t item_count() const noexcept { return item_ids_.size(); }
    std::size_t entry_count() const noexcept { return entries_; }
    bool empty() const noexcept { return entries_ == 0; }

    /// Index of the identifier, registering it if new.
    UserIndex add_user(std::string_view id);
    ItemIndex add_item(std::string_view id);

    std::optional<UserIndex> find_user(std::string_view id) const;
    std::optional<ItemIndex> find_item(std::string_view id) const;
    const std::string& user_id(UserIndex u) const { return user_ids_.at(u); }
    const std::string& item_id(ItemIndex i) const { return item_ids_.at(i); }

    /// Insert or overwrite. Throws ValidationError when outside the scale.
    void set(UserIndex u, ItemIndex i, double value);
    void set(std::string_view user, std::string_view item, double value);
    /// Returns whether an entry was removed.
    bool remove(UserIndex u, ItemIndex i);

    std::optional<double> rating(UserIndex u, ItemIndex i) const;
    bool has(UserIndex u, ItemIndex i) const { return rating(u, i).has_value(); }

    std::span<const Entry> user_row(UserIndex u) const { return by_user_.at(u); }
    std::span<const Entry> item_column(ItemIndex i) const { return by_item_.at(i); }

    /// Mean of a user's ratings, nullopt when the row is empty.
    std::optional<double> user_mean(UserIndex u) const;

    /// Users (and their rows) listed in `users`, keeping every item so item
    /// indices stay aligned with this matrix.
    RatingMatrix subset_users(std::span<const UserIndex> users) const;
    /// Items listed in `items`, keeping every user.
    RatingMatrix subset_items(std::span<const ItemIndex> items) const;

    /// 64-bit FNV-1a over (user id, item id, value) in index order.
    std::uint64_t checksum() const;

private:
    RatingScale scale_{};
    std::vector<std::string> user_ids_;
    std::vector<std::string> item_ids_;
    std::unordered_map<std::string, UserIndex> user_lookup_;
    std::unordered_map<std::string, ItemIndex> item_lookup_;
    std::vector<std::vector<Entry>> by_user_;
    std::vector<std::vector<Entry>> by_item_;
    std::size_t entries_ = 0;
};

/// Counters from ingestion, for reporting what the loader dropped.
struct IngestStats {
    std::size_t rows = 0;
    std::size_t users_seen = 0;
    std::size_t skipped = 0;
};

/// Comma-separated `user,item,rating` with the Jester scale. The raw dump's
/// missing marker 99 is skipped.
RatingMatrix load_jester(const std::filesystem::path& path, IngestStats* stats = nullptr);

/// Native BookCrossing `"User-ID";"ISBN";"Book-Rating"` with header. Rating 0
/// (implicit feedback) rows are dropped; `stats->users_seen` counts users
/// before that filter.
RatingMatrix load_bookcrossing(const std::filesystem::path& path, IngestStats* stats = nullptr);

/// A held-out user: all but one of their ratings moved from `training` to
/// `control`.
struct HoldoutSplit {
    RatingMatrix training;
    UserIndex user = 0;
    ItemIndex seed_item = 0;
    std::map<ItemIndex, double> control;
};

/// The kept rating is drawn uniformly with the given seed. Throws
/// IneligibleUserError for an unknown user or one with fewer than 2 ratings.
HoldoutSplit holdout_user(const RatingMatrix& matrix, UserIndex user, std::uint64_t rng_seed);

/// Dense 0/1 matrix: 1 where `matrix` has a rating. Same users and items.
RatingMatrix binarize(const RatingMatrix& matrix);

/// Throws UndefinedMetricError on an empty matrix.
double global_mean(const RatingMatrix& matrix);

/// Users ordered by descending rating count, ties by ascending index.
std::vector<UserIndex> users_by_density(const RatingMatrix& matrix);

}  // namespace alrec
