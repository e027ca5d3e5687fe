#pragma once

#include "eals/ingest.hpp"

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <unordered_map>
#include <vector>

namespace eals {

using UserIndex = std::uint32_t;
using ItemIndex = std::uint32_t;
/// Stable handle of an observed entry; never reused or renumbered.
using Slot = std::uint32_t;

/// Bidirectional opaque-key <-> dense-id table.
class IdMap {
public:
    /// Returns the id of `key`, assigning the next dense id if unseen.
    std::uint32_t intern(const std::string& key);
    std::optional<std::uint32_t> find(const std::string& key) const;
    const std::string& key(std::uint32_t id) const { return keys_.at(id); }
    std::size_t size() const noexcept { return keys_.size(); }
    const std::vector<std::string>& keys() const noexcept { return keys_; }

    /// Map whose key for id n is the decimal string of n.
    static IdMap numbered(std::size_t n);

private:
    std::vector<std::string> keys_;
    std::unordered_map<std::string, std::uint32_t> lookup_;
};

/// Row entry of either index: the partner id and the slot holding the values.
struct IndexEntry {
    std::uint32_t id;
    Slot slot;
};

/// One observed cell, as handed to the dataset builder.
struct Interaction {
    UserIndex user;
    ItemIndex item;
    std::int64_t timestamp = 0;
    /// Position in the original input; tie-breaker for all time orderings.
    std::uint64_t sequence = 0;
    double rating = 1.0;
    double weight = 1.0;
};

/**
 * Dual-indexed sparse user-item matrix.
 *
 * Values live in slot arrays; `user_row(u)` lists (item, slot) sorted by item
 * and `item_row(i)` lists (user, slot) sorted by user, so both views share the
 * same cells. Slots are assigned user-major at construction and appended on
 * insert.
 */
class InteractionDataset {
public:
    InteractionDataset() = default;

    /// Builds from distinct (user, item) cells. Throws InvalidInput on an
    /// out-of-range id or a duplicated cell.
    InteractionDataset(std::size_t num_users, std::size_t num_items,
                       std::vector<Interaction> cells, IdMap users, IdMap items);

    std::size_t num_users() const noexcept { return user_index_.size(); }
    std::size_t num_items() const noexcept { return item_index_.size(); }
    std::size_t nnz() const noexcept { return slot_user_.size(); }

    std::span<const IndexEntry> user_row(UserIndex u) const { return user_index_.at(u); }
    std::span<const IndexEntry> item_row(ItemIndex i) const { return item_index_.at(i); }

    UserIndex user_of(Slot s) const { return slot_user_[s]; }
    ItemIndex item_of(Slot s) const { return slot_item_[s]; }
    double rating(Slot s) const { return rating_[s]; }
    double weight(Slot s) const { return weight_[s]; }
    std::int64_t timestamp(Slot s) const { return timestamp_[s]; }
    std::uint64_t sequence(Slot s) const { return sequence_[s]; }
    Interaction cell(Slot s) const;

    void set_weight(Slot s, double w) { weight_.at(s) = w; }
    void set_timestamp(Slot s, std::int64_t t) { timestamp_.at(s) = t; }

    std::optional<Slot> find(UserIndex u, ItemIndex i) const;

    /// Appends an empty row and returns its id.
    UserIndex add_user(const std::string& key);
    ItemIndex add_item(const std::string& key);

    /// Inserts a new cell; throws InvalidInput if (u, i) is already present.
    Slot insert(const Interaction& cell);

    const IdMap& users() const noexcept { return users_; }
    const IdMap& items() const noexcept { return items_; }

    /// All cells ordered by (sequence, slot).
    std::vector<Interaction> cells_in_input_order() const;

    /// True when both indexes hold exactly the same (user, item, slot) set
    /// and every row is strictly sorted.
    bool check_transpose() const;

private:
    std::vector<std::vector<IndexEntry>> user_index_;
    std::vector<std::vector<IndexEntry>> item_index_;
    std::vector<UserIndex> slot_user_;
    std::vector<ItemIndex> slot_item_;
    std::vector<double> rating_;
    std::vector<double> weight_;
    std::vector<std::int64_t> timestamp_;
    std::vector<std::uint64_t> sequence_;
    IdMap users_;
    IdMap items_;
};

/**
 * Dense ids in first-appearance order; repeated pairs collapse to one cell
 * keeping the latest timestamp (later input wins ties). Every cell gets
 * r = 1 and w = 1.
 */
InteractionDataset build_dataset(const RawInteractions& raw);

/// Held-out interaction. Ids at or beyond the train dimensions are users or
/// items that never appear in training.
struct TestEvent {
    UserIndex user;
    ItemIndex item;
    std::int64_t timestamp;
    bool new_user = false;
    bool new_item = false;

    friend bool operator==(const TestEvent&, const TestEvent&) = default;
};

struct SplitPair {
    InteractionDataset train;
    std::vector<TestEvent> test;
    /// Key tables covering train ids followed by test-only ids.
    IdMap users;
    IdMap items;
};

/// Holds out each user's latest interaction (largest input position on ties).
/// Throws InvalidInput if some user has no interaction.
SplitPair split_leave_one_out(const InteractionDataset& data);

/// Sorts by (timestamp, input order); the first ceil((1 - f) * nnz) cells
/// train, the rest form the chronological test stream.
SplitPair split_chronological(const InteractionDataset& data, double test_fraction = 0.1);

/// Dataset snapshot: `M N nnz` header, then `u i t` per cell in input order.
void write_dataset_snapshot(std::ostream& out, const InteractionDataset& data);
InteractionDataset read_dataset_snapshot(std::istream& in);

}  // namespace eals
