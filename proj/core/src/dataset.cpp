#include "eals/dataset.hpp"

#include "eals/error.hpp"

#include <algorithm>
#include <istream>
#include <ostream>
#include <sstream>

namespace eals {

std::uint32_t IdMap::intern(const std::string& key) {
    auto [it, inserted] = lookup_.try_emplace(key, static_cast<std::uint32_t>(keys_.size()));
    if (inserted) keys_.push_back(key);
    return it->second;
}

std::optional<std::uint32_t> IdMap::find(const std::string& key) const {
    auto it = lookup_.find(key);
    if (it == lookup_.end()) return std::nullopt;
    return it->second;
}

IdMap IdMap::numbered(std::size_t n) {
    IdMap map;
    for (std::size_t k = 0; k < n; ++k) map.intern(std::to_string(k));
    return map;
}

namespace {

bool by_id(const IndexEntry& a, const IndexEntry& b) { return a.id < b.id; }

}  // namespace

InteractionDataset::InteractionDataset(std::size_t num_users, std::size_t num_items,
                                       std::vector<Interaction> cells, IdMap users, IdMap items)
    : user_index_(num_users), item_index_(num_items), users_(std::move(users)), items_(std::move(items)) {
    if (users_.size() != num_users || items_.size() != num_items) {
        throw InvalidInput("id map size does not match dataset dimensions");
    }
    for (const auto& c : cells) {
        if (c.user >= num_users || c.item >= num_items) {
            throw InvalidInput("interaction id out of range");
        }
    }
    // User-major slot order keeps the user phase of a sweep sequential in memory.
    std::sort(cells.begin(), cells.end(), [](const Interaction& a, const Interaction& b) {
        return a.user != b.user ? a.user < b.user : a.item < b.item;
    });
    const auto n = cells.size();
    slot_user_.reserve(n);
    slot_item_.reserve(n);
    rating_.reserve(n);
    weight_.reserve(n);
    timestamp_.reserve(n);
    sequence_.reserve(n);
    for (std::size_t s = 0; s < n; ++s) {
        const auto& c = cells[s];
        if (s > 0 && cells[s - 1].user == c.user && cells[s - 1].item == c.item) {
            throw InvalidInput("duplicate (user, item) cell");
        }
        slot_user_.push_back(c.user);
        slot_item_.push_back(c.item);
        rating_.push_back(c.rating);
        weight_.push_back(c.weight);
        timestamp_.push_back(c.timestamp);
        sequence_.push_back(c.sequence);
        user_index_[c.user].push_back({c.item, static_cast<Slot>(s)});
        item_index_[c.item].push_back({c.user, static_cast<Slot>(s)});
    }
}

Interaction InteractionDataset::cell(Slot s) const {
    return {slot_user_.at(s), slot_item_[s], timestamp_[s], sequence_[s], rating_[s], weight_[s]};
}

std::optional<Slot> InteractionDataset::find(UserIndex u, ItemIndex i) const {
    if (u >= num_users() || i >= num_items()) return std::nullopt;
    const auto& row = user_index_[u];
    auto it = std::lower_bound(row.begin(), row.end(), IndexEntry{i, 0}, by_id);
    if (it == row.end() || it->id != i) return std::nullopt;
    return it->slot;
}

UserIndex InteractionDataset::add_user(const std::string& key) {
    const auto id = users_.intern(key);
    if (id != user_index_.size()) throw InvalidInput("user key '" + key + "' already present");
    user_index_.emplace_back();
    return id;
}

ItemIndex InteractionDataset::add_item(const std::string& key) {
    const auto id = items_.intern(key);
    if (id != item_index_.size()) throw InvalidInput("item key '" + key + "' already present");
    item_index_.emplace_back();
    return id;
}

Slot InteractionDataset::insert(const Interaction& c) {
    if (c.user >= num_users() || c.item >= num_items()) {
        throw InvalidInput("interaction id out of range");
    }
    auto& urow = user_index_[c.user];
    auto uit = std::lower_bound(urow.begin(), urow.end(), IndexEntry{c.item, 0}, by_id);
    if (uit != urow.end() && uit->id == c.item) throw InvalidInput("cell already observed");

    const auto s = static_cast<Slot>(slot_user_.size());
    slot_user_.push_back(c.user);
    slot_item_.push_back(c.item);
    rating_.push_back(c.rating);
    weight_.push_back(c.weight);
    timestamp_.push_back(c.timestamp);
    sequence_.push_back(c.sequence);
    urow.insert(uit, IndexEntry{c.item, s});
    auto& irow = item_index_[c.item];
    irow.insert(std::lower_bound(irow.begin(), irow.end(), IndexEntry{c.user, 0}, by_id),
                IndexEntry{c.user, s});
    return s;
}

std::vector<Interaction> InteractionDataset::cells_in_input_order() const {
    std::vector<Interaction> out;
    out.reserve(nnz());
    for (Slot s = 0; s < nnz(); ++s) out.push_back(cell(s));
    std::stable_sort(out.begin(), out.end(),
                     [](const Interaction& a, const Interaction& b) { return a.sequence < b.sequence; });
    return out;
}

bool InteractionDataset::check_transpose() const {
    std::vector<char> seen_u(nnz(), 0), seen_i(nnz(), 0);
    for (UserIndex u = 0; u < num_users(); ++u) {
        const auto& row = user_index_[u];
        for (std::size_t k = 0; k < row.size(); ++k) {
            const auto s = row[k].slot;
            if (s >= nnz() || seen_u[s] || slot_user_[s] != u || slot_item_[s] != row[k].id) return false;
            if (k > 0 && row[k - 1].id >= row[k].id) return false;
            seen_u[s] = 1;
        }
    }
    for (ItemIndex i = 0; i < num_items(); ++i) {
        const auto& row = item_index_[i];
        for (std::size_t k = 0; k < row.size(); ++k) {
            const auto s = row[k].slot;
            if (s >= nnz() || seen_i[s] || slot_item_[s] != i || slot_user_[s] != row[k].id) return false;
            if (k > 0 && row[k - 1].id >= row[k].id) return false;
            seen_i[s] = 1;
        }
    }
    return std::all_of(seen_u.begin(), seen_u.end(), [](char c) { return c != 0; }) &&
           std::all_of(seen_i.begin(), seen_i.end(), [](char c) { return c != 0; });
}

InteractionDataset build_dataset(const RawInteractions& raw) {
    IdMap users, items;
    std::vector<Interaction> cells;
    std::unordered_map<std::uint64_t, std::size_t> cell_of;
    for (std::size_t r = 0; r < raw.size(); ++r) {
        const auto u = users.intern(raw[r].user);
        const auto i = items.intern(raw[r].item);
        const auto key = (std::uint64_t{u} << 32) | i;
        auto [it, fresh] = cell_of.try_emplace(key, cells.size());
        if (fresh) {
            cells.push_back({u, i, raw[r].timestamp, r});
        } else if (raw[r].timestamp >= cells[it->second].timestamp) {
            cells[it->second].timestamp = raw[r].timestamp;
            cells[it->second].sequence = r;
        }
    }
    // Dense input ranks: gaps left by collapsed repeats carry no meaning.
    std::vector<std::size_t> order(cells.size());
    for (std::size_t k = 0; k < order.size(); ++k) order[k] = k;
    std::sort(order.begin(), order.end(),
              [&](std::size_t a, std::size_t b) { return cells[a].sequence < cells[b].sequence; });
    for (std::size_t rank = 0; rank < order.size(); ++rank) cells[order[rank]].sequence = rank;

    const auto m = users.size(), n = items.size();
    InteractionDataset data(m, n, std::move(cells), std::move(users), std::move(items));
    if (!data.check_transpose()) throw std::logic_error("index transpose mismatch after build");
    return data;
}

void write_dataset_snapshot(std::ostream& out, const InteractionDataset& data) {
    out << data.num_users() << ' ' << data.num_items() << ' ' << data.nnz() << '\n';
    for (const auto& c : data.cells_in_input_order()) {
        out << c.user << ' ' << c.item << ' ' << c.timestamp << '\n';
    }
}

InteractionDataset read_dataset_snapshot(std::istream& in) {
    std::string line;
    std::size_t lineno = 0;
    auto next_line = [&]() -> bool {
        while (std::getline(in, line)) {
            ++lineno;
            if (!line.empty() && line.front() != '#') return true;
        }
        return false;
    };
    if (!next_line()) throw ParseError(1, "missing 'M N nnz' header");
    std::size_t m = 0, n = 0, nnz = 0;
    {
        std::istringstream hdr(line);
        if (!(hdr >> m >> n >> nnz)) throw ParseError(lineno, "malformed 'M N nnz' header");
    }
    std::vector<Interaction> cells;
    cells.reserve(nnz);
    for (std::size_t k = 0; k < nnz; ++k) {
        if (!next_line()) throw ParseError(lineno + 1, "snapshot truncated");
        std::istringstream row(line);
        std::uint64_t u = 0, i = 0;
        std::int64_t t = 0;
        if (!(row >> u >> i >> t)) throw ParseError(lineno, "expected 'u i t'");
        if (u >= m || i >= n) throw ParseError(lineno, "id out of range");
        cells.push_back({static_cast<UserIndex>(u), static_cast<ItemIndex>(i), t, k});
    }
    try {
        return InteractionDataset(m, n, std::move(cells), IdMap::numbered(m), IdMap::numbered(n));
    } catch (const InvalidInput& e) {
        throw ParseError(lineno, e.what());
    }
}

}  // namespace eals
