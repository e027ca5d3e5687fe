#include "eals/dataset.hpp"

#include "eals/error.hpp"

#include <algorithm>
#include <cmath>

namespace eals {

SplitPair split_leave_one_out(const InteractionDataset& data) {
    std::vector<Interaction> train_cells;
    train_cells.reserve(data.nnz());
    SplitPair out;
    out.test.reserve(data.num_users());
    for (UserIndex u = 0; u < data.num_users(); ++u) {
        const auto row = data.user_row(u);
        if (row.empty()) throw InvalidInput("user " + data.users().key(u) + " has no interaction");
        auto latest = row.front().slot;
        for (const auto& e : row) {
            const auto t = data.timestamp(e.slot), best = data.timestamp(latest);
            if (t > best || (t == best && data.sequence(e.slot) > data.sequence(latest))) latest = e.slot;
        }
        for (const auto& e : row) {
            if (e.slot != latest) train_cells.push_back(data.cell(e.slot));
        }
        out.test.push_back({u, data.item_of(latest), data.timestamp(latest)});
    }
    out.users = data.users();
    out.items = data.items();
    out.train = InteractionDataset(data.num_users(), data.num_items(), std::move(train_cells), data.users(),
                                   data.items());
    return out;
}

SplitPair split_chronological(const InteractionDataset& data, double test_fraction) {
    if (!(test_fraction > 0.0 && test_fraction < 1.0)) {
        throw InvalidInput("test fraction must lie in (0, 1)");
    }
    std::vector<Interaction> cells;
    cells.reserve(data.nnz());
    for (Slot s = 0; s < data.nnz(); ++s) cells.push_back(data.cell(s));
    std::sort(cells.begin(), cells.end(), [](const Interaction& a, const Interaction& b) {
        return a.timestamp != b.timestamp ? a.timestamp < b.timestamp : a.sequence < b.sequence;
    });
    const auto n_train = std::min(
        cells.size(), static_cast<std::size_t>(std::ceil((1.0 - test_fraction) * static_cast<double>(cells.size()))));

    // Train ids keep the relative order of the source ids.
    constexpr auto none = static_cast<std::uint32_t>(-1);
    std::vector<std::uint32_t> user_map(data.num_users(), none), item_map(data.num_items(), none);
    std::vector<char> user_seen(data.num_users(), 0), item_seen(data.num_items(), 0);
    for (std::size_t k = 0; k < n_train; ++k) {
        user_seen[cells[k].user] = 1;
        item_seen[cells[k].item] = 1;
    }
    SplitPair out;
    for (UserIndex u = 0; u < data.num_users(); ++u) {
        if (user_seen[u]) user_map[u] = out.users.intern(data.users().key(u));
    }
    for (ItemIndex i = 0; i < data.num_items(); ++i) {
        if (item_seen[i]) item_map[i] = out.items.intern(data.items().key(i));
    }
    const auto m_train = out.users.size(), n_items_train = out.items.size();

    std::vector<Interaction> train_cells(cells.begin(), cells.begin() + static_cast<std::ptrdiff_t>(n_train));
    for (auto& c : train_cells) {
        c.user = user_map[c.user];
        c.item = item_map[c.item];
    }
    for (std::size_t k = n_train; k < cells.size(); ++k) {
        const auto& c = cells[k];
        if (user_map[c.user] == none) user_map[c.user] = out.users.intern(data.users().key(c.user));
        if (item_map[c.item] == none) item_map[c.item] = out.items.intern(data.items().key(c.item));
        const auto u = user_map[c.user], i = item_map[c.item];
        out.test.push_back({u, i, c.timestamp, u >= m_train, i >= n_items_train});
    }

    IdMap train_users, train_items;
    for (std::size_t u = 0; u < m_train; ++u) train_users.intern(out.users.key(static_cast<std::uint32_t>(u)));
    for (std::size_t i = 0; i < n_items_train; ++i) train_items.intern(out.items.key(static_cast<std::uint32_t>(i)));
    out.train = InteractionDataset(m_train, n_items_train, std::move(train_cells), std::move(train_users),
                                   std::move(train_items));
    return out;
}

}  // namespace eals
