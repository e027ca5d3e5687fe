#include "eals/ingest.hpp"

#include "eals/error.hpp"

#include <charconv>
#include <fstream>
#include <queue>
#include <string_view>
#include <unordered_map>
#include <unordered_set>

namespace eals {

namespace {

char separator(TextFormat format) { return format == TextFormat::csv ? ',' : '\t'; }

std::string_view trim(std::string_view s) {
    while (!s.empty() && (s.front() == ' ' || s.front() == '\r')) s.remove_prefix(1);
    while (!s.empty() && (s.back() == ' ' || s.back() == '\r')) s.remove_suffix(1);
    return s;
}

}  // namespace

TextFormat parse_text_format(const std::string& name) {
    if (name == "tsv") return TextFormat::tsv;
    if (name == "csv") return TextFormat::csv;
    throw InvalidInput("unknown format '" + name + "' (expected tsv or csv)");
}

RawInteractions read_interactions(std::istream& in, TextFormat format) {
    const char sep = separator(format);
    RawInteractions out;
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        std::string_view rest = trim(line);
        if (rest.empty() || rest.front() == '#') continue;

        std::string_view fields[3];
        int found = 0;
        while (found < 3) {
            auto pos = rest.find(sep);
            fields[found++] = trim(rest.substr(0, pos));
            if (pos == std::string_view::npos) {
                rest = {};
                break;
            }
            rest.remove_prefix(pos + 1);
        }
        if (found < 3) {
            throw ParseError(lineno, "expected user, item and timestamp fields");
        }
        if (fields[0].empty() || fields[1].empty()) {
            throw ParseError(lineno, "empty user or item key");
        }
        std::int64_t ts = 0;
        auto ts_field = fields[2];
        auto [ptr, ec] = std::from_chars(ts_field.data(), ts_field.data() + ts_field.size(), ts);
        if (ec != std::errc() || ptr != ts_field.data() + ts_field.size()) {
            throw ParseError(lineno, "timestamp '" + std::string(ts_field) + "' is not an integer");
        }
        out.push_back({std::string(fields[0]), std::string(fields[1]), ts});
    }
    if (in.bad()) throw IoError("read failure");
    return out;
}

RawInteractions load_interactions(const std::filesystem::path& path, TextFormat format) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open " + path.string());
    return read_interactions(in, format);
}

void write_interactions(std::ostream& out, const RawInteractions& raw, TextFormat format) {
    const char sep = separator(format);
    for (const auto& r : raw) {
        out << r.user << sep << r.item << sep << r.timestamp << '\n';
    }
}

RawInteractions kcore_filter(const RawInteractions& raw, int threshold) {
    if (threshold < 1) throw InvalidInput("k-core threshold must be >= 1");

    std::unordered_map<std::string_view, std::uint32_t> user_ids, item_ids;
    std::vector<std::uint32_t> rec_user(raw.size()), rec_item(raw.size());
    for (std::size_t r = 0; r < raw.size(); ++r) {
        rec_user[r] = user_ids.try_emplace(raw[r].user, user_ids.size()).first->second;
        rec_item[r] = item_ids.try_emplace(raw[r].item, item_ids.size()).first->second;
    }

    // Distinct pairs as adjacency lists.
    std::vector<std::vector<std::uint32_t>> user_adj(user_ids.size()), item_adj(item_ids.size());
    std::unordered_set<std::uint64_t> seen;
    for (std::size_t r = 0; r < raw.size(); ++r) {
        auto key = (std::uint64_t{rec_user[r]} << 32) | rec_item[r];
        if (seen.insert(key).second) {
            user_adj[rec_user[r]].push_back(rec_item[r]);
            item_adj[rec_item[r]].push_back(rec_user[r]);
        }
    }

    std::vector<std::size_t> user_deg(user_adj.size()), item_deg(item_adj.size());
    std::vector<char> user_alive(user_adj.size(), 1), item_alive(item_adj.size(), 1);
    // Queue entries: (is_item, id).
    std::queue<std::pair<bool, std::uint32_t>> doomed;
    const auto k = static_cast<std::size_t>(threshold);
    for (std::uint32_t u = 0; u < user_adj.size(); ++u) {
        user_deg[u] = user_adj[u].size();
        if (user_deg[u] < k) {
            user_alive[u] = 0;
            doomed.emplace(false, u);
        }
    }
    for (std::uint32_t i = 0; i < item_adj.size(); ++i) {
        item_deg[i] = item_adj[i].size();
        if (item_deg[i] < k) {
            item_alive[i] = 0;
            doomed.emplace(true, i);
        }
    }
    while (!doomed.empty()) {
        auto [is_item, id] = doomed.front();
        doomed.pop();
        if (is_item) {
            for (auto u : item_adj[id]) {
                if (user_alive[u] && --user_deg[u] < k) {
                    user_alive[u] = 0;
                    doomed.emplace(false, u);
                }
            }
        } else {
            for (auto i : user_adj[id]) {
                if (item_alive[i] && --item_deg[i] < k) {
                    item_alive[i] = 0;
                    doomed.emplace(true, i);
                }
            }
        }
    }

    RawInteractions out;
    for (std::size_t r = 0; r < raw.size(); ++r) {
        if (user_alive[rec_user[r]] && item_alive[rec_item[r]]) out.push_back(raw[r]);
    }
    return out;
}

}  // namespace eals
