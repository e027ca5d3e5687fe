#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <string>
#include <vector>

namespace eals {

/// One line of a raw interaction log. Keys are opaque.
struct RawRecord {
    std::string user;
    std::string item;
    std::int64_t timestamp = 0;

    friend bool operator==(const RawRecord&, const RawRecord&) = default;
};

/// Records in file order. Repeated (user, item) pairs are kept.
using RawInteractions = std::vector<RawRecord>;

enum class TextFormat { tsv, csv };

TextFormat parse_text_format(const std::string& name);

/**
 * Reads `user<sep>item<sep>timestamp` lines. Extra columns are ignored,
 * blank lines and lines starting with `#` are skipped.
 *
 * Throws IoError if the file cannot be opened and ParseError (carrying the
 * 1-based line number) for a line with fewer than three fields or a
 * timestamp that is not an integer.
 */
RawInteractions load_interactions(const std::filesystem::path& path, TextFormat format);
RawInteractions read_interactions(std::istream& in, TextFormat format);

void write_interactions(std::ostream& out, const RawInteractions& raw, TextFormat format);

/**
 * Iteratively drops users and items with fewer than `threshold` distinct
 * partners until every survivor meets the threshold. Surviving records keep
 * their input order, repeats included.
 */
RawInteractions kcore_filter(const RawInteractions& raw, int threshold);

}  // namespace eals
