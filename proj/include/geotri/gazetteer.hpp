#pragma once

#include <cstddef>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "geotri/geo.hpp"

namespace geotri {

struct GazetteerEntry {
  std::string name;
  std::vector<std::string> alt_names;
  double lat = 0.0;
  double lon = 0.0;
};

// Lowercase, strip ASCII punctuation, collapse runs of whitespace to one
// space and trim. Both queries and gazetteer names go through this before
// any comparison.
std::string normalize_name(std::string_view name);

// Edit distance with unit-cost insertion, deletion and substitution,
// computed over bytes.
std::size_t levenshtein(std::string_view a, std::string_view b);

inline constexpr std::size_t kDefaultMaxEdit = 1;

// Immutable after construction; all lookups are const and thread-safe.
class Gazetteer {
 public:
  // Throws InvalidArgument if an entry has an empty name or out-of-range
  // coordinates.
  explicit Gazetteer(std::vector<GazetteerEntry> entries, std::size_t skipped_rows = 0);

  const std::vector<GazetteerEntry>& entries() const noexcept { return entries_; }
  std::size_t size() const noexcept { return entries_.size(); }
  std::size_t skipped_rows() const noexcept { return skipped_rows_; }

  // normalized name -> entry positions (canonical and alternate names)
  const std::map<std::string, std::vector<std::size_t>>& name_index() const noexcept {
    return index_;
  }

  // Closest entry by edit distance on normalized names; ties go to the
  // lexicographically smaller canonical name. Empty when the best distance
  // exceeds max_edit.
  std::optional<Poi> geocode(std::string_view name, std::size_t max_edit = kDefaultMaxEdit) const;

 private:
  std::vector<GazetteerEntry> entries_;
  std::map<std::string, std::vector<std::size_t>> index_;
  std::size_t skipped_rows_ = 0;
};

// Reads `name<TAB>alt_names<TAB>lat<TAB>lon` rows. Rows with the wrong
// column count, unparsable or out-of-range coordinates, or an empty name are
// skipped and counted. Lines starting with '#' and blank lines are ignored.
Gazetteer load_gazetteer(const std::filesystem::path& path);

// Same, from in-memory text; `source` is only used in messages.
Gazetteer parse_gazetteer(std::string_view text, const std::string& source = "<memory>");

inline std::optional<Poi> geocode(std::string_view name, const Gazetteer& g,
                                  std::size_t max_edit = kDefaultMaxEdit) {
  return g.geocode(name, max_edit);
}

}  // namespace geotri
