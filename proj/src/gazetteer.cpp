#include "geotri/gazetteer.hpp"

#include <algorithm>
#include <cctype>
#include <numeric>

#include "geotri/error.hpp"
#include "geotri/io.hpp"

namespace geotri {

std::string normalize_name(std::string_view name) {
  std::string out;
  out.reserve(name.size());
  bool pending_space = false;
  for (unsigned char c : name) {
    // Hyphens and slashes separate words ("Saint-Denis"); other punctuation
    // is dropped ("St. Paul's" -> "st pauls").
    if (std::isspace(c) || c == '-' || c == '/') {
      pending_space = !out.empty();
      continue;
    }
    if (c < 0x80 && std::ispunct(c)) continue;
    if (pending_space) {
      out.push_back(' ');
      pending_space = false;
    }
    out.push_back(c < 0x80 ? static_cast<char>(std::tolower(c)) : static_cast<char>(c));
  }
  return out;
}

std::size_t levenshtein(std::string_view a, std::string_view b) {
  if (a.size() < b.size()) std::swap(a, b);
  std::vector<std::size_t> prev(b.size() + 1), cur(b.size() + 1);
  std::iota(prev.begin(), prev.end(), std::size_t{0});
  for (std::size_t i = 1; i <= a.size(); ++i) {
    cur[0] = i;
    for (std::size_t j = 1; j <= b.size(); ++j) {
      const std::size_t sub = prev[j - 1] + (a[i - 1] == b[j - 1] ? 0 : 1);
      cur[j] = std::min({prev[j] + 1, cur[j - 1] + 1, sub});
    }
    std::swap(prev, cur);
  }
  return prev[b.size()];
}

Gazetteer::Gazetteer(std::vector<GazetteerEntry> entries, std::size_t skipped_rows)
    : entries_(std::move(entries)), skipped_rows_(skipped_rows) {
  for (std::size_t i = 0; i < entries_.size(); ++i) {
    const auto& e = entries_[i];
    if (normalize_name(e.name).empty())
      throw InvalidArgument("gazetteer entry " + std::to_string(i) + " has an empty name");
    if (!valid_coordinates(e.lat, e.lon))
      throw InvalidArgument("gazetteer entry '" + e.name + "' has out-of-range coordinates");
    auto add = [&](const std::string& n) {
      auto key = normalize_name(n);
      if (key.empty()) return;
      auto& slot = index_[key];
      if (std::find(slot.begin(), slot.end(), i) == slot.end()) slot.push_back(i);
    };
    add(e.name);
    for (const auto& alt : e.alt_names) add(alt);
  }
}

std::optional<Poi> Gazetteer::geocode(std::string_view name, std::size_t max_edit) const {
  const auto query = normalize_name(name);
  if (query.empty()) return std::nullopt;

  const GazetteerEntry* best = nullptr;
  std::size_t best_dist = max_edit + 1;
  auto consider = [&](std::size_t dist, const std::vector<std::size_t>& ids) {
    for (auto id : ids) {
      const auto& e = entries_[id];
      if (dist < best_dist || (dist == best_dist && best && e.name < best->name)) {
        best = &e;
        best_dist = dist;
      }
    }
  };

  if (auto it = index_.find(query); it != index_.end()) {
    consider(0, it->second);
  } else {
    for (const auto& [key, ids] : index_) {
      const auto len_gap = key.size() > query.size() ? key.size() - query.size()
                                                     : query.size() - key.size();
      // The length gap is a lower bound on the edit distance.
      if (len_gap > best_dist || len_gap > max_edit) continue;
      const auto d = levenshtein(query, key);
      if (d <= max_edit) consider(d, ids);
    }
  }
  if (!best) return std::nullopt;
  return Poi{best->name, best->lat, best->lon};
}

Gazetteer parse_gazetteer(std::string_view text, const std::string& source) {
  std::vector<GazetteerEntry> entries;
  std::size_t skipped = 0;
  for (const auto& raw : io::split_lines(text)) {
    const auto line = io::trim(raw);
    if (line.empty() || line.front() == '#') continue;
    const auto cols = io::split(raw, '\t');
    if (cols.size() != 4) {
      ++skipped;
      continue;
    }
    const auto lat = io::parse_double(cols[2]);
    const auto lon = io::parse_double(cols[3]);
    const auto name = std::string(io::trim(cols[0]));
    if (!lat || !lon || !valid_coordinates(*lat, *lon) || normalize_name(name).empty()) {
      ++skipped;
      continue;
    }
    GazetteerEntry e{name, {}, *lat, *lon};
    if (!io::trim(cols[1]).empty()) {
      for (const auto& alt : io::split(cols[1], ',')) {
        auto t = io::trim(alt);
        if (!t.empty()) e.alt_names.emplace_back(t);
      }
    }
    entries.push_back(std::move(e));
  }
  if (entries.empty()) throw EmptyGazetteer("no valid rows in gazetteer " + source);
  return Gazetteer(std::move(entries), skipped);
}

Gazetteer load_gazetteer(const std::filesystem::path& path) {
  return parse_gazetteer(io::read_file(path), path.string());
}

}  // namespace geotri
