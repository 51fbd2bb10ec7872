#include "geotri/extract.hpp"

#include <algorithm>
#include <array>
#include <cctype>
#include <set>

#include "geotri/error.hpp"
#include "geotri/io.hpp"

namespace geotri {
namespace {

constexpr std::array<std::pair<TokenClass, std::string_view>, 17> kClassNames{{
    {TokenClass::Entity, "ENTITY"},
    {TokenClass::Vbz, "VBZ"},
    {TokenClass::Vbd, "VBD"},
    {TokenClass::Vbp, "VBP"},
    {TokenClass::Vbn, "VBN"},
    {TokenClass::In, "IN"},
    {TokenClass::To, "TO"},
    {TokenClass::Dt, "DT"},
    {TokenClass::Wdt, "WDT"},
    {TokenClass::Rb, "RB"},
    {TokenClass::Jj, "JJ"},
    {TokenClass::Dir, "DIR"},
    {TokenClass::Cd, "CD"},
    {TokenClass::Cc, "CC"},
    {TokenClass::Comma, "COMMA"},
    {TokenClass::Punct, "PUNCT"},
    {TokenClass::Nn, "NN"},
}};

const std::set<std::string, std::less<>> kAbbreviations{
    "dr", "mr", "mrs", "ms", "st", "mt", "ft", "jr", "sr", "prof", "gen", "rev", "ave",
    "blvd", "rd", "no", "vs", "etc", "e.g", "i.e", "u.s", "u.k", "approx", "sq", "hwy"};

const std::set<std::string, std::less<>> kPrepositions{
    "in",     "at",     "near",    "of",      "on",    "by",    "within", "inside",
    "beside", "behind", "from",    "into",    "across", "opposite", "around", "off",
    "along",  "between", "past",   "outside", "under", "over",  "above",  "below",
    "with",   "for",    "about",   "beyond",  "toward", "towards", "against", "among"};

const std::set<std::string, std::less<>> kDirections{
    "north",     "south",     "east",      "west",      "northeast", "northwest",
    "southeast", "southwest", "north-east", "north-west", "south-east", "south-west"};

const std::set<std::string, std::less<>> kVbz{"is", "lies", "sits", "stands", "remains",
                                               "has", "does", "seems", "looks"};
const std::set<std::string, std::less<>> kVbd{"was", "were", "lay", "stood", "sat"};
const std::set<std::string, std::less<>> kVbp{"are", "lie", "sit", "stand"};
const std::set<std::string, std::less<>> kVbn{"located", "situated", "set", "placed",
                                               "found", "based", "nestled", "tucked"};
const std::set<std::string, std::less<>> kDeterminers{"the", "a", "an"};
const std::set<std::string, std::less<>> kWh{"which", "that", "where", "who"};
const std::set<std::string, std::less<>> kAdverbs{"just",     "right",  "very",   "directly",
                                                   "also",     "only",   "immediately",
                                                   "slightly", "still",  "really", "quite",
                                                   "somewhere", "roughly"};
const std::set<std::string, std::less<>> kAdjectives{"next", "close", "adjacent", "nearby"};
const std::set<std::string, std::less<>> kConjunctions{"and", "or", "but", "nor", "yet"};

std::string lower(std::string_view s) {
  std::string out(s);
  for (auto& c : out) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  return out;
}

bool is_punct_char(char c) {
  const auto u = static_cast<unsigned char>(c);
  return u < 0x80 && std::ispunct(u);
}

bool is_punct_token(std::string_view t) {
  return !t.empty() && std::all_of(t.begin(), t.end(), is_punct_char);
}

bool is_abbreviation(std::string_view word_with_period) {
  if (word_with_period.size() < 2 || word_with_period.back() != '.') return false;
  auto stem = word_with_period.substr(0, word_with_period.size() - 1);
  while (!stem.empty() && is_punct_char(stem.front())) stem.remove_prefix(1);
  return kAbbreviations.contains(lower(stem));
}

bool capitalized(std::string_view t) {
  return !t.empty() && (std::isupper(static_cast<unsigned char>(t[0])) ||
                        std::isdigit(static_cast<unsigned char>(t[0])));
}

std::string join(std::span<const std::string> tokens) {
  std::string out;
  for (const auto& t : tokens) {
    if (!out.empty()) out.push_back(' ');
    out += t;
  }
  return out;
}

bool matches_pattern(std::span<const PatternElement> pattern, std::span<const TokenClass> seq) {
  if (pattern.empty()) return seq.empty();
  const auto& head = pattern.front();
  if (head.optional && matches_pattern(pattern.subspan(1), seq)) return true;
  if (seq.empty()) return false;
  if (std::find(head.classes.begin(), head.classes.end(), seq.front()) == head.classes.end())
    return false;
  return matches_pattern(pattern.subspan(1), seq.subspan(1));
}

bool contains_run(std::span<const std::string> haystack, std::span<const std::string> needle) {
  if (needle.empty() || needle.size() > haystack.size()) return false;
  return std::search(haystack.begin(), haystack.end(), needle.begin(), needle.end()) !=
         haystack.end();
}

bool is_entity_only(const PatternElement& e) {
  return !e.optional && e.classes.size() == 1 && e.classes[0] == TokenClass::Entity;
}

}  // namespace

std::string_view to_string(TokenClass c) {
  for (const auto& [cls, name] : kClassNames)
    if (cls == c) return name;
  return "NN";
}

std::optional<TokenClass> token_class_from_string(std::string_view s) {
  for (const auto& [cls, name] : kClassNames)
    if (name == s) return cls;
  return std::nullopt;
}

TokenClass classify_token(std::string_view token) {
  if (token == ",") return TokenClass::Comma;
  if (is_punct_token(token)) return TokenClass::Punct;
  if (std::isdigit(static_cast<unsigned char>(token[0])) &&
      std::all_of(token.begin(), token.end(), [](char c) {
        return std::isdigit(static_cast<unsigned char>(c)) || c == ',' || c == '.';
      }))
    return TokenClass::Cd;
  const auto w = lower(token);
  if (w == "to") return TokenClass::To;
  if (kPrepositions.contains(w)) return TokenClass::In;
  if (kDirections.contains(w)) return TokenClass::Dir;
  if (kDeterminers.contains(w)) return TokenClass::Dt;
  if (kWh.contains(w)) return TokenClass::Wdt;
  if (kVbz.contains(w)) return TokenClass::Vbz;
  if (kVbd.contains(w)) return TokenClass::Vbd;
  if (kVbp.contains(w)) return TokenClass::Vbp;
  if (kVbn.contains(w)) return TokenClass::Vbn;
  if (kAdverbs.contains(w)) return TokenClass::Rb;
  if (kAdjectives.contains(w)) return TokenClass::Jj;
  if (kConjunctions.contains(w)) return TokenClass::Cc;
  // Third-person singular guess: lowercase word ending in a bare "s".
  if (token == w && w.size() >= 4 && w.back() == 's' && !w.ends_with("ss") &&
      !w.ends_with("us") && !w.ends_with("is"))
    return TokenClass::Vbz;
  return TokenClass::Nn;
}

PatternSet::PatternSet(std::vector<PatternRule> rules) : rules_(std::move(rules)) {
  for (const auto& r : rules_) {
    if (r.label.empty() || r.label != lower(r.label))
      throw InvalidArgument("relation label must be non-empty lowercase: '" + r.label + "'");
    if (r.connector.empty())
      throw InvalidArgument("rule for '" + r.label + "' has an empty connector");
    for (const auto& t : r.connector)
      if (t.empty() || t != lower(t))
        throw InvalidArgument("connector tokens must be non-empty lowercase");
    const auto entity_slots = std::count_if(r.pattern.begin(), r.pattern.end(), [](const auto& e) {
      return std::find(e.classes.begin(), e.classes.end(), TokenClass::Entity) != e.classes.end();
    });
    if (r.pattern.size() < 2 || entity_slots != 2 || !is_entity_only(r.pattern.front()) ||
        !is_entity_only(r.pattern.back()))
      throw InvalidArgument("pattern for '" + r.label +
                            "' must start and end with ENTITY and hold exactly two ENTITY slots");
  }
}

std::vector<std::string> PatternSet::labels() const {
  std::vector<std::string> out;
  for (const auto& r : rules_)
    if (std::find(out.begin(), out.end(), r.label) == out.end()) out.push_back(r.label);
  return out;
}

PatternSet PatternSet::without_label(std::string_view label) const {
  std::vector<PatternRule> kept;
  std::copy_if(rules_.begin(), rules_.end(), std::back_inserter(kept),
               [&](const PatternRule& r) { return r.label != label; });
  return PatternSet(std::move(kept));
}

PatternSet parse_patterns(std::string_view text, const std::string& source) {
  std::vector<PatternRule> rules;
  const auto lines = io::split_lines(text);
  for (std::size_t n = 0; n < lines.size(); ++n) {
    const auto line = io::trim(lines[n]);
    if (line.empty() || line.front() == '#') continue;
    const auto cols = io::split(lines[n], '\t');
    if (cols.size() != 3) throw ParseError(source, n + 1, "expected 3 tab-separated columns");
    PatternRule rule;
    rule.label = lower(io::trim(cols[0]));
    for (const auto& t : io::split(io::trim(cols[1]), ' '))
      if (!t.empty()) rule.connector.push_back(lower(t));
    for (const auto& tok : io::split(io::trim(cols[2]), ' ')) {
      if (tok.empty()) continue;
      PatternElement el;
      std::string_view body = tok;
      if (body.ends_with('?')) {
        el.optional = true;
        body.remove_suffix(1);
      }
      for (const auto& alt : io::split(body, '|')) {
        auto cls = token_class_from_string(alt);
        if (!cls) throw ParseError(source, n + 1, "unknown token class '" + alt + "'");
        el.classes.push_back(*cls);
      }
      rule.pattern.push_back(std::move(el));
    }
    rules.push_back(std::move(rule));
  }
  try {
    return PatternSet(std::move(rules));
  } catch (const InvalidArgument& e) {
    throw ParseError(source, 0, e.what());
  }
}

PatternSet load_patterns(const std::filesystem::path& path) {
  return parse_patterns(io::read_file(path), path.string());
}

std::vector<std::string> split_sentences(std::string_view text) {
  std::vector<std::string> out;
  std::size_t start = 0;
  auto emit = [&](std::size_t end) {
    auto s = io::trim(text.substr(start, end - start));
    if (!s.empty()) out.emplace_back(s);
    start = end;
  };
  for (std::size_t i = 0; i < text.size(); ++i) {
    const char c = text[i];
    if (c != '.' && c != '!' && c != '?') continue;
    if (i + 1 < text.size() && !std::isspace(static_cast<unsigned char>(text[i + 1]))) continue;
    if (c == '.') {
      auto word_begin = text.find_last_of(" \t\r\n", i);
      word_begin = word_begin == std::string_view::npos ? 0 : word_begin + 1;
      if (is_abbreviation(text.substr(word_begin, i + 1 - word_begin))) continue;
    }
    emit(i + 1);
  }
  emit(text.size());
  return out;
}

std::vector<std::string> tokenize(std::string_view sentence) {
  std::vector<std::string> tokens;
  std::size_t i = 0;
  while (i < sentence.size()) {
    while (i < sentence.size() && std::isspace(static_cast<unsigned char>(sentence[i]))) ++i;
    auto j = i;
    while (j < sentence.size() && !std::isspace(static_cast<unsigned char>(sentence[j]))) ++j;
    std::string_view chunk = sentence.substr(i, j - i);
    i = j;
    if (chunk.empty()) continue;

    while (!chunk.empty() && is_punct_char(chunk.front())) {
      tokens.emplace_back(1, chunk.front());
      chunk.remove_prefix(1);
    }
    std::vector<std::string> trailing;
    while (!chunk.empty() && is_punct_char(chunk.back())) {
      if (chunk.back() == '.' && is_abbreviation(chunk)) break;
      trailing.emplace_back(1, chunk.back());
      chunk.remove_suffix(1);
    }
    if (!chunk.empty()) tokens.emplace_back(chunk);
    tokens.insert(tokens.end(), trailing.rbegin(), trailing.rend());
  }
  return tokens;
}

std::vector<EntitySpan> tag_entities(std::span<const std::string> tokens, const Gazetteer& g,
                                     const ExtractOptions& opts) {
  std::vector<EntitySpan> spans;
  std::size_t i = 0;
  while (i < tokens.size()) {
    bool found = false;
    const auto longest = std::min(opts.max_span, tokens.size() - i);
    for (auto len = longest; len >= 1 && !found; --len) {
      const auto window = tokens.subspan(i, len);
      if (!capitalized(window.front()) || !capitalized(window.back())) continue;
      if (std::any_of(window.begin(), window.end(),
                      [](const std::string& t) { return is_punct_token(t); }))
        continue;
      auto surface = join(window);
      const auto max_edit =
          normalize_name(surface).size() >= opts.min_fuzzy_length ? opts.max_edit : 0;
      if (auto poi = g.geocode(surface, max_edit)) {
        spans.push_back({i, i + len, std::move(surface), std::move(*poi)});
        i += len;
        found = true;
      }
    }
    if (!found) ++i;
  }
  return spans;
}

std::optional<std::string> match_relation(std::span<const std::string> tokens,
                                          const EntitySpan& left, const EntitySpan& right,
                                          const PatternSet& patterns,
                                          const ExtractOptions& opts) {
  if (left.token_end > right.token_start || right.token_end > tokens.size()) return std::nullopt;
  const auto gap = tokens.subspan(left.token_end, right.token_start - left.token_end);
  if (gap.empty() || gap.size() > opts.max_gap) return std::nullopt;

  std::vector<TokenClass> classes{TokenClass::Entity};
  std::vector<std::string> gap_lower;
  for (const auto& t : gap) {
    classes.push_back(classify_token(t));
    gap_lower.push_back(lower(t));
  }
  classes.push_back(TokenClass::Entity);

  const PatternRule* best = nullptr;
  for (const auto& rule : patterns.rules()) {
    if (best && rule.connector.size() <= best->connector.size()) continue;
    if (!contains_run(gap_lower, rule.connector)) continue;
    if (!matches_pattern(rule.pattern, classes)) continue;
    best = &rule;
  }
  if (!best) return std::nullopt;
  return best->label;
}

std::vector<Triplet> extract_triplets(std::span<const std::string> corpus, const Gazetteer& g,
                                      const PatternSet& patterns, const ExtractOptions& opts) {
  std::vector<Triplet> out;
  for (const auto& text : corpus) {
    for (const auto& sentence : split_sentences(text)) {
      const auto tokens = tokenize(sentence);
      if (tokens.empty()) continue;
      const auto spans = tag_entities(tokens, g, opts);
      if (spans.size() < 2) continue;
      for (std::size_t k = 0; k + 1 < spans.size(); ++k) {
        const auto& left = spans[k];
        const auto& right = spans[k + 1];
        if (left.poi.name == right.poi.name) continue;
        if (auto label = match_relation(tokens, left, right, patterns, opts))
          out.push_back({left.poi, std::move(*label), right.poi, sentence});
      }
    }
  }
  return out;
}

std::string format_triplets(std::span<const Triplet> triplets) {
  std::string out;
  for (const auto& t : triplets) {
    out += t.subject.name + '\t' + t.relation + '\t' + t.object.name + '\t' +
           io::format_shortest(t.subject.lat) + '\t' + io::format_shortest(t.subject.lon) + '\t' +
           io::format_shortest(t.object.lat) + '\t' + io::format_shortest(t.object.lon) + '\n';
  }
  return out;
}

std::vector<Triplet> parse_triplets(std::string_view text, const std::string& source) {
  std::vector<Triplet> out;
  const auto lines = io::split_lines(text);
  for (std::size_t n = 0; n < lines.size(); ++n) {
    const auto line = io::trim(lines[n]);
    if (line.empty() || line.front() == '#') continue;
    const auto cols = io::split(lines[n], '\t');
    if (cols.size() != 7) throw ParseError(source, n + 1, "expected 7 tab-separated columns");
    double v[4];
    for (int k = 0; k < 4; ++k) {
      auto d = io::parse_double(cols[3 + k]);
      if (!d) throw ParseError(source, n + 1, "bad coordinate '" + cols[3 + k] + "'");
      v[k] = *d;
    }
    if (!valid_coordinates(v[0], v[1]) || !valid_coordinates(v[2], v[3]))
      throw ParseError(source, n + 1, "coordinates out of range");
    const auto relation = lower(io::trim(cols[1]));
    if (relation.empty()) throw ParseError(source, n + 1, "empty relation label");
    out.push_back({Poi{std::string(io::trim(cols[0])), v[0], v[1]}, relation,
                   Poi{std::string(io::trim(cols[2])), v[2], v[3]}, {}});
  }
  return out;
}

std::vector<std::string> split_corpus(std::string_view text) {
  std::vector<std::string> texts;
  std::string current;
  for (const auto& line : io::split_lines(text)) {
    if (io::trim(line).empty()) {
      if (!current.empty()) texts.push_back(std::move(current));
      current.clear();
      continue;
    }
    if (!current.empty()) current.push_back('\n');
    current += line;
  }
  if (!current.empty()) texts.push_back(std::move(current));
  return texts;
}

}  // namespace geotri
