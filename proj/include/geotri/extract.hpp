#pragma once

// Pattern-based extraction of (subject, relation, object) triplets from
// free text. Entities are found by dictionary lookup in the gazetteer;
// candidate pairs are accepted only when the token classes between them
// match a syntactic pattern and a connector phrase for the relation occurs
// in the same gap.

#include <cstddef>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "geotri/gazetteer.hpp"
#include "geotri/geo.hpp"

namespace geotri {

// Closed-class approximation of part-of-speech tags.
enum class TokenClass {
  Entity,
  Vbz,    // is, lies, 3rd-person -s forms
  Vbd,    // was, were
  Vbp,    // are
  Vbn,    // located, situated
  In,     // prepositions
  To,
  Dt,     // the, a, an
  Wdt,    // which, that, where
  Rb,     // just, right, directly
  Jj,     // next, close, adjacent
  Dir,    // north, south, ...
  Cd,     // numbers
  Cc,     // and, or, but
  Comma,
  Punct,
  Nn,     // anything else
};

std::string_view to_string(TokenClass c);
std::optional<TokenClass> token_class_from_string(std::string_view s);
TokenClass classify_token(std::string_view token);

// One position of a syntactic pattern: a set of admissible classes,
// optionally skippable ("VBZ|VBD?").
struct PatternElement {
  std::vector<TokenClass> classes;
  bool optional = false;
};

struct PatternRule {
  std::string label;                   // lowercase relation label
  std::vector<std::string> connector;  // lowercase connector tokens
  std::vector<PatternElement> pattern;
};

class PatternSet {
 public:
  PatternSet() = default;
  // Throws InvalidArgument when a rule breaks the invariants: non-empty
  // lowercase label and connector, pattern starting and ending with a
  // mandatory ENTITY and holding no other ENTITY slot.
  explicit PatternSet(std::vector<PatternRule> rules);

  const std::vector<PatternRule>& rules() const noexcept { return rules_; }
  // Distinct labels in first-seen order.
  std::vector<std::string> labels() const;
  PatternSet without_label(std::string_view label) const;

 private:
  std::vector<PatternRule> rules_;
};

// `label<TAB>connector phrase<TAB>pattern`, '#' comments allowed. Pattern
// elements are space separated; '|' separates alternative classes and a
// trailing '?' marks the element optional.
PatternSet parse_patterns(std::string_view text, const std::string& source = "<memory>");
PatternSet load_patterns(const std::filesystem::path& path);

struct EntitySpan {
  std::size_t token_start = 0;
  std::size_t token_end = 0;  // exclusive
  std::string surface;
  Poi poi;
};

struct Triplet {
  Poi subject;
  std::string relation;
  Poi object;
  std::string source_sentence;

  friend bool operator==(const Triplet&, const Triplet&) = default;
};

struct ExtractOptions {
  std::size_t max_span = 5;          // tokens per entity mention
  std::size_t max_edit = kDefaultMaxEdit;
  std::size_t min_fuzzy_length = 5;  // shorter mentions must match exactly
  std::size_t max_gap = 6;           // tokens between the two entities
};

// Splits after '.', '!' or '?' when followed by whitespace, unless the word
// carrying the period is a known abbreviation ("Dr.", "St."). Sentences are
// returned without the separating whitespace.
std::vector<std::string> split_sentences(std::string_view text);

// Whitespace tokenization with leading and trailing punctuation split into
// single-character tokens. Abbreviations keep their period.
std::vector<std::string> tokenize(std::string_view sentence);

// Longest-match-first, left-to-right dictionary tagging. A mention must
// start and end with a capitalized word and geocode under the gazetteer.
std::vector<EntitySpan> tag_entities(std::span<const std::string> tokens, const Gazetteer& g,
                                     const ExtractOptions& opts = {});

std::optional<std::string> match_relation(std::span<const std::string> tokens,
                                          const EntitySpan& left, const EntitySpan& right,
                                          const PatternSet& patterns,
                                          const ExtractOptions& opts = {});

std::vector<Triplet> extract_triplets(std::span<const std::string> corpus, const Gazetteer& g,
                                      const PatternSet& patterns,
                                      const ExtractOptions& opts = {});

// Triplet TSV: subject, relation, object, subject_lat, subject_lon,
// object_lat, object_lon. The source sentence is not serialized.
std::string format_triplets(std::span<const Triplet> triplets);
std::vector<Triplet> parse_triplets(std::string_view text, const std::string& source = "<memory>");

// Corpus file: texts separated by one or more blank lines.
std::vector<std::string> split_corpus(std::string_view text);

}  // namespace geotri
