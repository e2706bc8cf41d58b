#pragma once

#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <tuple>

#include "semtrace/concept_name.hpp"

namespace semtrace {

enum class Provenance { kAsserted, kInverseDerived };

std::string_view to_string(Provenance p);
std::optional<Provenance> parse_provenance(std::string_view text);

// (subject, predicate, object) statement.  Identity is the name triple;
// the remaining fields are annotations carried along with it.
struct Triple {
  ConceptName subject;
  ConceptName predicate;
  ConceptName object;
  Provenance provenance = Provenance::kAsserted;
  std::string source_doc;
  // Entity named as the other party ("send X to <counterpart>"); the
  // subject of the inverse-derived triple.
  std::optional<ConceptName> counterpart;
  // Outcome of the check the triple was read from (logs only).
  std::optional<bool> observed;

  auto key() const { return std::tie(subject, predicate, object); }
};

struct TripleKeyLess {
  bool operator()(const Triple& a, const Triple& b) const { return a.key() < b.key(); }
};

using TripleSet = std::set<Triple, TripleKeyLess>;

// Inserts `t`; an asserted triple replaces an inverse-derived one with the
// same key.  Returns true when the set changed.
bool add_triple(TripleSet& set, Triple t);

bool same_keys(const TripleSet& a, const TripleSet& b);

// Pattern position: a name or the wildcard (nullopt, written "?").
using PatternTerm = std::optional<ConceptName>;

struct TriplePattern {
  PatternTerm subject;
  PatternTerm predicate;
  PatternTerm object;

  bool all_wildcard() const { return !subject && !predicate && !object; }
  friend bool operator==(const TriplePattern&, const TriplePattern&) = default;
  friend auto operator<=>(const TriplePattern&, const TriplePattern&) = default;
};

PatternTerm parse_pattern_term(std::string_view text);
std::string to_string(const PatternTerm& term);

}  // namespace semtrace
