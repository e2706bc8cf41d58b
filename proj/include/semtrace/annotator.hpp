#pragma once

#include <cstddef>
#include <map>
#include <string>
#include <string_view>
#include <vector>

#include "semtrace/ontology.hpp"
#include "semtrace/triple.hpp"

namespace semtrace {

struct EntitySpan {
  std::size_t start = 0;  // code-point offsets, half-open
  std::size_t end = 0;
  std::string surface;
  ConceptName entity;
  EntityKind kind = EntityKind::kClass;
};

enum class InverseGuard {
  kDomainRange,  // derived triples must satisfy the inverse's domain/range
  kNone,         // derive whenever a counterpart is named (check extraction)
};

// Whether subject and object fit the predicate's domain and range.
bool triple_compatible(const Triple& t, const Ontology& onto);

// For every triple whose predicate has an inverse and which names a
// counterpart, adds (counterpart, inverse, object).  Idempotent, monotone.
TripleSet inverse_closure(const TripleSet& triples, const Ontology& onto,
                          InverseGuard guard = InverseGuard::kDomainRange);

// Gazetteer-driven entity recognition and sentence-level triple inference.
// Holds a reference to the ontology, which must outlive it.
class Annotator {
 public:
  explicit Annotator(const Ontology& onto);

  // Longest match first, left to right, over lowercase alphanumeric tokens.
  std::vector<EntitySpan> recognize_entities(std::string_view text) const;

  // Pairs entities inside each sentence through the relation verb between
  // them, checks domain/range and closes over inverses.
  TripleSet infer_document_triples(std::string_view text,
                                   const std::string& source_doc = {}) const;

 private:
  struct Token {
    std::size_t begin;  // byte offsets
    std::size_t end;
    std::string text;   // lowercased
    std::size_t sentence;
  };
  struct Match {
    std::size_t first_token;
    std::size_t last_token;  // inclusive
    EntityRef ref;
  };

  static std::vector<Token> tokenize(std::string_view text);
  std::vector<Match> match(const std::vector<Token>& tokens) const;

  const Ontology& onto_;
  std::map<std::vector<std::string>, EntityRef> labels_;
  std::size_t max_label_tokens_ = 0;
};

}  // namespace semtrace
