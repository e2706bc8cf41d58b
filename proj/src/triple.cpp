#include "semtrace/triple.hpp"

namespace semtrace {

std::string_view to_string(Provenance p) {
  return p == Provenance::kAsserted ? "asserted" : "inverse-derived";
}

std::optional<Provenance> parse_provenance(std::string_view text) {
  if (text == "asserted") return Provenance::kAsserted;
  if (text == "inverse-derived") return Provenance::kInverseDerived;
  return std::nullopt;
}

bool add_triple(TripleSet& set, Triple t) {
  auto it = set.find(t);
  if (it == set.end()) {
    set.insert(std::move(t));
    return true;
  }
  if (it->provenance == Provenance::kInverseDerived && t.provenance == Provenance::kAsserted) {
    set.erase(it);
    set.insert(std::move(t));
    return true;
  }
  return false;
}

bool same_keys(const TripleSet& a, const TripleSet& b) {
  if (a.size() != b.size()) return false;
  for (auto ia = a.begin(), ib = b.begin(); ia != a.end(); ++ia, ++ib) {
    if (ia->key() != ib->key()) return false;
  }
  return true;
}

PatternTerm parse_pattern_term(std::string_view text) {
  ConceptName name(text);
  if (name.empty() || name.canonical() == "?" || name.canonical() == "*") return std::nullopt;
  return name;
}

std::string to_string(const PatternTerm& term) { return term ? term->display() : "?"; }

}  // namespace semtrace
