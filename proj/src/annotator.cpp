#include "semtrace/annotator.hpp"

#include <algorithm>
#include <cctype>
#include <set>

#include "semtrace/textindex.hpp"

namespace semtrace {
namespace {

// Entities right after one of these (determiners skipped) are prepositional
// objects and never act as the subject of a triple.
const std::set<std::string>& prepositions() {
  static const std::set<std::string> words = {
      "about", "at",   "by",      "during", "for",  "from", "in",   "into",
      "of",    "on",   "through", "till",   "to",   "until", "via", "with", "within"};
  return words;
}

const std::set<std::string>& determiners() {
  static const std::set<std::string> words = {"the", "a", "an", "this", "that", "its", "their"};
  return words;
}

bool is_sentence_break(char c) { return c == '.' || c == '!' || c == '?' || c == '\n'; }

// Byte offset -> code-point offset.
std::vector<std::size_t> codepoint_offsets(std::string_view text) {
  std::vector<std::size_t> out(text.size() + 1, 0);
  std::size_t cp = 0;
  for (std::size_t i = 0; i < text.size(); ++i) {
    out[i] = cp;
    if ((static_cast<unsigned char>(text[i]) & 0xC0) != 0x80) ++cp;
  }
  out[text.size()] = cp;
  return out;
}

}  // namespace

bool triple_compatible(const Triple& t, const Ontology& onto) {
  const auto* rel = onto.resolve_relation(t.predicate.canonical());
  if (!rel) return false;
  return onto.compatible(t.subject, rel->domain) && onto.compatible(t.object, rel->range);
}

TripleSet inverse_closure(const TripleSet& triples, const Ontology& onto, InverseGuard guard) {
  TripleSet out = triples;
  for (const auto& t : triples) {
    if (!t.counterpart) continue;
    const auto* rel = onto.resolve_relation(t.predicate.canonical());
    if (!rel || !rel->inverse) continue;
    const auto& inv = onto.relations().at(*rel->inverse);
    Triple derived{*t.counterpart, inv.name, t.object, Provenance::kInverseDerived,
                   t.source_doc,   t.subject, t.observed};
    if (guard == InverseGuard::kDomainRange && !triple_compatible(derived, onto)) continue;
    add_triple(out, std::move(derived));
  }
  return out;
}

Annotator::Annotator(const Ontology& onto) : onto_(onto) {
  for (const auto& [surface, ref] : onto.surface_index()) {
    auto toks = analyze(surface);
    if (toks.empty()) continue;
    max_label_tokens_ = std::max(max_label_tokens_, toks.size());
    labels_.emplace(std::move(toks), ref);
  }
}

std::vector<Annotator::Token> Annotator::tokenize(std::string_view text) {
  std::vector<Token> out;
  std::size_t sentence = 0;
  std::size_t i = 0;
  while (i < text.size()) {
    auto c = static_cast<unsigned char>(text[i]);
    if (std::isalnum(c)) {
      std::size_t j = i;
      std::string word;
      while (j < text.size() && std::isalnum(static_cast<unsigned char>(text[j]))) {
        word.push_back(static_cast<char>(std::tolower(static_cast<unsigned char>(text[j]))));
        ++j;
      }
      out.push_back({i, j, std::move(word), sentence});
      i = j;
      continue;
    }
    if (is_sentence_break(text[i])) ++sentence;
    ++i;
  }
  return out;
}

std::vector<Annotator::Match> Annotator::match(const std::vector<Token>& tokens) const {
  std::vector<Match> out;
  std::size_t i = 0;
  while (i < tokens.size()) {
    bool found = false;
    std::size_t longest = std::min(max_label_tokens_, tokens.size() - i);
    for (std::size_t len = longest; len >= 1; --len) {
      if (tokens[i + len - 1].sentence != tokens[i].sentence) continue;
      std::vector<std::string> key;
      key.reserve(len);
      for (std::size_t k = i; k < i + len; ++k) key.push_back(tokens[k].text);
      auto it = labels_.find(key);
      if (it == labels_.end()) continue;
      out.push_back({i, i + len - 1, it->second});
      i += len;
      found = true;
      break;
    }
    if (!found) ++i;
  }
  return out;
}

std::vector<EntitySpan> Annotator::recognize_entities(std::string_view text) const {
  auto tokens = tokenize(text);
  auto cps = codepoint_offsets(text);
  std::vector<EntitySpan> out;
  for (const auto& m : match(tokens)) {
    std::size_t b = tokens[m.first_token].begin;
    std::size_t e = tokens[m.last_token].end;
    out.push_back({cps[b], cps[e], std::string(text.substr(b, e - b)), m.ref.name, m.ref.kind});
  }
  return out;
}

TripleSet Annotator::infer_document_triples(std::string_view text,
                                            const std::string& source_doc) const {
  auto tokens = tokenize(text);
  auto matches = match(tokens);

  // Which token indices are covered by an entity match.
  std::vector<int> owner(tokens.size(), -1);
  for (std::size_t m = 0; m < matches.size(); ++m) {
    for (std::size_t k = matches[m].first_token; k <= matches[m].last_token; ++k) {
      owner[k] = static_cast<int>(m);
    }
  }

  auto eligible_subject = [&](const Match& m) {
    std::size_t k = m.first_token;
    while (k > 0) {
      --k;
      if (tokens[k].sentence != tokens[m.first_token].sentence || owner[k] >= 0) return true;
      if (determiners().contains(tokens[k].text)) continue;
      return !prepositions().contains(tokens[k].text);
    }
    return true;
  };

  // "X to [the] Y": Y is the counterpart of a triple whose object is X.
  // Repeats of X right after it ("MA (Movement Authority)") are skipped.
  auto counterpart_of = [&](std::size_t m) -> std::optional<ConceptName> {
    std::size_t cur = m;
    while (cur + 1 < matches.size() && matches[cur + 1].ref.name == matches[m].ref.name &&
           matches[cur + 1].first_token == matches[cur].last_token + 1) {
      ++cur;
    }
    std::size_t k = matches[cur].last_token + 1;
    if (k >= tokens.size() || owner[k] >= 0 || tokens[k].text != "to") return std::nullopt;
    std::size_t sentence = tokens[k].sentence;
    ++k;
    while (k < tokens.size() && owner[k] < 0 && determiners().contains(tokens[k].text)) ++k;
    if (k >= tokens.size() || owner[k] < 0 || tokens[k].sentence != sentence) return std::nullopt;
    const auto& target = matches[static_cast<std::size_t>(owner[k])];
    if (target.first_token != k) return std::nullopt;
    return target.ref.name;
  };

  TripleSet asserted;
  for (std::size_t a = 0; a < matches.size(); ++a) {
    const auto& subj = matches[a];
    if (!eligible_subject(subj)) continue;
    std::size_t sentence = tokens[subj.first_token].sentence;
    std::set<std::size_t> consumed;
    for (std::size_t b = a + 1; b < matches.size(); ++b) {
      const auto& obj = matches[b];
      if (tokens[obj.first_token].sentence != sentence) break;
      // Nearest unconsumed relation verb between the pair wins.
      std::optional<std::size_t> verb;
      const Relation* rel = nullptr;
      for (std::size_t k = subj.last_token + 1; k < obj.first_token; ++k) {
        if (owner[k] >= 0 || consumed.contains(k)) continue;
        if (const auto* r = onto_.relation_for_verb(tokens[k].text)) {
          verb = k;
          rel = r;
          break;
        }
      }
      if (!verb) continue;
      Triple t{subj.ref.name, rel->name, obj.ref.name, Provenance::kAsserted,
               source_doc,    counterpart_of(b), std::nullopt};
      if (!triple_compatible(t, onto_)) continue;
      consumed.insert(*verb);
      add_triple(asserted, std::move(t));
    }
  }
  return inverse_closure(asserted, onto_, InverseGuard::kDomainRange);
}

}  // namespace semtrace
