#pragma once

#include <optional>
#include <set>
#include <string>
#include <utility>
#include <vector>

#include "json.hpp"
#include "semtrace/document.hpp"
#include "semtrace/graphstore.hpp"
#include "semtrace/ontology.hpp"
#include "semtrace/triple.hpp"

namespace semtrace {

struct ExpandedQuery {
  TriplePattern original;
  // Labels in the original are resolved to declared names first, so the
  // original appears here in that resolved form.
  std::set<TriplePattern> patterns;
  ExpansionPolicy policy = ExpansionPolicy::kEquivalentsOnly;
  std::vector<std::string> warnings;  // unknown names passed through
};

ExpandedQuery expand_triple_query(const TriplePattern& pattern, const Ontology& onto,
                                  ExpansionPolicy policy);

struct SemanticHit {
  std::string doc_id;
  std::size_t matched_patterns = 0;
  std::size_t matched_triples = 0;
  std::vector<Triple> evidence;
};

// Empty kind set means every kind.
std::vector<SemanticHit> semantic_search(const GraphStore& graph, const Ontology& onto,
                                         const TriplePattern& pattern, ExpansionPolicy policy,
                                         const std::set<DocumentKind>& kinds = {});

// Individuals replaced by their classes, then (optionally) closed over
// inverses without the domain/range guard.
TripleSet normalize_triples(const std::vector<Triple>& triples, const Ontology& onto,
                            bool to_class = true, bool close = true);

double jaccard(const TripleSet& a, const TripleSet& b);

struct SimilarityResult {
  std::string doc_id;
  double score = 0.0;
  TripleSet shared;
};

struct SimilarityOptions {
  std::size_t k = 10;
  bool normalize = true;
  double min_score = 0.0;
};

// Candidates are the other failed logs (kind log, field result=failed).
std::vector<SimilarityResult> similar_failures(const GraphStore& graph, const Ontology& onto,
                                               const std::string& log_id,
                                               const SimilarityOptions& options = {});

enum class CellState { kCovered, kNeedsReview, kUncovered };
char cell_code(CellState s);  // C, R, U

enum class LinkSource { kExplicit, kSemantic };
std::string_view to_string(LinkSource s);
std::optional<LinkSource> parse_link_source(std::string_view text);

struct TraceOptions {
  LinkSource source = LinkSource::kSemantic;
  std::size_t min_shared = 1;
  std::set<std::pair<std::string, std::string>> review;  // (requirement, test)
  std::map<std::string, std::string> justifications;     // requirement -> text
};

struct TraceMatrix {
  std::vector<std::string> requirements;
  std::vector<std::string> tests;
  std::vector<std::vector<CellState>> cells;  // [requirement][test]
  std::map<std::string, std::string> justifications;
  LinkSource source = LinkSource::kSemantic;

  std::vector<std::string> uncovered() const;
  std::string to_csv() const;
  nlohmann::json to_json() const;
};

TraceMatrix traceability(const GraphStore& graph, const Ontology& onto,
                         const std::vector<std::string>& requirements,
                         const std::vector<std::string>& tests, const TraceOptions& options = {});

}  // namespace semtrace
