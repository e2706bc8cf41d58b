#include "semtrace/retrieval.hpp"

#include <algorithm>
#include <map>

#include "semtrace/annotator.hpp"
#include "semtrace/error.hpp"

namespace semtrace {
namespace {

std::string doc_prop(const GraphStore& graph, const std::string& id, const std::string& key) {
  auto node = graph.document_node(id);
  if (!node) return {};
  const auto& props = graph.node(*node)->props;
  auto it = props.find(key);
  return it == props.end() ? std::string() : it->second;
}

bool is_failed_log(const GraphStore& graph, const std::string& id) {
  return doc_prop(graph, id, "kind") == "log" && doc_prop(graph, id, "result") == "failed";
}

std::string csv_cell(const std::string& s) {
  if (s.find_first_of(",\"\n") == std::string::npos) return s;
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += '"';
    out += c;
  }
  return out + '"';
}

}  // namespace

ExpandedQuery expand_triple_query(const TriplePattern& pattern, const Ontology& onto,
                                  ExpansionPolicy policy) {
  ExpandedQuery q;
  q.original = pattern;
  q.policy = policy;

  auto expand = [&](const PatternTerm& term) -> std::vector<PatternTerm> {
    if (!term) return {std::nullopt};
    if (!onto.resolve(term->canonical())) {
      q.warnings.push_back("unknown term passed through unexpanded: " + term->display());
      return {term};
    }
    std::vector<PatternTerm> out;
    for (const auto& n : onto.expand_concept(term->canonical(), policy)) out.emplace_back(n);
    return out;
  };

  PatternTerm predicate = pattern.predicate;
  if (predicate) {
    if (const auto* rel = onto.resolve_relation(predicate->canonical())) {
      predicate = rel->name;
    } else {
      q.warnings.push_back("unknown relation passed through: " + predicate->display());
    }
  }
  for (const auto& s : expand(pattern.subject)) {
    for (const auto& o : expand(pattern.object)) q.patterns.insert(TriplePattern{s, predicate, o});
  }
  return q;
}

std::vector<SemanticHit> semantic_search(const GraphStore& graph, const Ontology& onto,
                                         const TriplePattern& pattern, ExpansionPolicy policy,
                                         const std::set<DocumentKind>& kinds) {
  auto q = expand_triple_query(pattern, onto, policy);
  struct Acc {
    std::set<TriplePattern> patterns;
    std::vector<Triple> triples;
  };
  std::map<std::string, Acc> acc;
  for (const auto& p : q.patterns) {
    for (auto& t : graph.match(p, true, &onto)) {
      if (!kinds.empty()) {
        auto kind = parse_document_kind(doc_prop(graph, t.source_doc, "kind"));
        if (!kind || !kinds.contains(*kind)) continue;
      }
      auto& a = acc[t.source_doc];
      a.patterns.insert(p);
      a.triples.push_back(std::move(t));
    }
  }
  std::vector<SemanticHit> out;
  for (auto& [doc, a] : acc) {
    std::sort(a.triples.begin(), a.triples.end(),
              [](const Triple& x, const Triple& y) { return x.key() < y.key(); });
    a.triples.erase(std::unique(a.triples.begin(), a.triples.end(),
                                [](const Triple& x, const Triple& y) { return x.key() == y.key(); }),
                    a.triples.end());
    out.push_back({doc, a.patterns.size(), a.triples.size(), std::move(a.triples)});
  }
  std::sort(out.begin(), out.end(), [](const SemanticHit& a, const SemanticHit& b) {
    if (a.matched_patterns != b.matched_patterns) return a.matched_patterns > b.matched_patterns;
    if (a.matched_triples != b.matched_triples) return a.matched_triples > b.matched_triples;
    return a.doc_id < b.doc_id;
  });
  return out;
}

TripleSet normalize_triples(const std::vector<Triple>& triples, const Ontology& onto,
                            bool to_class, bool close) {
  TripleSet out;
  for (auto t : triples) {
    if (to_class) {
      t.subject = onto.normalize_to_class(t.subject);
      t.object = onto.normalize_to_class(t.object);
      if (t.counterpart) t.counterpart = onto.normalize_to_class(*t.counterpart);
    }
    add_triple(out, std::move(t));
  }
  return close ? inverse_closure(out, onto, InverseGuard::kNone) : out;
}

double jaccard(const TripleSet& a, const TripleSet& b) {
  std::size_t shared = 0;
  for (const auto& t : a) shared += b.contains(t);
  std::size_t all = a.size() + b.size() - shared;
  return all == 0 ? 0.0 : static_cast<double>(shared) / static_cast<double>(all);
}

std::vector<SimilarityResult> similar_failures(const GraphStore& graph, const Ontology& onto,
                                               const std::string& log_id,
                                               const SimilarityOptions& options) {
  if (!graph.document_node(log_id)) throw UnknownDocument(log_id);
  if (!is_failed_log(graph, log_id)) throw NotAFailedLog(log_id);
  auto mine = normalize_triples(graph.triples_of(log_id), onto, options.normalize);
  std::vector<SimilarityResult> out;
  for (const auto& other : graph.document_ids()) {
    if (other == log_id || !is_failed_log(graph, other)) continue;
    auto theirs = normalize_triples(graph.triples_of(other), onto, options.normalize);
    double score = jaccard(mine, theirs);
    if (score < options.min_score) continue;
    SimilarityResult r{other, score, {}};
    for (const auto& t : mine) {
      if (theirs.contains(t)) r.shared.insert(t);
    }
    out.push_back(std::move(r));
  }
  std::sort(out.begin(), out.end(), [](const SimilarityResult& a, const SimilarityResult& b) {
    return a.score != b.score ? a.score > b.score : a.doc_id < b.doc_id;
  });
  if (out.size() > options.k) out.resize(options.k);
  return out;
}

char cell_code(CellState s) {
  switch (s) {
    case CellState::kCovered: return 'C';
    case CellState::kNeedsReview: return 'R';
    case CellState::kUncovered: break;
  }
  return 'U';
}

std::string_view to_string(LinkSource s) {
  return s == LinkSource::kExplicit ? "explicit" : "semantic";
}

std::optional<LinkSource> parse_link_source(std::string_view text) {
  if (text == "explicit" || text == "explicit-links" || text == "links") return LinkSource::kExplicit;
  if (text == "semantic") return LinkSource::kSemantic;
  return std::nullopt;
}

std::vector<std::string> TraceMatrix::uncovered() const {
  std::vector<std::string> out;
  for (std::size_t i = 0; i < requirements.size(); ++i) {
    if (std::all_of(cells[i].begin(), cells[i].end(),
                    [](CellState c) { return c == CellState::kUncovered; })) {
      out.push_back(requirements[i]);
    }
  }
  return out;
}

std::string TraceMatrix::to_csv() const {
  std::string out = "requirement";
  for (const auto& t : tests) out += ',' + csv_cell(t);
  out += '\n';
  for (std::size_t i = 0; i < requirements.size(); ++i) {
    out += csv_cell(requirements[i]);
    for (auto c : cells[i]) {
      out += ',';
      out += cell_code(c);
    }
    out += '\n';
  }
  return out;
}

nlohmann::json TraceMatrix::to_json() const {
  nlohmann::json rows = nlohmann::json::array();
  for (std::size_t i = 0; i < requirements.size(); ++i) {
    nlohmann::json cells_json = nlohmann::json::object();
    for (std::size_t j = 0; j < tests.size(); ++j) {
      cells_json[tests[j]] = std::string(1, cell_code(cells[i][j]));
    }
    nlohmann::json row = {{"requirement", requirements[i]}, {"cells", cells_json}};
    if (auto it = justifications.find(requirements[i]); it != justifications.end()) {
      row["justification"] = it->second;
    }
    rows.push_back(std::move(row));
  }
  return {{"source", std::string(to_string(source))},
          {"requirements", requirements},
          {"tests", tests},
          {"rows", rows},
          {"uncovered", uncovered()}};
}

TraceMatrix traceability(const GraphStore& graph, const Ontology& onto,
                         const std::vector<std::string>& requirements,
                         const std::vector<std::string>& tests, const TraceOptions& options) {
  for (const auto* ids : {&requirements, &tests}) {
    for (const auto& id : *ids) {
      if (!graph.document_node(id)) throw UnknownDocument(id);
    }
  }
  TraceMatrix m;
  m.requirements = requirements;
  m.tests = tests;
  m.source = options.source;
  for (const auto& r : requirements) {
    if (auto it = options.justifications.find(r); it != options.justifications.end()) {
      m.justifications.insert(*it);
    }
  }

  std::vector<TripleSet> test_sets;
  if (options.source == LinkSource::kSemantic) {
    for (const auto& t : tests) {
      test_sets.push_back(normalize_triples(graph.triples_of(t), onto, true, false));
    }
  }
  for (const auto& r : requirements) {
    std::vector<CellState> row;
    TripleSet req_set;
    std::set<std::string> links;
    if (options.source == LinkSource::kSemantic) {
      req_set = normalize_triples(graph.triples_of(r), onto, true, false);
    } else {
      links = graph.linked(r);
    }
    for (std::size_t j = 0; j < tests.size(); ++j) {
      bool covered;
      if (options.source == LinkSource::kSemantic) {
        std::size_t shared = 0;
        for (const auto& t : req_set) shared += test_sets[j].contains(t);
        covered = shared >= std::max<std::size_t>(options.min_shared, 1);
      } else {
        covered = links.contains(tests[j]);
      }
      if (options.review.contains({r, tests[j]})) {
        row.push_back(CellState::kNeedsReview);
      } else {
        row.push_back(covered ? CellState::kCovered : CellState::kUncovered);
      }
    }
    m.cells.push_back(std::move(row));
  }
  return m;
}

}  // namespace semtrace
