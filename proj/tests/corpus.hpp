#pragma once

// Builds a graph straight from fixtures/corpus/manifest.json with the
// library pieces, no service layer involved.

#include "fixtures.hpp"
#include "json.hpp"
#include "semtrace/annotator.hpp"
#include "semtrace/graphstore.hpp"
#include "semtrace/testlang.hpp"

namespace semtrace::testing {

inline std::vector<Document> corpus_documents() {
  auto manifest = nlohmann::json::parse(read_fixture("corpus/manifest.json"));
  std::vector<Document> docs;
  for (const auto& entry : manifest.at("documents")) {
    Document d;
    d.id = entry.at("id").get<std::string>();
    d.kind = *parse_document_kind(entry.at("kind").get<std::string>());
    d.title = entry.value("title", "");
    d.body = read_fixture("corpus/" + entry.at("path").get<std::string>());
    for (const auto& l : entry.value("links", std::vector<std::string>{})) d.links.insert(l);
    docs.push_back(std::move(d));
  }
  return docs;
}

inline TripleSet document_triples(Document& d, const Ontology& onto) {
  if (d.kind == DocumentKind::kLog) {
    auto log = parse_log(d.body, VerbLexicon::from_ontology(onto), d.id);
    d.fields["result"] = log.verdict.failed ? "failed" : "passed";
    return log_triples(log, onto);
  }
  return Annotator(onto).infer_document_triples(d.body, d.id);
}

inline GraphStore corpus_graph(const Ontology& onto) {
  GraphStore g;
  for (auto d : corpus_documents()) {
    auto triples = document_triples(d, onto);
    g.ingest(d, triples, &onto);
  }
  return g;
}

}  // namespace semtrace::testing
