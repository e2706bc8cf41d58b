#pragma once

#include <filesystem>
#include <map>
#include <memory>
#include <optional>
#include <set>
#include <mutex>
#include <shared_mutex>
#include <string>
#include <utility>
#include <vector>

#include "json.hpp"
#include "semtrace/document.hpp"
#include "semtrace/graphstore.hpp"
#include "semtrace/ontology.hpp"
#include "semtrace/retrieval.hpp"
#include "semtrace/testlang.hpp"
#include "semtrace/textindex.hpp"

namespace semtrace {

using Json = nlohmann::json;

inline constexpr const char* kDataDirEnv = "SEMTRACE_DATA_DIR";

struct Config {
  std::filesystem::path data_dir = "semtrace-data";
  std::filesystem::path ontology;  // empty: <data_dir>/ontology.onto
  std::string host = "127.0.0.1";
  int port = 8080;
  ExpansionPolicy policy = ExpansionPolicy::kEquivalentsOnly;
  Tick tick_start = 1;
  Tick tick_stride = 1;
  std::vector<std::string> facet_fields = {"result"};

  // Reads the keys present in `j`; unknown keys are rejected.
  void merge(const Json& j);
  // Port range, stride.  Throws ValidationError.
  void validate() const;

  // <data_dir>/config.json if present, then SEMTRACE_DATA_DIR for the data
  // directory.  An explicit data_dir argument wins over both.
  static Config resolve(const std::optional<std::filesystem::path>& data_dir = std::nullopt);
};

struct IngestReport {
  std::string doc_id;
  std::string kind;
  std::vector<std::string> keywords;
  std::size_t asserted = 0;
  std::size_t derived = 0;
  std::vector<std::string> warnings;

  Json to_json() const;
};

struct RunRequest {
  std::string script;              // stored script id, or the script text itself
  std::string script_id;           // names an inline script
  std::vector<std::string> fail;   // FaultPlan specs forced to FALSE
  std::optional<Tick> start;
  std::optional<Tick> stride;
  std::string log_id;
  bool ingest = false;
};

// Error -> HTTP status.  Unknown documents map to 404.
int http_status(const std::exception& e);
Json error_json(const std::exception& e);

Json ontology_tree_json(const Ontology& onto);
Json validate_report_json(const Ontology& onto);
std::string log_text_summary(const TestLog& log);

// Corpus lifecycle plus every query, each answered as the JSON document
// that both the CLI (`--json`) and the HTTP API emit.
//
// Readers share a lock; ingest and review marks take it exclusively and
// commit a staged copy, so a failed write leaves no trace.
class Service {
 public:
  // Loads the ontology and the persisted store.  A store that does not
  // parse raises FormatVersionError.
  explicit Service(Config config);

  const Config& config() const { return config_; }
  const Ontology& ontology() const { return *onto_; }

  IngestReport ingest(Document doc, bool replace = false, bool persist = true);
  // Manifest: {"documents":[{id, kind, path, title?, fields?, links?}]},
  // paths relative to the manifest directory.  All documents or none.
  std::vector<IngestReport> ingest_manifest(const std::filesystem::path& manifest,
                                            bool replace = false);
  bool has_document(const std::string& id) const;
  std::optional<Document> document(const std::string& id) const;
  std::vector<std::string> document_ids(std::optional<DocumentKind> kind = std::nullopt) const;

  Json health() const;
  Json tree() const;
  Json expand(const std::string& term, std::optional<ExpansionPolicy> policy) const;
  Json expand_query(const TriplePattern& pattern, std::optional<ExpansionPolicy> policy) const;
  Json annotate(const std::string& text) const;
  Json search(const SearchRequest& request) const;
  Json semantic_search(const TriplePattern& pattern, std::optional<ExpansionPolicy> policy,
                       const std::set<DocumentKind>& kinds = {}) const;
  Json similar(const std::string& log_id, const SimilarityOptions& options) const;
  // Empty id lists mean every stored requirement / test script.
  TraceMatrix trace_matrix(LinkSource source, std::vector<std::string> requirements = {},
                           std::vector<std::string> tests = {}, std::size_t min_shared = 1) const;
  Json traceability(LinkSource source, std::vector<std::string> requirements = {},
                    std::vector<std::string> tests = {}, std::size_t min_shared = 1) const;
  Json review(const std::string& requirement, const std::string& test, bool mark,
              const std::optional<std::string>& justification);
  // Runs a script through the mock executor; optionally stores the log.
  Json run(const RunRequest& request);
  TestLog execute(const RunRequest& request) const;

  void flush() const;

 private:
  struct Store {
    TextIndex index;
    GraphStore graph;
    std::set<std::pair<std::string, std::string>> review;
    std::map<std::string, std::string> justifications;
  };

  // Parses, annotates and applies to `store`; throws before touching it
  // when the document is invalid.
  IngestReport stage(Store& store, Document doc, bool replace) const;
  void persist(const Store& store) const;
  void load();
  std::filesystem::path path(const char* name) const;

  // A waiting writer holds the turnstile, so new readers queue behind it.
  std::shared_lock<std::shared_mutex> read_lock() const;
  std::pair<std::unique_lock<std::mutex>, std::unique_lock<std::shared_mutex>> write_lock() const;

  Config config_;
  std::shared_ptr<const Ontology> onto_;
  VerbLexicon verbs_;
  Store store_;
  mutable std::shared_mutex mutex_;
  mutable std::mutex turnstile_;
};

// Reads a document file; kind inferred from the extension (.ts script,
// .log log) unless given.
Document read_document(const std::filesystem::path& file,
                       std::optional<DocumentKind> kind = std::nullopt,
                       std::optional<std::string> id = std::nullopt);

TriplePattern pattern_from_json(const Json& j);
Json triple_json(const Triple& t);

}  // namespace semtrace
