#include "semtrace/service.hpp"

#include <cstdlib>
#include <fstream>
#include <functional>
#include <mutex>
#include <sstream>

#include "semtrace/annotator.hpp"
#include "semtrace/error.hpp"

namespace semtrace {
namespace fs = std::filesystem;

namespace {

constexpr const char* kDocumentsFile = "documents.json";
constexpr const char* kGraphFile = "graph.sg";
constexpr const char* kReviewsFile = "reviews.json";
constexpr const char* kOntologyFile = "ontology.onto";
constexpr const char* kConfigFile = "config.json";
constexpr const char* kDocumentsFormat = "semtrace-documents v1";

std::string read_file(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  if (!in) throw IoError("cannot read " + p.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_atomic(const fs::path& p, const std::string& text) {
  auto tmp = p;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw IoError("cannot write " + tmp.string());
    out << text;
    if (!out.flush()) throw IoError("cannot write " + tmp.string());
  }
  std::error_code ec;
  fs::rename(tmp, p, ec);
  if (ec) throw IoError("cannot replace " + p.string() + ": " + ec.message());
}

Json document_json(const Document& d) {
  return {{"id", d.id},         {"kind", std::string(to_string(d.kind))},
          {"title", d.title},   {"body", d.body},
          {"fields", d.fields}, {"links", d.links}};
}

Document document_from_json(const Json& j) {
  Document d;
  d.id = j.at("id").get<std::string>();
  auto kind = parse_document_kind(j.at("kind").get<std::string>());
  if (!kind) throw ValidationError("unknown document kind: " + j.at("kind").get<std::string>());
  d.kind = *kind;
  d.title = j.value("title", "");
  d.body = j.value("body", "");
  if (j.contains("fields")) d.fields = j.at("fields").get<std::map<std::string, std::string>>();
  if (j.contains("links")) d.links = j.at("links").get<std::set<std::string>>();
  return d;
}

Json term_json(const PatternTerm& t) {
  return t ? Json(t->display()) : Json(nullptr);
}

Json pattern_json(const TriplePattern& p) {
  return {{"subject", term_json(p.subject)},
          {"predicate", term_json(p.predicate)},
          {"object", term_json(p.object)}};
}

Json names_json(const Ontology& onto, const NameSet& names) {
  Json out = Json::array();
  for (const auto& n : names) out.push_back(onto.display(n));
  return out;
}

}  // namespace

void Config::merge(const Json& j) {
  for (const auto& [key, value] : j.items()) {
    if (key == "data_dir") {
      data_dir = value.get<std::string>();
    } else if (key == "ontology") {
      ontology = value.get<std::string>();
    } else if (key == "host") {
      host = value.get<std::string>();
    } else if (key == "port") {
      port = value.get<int>();
    } else if (key == "policy") {
      auto p = parse_policy(value.get<std::string>());
      if (!p) throw ValidationError("unknown expansion policy: " + value.get<std::string>());
      policy = *p;
    } else if (key == "tick_start") {
      tick_start = value.get<Tick>();
    } else if (key == "tick_stride") {
      tick_stride = value.get<Tick>();
    } else if (key == "facet_fields") {
      facet_fields = value.get<std::vector<std::string>>();
    } else {
      throw ValidationError("unknown config key: " + key);
    }
  }
}

void Config::validate() const {
  if (port < 1 || port > 65535) throw ValidationError("port out of range: " + std::to_string(port));
  if (tick_stride == 0) throw ValidationError("tick stride must be positive");
  if (data_dir.empty()) throw ValidationError("data directory not set");
}

Config Config::resolve(const std::optional<fs::path>& data_dir) {
  Config c;
  if (data_dir) {
    c.data_dir = *data_dir;
  } else if (const char* env = std::getenv(kDataDirEnv); env && *env) {
    c.data_dir = env;
  }
  auto file = c.data_dir / kConfigFile;
  if (fs::exists(file)) {
    Json j;
    try {
      j = Json::parse(read_file(file));
    } catch (const Json::parse_error& e) {
      throw ValidationError("bad config file " + file.string() + ": " + e.what());
    }
    auto dir = c.data_dir;
    c.merge(j);
    c.data_dir = dir;
  }
  return c;
}

Json IngestReport::to_json() const {
  return {{"id", doc_id},     {"kind", kind},         {"keywords", keywords},
          {"asserted", asserted}, {"derived", derived}, {"warnings", warnings}};
}

int http_status(const std::exception& e) {
  if (dynamic_cast<const UnknownDocument*>(&e)) return 404;
  if (dynamic_cast<const DuplicateId*>(&e)) return 409;
  if (dynamic_cast<const IoError*>(&e) || dynamic_cast<const FormatVersionError*>(&e)) return 500;
  if (dynamic_cast<const Error*>(&e) || dynamic_cast<const Json::exception*>(&e) ||
      dynamic_cast<const std::invalid_argument*>(&e) || dynamic_cast<const std::out_of_range*>(&e)) {
    return 400;
  }
  return 500;
}

Json error_json(const std::exception& e) {
  std::string code = "InternalError";
  if (const auto* err = dynamic_cast<const Error*>(&e)) {
    code = err->code();
  } else if (http_status(e) == 400) {
    code = "BadRequest";
  }
  return {{"error", {{"code", code}, {"message", e.what()}}}};
}

Json ontology_tree_json(const Ontology& onto) {
  // One node per equivalence group, named by its first member.
  std::set<ConceptName> emitted;
  std::function<Json(const ConceptName&)> node = [&](const ConceptName& cls) {
    auto group = onto.equivalents(cls.canonical());
    emitted.insert(group.begin(), group.end());
    Json j = {{"name", onto.display(cls)}};
    Json eq = Json::array();
    for (const auto& g : group) {
      if (!(g == cls)) eq.push_back(onto.display(g));
    }
    j["equivalents"] = eq;
    Json inds = Json::array();
    for (const auto& [name, ind] : onto.individuals()) {
      if (group.contains(ind.class_of)) inds.push_back(onto.display(name));
    }
    j["individuals"] = inds;
    Json children = Json::array();
    std::set<ConceptName> seen;
    for (const auto& sub : onto.subclasses(cls.canonical(), false)) {
      if (seen.contains(sub)) continue;
      auto sub_group = onto.equivalents(sub.canonical());
      seen.insert(sub_group.begin(), sub_group.end());
      children.push_back(node(sub));
    }
    j["children"] = children;
    return j;
  };
  Json roots = Json::array();
  for (const auto& [name, _] : onto.classes()) {
    if (emitted.contains(name) || !onto.superclasses(name.canonical(), false).empty()) continue;
    roots.push_back(node(name));
  }
  return {{"classes", roots}};
}

Json validate_report_json(const Ontology& onto) {
  return {{"valid", true},
          {"classes", onto.classes().size()},
          {"relations", onto.relations().size()},
          {"individuals", onto.individuals().size()},
          {"axioms", onto.axioms().size()}};
}

std::string log_text_summary(const TestLog& log) {
  if (!log.verdict.failed) return "passed";
  std::string out = "failed at time " + std::to_string(log.verdict.at_time);
  if (log.verdict.failing_entry) {
    out += ": " + render_statement(log.entries[*log.verdict.failing_entry].statement);
  }
  return out;
}

Json triple_json(const Triple& t) {
  Json j = {{"subject", t.subject.display()},
            {"predicate", t.predicate.display()},
            {"object", t.object.display()},
            {"provenance", std::string(to_string(t.provenance))}};
  if (!t.source_doc.empty()) j["source_doc"] = t.source_doc;
  if (t.counterpart) j["counterpart"] = t.counterpart->display();
  if (t.observed) j["observed"] = *t.observed;
  return j;
}

TriplePattern pattern_from_json(const Json& j) {
  auto term = [](const Json& v) -> PatternTerm {
    if (v.is_null()) return std::nullopt;
    return parse_pattern_term(v.get<std::string>());
  };
  if (j.is_array()) {
    if (j.size() != 3) throw ValidationError("pattern array needs 3 terms");
    return {term(j[0]), term(j[1]), term(j[2])};
  }
  if (!j.is_object()) throw ValidationError("pattern must be an object or a 3-element array");
  auto get = [&](const char* k) { return j.contains(k) ? term(j.at(k)) : PatternTerm{}; };
  return {get("subject"), get("predicate"), get("object")};
}

Document read_document(const fs::path& file, std::optional<DocumentKind> kind,
                       std::optional<std::string> id) {
  Document d;
  d.id = id ? *id : file.stem().string();
  if (kind) {
    d.kind = *kind;
  } else if (file.extension() == ".ts") {
    d.kind = DocumentKind::kTestScript;
  } else if (file.extension() == ".log") {
    d.kind = DocumentKind::kLog;
  } else {
    throw ValidationError("cannot infer the document kind of " + file.string());
  }
  d.body = read_file(file);
  return d;
}

Service::Service(Config config) : config_(std::move(config)) {
  config_.validate();
  std::error_code ec;
  fs::create_directories(config_.data_dir, ec);
  if (ec) throw IoError("cannot create " + config_.data_dir.string() + ": " + ec.message());
  auto stored = path(kOntologyFile);
  if (!config_.ontology.empty()) {
    onto_ = std::make_shared<const Ontology>(Ontology::load_file(config_.ontology));
    write_atomic(stored, onto_->serialize());
  } else if (fs::exists(stored)) {
    onto_ = std::make_shared<const Ontology>(Ontology::load_file(stored));
  } else {
    throw ValidationError("no ontology: pass one or store " + stored.string());
  }
  verbs_ = VerbLexicon::from_ontology(*onto_);
  for (const auto& f : config_.facet_fields) store_.index.declare_field(f);
  load();
}

fs::path Service::path(const char* name) const { return config_.data_dir / name; }

std::shared_lock<std::shared_mutex> Service::read_lock() const {
  { std::lock_guard gate(turnstile_); }
  return std::shared_lock(mutex_);
}

std::pair<std::unique_lock<std::mutex>, std::unique_lock<std::shared_mutex>> Service::write_lock() const {
  std::unique_lock gate(turnstile_);
  std::unique_lock exclusive(mutex_);
  return {std::move(gate), std::move(exclusive)};
}

void Service::load() {
  auto docs_path = path(kDocumentsFile);
  if (!fs::exists(docs_path)) return;
  Store s;
  for (const auto& f : config_.facet_fields) s.index.declare_field(f);
  try {
    auto j = Json::parse(read_file(docs_path));
    if (j.value("format", "") != kDocumentsFormat) {
      throw FormatVersionError("unsupported document store format in " + docs_path.string());
    }
    for (const auto& dj : j.at("documents")) s.index.index_document(document_from_json(dj));
    auto reviews_path = path(kReviewsFile);
    if (fs::exists(reviews_path)) {
      auto r = Json::parse(read_file(reviews_path));
      for (const auto& cell : r.at("review")) {
        s.review.emplace(cell.at(0).get<std::string>(), cell.at(1).get<std::string>());
      }
      s.justifications = r.at("justifications").get<std::map<std::string, std::string>>();
    }
  } catch (const Json::exception& e) {
    throw FormatVersionError("corrupt store in " + config_.data_dir.string() + ": " + e.what());
  }
  auto graph_path = path(kGraphFile);
  if (!fs::exists(graph_path)) throw FormatVersionError("missing " + graph_path.string());
  s.graph = GraphStore::load(graph_path);
  std::vector<std::string> ids;
  for (const auto& [id, _] : s.index.documents()) ids.push_back(id);
  if (s.graph.document_ids() != ids) {
    throw FormatVersionError("graph and document store disagree in " + config_.data_dir.string());
  }
  store_ = std::move(s);
}

void Service::persist(const Store& store) const {
  Json docs = Json::array();
  for (const auto& [_, d] : store.index.documents()) docs.push_back(document_json(d));
  Json review = Json::array();
  for (const auto& [r, t] : store.review) review.push_back({r, t});
  store.graph.save(path(kGraphFile));
  write_atomic(path(kDocumentsFile),
               Json{{"format", kDocumentsFormat}, {"documents", docs}}.dump(1) + "\n");
  write_atomic(path(kReviewsFile),
               Json{{"review", review}, {"justifications", store.justifications}}.dump(1) + "\n");
}

void Service::flush() const {
  auto lock = read_lock();
  persist(store_);
}

IngestReport Service::stage(Store& store, Document doc, bool replace) const {
  if (doc.id.empty()) throw ValidationError("document id is empty");
  if (doc.id.find_first_of(" \t\r\n") != std::string::npos) {
    throw ValidationError("document id contains whitespace: " + doc.id);
  }
  if (!replace && store.index.find(doc.id)) throw DuplicateId(doc.id);

  IngestReport report;
  report.doc_id = doc.id;
  report.kind = std::string(to_string(doc.kind));
  TripleSet triples;
  if (doc.kind == DocumentKind::kLog) {
    auto log = parse_log(doc.body, verbs_, doc.id);
    doc.fields["result"] = log.verdict.failed ? "failed" : "passed";
    if (!log.script_id.empty()) doc.links.insert(log.script_id);
    report.warnings = log.warnings;
    triples = log_triples(log, *onto_);
  } else {
    if (doc.kind == DocumentKind::kTestScript) {
      report.warnings = parse_script(doc.body, verbs_, doc.id).warnings;
    }
    triples = Annotator(*onto_).infer_document_triples(doc.body, doc.id);
  }
  for (const auto& t : triples) {
    (t.provenance == Provenance::kAsserted ? report.asserted : report.derived)++;
  }
  const auto& id = store.index.index_document(doc, replace);
  store.graph.ingest(doc, triples, onto_.get());
  for (const auto& k : store.index.top_keywords(id, 10)) report.keywords.push_back(k.term);
  return report;
}

IngestReport Service::ingest(Document doc, bool replace, bool persist_now) {
  auto lock = write_lock();
  Store staged = store_;
  auto report = stage(staged, std::move(doc), replace);
  if (persist_now) persist(staged);
  store_ = std::move(staged);
  return report;
}

std::vector<IngestReport> Service::ingest_manifest(const fs::path& manifest, bool replace) {
  Json j;
  try {
    j = Json::parse(read_file(manifest));
  } catch (const Json::parse_error& e) {
    throw ValidationError("bad manifest " + manifest.string() + ": " + e.what());
  }
  std::vector<Document> docs;
  auto base = manifest.parent_path();
  for (const auto& entry : j.at("documents")) {
    auto kind = parse_document_kind(entry.at("kind").get<std::string>());
    if (!kind) throw ValidationError("unknown document kind: " + entry.at("kind").dump());
    auto d = read_document(base / entry.at("path").get<std::string>(), kind,
                           entry.at("id").get<std::string>());
    d.title = entry.value("title", "");
    if (entry.contains("fields")) d.fields = entry.at("fields").get<std::map<std::string, std::string>>();
    if (entry.contains("links")) d.links = entry.at("links").get<std::set<std::string>>();
    docs.push_back(std::move(d));
  }
  auto lock = write_lock();
  Store staged = store_;
  std::vector<IngestReport> reports;
  for (auto& d : docs) reports.push_back(stage(staged, std::move(d), replace));
  persist(staged);
  store_ = std::move(staged);
  return reports;
}

bool Service::has_document(const std::string& id) const {
  auto lock = read_lock();
  return store_.index.find(id) != nullptr;
}

std::optional<Document> Service::document(const std::string& id) const {
  auto lock = read_lock();
  const auto* d = store_.index.find(id);
  return d ? std::optional<Document>(*d) : std::nullopt;
}

std::vector<std::string> Service::document_ids(std::optional<DocumentKind> kind) const {
  auto lock = read_lock();
  std::vector<std::string> out;
  for (const auto& [id, d] : store_.index.documents()) {
    if (!kind || d.kind == *kind) out.push_back(id);
  }
  return out;
}

Json Service::health() const {
  auto lock = read_lock();
  return {{"status", "ok"},
          {"documents", store_.index.doc_count()},
          {"nodes", store_.graph.node_count()},
          {"edges", store_.graph.edge_count()}};
}

Json Service::tree() const { return ontology_tree_json(*onto_); }

Json Service::expand(const std::string& term, std::optional<ExpansionPolicy> policy) const {
  auto p = policy.value_or(config_.policy);
  return {{"term", term},
          {"policy", std::string(to_string(p))},
          {"names", names_json(*onto_, onto_->expand_concept(term, p))}};
}

Json Service::expand_query(const TriplePattern& pattern,
                           std::optional<ExpansionPolicy> policy) const {
  auto q = expand_triple_query(pattern, *onto_, policy.value_or(config_.policy));
  Json patterns = Json::array();
  for (const auto& p : q.patterns) patterns.push_back(pattern_json(p));
  return {{"query", pattern_json(q.original)},
          {"policy", std::string(to_string(q.policy))},
          {"patterns", patterns},
          {"warnings", q.warnings}};
}

Json Service::annotate(const std::string& text) const {
  Annotator a(*onto_);
  Json spans = Json::array();
  for (const auto& s : a.recognize_entities(text)) {
    spans.push_back({{"start", s.start},
                     {"end", s.end},
                     {"surface", s.surface},
                     {"entity", onto_->display(s.entity)},
                     {"kind", std::string(to_string(s.kind))}});
  }
  Json triples = Json::array();
  for (const auto& t : a.infer_document_triples(text)) {
    triples.push_back({t.subject.display(), t.predicate.display(), t.object.display(),
                       std::string(to_string(t.provenance))});
  }
  return {{"spans", spans}, {"triples", triples}};
}

Json Service::search(const SearchRequest& request) const {
  auto lock = read_lock();
  auto result = store_.index.search(request);
  Json hits = Json::array();
  for (const auto& h : result.hits) {
    Json fields = Json::object();
    for (const auto& [k, v] : h.fields) fields[k] = v;
    hits.push_back({{"id", h.id}, {"score", h.score}, {"fields", fields}});
  }
  Json facets = Json::object();
  for (const auto& [field, counts] : result.facets) facets[field] = counts;
  return {{"numFound", result.hits.size()}, {"hits", hits}, {"facets", facets}};
}

Json Service::semantic_search(const TriplePattern& pattern, std::optional<ExpansionPolicy> policy,
                              const std::set<DocumentKind>& kinds) const {
  auto p = policy.value_or(config_.policy);
  auto expanded = expand_query(pattern, p);
  auto lock = read_lock();
  auto hits = semtrace::semantic_search(store_.graph, *onto_, pattern, p, kinds);
  Json out = Json::array();
  for (const auto& h : hits) {
    const auto* d = store_.index.find(h.doc_id);
    Json evidence = Json::array();
    for (const auto& t : h.evidence) evidence.push_back(triple_json(t));
    out.push_back({{"id", h.doc_id},
                   {"kind", d ? std::string(to_string(d->kind)) : std::string()},
                   {"title", d ? d->title : std::string()},
                   {"matched_patterns", h.matched_patterns},
                   {"matched_triples", h.matched_triples},
                   {"evidence", evidence}});
  }
  expanded["hits"] = out;
  return expanded;
}

Json Service::similar(const std::string& log_id, const SimilarityOptions& options) const {
  auto lock = read_lock();
  auto results = similar_failures(store_.graph, *onto_, log_id, options);
  Json out = Json::array();
  for (const auto& r : results) {
    Json shared = Json::array();
    for (const auto& t : r.shared) {
      shared.push_back({t.subject.display(), t.predicate.display(), t.object.display()});
    }
    out.push_back({{"id", r.doc_id}, {"score", r.score}, {"shared", shared}});
  }
  return {{"log", log_id}, {"results", out}};
}

TraceMatrix Service::trace_matrix(LinkSource source, std::vector<std::string> requirements,
                                  std::vector<std::string> tests, std::size_t min_shared) const {
  if (requirements.empty()) requirements = document_ids(DocumentKind::kRequirement);
  if (tests.empty()) tests = document_ids(DocumentKind::kTestScript);
  auto lock = read_lock();
  TraceOptions opts;
  opts.source = source;
  opts.min_shared = min_shared;
  opts.review = store_.review;
  opts.justifications = store_.justifications;
  return semtrace::traceability(store_.graph, *onto_, requirements, tests, opts);
}

Json Service::traceability(LinkSource source, std::vector<std::string> requirements,
                           std::vector<std::string> tests, std::size_t min_shared) const {
  auto m = trace_matrix(source, std::move(requirements), std::move(tests), min_shared);
  auto j = m.to_json();
  j["csv"] = m.to_csv();
  return j;
}

Json Service::review(const std::string& requirement, const std::string& test, bool mark,
                     const std::optional<std::string>& justification) {
  auto lock = write_lock();
  for (const auto* id : {&requirement, &test}) {
    if (!store_.index.find(*id)) throw UnknownDocument(*id);
  }
  Store staged = store_;
  if (mark) {
    staged.review.emplace(requirement, test);
  } else {
    staged.review.erase({requirement, test});
  }
  if (justification) {
    if (justification->empty()) {
      staged.justifications.erase(requirement);
    } else {
      staged.justifications[requirement] = *justification;
    }
  }
  persist(staged);
  store_ = std::move(staged);
  Json j = {{"requirement", requirement}, {"test", test}, {"review", mark}};
  if (auto it = store_.justifications.find(requirement); it != store_.justifications.end()) {
    j["justification"] = it->second;
  }
  return j;
}

TestLog Service::execute(const RunRequest& request) const {
  auto lock = read_lock();
  std::string text = request.script;
  std::string script_id;
  if (const auto* d = store_.index.find(request.script)) {
    if (d->kind != DocumentKind::kTestScript) {
      throw ValidationError(request.script + " is not a test script");
    }
    text = d->body;
    script_id = d->id;
  } else if (request.script.find_first_of(" \n") == std::string::npos) {
    throw UnknownDocument(request.script);
  } else {
    script_id = request.script_id;
  }
  auto script = parse_script(text, verbs_, script_id);
  FaultPlan plan;
  for (const auto& spec : request.fail) plan.add(spec, false);
  std::string log_id = request.log_id;
  if (log_id.empty()) {
    std::string base = (script_id.empty() ? std::string("run") : script_id) + "_log";
    for (int k = 1;; ++k) {
      log_id = base + std::to_string(k);
      if (!store_.index.find(log_id)) break;
    }
  }
  return run_script(script, plan, request.start.value_or(config_.tick_start),
                    request.stride.value_or(config_.tick_stride), log_id);
}

Json Service::run(const RunRequest& request) {
  auto log = execute(request);
  auto text = render_log(log);
  Json verdict = {{"failed", log.verdict.failed}, {"at_time", log.verdict.at_time}};
  verdict["failing_entry"] = log.verdict.failing_entry ? Json(*log.verdict.failing_entry) : Json();
  Json j = {{"log_id", log.id},
            {"script_id", log.script_id},
            {"verdict", verdict},
            {"entries", log.entries.size()},
            {"log", text}};
  if (request.ingest) {
    Document d;
    d.id = log.id;
    d.kind = DocumentKind::kLog;
    d.title = "run of " + (log.script_id.empty() ? std::string("inline script") : log.script_id);
    d.body = text;
    j["ingest"] = ingest(std::move(d)).to_json();
  }
  return j;
}

}  // namespace semtrace
