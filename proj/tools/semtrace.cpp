// semtrace command line: thin wrappers over the service operations.

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

#include "CLI11.hpp"
#include "semtrace/error.hpp"
#include "semtrace/http.hpp"
#include "semtrace/service.hpp"

namespace fs = std::filesystem;
using namespace semtrace;

namespace {

struct Globals {
  std::string data_dir;
  std::string ontology;
  bool json = false;
};

Config config_for(const Globals& g) {
  auto c = Config::resolve(g.data_dir.empty() ? std::nullopt
                                              : std::optional<fs::path>(g.data_dir));
  if (!g.ontology.empty()) c.ontology = g.ontology;
  return c;
}

std::vector<std::string> split_list(const std::string& s) {
  std::vector<std::string> out;
  std::stringstream ss(s);
  for (std::string item; std::getline(ss, item, ',');) {
    if (!item.empty()) out.push_back(item);
  }
  return out;
}

std::vector<fs::path> files_in(const fs::path& dir) {
  std::vector<fs::path> out;
  for (const auto& e : fs::directory_iterator(dir)) {
    if (e.is_regular_file() && e.path().filename().string().front() != '.') out.push_back(e.path());
  }
  std::sort(out.begin(), out.end());
  return out;
}

void print_json(const Json& j) { std::cout << j.dump(2) << "\n"; }

std::optional<ExpansionPolicy> policy_of(const std::string& text) {
  if (text.empty()) return std::nullopt;
  auto p = parse_policy(text);
  if (!p) throw ValidationError("unknown expansion policy: " + text);
  return p;
}

std::string pattern_text(const Json& p) {
  auto term = [](const Json& t) { return t.is_null() ? std::string("?") : t.get<std::string>(); };
  return "(" + term(p["subject"]) + ", " + term(p["predicate"]) + ", " + term(p["object"]) + ")";
}

void print_tree(const Json& node, int depth) {
  std::cout << std::string(depth * 2, ' ') << node["name"].get<std::string>();
  if (!node["equivalents"].empty()) {
    std::cout << " =";
    for (const auto& e : node["equivalents"]) std::cout << " " << e.get<std::string>() << ";";
  }
  std::cout << "\n";
  for (const auto& i : node["individuals"]) {
    std::cout << std::string(depth * 2 + 2, ' ') << "- " << i.get<std::string>() << "\n";
  }
  for (const auto& c : node["children"]) print_tree(c, depth + 1);
}

// Ids, or a directory whose files are read in (without persisting) when
// the store does not hold them yet.
std::vector<std::string> trace_ids(Service& svc, const std::string& arg, DocumentKind kind) {
  if (arg.empty()) return {};
  if (!fs::is_directory(arg)) return split_list(arg);
  std::vector<std::string> ids;
  for (const auto& f : files_in(arg)) {
    auto d = read_document(f, kind);
    if (!svc.has_document(d.id)) svc.ingest(d, false, false);
    ids.push_back(d.id);
  }
  return ids;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"semtrace: semantic analysis of requirements, test scripts and test logs"};
  app.require_subcommand(1);
  Globals g;
  app.add_option("--data-dir", g.data_dir, "store directory (default: $SEMTRACE_DATA_DIR or ./semtrace-data)");
  app.add_option("--ontology", g.ontology, "ontology file (stored into the data directory)");
  app.add_flag("--json", g.json, "machine-readable output");

  std::function<void()> action;

  // ontology validate|tree
  auto* onto_cmd = app.add_subcommand("ontology", "ontology checks");
  onto_cmd->require_subcommand(1);
  std::string onto_file;
  auto* validate = onto_cmd->add_subcommand("validate", "load and check an ontology file");
  validate->add_option("file", onto_file, "ontology file");
  validate->callback([&] {
    action = [&] {
      auto path = !onto_file.empty() ? fs::path(onto_file) : fs::path(g.ontology);
      if (path.empty()) path = config_for(g).data_dir / "ontology.onto";
      auto onto = Ontology::load_file(path);
      auto j = validate_report_json(onto);
      if (g.json) return print_json(j);
      std::cout << "ok: " << j["classes"] << " classes, " << j["relations"] << " relations, "
                << j["individuals"] << " individuals, " << j["axioms"] << " axioms\n";
    };
  });
  auto* tree = onto_cmd->add_subcommand("tree", "class hierarchy with individuals");
  tree->callback([&] {
    action = [&] {
      Service svc(config_for(g));
      auto j = svc.tree();
      if (g.json) return print_json(j);
      for (const auto& root : j["classes"]) print_tree(root, 0);
    };
  });

  // ingest
  auto* ingest = app.add_subcommand("ingest", "index, annotate and store documents");
  std::vector<std::string> ingest_paths, links;
  std::string kind_text, id, title, manifest;
  bool replace = false;
  ingest->add_option("paths", ingest_paths, "files or directories");
  ingest->add_option("--kind", kind_text, "requirement, test_description, test_script or log");
  ingest->add_option("--id", id, "document id (single file; default: file stem)");
  ingest->add_option("--title", title, "document title (single file)");
  ingest->add_option("--link", links, "related document id");
  ingest->add_option("--manifest", manifest, "JSON manifest of documents");
  ingest->add_flag("--replace", replace, "replace documents with the same id");
  ingest->callback([&] {
    action = [&] {
      Service svc(config_for(g));
      Json reports = Json::array();
      if (!manifest.empty()) {
        for (const auto& r : svc.ingest_manifest(manifest, replace)) reports.push_back(r.to_json());
      }
      std::optional<DocumentKind> kind;
      if (!kind_text.empty()) {
        kind = parse_document_kind(kind_text);
        if (!kind) throw ValidationError("unknown document kind: " + kind_text);
      }
      std::vector<fs::path> files;
      for (const auto& p : ingest_paths) {
        if (fs::is_directory(p)) {
          auto in_dir = files_in(p);
          files.insert(files.end(), in_dir.begin(), in_dir.end());
        } else {
          files.emplace_back(p);
        }
      }
      if ((!id.empty() || !title.empty()) && files.size() != 1) {
        throw ValidationError("--id and --title need exactly one file");
      }
      for (const auto& f : files) {
        auto d = read_document(f, kind, id.empty() ? std::nullopt : std::optional(id));
        d.title = title;
        d.links.insert(links.begin(), links.end());
        reports.push_back(svc.ingest(std::move(d), replace).to_json());
      }
      if (g.json) return print_json(reports);
      for (const auto& r : reports) {
        std::cout << r["id"].get<std::string>() << ": " << r["kind"].get<std::string>() << ", "
                  << r["asserted"] << " asserted, " << r["derived"] << " derived triples\n";
        for (const auto& w : r["warnings"]) std::cerr << "warning: " << w.get<std::string>() << "\n";
      }
    };
  });

  // run-script
  auto* run = app.add_subcommand("run-script", "execute a script on the mock executor");
  RunRequest req;
  std::string script_arg, out_file;
  Tick start = 0, stride = 0;
  run->add_option("script", script_arg, "script file or stored script id")->required();
  run->add_option("--fail", req.fail, "check forced to FALSE: \"S V O\" or path:<path>");
  run->add_option("--out", out_file, "write the log here");
  run->add_option("--start", start, "first tick");
  run->add_option("--stride", stride, "tick stride");
  run->add_option("--log-id", req.log_id, "log id");
  run->add_flag("--ingest", req.ingest, "store the log");
  run->callback([&] {
    action = [&] {
      Service svc(config_for(g));
      if (fs::is_regular_file(script_arg)) {
        auto d = read_document(script_arg, DocumentKind::kTestScript);
        req.script = d.body;
        req.script_id = d.id;
      } else {
        req.script = script_arg;
      }
      if (run->count("--start")) req.start = start;
      if (run->count("--stride")) req.stride = stride;
      auto j = svc.run(req);
      if (!out_file.empty()) {
        std::ofstream out(out_file, std::ios::binary | std::ios::trunc);
        if (!(out << j["log"].get<std::string>())) throw IoError("cannot write " + out_file);
      }
      if (g.json) return print_json(j);
      if (out_file.empty()) {
        std::cout << j["log"].get<std::string>();
      } else {
        std::cout << j["log_id"].get<std::string>() << ": "
                  << (j["verdict"]["failed"].get<bool>() ? "failed" : "passed") << "\n";
      }
    };
  });

  // search
  auto* search = app.add_subcommand("search", "full-text search");
  SearchRequest sreq;
  std::string fl;
  std::vector<std::string> fq;
  search->add_option("q", sreq.q, "query terms (*:* for all)")->required();
  search->add_option("--fl", fl, "comma-separated fields");
  search->add_option("--facet", sreq.facet_fields, "facet field");
  search->add_option("--fq", fq, "field:value filter");
  search->callback([&] {
    action = [&] {
      Service svc(config_for(g));
      sreq.fl = split_list(fl);
      for (const auto& f : fq) {
        auto colon = f.find(':');
        if (colon == std::string::npos) throw ValidationError("fq must be field:value: " + f);
        sreq.filters.emplace_back(f.substr(0, colon), f.substr(colon + 1));
      }
      auto j = svc.search(sreq);
      if (g.json) return print_json(j);
      for (const auto& h : j["hits"]) {
        std::cout << h["id"].get<std::string>() << "\t" << h["score"].get<double>() << "\n";
      }
      for (const auto& [field, counts] : j["facets"].items()) {
        std::cout << field << ":";
        for (const auto& [v, n] : counts.items()) std::cout << " " << v << "=" << n;
        std::cout << "\n";
      }
    };
  });

  // expand
  auto* expand = app.add_subcommand("expand", "expand a concept, or a triple query S P O");
  std::vector<std::string> terms;
  std::string policy_text;
  expand->add_option("terms", terms, "one concept, or subject predicate object (? = any)")
      ->required()
      ->expected(1, 3);
  expand->add_option("--policy", policy_text, "equivalents, subtypes or supertypes");
  expand->callback([&] {
    action = [&] {
      Service svc(config_for(g));
      auto policy = policy_of(policy_text);
      if (terms.size() == 1) {
        auto j = svc.expand(terms[0], policy);
        if (g.json) return print_json(j);
        for (const auto& n : j["names"]) std::cout << n.get<std::string>() << "\n";
        return;
      }
      if (terms.size() != 3) throw ValidationError("expand takes one term or three");
      auto j = svc.expand_query({parse_pattern_term(terms[0]), parse_pattern_term(terms[1]),
                                 parse_pattern_term(terms[2])},
                                policy);
      if (g.json) return print_json(j);
      for (const auto& p : j["patterns"]) std::cout << pattern_text(p) << "\n";
      for (const auto& w : j["warnings"]) std::cerr << "warning: " << w.get<std::string>() << "\n";
    };
  });

  // semantic-search
  auto* sem = app.add_subcommand("semantic-search", "documents matching an expanded triple query");
  std::vector<std::string> sem_terms, kinds;
  sem->add_option("pattern", sem_terms, "subject predicate object (? = any)")->required()->expected(3);
  sem->add_option("--policy", policy_text, "equivalents, subtypes or supertypes");
  sem->add_option("--kind", kinds, "restrict to document kind");
  sem->callback([&] {
    action = [&] {
      Service svc(config_for(g));
      std::set<DocumentKind> kind_set;
      for (const auto& k : kinds) {
        auto kind = parse_document_kind(k);
        if (!kind) throw ValidationError("unknown document kind: " + k);
        kind_set.insert(*kind);
      }
      auto j = svc.semantic_search({parse_pattern_term(sem_terms[0]), parse_pattern_term(sem_terms[1]),
                                    parse_pattern_term(sem_terms[2])},
                                   policy_of(policy_text), kind_set);
      if (g.json) return print_json(j);
      for (const auto& h : j["hits"]) {
        std::cout << h["id"].get<std::string>() << "\t" << h["matched_patterns"] << " patterns\t"
                  << h["matched_triples"] << " triples\n";
      }
    };
  });

  // similar
  auto* similar = app.add_subcommand("similar", "failed logs similar to a failed log");
  std::string log_id;
  SimilarityOptions sopts;
  bool raw = false;
  similar->add_option("log", log_id, "failed log id")->required();
  similar->add_option("-k", sopts.k, "number of results");
  similar->add_option("--min-score", sopts.min_score, "drop results below this score");
  similar->add_flag("--raw", raw, "compare individuals without class normalization");
  similar->callback([&] {
    action = [&] {
      Service svc(config_for(g));
      sopts.normalize = !raw;
      auto j = svc.similar(log_id, sopts);
      if (g.json) return print_json(j);
      for (const auto& r : j["results"]) {
        std::cout << r["id"].get<std::string>() << "\t" << r["score"].get<double>() << "\n";
      }
    };
  });

  // trace
  auto* trace = app.add_subcommand("trace", "requirement x test traceability matrix (CSV)");
  std::string reqs_arg, tests_arg;
  bool semantic = false, explicit_links = false;
  std::size_t min_shared = 1;
  trace->add_option("requirements", reqs_arg, "directory or comma-separated ids (default: all)");
  trace->add_option("tests", tests_arg, "directory or comma-separated ids (default: all scripts)");
  trace->add_flag("--semantic", semantic, "shared triples (default)");
  trace->add_flag("--explicit", explicit_links, "declared document links");
  trace->add_option("--min-shared", min_shared, "shared triples needed for coverage");
  trace->add_option("--out", out_file, "write the CSV here");
  trace->callback([&] {
    action = [&] {
      if (semantic && explicit_links) throw ValidationError("--semantic and --explicit exclude each other");
      Service svc(config_for(g));
      auto source = explicit_links ? LinkSource::kExplicit : LinkSource::kSemantic;
      auto reqs = trace_ids(svc, reqs_arg, DocumentKind::kRequirement);
      auto tests = trace_ids(svc, tests_arg, DocumentKind::kTestScript);
      if (g.json) return print_json(svc.traceability(source, reqs, tests, min_shared));
      auto csv = svc.trace_matrix(source, reqs, tests, min_shared).to_csv();
      if (out_file.empty()) {
        std::cout << csv;
      } else {
        std::ofstream out(out_file, std::ios::binary | std::ios::trunc);
        if (!(out << csv)) throw IoError("cannot write " + out_file);
      }
    };
  });

  // review
  auto* review = app.add_subcommand("review", "mark a traceability cell for review");
  std::string rev_req, rev_test;
  std::optional<std::string> justification;
  bool clear = false;
  review->add_option("requirement", rev_req)->required();
  review->add_option("test", rev_test)->required();
  review->add_option("--justification", justification, "note kept with the requirement");
  review->add_flag("--clear", clear, "remove the mark");
  review->callback([&] {
    action = [&] {
      Service svc(config_for(g));
      auto j = svc.review(rev_req, rev_test, !clear, justification);
      if (g.json) return print_json(j);
      std::cout << (clear ? "cleared " : "marked ") << rev_req << " / " << rev_test << "\n";
    };
  });

  // annotate
  auto* annotate = app.add_subcommand("annotate", "entity spans and triples of a text");
  std::string text_file;
  annotate->add_option("file", text_file, "text file, - for stdin")->required();
  annotate->callback([&] {
    action = [&] {
      Service svc(config_for(g));
      std::string text;
      if (text_file == "-") {
        std::ostringstream ss;
        ss << std::cin.rdbuf();
        text = ss.str();
      } else {
        text = read_document(text_file, DocumentKind::kRequirement).body;
      }
      auto j = svc.annotate(text);
      if (g.json) return print_json(j);
      for (const auto& s : j["spans"]) {
        std::cout << "[" << s["start"] << "," << s["end"] << ") " << s["surface"].get<std::string>()
                  << " -> " << s["entity"].get<std::string>() << "\n";
      }
      for (const auto& t : j["triples"]) {
        std::cout << "(" << t[0].get<std::string>() << ", " << t[1].get<std::string>() << ", "
                  << t[2].get<std::string>() << ") " << t[3].get<std::string>() << "\n";
      }
    };
  });

  // serve
  auto* serve_cmd = app.add_subcommand("serve", "HTTP API");
  std::string host;
  int port = 0;
  serve_cmd->add_option("--host", host, "bind address");
  serve_cmd->add_option("--port", port, "port");
  serve_cmd->callback([&] {
    action = [&] {
      auto c = config_for(g);
      if (!host.empty()) c.host = host;
      if (port) c.port = port;
      Service svc(c);
      serve(svc);
    };
  });

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e);
  }
  try {
    action();
  } catch (const std::exception& e) {
    if (g.json) {
      print_json(error_json(e));
    } else {
      std::cerr << "error: " << error_json(e)["error"]["code"].get<std::string>() << ": " << e.what()
                << "\n";
    }
    return http_status(e) == 404 ? 3 : (http_status(e) == 400 ? 2 : 1);
  }
  return 0;
}
