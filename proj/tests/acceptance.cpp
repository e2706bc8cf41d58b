// Acceptance run: one PASS/FAIL line per criterion, non-zero exit when any
// criterion fails.

#include <sys/wait.h>

#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <iostream>

#include "corpus.hpp"
#include "generators.hpp"
#include "script_generators.hpp"
#include "search_oracle.hpp"
#include "semtrace/annotator.hpp"
#include "semtrace/retrieval.hpp"
#include "semtrace/textindex.hpp"
#include "service_fixture.hpp"
#include "taxonomy_oracle.hpp"

using namespace semtrace;
using semtrace::testing::coin;
using semtrace::testing::fits;
using semtrace::testing::fixture_path;
using semtrace::testing::pick;
using semtrace::testing::railway;
using semtrace::testing::read_fixture;
using semtrace::testing::Rng;
using semtrace::testing::uniform;

namespace fs = std::filesystem;

namespace {

struct Outcome {
  std::vector<std::string> failures;
  std::size_t cases = 0;

  void expect(bool ok, const std::string& what) {
    if (!ok) failures.push_back(what);
  }
};

using Key = std::tuple<std::string, std::string, std::string>;
using KeySet = std::set<Key>;

Key key(const std::string& s, const std::string& p, const std::string& o) {
  return {ConceptName(s).canonical(), ConceptName(p).canonical(), ConceptName(o).canonical()};
}

KeySet keys(const TripleSet& triples) {
  KeySet out;
  for (const auto& t : triples) out.insert(key(t.subject.display(), t.predicate.display(), t.object.display()));
  return out;
}

KeySet keys_json(const Json& arr) {
  KeySet out;
  for (const auto& t : arr) out.insert(key(t[0], t[1], t[2]));
  return out;
}

std::string show(const KeySet& s) {
  std::string out = "{";
  for (const auto& [a, b, c] : s) out += " (" + a + ", " + b + ", " + c + ")";
  return out + " }";
}

bool run_criterion(int n, const std::string& title, double limit_s,
                   const std::function<void(Outcome&)>& body) {
  Outcome o;
  auto t0 = std::chrono::steady_clock::now();
  try {
    body(o);
  } catch (const std::exception& e) {
    o.failures.push_back(std::string("exception: ") + e.what());
  }
  double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  if (secs > limit_s) {
    o.failures.push_back("took " + std::to_string(secs) + " s, limit " + std::to_string(limit_s) + " s");
  }
  bool pass = o.failures.empty();
  char timing[64];
  std::snprintf(timing, sizeof timing, "%.2f s", secs);
  std::cout << "AC" << n << " " << (pass ? "PASS" : "FAIL") << " " << title << " (" << timing;
  if (o.cases) std::cout << ", " << o.cases << " cases";
  std::cout << ")";
  if (!pass) {
    std::cout << ": " << o.failures.front();
    if (o.failures.size() > 1) std::cout << " [+" << o.failures.size() - 1 << " more]";
  }
  std::cout << std::endl;
  return pass;
}

// 1. Concept expansion
void concept_expansion(Outcome& o) {
  const auto& onto = railway();
  std::set<std::string> names;
  for (const auto& n : onto.expand_concept("OBU", ExpansionPolicy::kEquivalentsOnly)) {
    names.insert(n.canonical());
  }
  std::set<std::string> want = {"obu", "ssb", "on-board equipment", "ertms-etcs on-board equipment"};
  o.expect(names == want, "expand_concept(OBU) differs from the four equivalent names");

  TriplePattern p{ConceptName("OBU"), ConceptName("use"), ConceptName("linking information")};
  auto q = expand_triple_query(p, onto, ExpansionPolicy::kEquivalentsOnly);
  KeySet got;
  for (const auto& e : q.patterns) got.insert(key(e.subject->display(), e.predicate->display(), e.object->display()));
  KeySet patterns;
  for (const auto& s : want) patterns.insert(key(s, "use", "linking information"));
  o.expect(got == patterns, "expand_triple_query gave " + show(got));
}

// 2. Requirement and scenario triples
void requirement_triples(Outcome& o) {
  const auto& onto = railway();
  Annotator ann(onto);
  KeySet req = {key("OBU", "perform", "SoM"), key("OBU", "send", "SoM Position Report"),
                key("RBC", "send", "MA"), key("OBU", "receive", "MA"),
                key("RBC", "send", "Emergency Brake")};
  auto text = read_fixture("som_requirement.txt");
  auto got = keys(ann.infer_document_triples(text));
  o.expect(got == req, "requirement triples " + show(got));

  auto glued = text;
  glued.replace(glued.find("Emergency Brake Order"), 21, "EmergencyBrake");
  auto got_glued = keys(ann.infer_document_triples(glued));
  o.expect(got_glued == req, "EmergencyBrake spelling gave " + show(got_glued));
  auto a = onto.resolve("EmergencyBrake");
  auto b = onto.resolve("Emergency Brake");
  o.expect(a && b && a->name == b->name, "EmergencyBrake and Emergency Brake resolve differently");

  KeySet scen = {key("OBU", "send", "SoM Position Report"), key("RBC", "send", "MA"),
                 key("OBU", "receive", "MA")};
  auto got_scen = keys(ann.infer_document_triples(read_fixture("som_scenario.txt")));
  o.expect(got_scen == scen, "scenario triples " + show(got_scen));
}

// 3. Log pipeline
void log_pipeline(Outcome& o) {
  const auto& onto = railway();
  auto verbs = VerbLexicon::from_ontology(onto);
  auto log = parse_log(read_fixture("som_failed.log"), verbs, "som_failed");
  o.expect(log.verdict.failed, "failed log not failed");
  o.expect(log.verdict.at_time == 1001, "verdict time " + std::to_string(log.verdict.at_time));
  if (log.verdict.failing_entry) {
    const auto* c = std::get_if<RelCheck>(&log.entries[*log.verdict.failing_entry].statement);
    o.expect(c != nullptr, "failing entry is not a relational check");
    if (c) {
      o.expect(onto.normalize_to_class(ConceptName(c->subject)) == ConceptName("RBC"), "failing subject");
      o.expect(onto.relation_for_verb(c->verb) && onto.relation_for_verb(c->verb)->name == ConceptName("send"),
               "failing verb");
      o.expect(ConceptName(c->object) == ConceptName("MA"), "failing object");
    }
  } else {
    o.expect(false, "no failing entry");
  }
  KeySet want = {key("OBU1", "send", "SoM Position Report"), key("RBC1", "receive", "SoM Position Report"),
                 key("RBC1", "send", "MA"), key("OBU1", "receive", "MA")};
  auto got = keys(log_triples(log, onto));
  o.expect(got == want, "failed log triples " + show(got));

  auto similar = parse_log(read_fixture("similar.log"), verbs, "similar");
  TripleSet asserted;
  for (const auto& t : log_triples(similar, onto)) {
    if (t.provenance == Provenance::kAsserted) asserted.insert(t);
  }
  KeySet want_sim = {key("Linked balise group list", "contain", "ETCS5233"),
                     key("OBU1", "send", "SoM Position Report"), key("RBC1", "send", "MA")};
  o.expect(keys(asserted) == want_sim, "similar log asserted triples " + show(keys(asserted)));
}

// Failed logs from other failures: corpus scripts failed at each of their
// checks, plus random relational scripts.
std::vector<TestLog> decoy_logs(const Ontology& onto, std::size_t at_least) {
  auto verbs = VerbLexicon::from_ontology(onto);
  auto is_query_failure = [&](const Statement& s) {
    const auto* c = std::get_if<RelCheck>(&s);
    return c && onto.normalize_to_class(ConceptName(c->subject)) == ConceptName("RBC") &&
           ConceptName(c->object) == ConceptName("MA") && onto.relation_for_verb(c->verb) &&
           onto.relation_for_verb(c->verb)->name == ConceptName("send");
  };
  std::vector<TestLog> out;
  auto add_failing_at = [&](const TestScript& script, std::size_t k, const std::string& id) {
    const auto& st = script.statements[k];
    if (!is_check(st) || is_query_failure(st)) return;
    FaultPlan plan;
    if (const auto* c = std::get_if<RelCheck>(&st)) {
      plan.add(FaultPlan::RelRule{ConceptName(c->subject), c->verb, ConceptName(c->object)}, false);
    } else {
      plan.add(FaultPlan::PathRule{ConceptName(std::get<ValueCheck>(st).path)}, false);
    }
    auto log = run_script(script, plan, 100, 1, id);
    if (log.verdict.failed) out.push_back(std::move(log));
  };
  for (const char* name : {"ts_som", "ts_balise", "ts_emergency", "ts_linking_a", "ts_linking_b"}) {
    auto script = parse_script(read_fixture(std::string("corpus/") + name + ".ts"), verbs, name);
    for (std::size_t k = 0; k < script.statements.size(); ++k) {
      add_failing_at(script, k, std::string(name) + "_decoy" + std::to_string(k));
    }
  }
  static const std::vector<std::string> subjects = {"OBU1", "RBC1", "Train1", "OBU", "RBC", "SSB"};
  static const std::vector<std::string> rel_verbs = {"send", "receive", "use", "capt"};
  static const std::vector<std::string> objects = {"MA", "SoM Position Report", "Linking Information",
                                                   "Balise Group", "Emergency Brake", "Position Report"};
  Rng rng(2024);
  for (int i = 0; out.size() < at_least; ++i) {
    TestScript s;
    s.id = "random" + std::to_string(i);
    s.statements.push_back(Stimulate{"Train", std::string("Input") + std::to_string(i)});
    std::size_t checks = uniform(rng, 1, 4);
    for (std::size_t c = 0; c < checks; ++c) {
      std::optional<std::string> to;
      if (coin(rng)) to = pick(rng, subjects);
      s.statements.push_back(RelCheck{pick(rng, subjects), pick(rng, rel_verbs), pick(rng, objects), to});
    }
    add_failing_at(s, uniform(rng, 1, s.statements.size() - 1), "random_decoy" + std::to_string(i));
  }
  return out;
}

// 4. Similarity
void similarity(Outcome& o) {
  const auto& onto = railway();
  auto oracle = Json::parse(read_fixture("oracles/similarity.json"));
  auto verbs = VerbLexicon::from_ontology(onto);
  auto failed = parse_log(read_fixture(oracle["failed_log"]), verbs, "som_failed");
  auto similar = parse_log(read_fixture(oracle["similar_log"]), verbs, "similar");

  auto normalized = [&](const TestLog& log) {
    auto ts = log_triples(log, onto);
    return normalize_triples({ts.begin(), ts.end()}, onto);
  };
  auto a = normalized(failed);
  auto b = normalized(similar);
  o.expect(keys(a) == keys_json(oracle["failed_set"]), "normalized failed set " + show(keys(a)));
  o.expect(keys(b) == keys_json(oracle["similar_set"]), "normalized similar set " + show(keys(b)));
  double by_hand = oracle["intersection"].get<double>() / oracle["union"].get<double>();
  o.expect(std::abs(by_hand - oracle["jaccard"].get<double>()) <= 1e-12, "oracle arithmetic");

  GraphStore g;
  auto add = [&](const TestLog& log) {
    Document d;
    d.id = log.id;
    d.kind = DocumentKind::kLog;
    d.fields["result"] = log.verdict.failed ? "failed" : "passed";
    g.ingest(d, log_triples(log, onto), &onto);
  };
  add(failed);
  add(similar);
  auto decoys = decoy_logs(onto, 12);
  for (const auto& d : decoys) add(d);
  o.expect(decoys.size() >= 10, "only " + std::to_string(decoys.size()) + " decoys");

  SimilarityOptions all;
  all.k = 1000;
  auto results = similar_failures(g, onto, "som_failed", all);
  o.cases = results.size();
  o.expect(results.size() == decoys.size() + 1, "candidate count");
  if (!results.empty()) {
    o.expect(results[0].doc_id == "similar", "ranked first: " + results[0].doc_id);
    o.expect(std::abs(results[0].score - by_hand) <= 1e-12, "score " + std::to_string(results[0].score));
    if (results.size() > 1) {
      o.expect(results[1].score < results[0].score, "tie at the top with " + results[1].doc_id);
    }
  }
}

// 5. Search oracle equivalence
void search_equivalence(Outcome& o) {
  Rng rng(505);
  const std::vector<std::string> queries = {"obu", "rbc ma", "the of report", "*:*", "nothing",
                                            "balise_group x1", "position report som", "LOG 42"};
  for (int trial = 0; trial < 50; ++trial) {
    auto docs = semtrace::testing::random_corpus(rng, 200);
    TextIndex index;
    for (const auto& d : docs) index.index_document(d);
    std::vector<SearchRequest> requests;
    for (const auto& q : queries) {
      requests.push_back({q, {}, {"result", "kind"}, {}});
      requests.push_back({q, {}, {"project"}, {{"result", "failed"}}});
    }
    for (const auto& req : requests) {
      ++o.cases;
      auto got = index.search(req);
      auto want = semtrace::testing::oracle_search(docs, req.q, req.facet_fields, req.filters);
      bool same = got.hits.size() == want.hits.size() && got.facets == want.facets;
      for (std::size_t i = 0; same && i < got.hits.size(); ++i) {
        same = got.hits[i].id == want.hits[i].id &&
               std::abs(got.hits[i].score - want.hits[i].score) <= 1e-9;
      }
      o.expect(same, "trial " + std::to_string(trial) + " query '" + req.q + "'");
    }
    for (int k = 0; k < 4; ++k) {
      ++o.cases;
      const auto& d = pick(rng, docs);
      auto got = index.top_keywords(d.id, 10);
      auto want = semtrace::testing::oracle_keywords(docs, d.id, 10, stop_words());
      bool same = got.size() == want.size();
      for (std::size_t i = 0; same && i < got.size(); ++i) {
        same = got[i].term == want[i].first && std::abs(got[i].score - want[i].second) <= 1e-9;
      }
      o.expect(same, "keywords of " + d.id + " in trial " + std::to_string(trial));
    }
  }
}

TripleSet random_triples(Rng& rng) {
  static const std::vector<std::string> names = {"OBU", "OBU1", "RBC", "RBC1", "Train1", "SSB", "MA",
                                                 "SoM Position Report", "Emergency Brake",
                                                 "Linking Information", "Balise", "Telegram", "IXL"};
  static const std::vector<std::string> preds = {"send", "receive", "use", "contain", "capt"};
  TripleSet out;
  std::size_t n = uniform(rng, 0, 8);
  for (std::size_t i = 0; i < n; ++i) {
    Triple t{ConceptName(pick(rng, names)), ConceptName(pick(rng, preds)), ConceptName(pick(rng, names)),
             Provenance::kAsserted, "d", {}, {}};
    if (coin(rng, 0.6)) t.counterpart = ConceptName(pick(rng, names));
    add_triple(out, t);
  }
  return out;
}

TriplePattern random_pattern(Rng& rng) {
  static const std::vector<std::string> terms = {"OBU", "OBU1", "RBC", "Subsystem", "Onboard Subsystem", "MA",
                                                 "Radio Message", "Message", "Telegram", "nothing"};
  static const std::vector<std::string> preds = {"send", "receive", "use", "contain", "capt"};
  TriplePattern p;
  do {
    p = {};
    if (coin(rng)) p.subject = ConceptName(pick(rng, terms));
    if (coin(rng)) p.predicate = ConceptName(pick(rng, preds));
    if (coin(rng)) p.object = ConceptName(pick(rng, terms));
  } while (p.all_wildcard());
  return p;
}

// 6. Property suites
void properties(Outcome& o) {
  const auto& onto = railway();
  Rng rng(606);
  for (std::size_t i = 0; i < 300; ++i, ++o.cases) {
    auto script = semtrace::testing::random_script(rng, i);
    auto plan = semtrace::testing::random_plan(rng, script);
    auto log = run_script(script, plan, 10, 3, "l");
    std::optional<std::size_t> first_false;
    for (std::size_t k = 0; k < script.statements.size() && !first_false; ++k) {
      if (is_check(script.statements[k]) && !plan.outcome(script.statements[k])) first_false = k;
    }
    std::size_t expected = first_false ? *first_false + 1 : script.statements.size();
    bool ok = log.entries.size() == expected && log.verdict.failed == first_false.has_value();
    for (std::size_t k = 0; ok && k < log.entries.size(); ++k) {
      ok = log.entries[k].statement == script.statements[k] && log.entries[k].time == 10 + 3 * k;
    }
    o.expect(ok, "truncation case " + std::to_string(i));
  }
  for (std::size_t i = 0; i < 300; ++i, ++o.cases) {
    auto script = semtrace::testing::random_script(rng, i);
    auto log = run_script(script, semtrace::testing::random_plan(rng, script), uniform(rng, 0, 99),
                          uniform(rng, 1, 9), "log" + std::to_string(i));
    o.expect(parse_log(render_log(log)) == log, "log round trip case " + std::to_string(i));
  }
  for (std::size_t i = 0; i < 100; ++i, ++o.cases) {
    auto a = Ontology::parse(semtrace::testing::random_ontology_text(rng));
    auto b = Ontology::parse(a.serialize());
    bool ok = b.serialize() == a.serialize() && a.query_class() == b.query_class();
    for (const auto& [c, _] : a.classes()) {
      ok = ok && a.expand_concept(c.display(), ExpansionPolicy::kWithSubtypes) ==
                     b.expand_concept(c.display(), ExpansionPolicy::kWithSubtypes);
    }
    o.expect(ok, "ontology round trip case " + std::to_string(i));
    for (const auto& [c, _] : a.classes()) {
      ++o.cases;
      auto eq = a.expand_concept(c.display(), ExpansionPolicy::kEquivalentsOnly);
      auto sub = a.expand_concept(c.display(), ExpansionPolicy::kWithSubtypes);
      o.expect(std::includes(sub.begin(), sub.end(), eq.begin(), eq.end()), "monotonicity " + c.display());
    }
  }
  for (std::size_t i = 0; i < 200; ++i, ++o.cases) {
    auto t = random_triples(rng);
    bool ok = true;
    for (auto guard : {InverseGuard::kDomainRange, InverseGuard::kNone}) {
      auto once = inverse_closure(t, onto, guard);
      ok = ok && same_keys(inverse_closure(once, onto, guard), once);
    }
    o.expect(ok, "closure idempotence case " + std::to_string(i));
  }
  semtrace::testing::TempDir dir;
  for (int trial = 0; trial < 10; ++trial) {
    GraphStore g;
    std::size_t docs = uniform(rng, 1, 10);
    for (std::size_t d = 0; d < docs; ++d) {
      Document doc;
      doc.id = "d" + std::to_string(d);
      doc.kind = DocumentKind::kLog;
      auto triples = random_triples(rng);
      TripleSet owned;
      for (auto t : triples) {
        t.source_doc = doc.id;
        add_triple(owned, t);
      }
      g.ingest(doc, owned, &onto);
    }
    auto file = dir.path() / ("g" + std::to_string(trial) + ".sg");
    g.save(file);
    auto back = GraphStore::load(file);
    for (int k = 0; k < 100; ++k, ++o.cases) {
      auto p = random_pattern(rng);
      auto rows = [](const std::vector<Triple>& ts) {
        std::vector<std::tuple<std::string, std::string, std::string, std::string>> out;
        for (const auto& t : ts) {
          out.emplace_back(t.subject.canonical(), t.predicate.canonical(), t.object.canonical(), t.source_doc);
        }
        return out;
      };
      bool ok = rows(g.match(p)) == rows(back.match(p)) &&
                rows(g.match(p, true, &onto)) == rows(back.match(p, true, &onto));
      o.expect(ok, "graph save/load pattern case");
    }
  }
  for (const auto& [c, _] : onto.classes()) {
    ++o.cases;
    auto eq = onto.expand_concept(c.display(), ExpansionPolicy::kEquivalentsOnly);
    auto sub = onto.expand_concept(c.display(), ExpansionPolicy::kWithSubtypes);
    o.expect(std::includes(sub.begin(), sub.end(), eq.begin(), eq.end()), "monotonicity " + c.display());
  }
  o.expect(o.cases >= 1000, "only " + std::to_string(o.cases) + " generated cases");
}

std::string quote(const std::string& s) {
  std::string out = "'";
  for (char c : s) out += c == '\'' ? std::string("'\\''") : std::string(1, c);
  return out + "'";
}

struct Run {
  int status;
  std::string out;
};

Run cli(const fs::path& data, const std::vector<std::string>& args) {
  std::string cmd = quote(SEMTRACE_CLI) + " --data-dir " + quote(data.string());
  for (const auto& a : args) cmd += " " + quote(a);
  cmd += " 2>/dev/null";
  FILE* pipe = popen(cmd.c_str(), "r");
  if (!pipe) throw std::runtime_error("popen failed");
  std::string out;
  char buf[4096];
  while (auto n = fread(buf, 1, sizeof buf, pipe)) out.append(buf, n);
  int st = pclose(pipe);
  return {WIFEXITED(st) ? WEXITSTATUS(st) : -1, out};
}

// 7. End to end through the CLI
void end_to_end(Outcome& o) {
  const auto& onto = railway();
  semtrace::testing::TempDir tmp;
  auto data = tmp.path() / "data";
  auto reqs = tmp.path() / "reqs";
  auto tests = tmp.path() / "tests";
  auto logs = tmp.path() / "logs";
  for (const auto& d : {reqs, tests, logs}) fs::create_directories(d);
  const std::vector<std::string> req_ids = {"req_linking", "req_som", "req_start"};
  const std::vector<std::string> test_ids = {"ts_balise", "ts_emergency", "ts_linking_a", "ts_linking_b", "ts_som"};
  for (const auto& r : req_ids) fs::copy_file(fixture_path("corpus/" + r + ".txt"), reqs / (r + ".txt"));
  for (const auto& t : test_ids) fs::copy_file(fixture_path("corpus/" + t + ".ts"), tests / (t + ".ts"));

  auto step = [&](const std::vector<std::string>& args, const char* what) {
    auto r = cli(data, args);
    o.expect(r.status == 0, std::string(what) + " exited " + std::to_string(r.status));
    ++o.cases;
    try {
      return Json::parse(r.out);
    } catch (const std::exception&) {
      o.expect(false, std::string(what) + " printed no JSON");
      return Json();
    }
  };
  auto v = step({"--json", "ontology", "validate", fixture_path("railway.onto").string()}, "validate");
  o.expect(v.value("valid", false), "ontology not valid");
  auto ing = step({"--ontology", fixture_path("railway.onto").string(), "--json", "ingest", "--kind",
                   "requirement", reqs.string()},
                  "ingest requirements");
  o.expect(ing.size() == 3, "requirements ingested: " + std::to_string(ing.size()));
  ing = step({"--json", "ingest", tests.string()}, "ingest scripts");
  o.expect(ing.size() == 5, "scripts ingested: " + std::to_string(ing.size()));

  std::size_t failed = 0;
  for (const auto& t : test_ids) {
    std::vector<std::string> args = {"--json", "run-script", t, "--log-id", t + "_run", "--out",
                                     (logs / (t + "_run.log")).string()};
    if (t == "ts_som") {
      args.push_back("--fail");
      args.push_back("RBC send MA");
    }
    auto r = step(args, "run-script");
    failed += r["verdict"].value("failed", false);
  }
  o.expect(failed == 1, "failed runs: " + std::to_string(failed));
  auto som_log = parse_log(semtrace::testing::slurp(logs / "ts_som_run.log"));
  o.expect(som_log.verdict.failed && som_log.verdict.failing_entry &&
               render_statement(som_log.entries[*som_log.verdict.failing_entry].statement) ==
                   "check RBC send MA to OBU",
           "ts_som log does not fail at RBC send MA");
  ing = step({"--json", "ingest", logs.string()}, "ingest logs");
  o.expect(ing.size() == 5, "logs ingested: " + std::to_string(ing.size()));

  // Oracle inputs: every stored document's triples, read straight from the files.
  Annotator ann(onto);
  std::map<std::string, TripleSet> triples;
  for (const auto& r : req_ids) triples[r] = ann.infer_document_triples(semtrace::testing::slurp(reqs / (r + ".txt")));
  for (const auto& t : test_ids) {
    triples[t] = ann.infer_document_triples(semtrace::testing::slurp(tests / (t + ".ts")));
    auto log = parse_log(semtrace::testing::slurp(logs / (t + "_run.log")), VerbLexicon::from_ontology(onto));
    triples[t + "_run"] = log_triples(log, onto);
  }

  auto hits = step({"--json", "semantic-search", "OBU", "use", "linking information"}, "semantic-search");
  std::set<std::string> got_hits, want_hits;
  for (const auto& h : hits["hits"]) got_hits.insert(h["id"].get<std::string>());
  auto group = onto.expand_concept("OBU", ExpansionPolicy::kEquivalentsOnly);
  for (const auto& [id, ts] : triples) {
    for (const auto& t : ts) {
      bool subject_ok = std::any_of(group.begin(), group.end(),
                                    [&](const ConceptName& g) { return fits(onto, t.subject, g); });
      if (subject_ok && t.predicate == ConceptName("use") && fits(onto, t.object, ConceptName("Linking Information"))) {
        want_hits.insert(id);
      }
    }
  }
  o.expect(got_hits == want_hits, "semantic-search hits differ from the oracle");
  o.expect(got_hits.contains("ts_linking_a") && got_hits.contains("ts_linking_b"), "linking scripts not retrieved");

  // Coverage by set intersection over class-normalized triples.
  auto normalized = [&](const TripleSet& ts) {
    std::set<Key> out;
    auto cls = [&](const ConceptName& n) {
      auto it = onto.individuals().find(n);
      return it == onto.individuals().end() ? n.display() : it->second.class_of.display();
    };
    for (const auto& t : ts) out.insert(key(cls(t.subject), t.predicate.display(), cls(t.object)));
    return out;
  };
  std::string want_csv = "requirement";
  for (const auto& t : test_ids) want_csv += "," + t;
  want_csv += "\n";
  std::size_t uncovered = 0, covered_cells = 0;
  for (const auto& r : req_ids) {
    want_csv += r;
    auto rs = normalized(triples[r]);
    bool any = false;
    for (const auto& t : test_ids) {
      auto ts = normalized(triples[t]);
      bool shared = std::any_of(rs.begin(), rs.end(), [&](const Key& k) { return ts.contains(k); });
      want_csv += shared ? ",C" : ",U";
      any = any || shared;
      covered_cells += shared;
    }
    uncovered += !any;
    want_csv += "\n";
  }
  o.expect(uncovered >= 1 && covered_cells >= 1, "oracle matrix lacks covered or uncovered rows");
  auto trace = cli(data, {"trace", "--semantic", reqs.string(), tests.string()});
  ++o.cases;
  o.expect(trace.status == 0, "trace exited " + std::to_string(trace.status));
  o.expect(trace.out == want_csv, "trace CSV differs:\n" + trace.out + "expected:\n" + want_csv);
}

}  // namespace

int main() {
  bool ok = true;
  ok &= run_criterion(1, "golden concept expansion", 1.0, concept_expansion);
  ok &= run_criterion(2, "golden requirement and scenario triples", 1.0, requirement_triples);
  ok &= run_criterion(3, "golden log pipeline", 1.0, log_pipeline);
  ok &= run_criterion(4, "similarity against the hand oracle with decoys", 5.0, similarity);
  ok &= run_criterion(5, "search and keywords equal the brute-force oracle", 60.0, search_equivalence);
  ok &= run_criterion(6, "property suites", 120.0, properties);
  ok &= run_criterion(7, "end-to-end CLI run", 30.0, end_to_end);
  return ok ? 0 : 1;
}
