#include "doctest.h"

#include <algorithm>
#include <cmath>

#include "fixtures.hpp"
#include "generators.hpp"
#include "search_oracle.hpp"
#include "semtrace/error.hpp"
#include "semtrace/textindex.hpp"

using namespace semtrace;
using semtrace::testing::read_fixture;

namespace {

Document doc(std::string id, std::string body, std::map<std::string, std::string> fields = {},
             DocumentKind kind = DocumentKind::kLog) {
  Document d;
  d.id = std::move(id);
  d.kind = kind;
  d.title = "";
  d.body = std::move(body);
  d.fields = std::move(fields);
  return d;
}

void check_against_oracle(const TextIndex& index, const std::vector<Document>& docs,
                          const SearchRequest& req) {
  auto got = index.search(req);
  auto want = semtrace::testing::oracle_search(docs, req.q, req.facet_fields, req.filters);
  REQUIRE(got.hits.size() == want.hits.size());
  for (std::size_t i = 0; i < got.hits.size(); ++i) {
    CHECK(got.hits[i].id == want.hits[i].id);
    CHECK(std::abs(got.hits[i].score - want.hits[i].score) <= 1e-9);
  }
  CHECK(got.facets == want.facets);
}

}  // namespace

TEST_CASE("analyze") {
  CHECK(analyze("Balise_Group A'") == std::vector<std::string>{"balise", "group", "a"});
  CHECK(analyze("").empty());
  CHECK(analyze("OBU sends MA to OBU") ==
        std::vector<std::string>{"obu", "sends", "ma", "to", "obu"});
  CHECK(analyze("Time 767stimulate") == std::vector<std::string>{"time", "767stimulate"});
}

TEST_CASE("stop words never include domain terms") {
  for (const char* term : {"ma", "som", "obu", "rbc", "send"}) {
    CHECK_FALSE(stop_words().contains(term));
  }
  CHECK(stop_words().contains("the"));
}

TEST_CASE("index_document: document frequency and duplicates") {
  TextIndex index;
  index.index_document(doc("a", "the balise"));
  index.index_document(doc("b", "Balise group"));
  CHECK(index.df("balise") == 2);
  CHECK(index.df("group") == 1);
  CHECK_THROWS_AS(index.index_document(doc("a", "x")), DuplicateId);
  CHECK_NOTHROW(index.index_document(doc("a", "x"), true));
  CHECK(index.df("balise") == 1);
  const auto* p = index.postings("x");
  REQUIRE(p != nullptr);
  CHECK(p->size() == 1);
}

TEST_CASE("delete then search finds nothing") {
  TextIndex index;
  index.index_document(doc("a", "telegram"));
  CHECK(index.search({"telegram", {}, {}, {}}).hits.size() == 1);
  CHECK(index.remove("a"));
  CHECK(index.search({"telegram", {}, {}, {}}).hits.empty());
  CHECK(index.df("telegram") == 0);
  CHECK_FALSE(index.remove("a"));
}

TEST_CASE("search: facets over all documents") {
  TextIndex index;
  std::vector<Document> docs = {doc("log1", "x", {{"result", "failed"}}),
                                doc("log2", "y", {{"result", "failed"}}),
                                doc("log3", "z", {{"result", "passed"}})};
  for (const auto& d : docs) index.index_document(d);
  auto r = index.search({"*:*", {}, {"result"}, {}});
  CHECK(r.hits.size() == 3);
  std::map<std::string, std::size_t> expected{{"failed", 2}, {"passed", 1}};
  CHECK(r.facets.at("result") == expected);
  CHECK(r.facets == semtrace::testing::oracle_search(docs, "*:*", {"result"}, {}).facets);
}

TEST_CASE("search: field list limits returned fields") {
  TextIndex index;
  index.index_document(doc("v1", "a video about balises", {{"name", "Balise clip"}}));
  index.index_document(doc("v2", "nothing here"));
  auto r = index.search({"video", {"name", "id"}, {}, {}});
  REQUIRE(r.hits.size() == 1);
  std::vector<std::pair<std::string, std::string>> expected{{"name", "Balise clip"},
                                                            {"id", "v1"}};
  CHECK(r.hits[0].fields == expected);
}

TEST_CASE("search: no match and unknown facet") {
  TextIndex index;
  index.index_document(doc("a", "balise"));
  auto r = index.search({"zzzz", {}, {}, {}});
  CHECK(r.hits.empty());
  CHECK(r.facets.empty());
  CHECK_THROWS_AS(index.search({"balise", {}, {"colour"}, {}}), UnknownFacetField);
  index.declare_field("colour");
  auto r2 = index.search({"balise", {}, {"colour"}, {}});
  CHECK(r2.facets.at("colour").at("(none)") == 1);
}

TEST_CASE("search: filters restrict before ranking and faceting") {
  TextIndex index;
  std::vector<Document> docs = {doc("a", "obu obu", {{"result", "failed"}, {"project", "p"}}),
                                doc("b", "obu", {{"result", "passed"}, {"project", "p"}}),
                                doc("c", "obu rbc", {{"result", "failed"}})};
  for (const auto& d : docs) index.index_document(d);
  SearchRequest req{"obu", {}, {"project"}, {{"result", "failed"}}};
  auto r = index.search(req);
  REQUIRE(r.hits.size() == 2);
  CHECK(r.hits[0].id == "a");
  CHECK(r.facets.at("project").at("p") == 1);
  CHECK(r.facets.at("project").at("(none)") == 1);
  check_against_oracle(index, docs, req);
}

TEST_CASE("top_keywords") {
  SUBCASE("single document: idf is ln 2 and ranking follows frequency") {
    TextIndex index;
    index.index_document(doc("only", "balise balise balise telegram telegram train the the the"));
    auto kw = index.top_keywords("only", 10);
    REQUIRE(kw.size() == 3);
    CHECK(kw[0].term == "balise");
    CHECK(kw[0].score == doctest::Approx(3 * std::log(2.0)).epsilon(1e-12));
    CHECK(kw[1].term == "telegram");
    CHECK(kw[2].term == "train");
  }
  SUBCASE("k beyond vocabulary returns everything, no padding") {
    TextIndex index;
    index.index_document(doc("d", "alpha beta"));
    CHECK(index.top_keywords("d", 50).size() == 2);
  }
  SUBCASE("unknown document") {
    TextIndex index;
    CHECK_THROWS_AS(index.top_keywords("nope", 3), UnknownDocument);
  }
  SUBCASE("SoM requirement over the text fixture corpus") {
    std::vector<Document> docs = {
        doc("som-req", read_fixture("som_requirement.txt"), {}, DocumentKind::kRequirement),
        doc("som-scenario", read_fixture("som_scenario.txt"), {}, DocumentKind::kTestDescription),
        doc("linking-td", read_fixture("linking_test_description.txt"), {},
            DocumentKind::kTestDescription)};
    TextIndex index;
    for (const auto& d : docs) index.index_document(d);
    auto kw = index.top_keywords("som-req", 10);
    auto oracle = semtrace::testing::oracle_keywords(docs, "som-req", 10, stop_words());
    REQUIRE(kw.size() == oracle.size());
    for (std::size_t i = 0; i < kw.size(); ++i) {
      CHECK(kw[i].term == oracle[i].first);
      CHECK(std::abs(kw[i].score - oracle[i].second) <= 1e-12);
    }
    // Frozen from the oracle.
    std::vector<std::string> frozen = {"obu",   "rbc",      "send",      "detects", "emergency",
                                       "valid", "position", "activate", "authority", "ma"};
    std::vector<std::string> terms;
    for (const auto& k : kw) terms.push_back(k.term);
    CHECK(terms == frozen);
  }
}

TEST_CASE("property: ranking and facets equal the brute-force oracle") {
  semtrace::testing::Rng rng(77);
  for (int trial = 0; trial < 10; ++trial) {
    auto docs = semtrace::testing::random_corpus(rng, 40);
    TextIndex index;
    for (const auto& d : docs) index.index_document(d);
    for (const char* q : {"obu", "rbc ma", "the of report", "*:*", "nothing", "balise_group x1"}) {
      check_against_oracle(index, docs, {q, {}, {"result", "kind"}, {}});
      check_against_oracle(index, docs, {q, {}, {"project"}, {{"result", "failed"}}});
    }
  }
}

TEST_CASE("property: insertion order and delete/re-add do not change scores") {
  semtrace::testing::Rng rng(5);
  auto docs = semtrace::testing::random_corpus(rng, 30);
  TextIndex forward, backward;
  for (const auto& d : docs) forward.index_document(d);
  for (auto it = docs.rbegin(); it != docs.rend(); ++it) backward.index_document(*it);
  for (const auto& d : docs) {
    auto a = forward.top_keywords(d.id, 5);
    auto b = backward.top_keywords(d.id, 5);
    REQUIRE(a.size() == b.size());
    for (std::size_t i = 0; i < a.size(); ++i) {
      CHECK(a[i].term == b[i].term);
      CHECK(a[i].score == b[i].score);
    }
  }
  auto before = forward.search({"obu rbc", {}, {}, {}});
  std::size_t df_before = forward.df("obu");
  forward.remove(docs[3].id);
  CHECK(forward.df("obu") <= df_before);
  forward.index_document(docs[3]);
  CHECK(forward.df("obu") == df_before);
  auto after = forward.search({"obu rbc", {}, {}, {}});
  REQUIRE(before.hits.size() == after.hits.size());
  for (std::size_t i = 0; i < before.hits.size(); ++i) {
    CHECK(before.hits[i].id == after.hits[i].id);
    CHECK(before.hits[i].score == after.hits[i].score);
  }
}
