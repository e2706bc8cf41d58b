#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "semtrace/document.hpp"

namespace semtrace {

// Lowercase alphanumeric tokens in source order; anything else separates.
std::vector<std::string> analyze(std::string_view text);

// Shipped English stop-word list (version 1).  Never contains domain terms.
const std::set<std::string>& stop_words();
inline constexpr int kStopWordListVersion = 1;

// tf * ln(1 + N / df)
double tf_idf(std::size_t tf, std::size_t doc_count, std::size_t df);

struct KeywordScore {
  std::string term;
  double score = 0.0;
};

inline constexpr std::string_view kMatchAll = "*:*";
inline constexpr std::string_view kNoValue = "(none)";

struct SearchRequest {
  std::string q;
  std::vector<std::string> fl;            // empty -> id, title, kind
  std::vector<std::string> facet_fields;
  std::vector<std::pair<std::string, std::string>> filters;  // field:value
};

struct SearchHit {
  std::string id;
  double score = 0.0;
  std::vector<std::pair<std::string, std::string>> fields;  // in fl order
};

using FacetCounts = std::map<std::string, std::map<std::string, std::size_t>>;

struct SearchResult {
  std::vector<SearchHit> hits;
  FacetCounts facets;
};

// Inverted index over documents with TF-IDF ranking, field selection and
// facet counting.  Not internally synchronized: callers serialize writers.
class TextIndex {
 public:
  // Throws DuplicateId when the id exists and `replace` is false.
  const std::string& index_document(Document doc, bool replace = false);
  bool remove(const std::string& id);

  const Document* find(const std::string& id) const;
  const std::map<std::string, Document>& documents() const { return docs_; }
  std::size_t doc_count() const { return docs_.size(); }
  std::size_t df(const std::string& term) const;
  std::size_t tf(const std::string& term, const std::string& id) const;
  // Postings for a term, sorted by document id.
  const std::map<std::string, std::uint32_t>* postings(const std::string& term) const;

  // Facet/filter fields known beyond those declared by indexed documents.
  void declare_field(const std::string& name) { declared_fields_.insert(name); }
  bool is_known_field(const std::string& name) const;

  // Throws UnknownFacetField for an unknown facet or filter field.
  SearchResult search(const SearchRequest& request) const;

  // Throws UnknownDocument.
  std::vector<KeywordScore> top_keywords(const std::string& id, std::size_t k) const;

  // id, title, kind and body are built in; anything else reads doc.fields.
  static std::optional<std::string> field_value(const Document& doc, const std::string& field);

 private:
  std::map<std::string, Document> docs_;
  std::map<std::string, std::map<std::string, std::uint32_t>> doc_terms_;   // id -> tf
  std::map<std::string, std::map<std::string, std::uint32_t>> postings_;    // term -> id -> tf
  std::map<std::string, std::size_t> field_refcount_;
  std::set<std::string> declared_fields_;
};

}  // namespace semtrace
