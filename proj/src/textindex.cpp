#include "semtrace/textindex.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <optional>

#include "semtrace/error.hpp"

namespace semtrace {

std::vector<std::string> analyze(std::string_view text) {
  std::vector<std::string> out;
  std::string cur;
  for (char ch : text) {
    auto c = static_cast<unsigned char>(ch);
    if (std::isalnum(c)) {
      cur.push_back(static_cast<char>(std::tolower(c)));
    } else if (!cur.empty()) {
      out.push_back(std::move(cur));
      cur.clear();
    }
  }
  if (!cur.empty()) out.push_back(std::move(cur));
  return out;
}

const std::set<std::string>& stop_words() {
  static const std::set<std::string> words = {
      "a",       "about",  "above",   "after",  "again",   "against", "all",    "also",
      "an",      "and",    "any",     "are",    "as",      "at",      "be",     "because",
      "been",    "before", "being",   "below",  "between", "both",    "but",    "by",
      "can",     "could",  "did",     "do",     "does",    "doing",   "down",   "during",
      "each",    "else",   "for",     "from",   "further", "had",     "has",    "have",
      "having",  "he",     "her",     "here",   "hers",    "him",     "his",    "how",
      "i",       "if",     "in",      "into",   "is",      "it",      "its",    "itself",
      "just",    "may",    "me",      "might",  "more",    "most",    "must",   "my",
      "no",      "nor",    "not",     "now",    "of",      "off",     "on",     "once",
      "only",    "or",     "other",   "our",    "ours",    "out",     "over",   "own",
      "same",    "shall",  "she",     "should", "so",      "some",    "such",   "than",
      "that",    "the",    "their",   "theirs", "them",    "then",    "there",  "these",
      "they",    "this",   "those",   "through", "till",   "to",      "too",    "under",
      "until",   "up",     "very",    "was",    "we",      "were",    "what",   "when",
      "where",   "which",  "while",   "who",    "whom",    "why",     "will",   "with",
      "would",   "you",    "your",    "yours",
  };
  return words;
}

double tf_idf(std::size_t tf, std::size_t doc_count, std::size_t df) {
  if (tf == 0 || df == 0) return 0.0;
  return static_cast<double>(tf) *
         std::log(1.0 + static_cast<double>(doc_count) / static_cast<double>(df));
}

std::optional<std::string> TextIndex::field_value(const Document& doc, const std::string& field) {
  if (field == "id") return doc.id;
  if (field == "title") return doc.title;
  if (field == "kind") return std::string(to_string(doc.kind));
  if (field == "body") return doc.body;
  auto it = doc.fields.find(field);
  if (it == doc.fields.end()) return std::nullopt;
  return it->second;
}

const std::string& TextIndex::index_document(Document doc, bool replace) {
  if (docs_.contains(doc.id)) {
    if (!replace) throw DuplicateId(doc.id);
    remove(doc.id);
  }
  auto& terms = doc_terms_[doc.id];
  for (const auto* part : {&doc.title, &doc.body}) {
    for (auto& tok : analyze(*part)) ++terms[tok];
  }
  for (const auto& [term, count] : terms) postings_[term][doc.id] = count;
  for (const auto& [field, _] : doc.fields) ++field_refcount_[field];
  auto id = doc.id;
  return docs_.emplace(id, std::move(doc)).first->first;
}

bool TextIndex::remove(const std::string& id) {
  auto it = docs_.find(id);
  if (it == docs_.end()) return false;
  for (const auto& [term, _] : doc_terms_.at(id)) {
    auto p = postings_.find(term);
    p->second.erase(id);
    if (p->second.empty()) postings_.erase(p);
  }
  for (const auto& [field, _] : it->second.fields) {
    if (--field_refcount_[field] == 0) field_refcount_.erase(field);
  }
  doc_terms_.erase(id);
  docs_.erase(it);
  return true;
}

const Document* TextIndex::find(const std::string& id) const {
  auto it = docs_.find(id);
  return it == docs_.end() ? nullptr : &it->second;
}

std::size_t TextIndex::df(const std::string& term) const {
  auto it = postings_.find(term);
  return it == postings_.end() ? 0 : it->second.size();
}

std::size_t TextIndex::tf(const std::string& term, const std::string& id) const {
  auto it = postings_.find(term);
  if (it == postings_.end()) return 0;
  auto d = it->second.find(id);
  return d == it->second.end() ? 0 : d->second;
}

const std::map<std::string, std::uint32_t>* TextIndex::postings(const std::string& term) const {
  auto it = postings_.find(term);
  return it == postings_.end() ? nullptr : &it->second;
}

bool TextIndex::is_known_field(const std::string& name) const {
  return name == "id" || name == "title" || name == "kind" || field_refcount_.contains(name) ||
         declared_fields_.contains(name);
}

SearchResult TextIndex::search(const SearchRequest& request) const {
  for (const auto& f : request.facet_fields) {
    if (!is_known_field(f)) throw UnknownFacetField(f);
  }
  for (const auto& [f, _] : request.filters) {
    if (!is_known_field(f)) throw UnknownFacetField(f);
  }

  auto passes_filters = [&](const Document& doc) {
    for (const auto& [field, value] : request.filters) {
      auto v = field_value(doc, field);
      if (v.value_or(std::string(kNoValue)) != value) return false;
    }
    return true;
  };

  std::map<std::string, double> scores;  // matched doc id -> score
  if (request.q == kMatchAll) {
    for (const auto& [id, doc] : docs_) {
      if (passes_filters(doc)) scores.emplace(id, 0.0);
    }
  } else {
    auto tokens = analyze(request.q);
    std::set<std::string> distinct(tokens.begin(), tokens.end());
    for (const auto& term : distinct) {
      auto p = postings_.find(term);
      if (p == postings_.end()) continue;
      for (const auto& [id, count] : p->second) {
        if (!passes_filters(docs_.at(id))) continue;
        scores[id] += tf_idf(count, docs_.size(), p->second.size());
      }
    }
  }

  SearchResult result;
  for (const auto& f : request.facet_fields) {
    auto& counts = result.facets[f];
    for (const auto& [id, _] : scores) {
      ++counts[field_value(docs_.at(id), f).value_or(std::string(kNoValue))];
    }
  }

  static const std::vector<std::string> kDefaultFl = {"id", "title", "kind"};
  const auto& fl = request.fl.empty() ? kDefaultFl : request.fl;
  result.hits.reserve(scores.size());
  for (const auto& [id, score] : scores) {
    SearchHit hit{id, score, {}};
    const auto& doc = docs_.at(id);
    for (const auto& f : fl) {
      if (f == "score") continue;
      if (auto v = field_value(doc, f)) hit.fields.emplace_back(f, *v);
    }
    result.hits.push_back(std::move(hit));
  }
  std::stable_sort(result.hits.begin(), result.hits.end(),
                   [](const SearchHit& a, const SearchHit& b) {
                     if (a.score != b.score) return a.score > b.score;
                     return a.id < b.id;
                   });
  return result;
}

std::vector<KeywordScore> TextIndex::top_keywords(const std::string& id, std::size_t k) const {
  auto it = doc_terms_.find(id);
  if (it == doc_terms_.end()) throw UnknownDocument(id);
  const auto& stops = stop_words();
  std::vector<KeywordScore> out;
  for (const auto& [term, count] : it->second) {
    if (stops.contains(term)) continue;
    out.push_back({term, tf_idf(count, docs_.size(), df(term))});
  }
  std::sort(out.begin(), out.end(), [](const KeywordScore& a, const KeywordScore& b) {
    if (a.score != b.score) return a.score > b.score;
    return a.term < b.term;
  });
  if (out.size() > k) out.resize(k);
  return out;
}

}  // namespace semtrace
