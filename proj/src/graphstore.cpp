#include "semtrace/graphstore.hpp"

#include <algorithm>
#include <fstream>
#include <sstream>

#include "json.hpp"
#include "semtrace/error.hpp"

namespace semtrace {
namespace {

using nlohmann::json;

constexpr std::string_view kHeader = "semtrace-graph v1";

std::string dump(const json& j) {
  return j.dump(-1, ' ', false, json::error_handler_t::replace);
}

json props_json(const Props& p) {
  json j = json::object();
  for (const auto& [k, v] : p) j[k] = v;
  return j;
}

Props json_props(const json& j) {
  if (!j.is_object()) throw FormatVersionError("graph file: props must be an object");
  Props p;
  for (const auto& [k, v] : j.items()) {
    if (!v.is_string()) throw FormatVersionError("graph file: prop values must be strings");
    p[k] = v.get<std::string>();
  }
  return p;
}

// Length of the JSON string literal at the start of `s`, quotes included.
std::size_t json_string_length(std::string_view s) {
  if (s.empty() || s[0] != '"') throw FormatVersionError("graph file: expected quoted label");
  for (std::size_t i = 1; i < s.size(); ++i) {
    if (s[i] == '\\') {
      ++i;
    } else if (s[i] == '"') {
      return i + 1;
    }
  }
  throw FormatVersionError("graph file: unterminated label");
}

NodeId parse_id(const std::string& s) {
  if (s.empty() || !std::all_of(s.begin(), s.end(), ::isdigit)) {
    throw FormatVersionError("graph file: bad node id '" + s + "'");
  }
  return std::stoull(s);
}

std::string prop(const Props& p, const std::string& key) {
  auto it = p.find(key);
  return it == p.end() ? std::string() : it->second;
}

}  // namespace

std::string_view to_string(NodeLabel label) {
  return label == NodeLabel::kDocument ? "DocumentNode" : "EntityNode";
}

NodeId GraphStore::entity(const ConceptName& name, const Ontology* onto) {
  if (auto it = entities_.find(name.canonical()); it != entities_.end()) return it->second;
  std::string kind = "unknown";
  if (onto) {
    if (onto->is_individual(name)) {
      kind = "individual";
    } else if (onto->is_class(name)) {
      kind = "class";
    } else {
      kind = "literal";
    }
  }
  Node n{next_id_++, NodeLabel::kEntity,
         {{"name", name.display()}, {"canonical", name.canonical()}, {"entity_kind", kind}}};
  entities_[name.canonical()] = n.id;
  nodes_.emplace(n.id, std::move(n));
  return entities_[name.canonical()];
}

void GraphStore::drop_document_edges(NodeId doc) {
  const std::string doc_id = prop(nodes_.at(doc).props, "doc_id");
  std::erase_if(edges_, [&](const Edge& e) {
    if (e.label == kMentions) return e.src == doc;
    if (e.label == kLinkedTo) return e.src == doc || e.dst == doc;
    return prop(e.props, "source_doc") == doc_id;
  });
}

void GraphStore::prune_entities() {
  std::set<NodeId> used;
  for (const auto& e : edges_) {
    used.insert(e.src);
    used.insert(e.dst);
  }
  for (auto it = entities_.begin(); it != entities_.end();) {
    if (used.contains(it->second)) {
      ++it;
    } else {
      nodes_.erase(it->second);
      it = entities_.erase(it);
    }
  }
}

void GraphStore::materialize_links() {
  std::erase_if(edges_, [](const Edge& e) { return e.label == kLinkedTo; });
  for (const auto& [doc_id, id] : documents_) {
    auto links = json::parse(prop(nodes_.at(id).props, "links").empty()
                                 ? "[]"
                                 : prop(nodes_.at(id).props, "links"));
    for (const auto& target : links) {
      auto it = documents_.find(target.get<std::string>());
      if (it != documents_.end() && it->second != id) {
        edges_.insert(Edge{id, it->second, std::string(kLinkedTo), {}});
      }
    }
  }
}

NodeId GraphStore::ingest(const Document& doc, const TripleSet& triples, const Ontology* onto) {
  NodeId id;
  if (auto it = documents_.find(doc.id); it != documents_.end()) {
    id = it->second;
    drop_document_edges(id);
  } else {
    id = next_id_++;
    documents_[doc.id] = id;
  }
  Props props = doc.fields;
  props["doc_id"] = doc.id;
  props["kind"] = std::string(to_string(doc.kind));
  props["title"] = doc.title;
  json links = json::array();
  for (const auto& l : doc.links) links.push_back(l);
  props["links"] = dump(links);
  nodes_[id] = Node{id, NodeLabel::kDocument, std::move(props)};

  for (const auto& t : triples) {
    NodeId s = entity(t.subject, onto);
    NodeId o = entity(t.object, onto);
    Props ep{{"provenance", std::string(to_string(t.provenance))}, {"source_doc", doc.id}};
    if (t.observed) ep["observed"] = *t.observed ? "true" : "false";
    if (t.counterpart) ep["counterpart"] = t.counterpart->display();
    edges_.insert(Edge{s, o, t.predicate.display(), std::move(ep)});
    edges_.insert(Edge{id, s, std::string(kMentions), {}});
    edges_.insert(Edge{id, o, std::string(kMentions), {}});
  }
  materialize_links();
  prune_entities();
  return id;
}

bool GraphStore::remove_document(const std::string& doc_id) {
  auto it = documents_.find(doc_id);
  if (it == documents_.end()) return false;
  drop_document_edges(it->second);
  nodes_.erase(it->second);
  documents_.erase(it);
  materialize_links();
  prune_entities();
  return true;
}

Triple GraphStore::edge_triple(const Edge& e) const {
  Triple t{ConceptName(prop(nodes_.at(e.src).props, "name")),
           ConceptName(e.label),
           ConceptName(prop(nodes_.at(e.dst).props, "name")),
           parse_provenance(prop(e.props, "provenance")).value_or(Provenance::kAsserted),
           prop(e.props, "source_doc"),
           std::nullopt,
           std::nullopt};
  if (auto c = prop(e.props, "counterpart"); !c.empty()) t.counterpart = ConceptName(c);
  if (auto o = prop(e.props, "observed"); !o.empty()) t.observed = o == "true";
  return t;
}

namespace {

bool triple_before(const Triple& a, const Triple& b) {
  if (a.key() != b.key()) return a.key() < b.key();
  return a.source_doc < b.source_doc;
}

void sort_unique(std::vector<Triple>& v) {
  std::sort(v.begin(), v.end(), triple_before);
  v.erase(std::unique(v.begin(), v.end(),
                      [](const Triple& a, const Triple& b) {
                        return a.key() == b.key() && a.source_doc == b.source_doc;
                      }),
          v.end());
}

}  // namespace

std::vector<Triple> GraphStore::match(const TriplePattern& pattern, bool subclass_aware,
                                      const Ontology* onto, bool allow_all) const {
  if (pattern.all_wildcard() && !allow_all) throw AllWildcardWithoutFlag();
  if (subclass_aware && !onto) throw ValidationError("subclass-aware matching needs an ontology");

  PatternTerm predicate = pattern.predicate;
  std::optional<ConceptName> subject_class, object_class;
  if (subclass_aware) {
    if (predicate) {
      if (const auto* rel = onto->resolve_relation(predicate->canonical())) predicate = rel->name;
    }
    if (pattern.subject) subject_class = onto->resolve_class(pattern.subject->canonical());
    if (pattern.object) object_class = onto->resolve_class(pattern.object->canonical());
  }
  auto term_ok = [&](const PatternTerm& bound, const std::optional<ConceptName>& cls,
                     const ConceptName& value) {
    if (!bound || *bound == value) return true;
    if (!cls) return false;
    auto type = onto->type_of(value);
    return type && onto->subsumes(*cls, *type);
  };

  std::vector<Triple> out;
  for (const auto& e : edges_) {
    if (e.structural()) continue;
    Triple t = edge_triple(e);
    if (predicate && !(*predicate == t.predicate)) continue;
    if (!term_ok(pattern.subject, subject_class, t.subject)) continue;
    if (!term_ok(pattern.object, object_class, t.object)) continue;
    out.push_back(std::move(t));
  }
  sort_unique(out);
  return out;
}

std::vector<Triple> GraphStore::triples_of(const std::string& doc_id) const {
  std::vector<Triple> out;
  for (const auto& e : edges_) {
    if (!e.structural() && prop(e.props, "source_doc") == doc_id) out.push_back(edge_triple(e));
  }
  sort_unique(out);
  return out;
}

std::set<std::string> GraphStore::linked(const std::string& doc_id) const {
  std::set<std::string> out;
  auto id = document_node(doc_id);
  if (!id) return out;
  for (const auto& e : edges_) {
    if (e.label != kLinkedTo) continue;
    if (e.src == *id) out.insert(prop(nodes_.at(e.dst).props, "doc_id"));
    if (e.dst == *id) out.insert(prop(nodes_.at(e.src).props, "doc_id"));
  }
  return out;
}

std::optional<NodeId> GraphStore::document_node(const std::string& doc_id) const {
  auto it = documents_.find(doc_id);
  if (it == documents_.end()) return std::nullopt;
  return it->second;
}

std::optional<NodeId> GraphStore::entity_node(const ConceptName& name) const {
  auto it = entities_.find(name.canonical());
  if (it == entities_.end()) return std::nullopt;
  return it->second;
}

const Node* GraphStore::node(NodeId id) const {
  auto it = nodes_.find(id);
  return it == nodes_.end() ? nullptr : &it->second;
}

std::vector<std::string> GraphStore::document_ids() const {
  std::vector<std::string> out;
  for (const auto& [id, _] : documents_) out.push_back(id);
  return out;
}

std::string GraphStore::serialize() const {
  std::string out(kHeader);
  out += '\n';
  for (const auto& [id, n] : nodes_) {
    out += "N " + std::to_string(id) + ' ' + std::string(to_string(n.label)) + ' ' +
           dump(props_json(n.props)) + '\n';
  }
  for (const auto& e : edges_) {
    out += "E " + std::to_string(e.src) + ' ' + std::to_string(e.dst) + ' ' + dump(json(e.label)) +
           ' ' + dump(props_json(e.props)) + '\n';
  }
  out += "END " + std::to_string(nodes_.size()) + ' ' + std::to_string(edges_.size()) + '\n';
  return out;
}

GraphStore GraphStore::deserialize(std::string_view text) {
  GraphStore g;
  std::istringstream in{std::string(text)};
  std::string line;
  if (!std::getline(in, line) || line != kHeader) {
    throw FormatVersionError("graph file: expected header '" + std::string(kHeader) + "'");
  }
  bool ended = false;
  try {
    while (std::getline(in, line)) {
      if (ended) throw FormatVersionError("graph file: content after END");
      std::istringstream ls(line);
      std::string tag;
      ls >> tag;
      if (tag == "N") {
        std::string id, label;
        ls >> id >> label;
        Node n;
        n.id = parse_id(id);
        if (label == "DocumentNode") {
          n.label = NodeLabel::kDocument;
        } else if (label == "EntityNode") {
          n.label = NodeLabel::kEntity;
        } else {
          throw FormatVersionError("graph file: unknown node label '" + label + "'");
        }
        std::string rest;
        std::getline(ls, rest);
        n.props = json_props(json::parse(rest));
        if (!g.nodes_.emplace(n.id, n).second) throw FormatVersionError("graph file: duplicate node");
      } else if (tag == "E") {
        std::string src, dst;
        ls >> src >> dst;
        std::string rest;
        std::getline(ls, rest);
        std::string_view r = rest;
        r.remove_prefix(std::min(r.find_first_not_of(' '), r.size()));
        std::size_t len = json_string_length(r);
        Edge e{parse_id(src), parse_id(dst), json::parse(r.substr(0, len)).get<std::string>(),
               json_props(json::parse(r.substr(len)))};
        if (!g.nodes_.contains(e.src) || !g.nodes_.contains(e.dst)) {
          throw FormatVersionError("graph file: edge endpoint missing");
        }
        g.edges_.insert(std::move(e));
      } else if (tag == "END") {
        std::size_t n = 0, m = 0;
        if (!(ls >> n >> m) || n != g.nodes_.size() || m != g.edges_.size()) {
          throw FormatVersionError("graph file: counts do not match END record");
        }
        ended = true;
      } else if (!line.empty()) {
        throw FormatVersionError("graph file: unknown record '" + tag + "'");
      }
    }
  } catch (const json::exception& e) {
    throw FormatVersionError(std::string("graph file: ") + e.what());
  }
  if (!ended) throw FormatVersionError("graph file: truncated (no END record)");
  g.reindex();
  return g;
}

void GraphStore::reindex() {
  documents_.clear();
  entities_.clear();
  next_id_ = 1;
  for (const auto& [id, n] : nodes_) {
    next_id_ = std::max(next_id_, id + 1);
    if (n.label == NodeLabel::kDocument) {
      documents_[prop(n.props, "doc_id")] = id;
    } else {
      entities_[prop(n.props, "canonical")] = id;
    }
  }
}

void GraphStore::save(const std::filesystem::path& path) const {
  auto tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw IoError("cannot write " + tmp.string());
    out << serialize();
    out.flush();
    if (!out) throw IoError("write failed for " + tmp.string());
  }
  std::error_code ec;
  std::filesystem::rename(tmp, path, ec);
  if (ec) throw IoError("cannot rename " + tmp.string() + ": " + ec.message());
}

GraphStore GraphStore::load(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot read " + path.string());
  std::ostringstream buf;
  buf << in.rdbuf();
  return deserialize(buf.str());
}

}  // namespace semtrace
