#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <vector>

#include "semtrace/document.hpp"
#include "semtrace/ontology.hpp"
#include "semtrace/triple.hpp"

namespace semtrace {

using NodeId = std::uint64_t;
using Props = std::map<std::string, std::string>;

enum class NodeLabel { kDocument, kEntity };
std::string_view to_string(NodeLabel label);

struct Node {
  NodeId id = 0;
  NodeLabel label = NodeLabel::kEntity;
  Props props;
};

inline constexpr std::string_view kMentions = "MENTIONS";
inline constexpr std::string_view kLinkedTo = "LINKED_TO";

// Triple edges carry the relation name as label; the two reserved labels
// above are structural.
struct Edge {
  NodeId src = 0;
  NodeId dst = 0;
  std::string label;
  Props props;

  bool structural() const { return label == kMentions || label == kLinkedTo; }
  friend auto operator<=>(const Edge&, const Edge&) = default;
  friend bool operator==(const Edge&, const Edge&) = default;
};

// Property graph of documents, entities and triple edges.  Not internally
// synchronized; callers serialize writers.
class GraphStore {
 public:
  // Replaces everything previously stored for doc.id.  Entity kinds come
  // from `onto` when given ("literal" for names it does not know).
  NodeId ingest(const Document& doc, const TripleSet& triples, const Ontology* onto = nullptr);
  bool remove_document(const std::string& doc_id);

  // Stored triples unifying with the pattern, sorted by key then source.
  // Subclass-aware matching needs the ontology.
  std::vector<Triple> match(const TriplePattern& pattern, bool subclass_aware = false,
                            const Ontology* onto = nullptr, bool allow_all = false) const;
  std::vector<Triple> triples_of(const std::string& doc_id) const;
  // Documents joined to doc_id by LINKED_TO in either direction.
  std::set<std::string> linked(const std::string& doc_id) const;

  std::optional<NodeId> document_node(const std::string& doc_id) const;
  std::optional<NodeId> entity_node(const ConceptName& name) const;
  const Node* node(NodeId id) const;
  std::vector<std::string> document_ids() const;

  std::size_t node_count() const { return nodes_.size(); }
  std::size_t edge_count() const { return edges_.size(); }
  const std::map<NodeId, Node>& nodes() const { return nodes_; }
  const std::set<Edge>& edges() const { return edges_; }

  std::string serialize() const;
  static GraphStore deserialize(std::string_view text);
  // Atomic: writes a sibling temp file, then renames.
  void save(const std::filesystem::path& path) const;
  static GraphStore load(const std::filesystem::path& path);

 private:
  NodeId entity(const ConceptName& name, const Ontology* onto);
  void drop_document_edges(NodeId doc);
  void prune_entities();
  void materialize_links();
  void reindex();
  Triple edge_triple(const Edge& e) const;

  std::map<NodeId, Node> nodes_;
  std::set<Edge> edges_;
  std::map<std::string, NodeId> documents_;
  std::map<std::string, NodeId> entities_;  // canonical name -> node
  NodeId next_id_ = 1;
};

}  // namespace semtrace
