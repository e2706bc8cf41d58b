#pragma once

#include <filesystem>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <unordered_map>
#include <utility>
#include <vector>

#include "semtrace/concept_name.hpp"

namespace semtrace {

using NameSet = std::set<ConceptName>;
using NamePairSet = std::set<std::pair<ConceptName, ConceptName>>;

enum class EntityKind { kClass, kIndividual };

enum class ExpansionPolicy { kEquivalentsOnly, kWithSubtypes, kWithSupertypes };

std::string_view to_string(EntityKind kind);
std::string_view to_string(ExpansionPolicy policy);
// Accepts "equivalents", "subtypes", "supertypes" and the enumerator spellings.
std::optional<ExpansionPolicy> parse_policy(std::string_view text);

struct OntologyClass {
  ConceptName name;
  NameSet labels;  // always contains `name`
  std::optional<ConceptName> category;
};

struct Relation {
  ConceptName name;
  ConceptName domain;
  ConceptName range;
  std::optional<ConceptName> inverse;
  NameSet labels;  // extra surface forms (verb forms, aliases); excludes `name`
};

struct Individual {
  ConceptName name;
  ConceptName class_of;
};

struct Axiom {
  enum class Kind { kSubClassOf, kEquivalentClass, kInverseOf };
  Kind kind;
  ConceptName first;
  ConceptName second;

  friend auto operator<=>(const Axiom&, const Axiom&) = default;
};

struct EntityRef {
  ConceptName name;
  EntityKind kind;
};

// Terminological knowledge: classes, relations, individuals and axioms,
// with derived indices (label lookup, equivalence partition, subclass
// closure).  Immutable once built; share it by `shared_ptr<const Ontology>`.
class Ontology {
 public:
  Ontology() = default;

  // Parses the line-oriented ontology format.  Throws ParseError for
  // malformed lines and ValidationError for semantic violations.
  static Ontology parse(std::string_view text);
  static Ontology load_file(const std::filesystem::path& path);

  // Canonical text form; parse(serialize()) reproduces every query answer.
  std::string serialize() const;

  const std::map<ConceptName, OntologyClass>& classes() const { return classes_; }
  const std::map<ConceptName, Relation>& relations() const { return relations_; }
  const std::map<ConceptName, Individual>& individuals() const { return individuals_; }
  const std::vector<Axiom>& axioms() const { return axioms_; }

  // --- lookup -------------------------------------------------------------
  // Resolves a surface term (class name, class label or individual name).
  std::optional<EntityRef> resolve(std::string_view term) const;
  std::optional<ConceptName> resolve_class(std::string_view term) const;
  bool is_class(const ConceptName& name) const { return classes_.contains(name); }
  bool is_individual(const ConceptName& name) const {
    return individuals_.contains(name);
  }
  // Relation by name or alias label (exact canonical match).
  const Relation* resolve_relation(std::string_view word) const;
  // Relation for an inflected verb token: tries the token itself, then the
  // token with a trailing "s", "es" or "ed" removed.
  const Relation* relation_for_verb(std::string_view token) const;

  // Every class label and individual name with the entity it denotes.
  const std::unordered_map<std::string, EntityRef>& surface_index() const {
    return surface_index_;
  }

  // --- native queries -----------------------------------------------------
  NameSet query_class(std::optional<std::string_view> term = std::nullopt) const;
  // Pairs (individual, declared class).  Throws BothUnbound.
  NamePairSet query_type(std::optional<std::string_view> individual,
                         std::optional<std::string_view> cls) const;
  // Pairs (relation, admissible value).  Throws UnknownEntity.
  NamePairSet query_property_value(std::string_view entity) const;

  NameSet subclasses(std::string_view cls, bool transitive) const;
  NameSet superclasses(std::string_view cls, bool transitive) const;
  NameSet equivalents(std::string_view cls) const;
  NameSet expand_concept(std::string_view term, ExpansionPolicy policy) const;

  // --- reasoning helpers --------------------------------------------------
  // sub ⊑ super under equivalence and transitive subclassing (reflexive).
  bool subsumes(const ConceptName& super, const ConceptName& sub) const;
  // Class an entity is typed by: the class itself, or an individual's class.
  std::optional<ConceptName> type_of(const ConceptName& entity) const;
  // Whether `entity` (class or individual) may fill a slot typed `cls`.
  bool compatible(const ConceptName& entity, const ConceptName& cls) const;
  // Individuals map to their class; everything else is returned unchanged.
  ConceptName normalize_to_class(const ConceptName& entity) const;
  // Declared spelling for a known name, otherwise the name's own display.
  const std::string& display(const ConceptName& name) const;

 private:
  void add_surface(const ConceptName& surface, EntityRef ref);
  void build_indices();
  const ConceptName& group_of(const ConceptName& cls) const;
  const NameSet& group_members(const ConceptName& rep) const;
  ConceptName require_class(std::string_view cls) const;
  NameSet expand_groups(const std::set<ConceptName>& reps) const;

  std::map<ConceptName, OntologyClass> classes_;
  std::map<ConceptName, Relation> relations_;
  std::map<ConceptName, Individual> individuals_;
  std::vector<Axiom> axioms_;

  std::unordered_map<std::string, EntityRef> surface_index_;
  std::unordered_map<std::string, ConceptName> relation_index_;
  std::map<ConceptName, ConceptName> group_rep_;
  std::map<ConceptName, NameSet> group_members_;
  std::map<ConceptName, std::set<ConceptName>> direct_parents_;   // rep -> reps
  std::map<ConceptName, std::set<ConceptName>> direct_children_;  // rep -> reps
  std::map<ConceptName, std::set<ConceptName>> ancestors_;        // rep -> reps
  std::map<ConceptName, std::set<ConceptName>> descendants_;      // rep -> reps
};

}  // namespace semtrace
