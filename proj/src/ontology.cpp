#include "semtrace/ontology.hpp"

#include <algorithm>
#include <fstream>
#include <functional>
#include <sstream>

#include "semtrace/error.hpp"

namespace semtrace {

std::string_view to_string(EntityKind kind) {
  return kind == EntityKind::kClass ? "class" : "individual";
}

std::string_view to_string(ExpansionPolicy policy) {
  switch (policy) {
    case ExpansionPolicy::kEquivalentsOnly:
      return "equivalents";
    case ExpansionPolicy::kWithSubtypes:
      return "subtypes";
    case ExpansionPolicy::kWithSupertypes:
      return "supertypes";
  }
  return "equivalents";
}

std::optional<ExpansionPolicy> parse_policy(std::string_view text) {
  std::string t = canonicalize(text);
  std::erase(t, ' ');
  if (t == "equivalents" || t == "equivalentsonly") return ExpansionPolicy::kEquivalentsOnly;
  if (t == "subtypes" || t == "withsubtypes") return ExpansionPolicy::kWithSubtypes;
  if (t == "supertypes" || t == "withsupertypes") return ExpansionPolicy::kWithSupertypes;
  return std::nullopt;
}

namespace {

struct Token {
  std::string text;
  bool quoted = false;

  bool is(std::string_view word) const { return !quoted && canonicalize(text) == word; }
};

std::vector<Token> lex_line(std::string_view line, std::size_t lineno) {
  std::vector<Token> out;
  std::size_t i = 0;
  while (i < line.size()) {
    char c = line[i];
    if (std::isspace(static_cast<unsigned char>(c))) {
      ++i;
      continue;
    }
    if (c == '"') {
      auto close = line.find('"', i + 1);
      if (close == std::string_view::npos) throw ParseError(lineno, "unterminated quote");
      out.push_back({std::string(line.substr(i + 1, close - i - 1)), true});
      i = close + 1;
      continue;
    }
    if (c == ';' || c == ':') {
      out.push_back({std::string(1, c), false});
      ++i;
      continue;
    }
    std::size_t j = i;
    while (j < line.size() && !std::isspace(static_cast<unsigned char>(line[j])) &&
           line[j] != ';' && line[j] != '"') {
      // "labels:" and "category:" keep their colon; a bare "Train1:" does not.
      if (line[j] == ':') {
        auto word = canonicalize(line.substr(i, j - i));
        if (word == "labels" || word == "category") ++j;
        break;
      }
      ++j;
    }
    out.push_back({std::string(line.substr(i, j - i)), false});
    i = j;
  }
  return out;
}

std::string strip_comment(std::string_view line) {
  bool in_quote = false;
  for (std::size_t i = 0; i < line.size(); ++i) {
    if (line[i] == '"') in_quote = !in_quote;
    if (line[i] == '#' && !in_quote) return std::string(line.substr(0, i));
  }
  return std::string(line);
}

// Joins tokens [begin, end) into ';'-separated groups.
std::vector<std::string> groups(const std::vector<Token>& toks, std::size_t begin,
                                std::size_t end) {
  std::vector<std::string> out;
  std::string cur;
  for (std::size_t i = begin; i < end; ++i) {
    if (!toks[i].quoted && toks[i].text == ";") {
      if (!cur.empty()) out.push_back(cur);
      cur.clear();
      continue;
    }
    if (!cur.empty()) cur += ' ';
    cur += toks[i].text;
  }
  if (!cur.empty()) out.push_back(cur);
  return out;
}

std::string quote(const ConceptName& name) {
  const auto& d = name.display();
  bool plain = !d.empty() && std::none_of(d.begin(), d.end(), [](char c) {
    return std::isspace(static_cast<unsigned char>(c)) || c == ';' || c == ':' ||
           c == '#' || c == '"';
  });
  return plain ? d : "\"" + d + "\"";
}

}  // namespace

Ontology Ontology::parse(std::string_view text) {
  Ontology onto;
  std::istringstream in{std::string(text)};
  std::string raw;
  std::size_t lineno = 0;
  while (std::getline(in, raw)) {
    ++lineno;
    auto toks = lex_line(strip_comment(raw), lineno);
    if (toks.empty()) continue;
    const auto& head = toks[0];
    auto need = [&](std::size_t n, const char* shape) {
      if (toks.size() < n) throw ParseError(lineno, std::string("expected ") + shape);
    };
    if (head.is("class")) {
      need(2, "class <name>");
      OntologyClass cls{ConceptName(toks[1].text), {}, std::nullopt};
      if (cls.name.empty()) throw ParseError(lineno, "empty class name");
      cls.labels.insert(cls.name);
      std::size_t i = 2;
      while (i < toks.size()) {
        if (toks[i].is("labels:")) {
          std::size_t j = i + 1;
          while (j < toks.size() && !toks[j].is("category:")) ++j;
          for (const auto& label : groups(toks, i + 1, j)) {
            ConceptName l(label);
            if (!cls.labels.insert(l).second && !(l == cls.name)) {
              throw ValidationError("duplicate label '" + label + "' on class " +
                                    cls.name.display());
            }
          }
          i = j;
        } else if (toks[i].is("category:")) {
          auto g = groups(toks, i + 1, toks.size());
          if (g.size() != 1) throw ParseError(lineno, "expected category: <top-class>");
          cls.category = ConceptName(g[0]);
          i = toks.size();
        } else {
          throw ParseError(lineno, "unexpected '" + toks[i].text +
                                       "' (expected labels: or category:)");
        }
      }
      if (onto.classes_.contains(cls.name)) {
        throw ValidationError("class declared twice: " + cls.name.display());
      }
      onto.classes_.emplace(cls.name, std::move(cls));
    } else if (head.is("relation")) {
      need(6, "relation <name> domain <class> range <class>");
      if (!toks[2].is("domain") || !toks[4].is("range")) {
        throw ParseError(lineno, "expected relation <name> domain <class> range <class>");
      }
      Relation rel{ConceptName(toks[1].text), ConceptName(toks[3].text),
                   ConceptName(toks[5].text), std::nullopt, {}};
      std::size_t i = 6;
      while (i < toks.size()) {
        if (toks[i].is("inverse")) {
          if (i + 1 >= toks.size()) throw ParseError(lineno, "expected inverse <name>");
          rel.inverse = ConceptName(toks[i + 1].text);
          i += 2;
        } else if (toks[i].is("labels:")) {
          for (const auto& label : groups(toks, i + 1, toks.size())) {
            ConceptName l(label);
            if (!(l == rel.name)) rel.labels.insert(l);
          }
          i = toks.size();
        } else {
          throw ParseError(lineno, "unexpected '" + toks[i].text + "' in relation");
        }
      }
      if (onto.relations_.contains(rel.name)) {
        throw ValidationError("relation declared twice: " + rel.name.display());
      }
      onto.relations_.emplace(rel.name, std::move(rel));
    } else if (head.is("individual")) {
      if (toks.size() != 4 || toks[2].text != ":") {
        throw ParseError(lineno, "expected individual <name> : <class>");
      }
      Individual ind{ConceptName(toks[1].text), ConceptName(toks[3].text)};
      if (onto.individuals_.contains(ind.name)) {
        throw ValidationError("individual declared twice: " + ind.name.display());
      }
      onto.individuals_.emplace(ind.name, std::move(ind));
    } else if (head.is("subclass") || head.is("equivalent")) {
      if (toks.size() != 3) {
        throw ParseError(lineno, "expected " + canonicalize(head.text) + " <a> <b>");
      }
      onto.axioms_.push_back({head.is("subclass") ? Axiom::Kind::kSubClassOf
                                                  : Axiom::Kind::kEquivalentClass,
                              ConceptName(toks[1].text), ConceptName(toks[2].text)});
    } else {
      throw ParseError(lineno, "unknown statement '" + head.text + "'");
    }
  }
  onto.build_indices();
  return onto;
}

Ontology Ontology::load_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot read ontology file " + path.string());
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse(buf.str());
}

void Ontology::add_surface(const ConceptName& surface, EntityRef ref) {
  auto [it, inserted] = surface_index_.emplace(surface.canonical(), ref);
  if (!inserted && !(it->second.name == ref.name)) {
    throw ValidationError("label '" + surface.display() + "' names both " +
                          it->second.name.display() + " and " + ref.name.display());
  }
}

void Ontology::build_indices() {
  // Operand checks.
  for (const auto& [name, cls] : classes_) {
    if (cls.category && !classes_.contains(*cls.category)) {
      throw ValidationError("category of " + name.display() +
                            " is not a declared class: " + cls.category->display());
    }
  }
  for (const auto& [name, ind] : individuals_) {
    if (classes_.contains(name)) {
      throw ValidationError("name declared as both class and individual: " + name.display());
    }
    if (!classes_.contains(ind.class_of)) {
      throw ValidationError("individual " + name.display() +
                            " has undeclared class " + ind.class_of.display());
    }
  }
  for (const auto& [name, rel] : relations_) {
    if (!classes_.contains(rel.domain)) {
      throw ValidationError("relation " + name.display() + " has undeclared domain " +
                            rel.domain.display());
    }
    if (!classes_.contains(rel.range)) {
      throw ValidationError("relation " + name.display() + " has undeclared range " +
                            rel.range.display());
    }
    if (rel.inverse) {
      auto it = relations_.find(*rel.inverse);
      if (it == relations_.end()) {
        throw ValidationError("relation " + name.display() + " has undeclared inverse " +
                              rel.inverse->display());
      }
      if (!it->second.inverse || !(*it->second.inverse == name)) {
        throw ValidationError("asymmetric inverse: " + name.display() + " -> " +
                              rel.inverse->display());
      }
    }
  }
  std::erase_if(axioms_, [](const Axiom& a) { return a.kind == Axiom::Kind::kInverseOf; });
  for (const auto& [name, rel] : relations_) {
    if (rel.inverse && name < *rel.inverse) {
      axioms_.push_back({Axiom::Kind::kInverseOf, name, *rel.inverse});
    }
  }
  for (const auto& ax : axioms_) {
    if (ax.kind == Axiom::Kind::kInverseOf) continue;
    for (const auto* operand : {&ax.first, &ax.second}) {
      if (classes_.contains(*operand)) continue;
      if (individuals_.contains(*operand) && ax.kind == Axiom::Kind::kEquivalentClass) {
        throw ValidationError("equivalence between a class and an individual: " +
                              ax.first.display() + ", " + ax.second.display());
      }
      throw ValidationError("axiom operand is not a declared class: " + operand->display());
    }
  }

  // Surface forms.
  for (const auto& [name, cls] : classes_) {
    for (const auto& label : cls.labels) add_surface(label, {name, EntityKind::kClass});
  }
  for (const auto& [name, ind] : individuals_) add_surface(name, {name, EntityKind::kIndividual});
  for (const auto& [name, rel] : relations_) {
    relation_index_.emplace(name.canonical(), name);
  }
  for (const auto& [name, rel] : relations_) {
    for (const auto& label : rel.labels) {
      auto [it, inserted] = relation_index_.emplace(label.canonical(), name);
      if (!inserted && !(it->second == name)) {
        throw ValidationError("relation label '" + label.display() + "' is ambiguous");
      }
    }
  }

  // Equivalence partition (union-find keyed by canonical name).
  std::map<ConceptName, ConceptName> parent;
  for (const auto& [name, _] : classes_) parent.emplace(name, name);
  std::function<ConceptName(const ConceptName&)> find = [&](const ConceptName& x) {
    auto& p = parent.at(x);
    if (p == x) return x;
    p = find(p);
    return p;
  };
  for (const auto& ax : axioms_) {
    if (ax.kind != Axiom::Kind::kEquivalentClass) continue;
    auto a = find(ax.first);
    auto b = find(ax.second);
    if (a == b) continue;
    if (b < a) std::swap(a, b);
    parent.at(b) = a;  // smallest canonical name represents the group
  }
  for (const auto& [name, _] : classes_) {
    auto rep = find(name);
    group_rep_.emplace(name, rep);
    group_members_[rep].insert(name);
  }

  // Contracted subclass graph.
  for (const auto& [rep, _] : group_members_) {
    direct_parents_[rep];
    direct_children_[rep];
  }
  for (const auto& ax : axioms_) {
    if (ax.kind != Axiom::Kind::kSubClassOf) continue;
    const auto& sub = group_rep_.at(ax.first);
    const auto& sup = group_rep_.at(ax.second);
    if (sub == sup) continue;
    direct_parents_[sub].insert(sup);
    direct_children_[sup].insert(sub);
  }

  // Cycle check and ancestor closure by DFS with colouring.
  enum class Mark { kNone, kActive, kDone };
  std::map<ConceptName, Mark> mark;
  std::function<void(const ConceptName&)> visit = [&](const ConceptName& rep) {
    auto& m = mark[rep];
    if (m == Mark::kDone) return;
    if (m == Mark::kActive) {
      throw ValidationError("subclass cycle through " + rep.display());
    }
    m = Mark::kActive;
    auto& anc = ancestors_[rep];
    for (const auto& p : direct_parents_.at(rep)) {
      visit(p);
      anc.insert(p);
      const auto& pa = ancestors_.at(p);
      anc.insert(pa.begin(), pa.end());
    }
    mark[rep] = Mark::kDone;
  };
  for (const auto& [rep, _] : group_members_) visit(rep);
  for (const auto& [rep, anc] : ancestors_) {
    descendants_[rep];
    for (const auto& a : anc) descendants_[a].insert(rep);
  }
}

const ConceptName& Ontology::group_of(const ConceptName& cls) const {
  return group_rep_.at(cls);
}

const NameSet& Ontology::group_members(const ConceptName& rep) const {
  return group_members_.at(rep);
}

NameSet Ontology::expand_groups(const std::set<ConceptName>& reps) const {
  NameSet out;
  for (const auto& rep : reps) {
    const auto& m = group_members(rep);
    out.insert(m.begin(), m.end());
  }
  return out;
}

std::optional<EntityRef> Ontology::resolve(std::string_view term) const {
  auto it = surface_index_.find(canonicalize(term));
  if (it == surface_index_.end()) return std::nullopt;
  return it->second;
}

std::optional<ConceptName> Ontology::resolve_class(std::string_view term) const {
  auto ref = resolve(term);
  if (!ref || ref->kind != EntityKind::kClass) return std::nullopt;
  return ref->name;
}

ConceptName Ontology::require_class(std::string_view cls) const {
  auto c = resolve_class(cls);
  if (!c) throw UnknownEntity(std::string(cls));
  return *c;
}

const Relation* Ontology::resolve_relation(std::string_view word) const {
  auto it = relation_index_.find(canonicalize(word));
  return it == relation_index_.end() ? nullptr : &relations_.at(it->second);
}

const Relation* Ontology::relation_for_verb(std::string_view token) const {
  std::string w = canonicalize(token);
  if (w.empty()) return nullptr;
  if (const auto* r = resolve_relation(w)) return r;
  for (std::string_view suffix : {"s", "es", "ed"}) {
    if (w.size() > suffix.size() && w.ends_with(suffix)) {
      if (const auto* r = resolve_relation(w.substr(0, w.size() - suffix.size()))) return r;
    }
  }
  return nullptr;
}

NameSet Ontology::query_class(std::optional<std::string_view> term) const {
  NameSet out;
  if (!term) {
    for (const auto& [name, _] : classes_) out.insert(name);
    return out;
  }
  if (auto c = resolve_class(*term)) out.insert(*c);
  return out;
}

NamePairSet Ontology::query_type(std::optional<std::string_view> individual,
                                 std::optional<std::string_view> cls) const {
  if (!individual && !cls) throw BothUnbound();
  NamePairSet out;
  std::optional<ConceptName> target;
  if (cls) {
    target = resolve_class(*cls);
    if (!target) return out;
  }
  auto accept = [&](const Individual& ind) {
    if (!target || subsumes(*target, ind.class_of)) out.emplace(ind.name, ind.class_of);
  };
  if (individual) {
    auto it = individuals_.find(ConceptName(*individual));
    if (it != individuals_.end()) accept(it->second);
    return out;
  }
  for (const auto& [_, ind] : individuals_) accept(ind);
  return out;
}

NamePairSet Ontology::query_property_value(std::string_view entity) const {
  auto ref = resolve(entity);
  if (!ref) throw UnknownEntity(std::string(entity));
  ConceptName cls = ref->kind == EntityKind::kClass ? ref->name
                                                    : individuals_.at(ref->name).class_of;
  NamePairSet out;
  for (const auto& [name, rel] : relations_) {
    if (!subsumes(rel.domain, cls)) continue;
    const auto& rep = group_of(rel.range);
    std::set<ConceptName> reps{rep};
    const auto& desc = descendants_.at(rep);
    reps.insert(desc.begin(), desc.end());
    for (const auto& value : expand_groups(reps)) out.emplace(name, value);
  }
  return out;
}

NameSet Ontology::subclasses(std::string_view cls, bool transitive) const {
  const auto& rep = group_of(require_class(cls));
  return expand_groups(transitive ? descendants_.at(rep) : direct_children_.at(rep));
}

NameSet Ontology::superclasses(std::string_view cls, bool transitive) const {
  const auto& rep = group_of(require_class(cls));
  return expand_groups(transitive ? ancestors_.at(rep) : direct_parents_.at(rep));
}

NameSet Ontology::equivalents(std::string_view cls) const {
  return group_members(group_of(require_class(cls)));
}

NameSet Ontology::expand_concept(std::string_view term, ExpansionPolicy policy) const {
  auto ref = resolve(term);
  if (!ref) throw UnknownEntity(std::string(term));
  if (ref->kind == EntityKind::kIndividual) {
    NameSet out{ref->name};
    if (policy == ExpansionPolicy::kWithSupertypes) {
      const auto& rep = group_of(individuals_.at(ref->name).class_of);
      std::set<ConceptName> reps = ancestors_.at(rep);
      reps.insert(rep);
      auto up = expand_groups(reps);
      out.insert(up.begin(), up.end());
    }
    return out;
  }
  const auto& rep = group_of(ref->name);
  std::set<ConceptName> reps{rep};
  if (policy == ExpansionPolicy::kWithSubtypes) {
    const auto& d = descendants_.at(rep);
    reps.insert(d.begin(), d.end());
  } else if (policy == ExpansionPolicy::kWithSupertypes) {
    const auto& a = ancestors_.at(rep);
    reps.insert(a.begin(), a.end());
  }
  return expand_groups(reps);
}

bool Ontology::subsumes(const ConceptName& super, const ConceptName& sub) const {
  auto sup_it = group_rep_.find(super);
  auto sub_it = group_rep_.find(sub);
  if (sup_it == group_rep_.end() || sub_it == group_rep_.end()) return super == sub;
  if (sup_it->second == sub_it->second) return true;
  return ancestors_.at(sub_it->second).contains(sup_it->second);
}

std::optional<ConceptName> Ontology::type_of(const ConceptName& entity) const {
  if (classes_.contains(entity)) return entity;
  if (auto it = individuals_.find(entity); it != individuals_.end()) return it->second.class_of;
  return std::nullopt;
}

bool Ontology::compatible(const ConceptName& entity, const ConceptName& cls) const {
  auto t = type_of(entity);
  return t && subsumes(cls, *t);
}

ConceptName Ontology::normalize_to_class(const ConceptName& entity) const {
  if (auto it = individuals_.find(entity); it != individuals_.end()) {
    return classes_.at(it->second.class_of).name;
  }
  if (auto it = classes_.find(entity); it != classes_.end()) return it->second.name;
  return entity;
}

const std::string& Ontology::display(const ConceptName& name) const {
  if (auto it = classes_.find(name); it != classes_.end()) return it->second.name.display();
  if (auto it = individuals_.find(name); it != individuals_.end()) {
    return it->second.name.display();
  }
  if (auto it = relations_.find(name); it != relations_.end()) return it->second.name.display();
  return name.display();
}

std::string Ontology::serialize() const {
  std::ostringstream out;
  for (const auto& [name, cls] : classes_) {
    out << "class " << quote(name);
    bool first = true;
    for (const auto& label : cls.labels) {
      if (label == name) continue;
      out << (first ? " labels: " : "; ") << quote(label);
      first = false;
    }
    if (cls.category) out << " category: " << quote(*cls.category);
    out << '\n';
  }
  for (const auto& [name, rel] : relations_) {
    out << "relation " << quote(name) << " domain " << quote(classes_.at(rel.domain).name)
        << " range " << quote(classes_.at(rel.range).name);
    if (rel.inverse) out << " inverse " << quote(relations_.at(*rel.inverse).name);
    bool first = true;
    for (const auto& label : rel.labels) {
      out << (first ? " labels: " : "; ") << quote(label);
      first = false;
    }
    out << '\n';
  }
  for (const auto& [name, ind] : individuals_) {
    out << "individual " << quote(name) << " : " << quote(classes_.at(ind.class_of).name)
        << '\n';
  }
  std::vector<Axiom> sorted;
  for (const auto& ax : axioms_) {
    if (ax.kind != Axiom::Kind::kInverseOf) sorted.push_back(ax);
  }
  std::sort(sorted.begin(), sorted.end());
  sorted.erase(std::unique(sorted.begin(), sorted.end()), sorted.end());
  for (const auto& ax : sorted) {
    out << (ax.kind == Axiom::Kind::kSubClassOf ? "subclass " : "equivalent ")
        << quote(classes_.at(ax.first).name) << ' ' << quote(classes_.at(ax.second).name)
        << '\n';
  }
  return out.str();
}

}  // namespace semtrace
