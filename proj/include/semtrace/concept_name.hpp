#pragma once

#include <compare>
#include <functional>
#include <string>
#include <string_view>

namespace semtrace {

// Case-folds, maps '_' to ' ', collapses whitespace runs and trims.
std::string canonicalize(std::string_view raw);

// Name of an ontology entity (or an opaque constant).  Identity is the
// canonical form; `display()` keeps the spelling it was created with so
// output reads like the source ("SoM Position Report").
class ConceptName {
 public:
  ConceptName() = default;
  ConceptName(std::string_view raw);  // NOLINT: implicit by intent
  ConceptName(const char* raw) : ConceptName(std::string_view(raw)) {}
  ConceptName(const std::string& raw) : ConceptName(std::string_view(raw)) {}

  const std::string& canonical() const noexcept { return canonical_; }
  const std::string& display() const noexcept { return display_; }
  bool empty() const noexcept { return canonical_.empty(); }

  friend bool operator==(const ConceptName& a, const ConceptName& b) {
    return a.canonical_ == b.canonical_;
  }
  friend std::strong_ordering operator<=>(const ConceptName& a,
                                          const ConceptName& b) {
    return a.canonical_ <=> b.canonical_;
  }

 private:
  std::string canonical_;
  std::string display_;
};

}  // namespace semtrace

template <>
struct std::hash<semtrace::ConceptName> {
  std::size_t operator()(const semtrace::ConceptName& n) const noexcept {
    return std::hash<std::string>{}(n.canonical());
  }
};
