#include "semtrace/concept_name.hpp"

#include <cctype>

namespace semtrace {
namespace {

std::string collapse(std::string_view raw, bool fold) {
  std::string out;
  out.reserve(raw.size());
  bool pending_space = false;
  for (char ch : raw) {
    auto c = static_cast<unsigned char>(ch);
    if (c == '_' || std::isspace(c)) {
      pending_space = !out.empty();
      continue;
    }
    if (pending_space) {
      out.push_back(' ');
      pending_space = false;
    }
    out.push_back(fold ? static_cast<char>(std::tolower(c)) : ch);
  }
  return out;
}

}  // namespace

std::string canonicalize(std::string_view raw) { return collapse(raw, true); }

ConceptName::ConceptName(std::string_view raw)
    : canonical_(collapse(raw, true)), display_(collapse(raw, false)) {}

}  // namespace semtrace
