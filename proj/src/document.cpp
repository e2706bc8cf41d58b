#include "semtrace/document.hpp"

#include "semtrace/concept_name.hpp"

namespace semtrace {

std::string_view to_string(DocumentKind kind) {
  switch (kind) {
    case DocumentKind::kRequirement:
      return "requirement";
    case DocumentKind::kTestDescription:
      return "test_description";
    case DocumentKind::kTestScript:
      return "test_script";
    case DocumentKind::kLog:
      return "log";
  }
  return "requirement";
}

std::optional<DocumentKind> parse_document_kind(std::string_view text) {
  auto t = canonicalize(text);
  if (t == "requirement" || t == "req") return DocumentKind::kRequirement;
  if (t == "test description" || t == "test-description" || t == "scenario") {
    return DocumentKind::kTestDescription;
  }
  if (t == "test script" || t == "test-script" || t == "script") return DocumentKind::kTestScript;
  if (t == "log") return DocumentKind::kLog;
  return std::nullopt;
}

}  // namespace semtrace
