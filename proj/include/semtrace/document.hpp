#pragma once

#include <map>
#include <optional>
#include <set>
#include <string>
#include <string_view>

namespace semtrace {

enum class DocumentKind { kRequirement, kTestDescription, kTestScript, kLog };

std::string_view to_string(DocumentKind kind);
std::optional<DocumentKind> parse_document_kind(std::string_view text);

struct Document {
  std::string id;
  DocumentKind kind = DocumentKind::kRequirement;
  std::string title;
  std::string body;
  std::map<std::string, std::string> fields;  // facet field -> value
  std::set<std::string> links;                // ids of related documents

  friend bool operator==(const Document&, const Document&) = default;
};

}  // namespace semtrace
