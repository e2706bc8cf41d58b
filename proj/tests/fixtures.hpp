#pragma once

#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include "semtrace/ontology.hpp"

namespace semtrace::testing {

inline std::filesystem::path fixture_path(const std::string& name) {
  return std::filesystem::path(SEMTRACE_FIXTURES) / name;
}

inline std::string read_fixture(const std::string& name) {
  std::ifstream in(fixture_path(name), std::ios::binary);
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

inline const Ontology& railway() {
  static const Ontology onto = Ontology::load_file(fixture_path("railway.onto"));
  return onto;
}

}  // namespace semtrace::testing
