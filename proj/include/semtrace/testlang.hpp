#pragma once

#include <cstdint>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "semtrace/ontology.hpp"
#include "semtrace/triple.hpp"

namespace semtrace {

using Tick = std::uint64_t;

struct SetState {
  std::string entity;
  std::optional<std::string> variable;
  std::string value;
  friend bool operator==(const SetState&, const SetState&) = default;
};

struct ForceState {
  std::string entity;
  std::optional<std::string> variable;
  std::string value;
  friend bool operator==(const ForceState&, const ForceState&) = default;
};

struct Stimulate {
  std::string component;
  std::optional<std::string> input;
  friend bool operator==(const Stimulate&, const Stimulate&) = default;
};

struct RelCheck {
  std::string subject;
  std::string verb;  // as written ("send", "sends")
  std::string object;
  std::optional<std::string> recipient;
  friend bool operator==(const RelCheck&, const RelCheck&) = default;
};

// `check <path> equals to <literal>` or `check <path> <verb> <literal>`.
struct ValueCheck {
  std::string path;
  std::string comparator;  // "equals" or a verb as written
  std::string literal;
  friend bool operator==(const ValueCheck&, const ValueCheck&) = default;
};

using Statement = std::variant<SetState, ForceState, Stimulate, RelCheck, ValueCheck>;

bool is_check(const Statement& s);
// Canonical one-line form, without the "Time" prefix or observation.
std::string render_statement(const Statement& s);

// Verbs that make a check relational.  Matching strips s/es/ed.
class VerbLexicon {
 public:
  VerbLexicon();  // send, receive, contain, use, capt, perform
  explicit VerbLexicon(std::set<std::string> verbs);
  static VerbLexicon from_ontology(const Ontology& onto);

  bool contains(std::string_view token) const;
  const std::set<std::string>& verbs() const { return verbs_; }

 private:
  std::set<std::string> verbs_;
};

struct TestScript {
  std::string id;
  std::vector<Statement> statements;
  std::vector<std::string> warnings;
};

TestScript parse_script(std::string_view text, const VerbLexicon& verbs = VerbLexicon(),
                        std::string id = {});
std::string render_script(const TestScript& script);

struct LogEntry {
  Tick time = 0;
  Statement statement;
  std::optional<bool> observed;  // checks only
  friend bool operator==(const LogEntry&, const LogEntry&) = default;
};

struct Verdict {
  bool failed = false;
  Tick at_time = 0;
  std::optional<std::size_t> failing_entry;
  friend bool operator==(const Verdict&, const Verdict&) = default;
};

struct TestLog {
  std::string id;
  std::string script_id;
  std::vector<LogEntry> entries;
  std::optional<Tick> marker_time;  // "Time n test failed"
  Verdict verdict;
  std::vector<std::string> warnings;

  friend bool operator==(const TestLog& a, const TestLog& b) {
    return a.id == b.id && a.script_id == b.script_id && a.entries == b.entries &&
           a.marker_time == b.marker_time && a.verdict == b.verdict;
  }
};

// Forced outcomes for checks.  Rules are tried in order; unmatched checks
// pass.
class FaultPlan {
 public:
  struct RelRule {
    ConceptName subject;
    std::string verb;
    ConceptName object;
  };
  struct PathRule {
    ConceptName path;
  };
  using Rule = std::variant<RelRule, PathRule>;

  void add(Rule rule, bool outcome);
  // "S V O..." for a relational check, "path:<path>" for a value check.
  void add(std::string_view spec, bool outcome);
  bool outcome(const Statement& check) const;
  bool empty() const { return rules_.empty(); }

 private:
  std::vector<std::pair<Rule, bool>> rules_;
};

// Mock executor: echoes statements at start, start+stride, ... and stops
// at the first failing check.
TestLog run_script(const TestScript& script, const FaultPlan& plan, Tick start_time = 1,
                   Tick stride = 1, std::string log_id = {});

TestLog parse_log(std::string_view text, const VerbLexicon& verbs = VerbLexicon(),
                  std::string id = {});
std::string render_log(const TestLog& log);

// Triples of the final check block, closed over inverses via recipients.
TripleSet log_triples(const TestLog& log, const Ontology& onto);

}  // namespace semtrace
