#include "semtrace/testlang.hpp"

#include <algorithm>
#include <cctype>
#include <regex>
#include <sstream>

#include "semtrace/annotator.hpp"
#include "semtrace/error.hpp"

namespace semtrace {
namespace {

std::string lower(std::string_view s) {
  std::string out(s);
  for (auto& c : out) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  return out;
}

// Smart quotes to ASCII, tabs to spaces, whitespace collapsed and trimmed.
std::string normalize_line(std::string_view raw) {
  std::string s;
  s.reserve(raw.size());
  for (std::size_t i = 0; i < raw.size(); ++i) {
    if (raw.compare(i, 3, "\xE2\x80\x9C") == 0 || raw.compare(i, 3, "\xE2\x80\x9D") == 0) {
      s.push_back('"');
      i += 2;
    } else if (raw.compare(i, 3, "\xE2\x80\x98") == 0 || raw.compare(i, 3, "\xE2\x80\x99") == 0) {
      s.push_back('\'');
      i += 2;
    } else {
      s.push_back(raw[i]);
    }
  }
  std::string out;
  bool space = false;
  for (char c : s) {
    if (std::isspace(static_cast<unsigned char>(c))) {
      space = !out.empty();
      continue;
    }
    if (space) out.push_back(' ');
    space = false;
    out.push_back(c);
  }
  return out;
}

std::vector<std::string> split_words(std::string_view s) {
  std::vector<std::string> out;
  std::istringstream in{std::string(s)};
  std::string w;
  while (in >> w) out.push_back(w);
  return out;
}

std::string join(const std::vector<std::string>& words, std::size_t from, std::size_t to) {
  std::string out;
  for (std::size_t i = from; i < to && i < words.size(); ++i) {
    if (!out.empty()) out += ' ';
    out += words[i];
  }
  return out;
}

std::string trim(std::string_view s) { return normalize_line(s); }

// Leading keyword, case-insensitive, followed by a space or end of text.
std::optional<std::string> after_keyword(const std::string& line, std::string_view kw) {
  if (line.size() < kw.size() || lower(line.substr(0, kw.size())) != kw) return std::nullopt;
  if (line.size() == kw.size()) return std::string();
  if (line[kw.size()] != ' ') return std::nullopt;
  return line.substr(kw.size() + 1);
}

bool is_bracket_line(const std::string& t) {
  return t.size() >= 2 && t.front() == '[' && t.back() == ']';
}

bool is_loop_header(const std::string& t) {
  auto l = lower(t);
  return l.starts_with("for each") || l.starts_with("for all");
}

std::vector<std::string> verb_stems(std::string_view token) {
  std::string w = lower(token);
  std::vector<std::string> out{w};
  for (std::string_view suffix : {"s", "es", "ed"}) {
    if (w.size() > suffix.size() && w.ends_with(suffix)) {
      out.push_back(w.substr(0, w.size() - suffix.size()));
    }
  }
  return out;
}

bool same_verb(std::string_view a, std::string_view b) {
  for (const auto& x : verb_stems(a)) {
    for (const auto& y : verb_stems(b)) {
      if (x == y) return true;
    }
  }
  return false;
}

std::string strip_quotes(const std::string& s) {
  if (s.size() >= 2 && s.front() == '"' && s.back() == '"') return s.substr(1, s.size() - 2);
  return s;
}

template <typename T>
T parse_assignment(const std::string& rest, std::size_t line) {
  auto eq = rest.find('=');
  if (eq == std::string::npos) throw ParseError(line, "expected '<entity>[.<var>] = <value>'");
  std::string lhs = trim(rest.substr(0, eq));
  std::string rhs = trim(rest.substr(eq + 1));
  if (lhs.empty() || rhs.empty()) throw ParseError(line, "assignment needs both sides");
  T out;
  out.value = rhs;
  auto dot = lhs.find('.');
  if (dot == std::string::npos) {
    out.entity = lhs;
  } else {
    out.entity = trim(lhs.substr(0, dot));
    out.variable = trim(lhs.substr(dot + 1));
    if (out.entity.empty() || out.variable->empty()) {
      throw ParseError(line, "expected '<entity>.<var>'");
    }
  }
  return out;
}

Stimulate parse_stimulate(const std::string& rest, std::size_t line,
                          std::vector<std::string>& warnings) {
  static const std::regex index_suffix(R"(\[[a-z]\]$)");
  static const std::regex input_wrap(R"(^[Ii]nput\[(.*)\]$)");
  auto words = split_words(rest);
  std::size_t with = words.size();
  for (std::size_t i = 0; i < words.size(); ++i) {
    auto w = lower(words[i]);
    if (w == "with" || w == "whit") {
      if (w == "whit") warnings.push_back("line " + std::to_string(line) + ": 'whit' read as 'with'");
      with = i;
      break;
    }
  }
  Stimulate out;
  out.component = std::regex_replace(join(words, 0, with), index_suffix, "");
  if (out.component.empty()) throw ParseError(line, "stimulate needs a component");
  if (with < words.size()) {
    std::string input = join(words, with + 1, words.size());
    if (input.empty()) throw ParseError(line, "expected input after 'with'");
    std::smatch m;
    if (std::regex_match(input, m, input_wrap)) {
      std::string inner = strip_quotes(m[1].str());
      bool symbolic = inner.size() == 1 && std::islower(static_cast<unsigned char>(inner[0]));
      if (!symbolic && !inner.empty()) input = inner;
    }
    out.input = input;
  }
  return out;
}

Statement parse_check(const std::string& rest, std::size_t line, const VerbLexicon& verbs) {
  auto words = split_words(rest);
  for (std::size_t i = 1; i + 1 < words.size(); ++i) {
    if (lower(words[i]) == "equals" && lower(words[i + 1]) == "to") {
      std::string literal = join(words, i + 2, words.size());
      if (literal.empty()) break;
      return ValueCheck{join(words, 0, i), "equals", literal};
    }
  }
  for (std::size_t i = 1; i + 1 < words.size(); ++i) {
    if (!verbs.contains(words[i])) continue;
    if (i == 1 && words[0].find('.') == std::string::npos) {
      RelCheck out{words[0], words[i], {}, std::nullopt};
      std::size_t end = words.size();
      for (std::size_t j = words.size() - 1; j > i + 1; --j) {
        if (lower(words[j]) == "to" && j + 1 < words.size()) {
          out.recipient = join(words, j + 1, words.size());
          end = j;
          break;
        }
      }
      out.object = join(words, i + 1, end);
      return out;
    }
    return ValueCheck{join(words, 0, i), words[i], join(words, i + 1, words.size())};
  }
  throw ParseError(line, "expected 'check <subject> <verb> <object> [to <recipient>]' or "
                         "'check <path> equals to <literal>'");
}

Statement parse_statement(const std::string& text, std::size_t line, const VerbLexicon& verbs,
                          std::vector<std::string>& warnings) {
  if (auto rest = after_keyword(text, "check")) return parse_check(*rest, line, verbs);
  if (auto rest = after_keyword(text, "stimulate")) return parse_stimulate(*rest, line, warnings);
  if (auto rest = after_keyword(text, "set")) return parse_assignment<SetState>(*rest, line);
  if (auto rest = after_keyword(text, "force")) return parse_assignment<ForceState>(*rest, line);
  if (text.find('=') != std::string::npos) return parse_assignment<SetState>(text, line);
  throw ParseError(line, "expected set, force, stimulate or check");
}

template <typename T>
std::string render_assignment(std::string_view kw, const T& a) {
  std::string out(kw);
  out += ' ' + a.entity;
  if (a.variable) out += '.' + *a.variable;
  return out + " = " + a.value;
}

std::vector<std::string> split_lines(std::string_view text) {
  std::vector<std::string> out;
  std::size_t start = 0;
  while (start <= text.size()) {
    auto nl = text.find('\n', start);
    if (nl == std::string_view::npos) nl = text.size();
    std::string l(text.substr(start, nl - start));
    if (!l.empty() && l.back() == '\r') l.pop_back();
    out.push_back(std::move(l));
    start = nl + 1;
  }
  return out;
}

}  // namespace

bool is_check(const Statement& s) {
  return std::holds_alternative<RelCheck>(s) || std::holds_alternative<ValueCheck>(s);
}

std::string render_statement(const Statement& s) {
  if (const auto* a = std::get_if<SetState>(&s)) return render_assignment("set", *a);
  if (const auto* a = std::get_if<ForceState>(&s)) return render_assignment("force", *a);
  if (const auto* st = std::get_if<Stimulate>(&s)) {
    return "stimulate " + st->component + (st->input ? " with " + *st->input : "");
  }
  if (const auto* c = std::get_if<RelCheck>(&s)) {
    return "check " + c->subject + ' ' + c->verb + ' ' + c->object +
           (c->recipient ? " to " + *c->recipient : "");
  }
  const auto& v = std::get<ValueCheck>(s);
  if (v.comparator == "equals") return "check " + v.path + " equals to " + v.literal;
  return "check " + v.path + ' ' + v.comparator + ' ' + v.literal;
}

VerbLexicon::VerbLexicon()
    : verbs_{"send", "receive", "contain", "use", "capt", "perform"} {}

VerbLexicon::VerbLexicon(std::set<std::string> verbs) {
  for (const auto& v : verbs) verbs_.insert(lower(v));
}

VerbLexicon VerbLexicon::from_ontology(const Ontology& onto) {
  std::set<std::string> verbs;
  for (const auto& [name, rel] : onto.relations()) {
    verbs.insert(name.canonical());
    for (const auto& l : rel.labels) verbs.insert(l.canonical());
  }
  return VerbLexicon(std::move(verbs));
}

bool VerbLexicon::contains(std::string_view token) const {
  for (const auto& stem : verb_stems(token)) {
    if (verbs_.contains(stem)) return true;
  }
  return false;
}

TestScript parse_script(std::string_view text, const VerbLexicon& verbs, std::string id) {
  TestScript out;
  out.id = std::move(id);
  auto lines = split_lines(text);
  for (std::size_t i = 0; i < lines.size(); ++i) {
    auto t = normalize_line(lines[i]);
    if (t.empty() || t.starts_with("//") || is_bracket_line(t) || is_loop_header(t)) continue;
    out.statements.push_back(parse_statement(t, i + 1, verbs, out.warnings));
  }
  if (out.statements.empty()) {
    out.warnings.push_back("empty script");
  } else if (std::none_of(out.statements.begin(), out.statements.end(), is_check)) {
    out.warnings.push_back("script has no checks");
  }
  return out;
}

std::string render_script(const TestScript& script) {
  std::string out;
  for (const auto& s : script.statements) out += render_statement(s) + '\n';
  return out;
}

void FaultPlan::add(Rule rule, bool outcome) { rules_.emplace_back(std::move(rule), outcome); }

void FaultPlan::add(std::string_view spec, bool outcome) {
  auto t = normalize_line(spec);
  if (t.starts_with("path:")) {
    add(PathRule{ConceptName(trim(t.substr(5)))}, outcome);
    return;
  }
  auto words = split_words(t);
  if (words.size() < 3) throw ParseError(1, "fault rule needs '<subject> <verb> <object>'");
  add(RelRule{ConceptName(words[0]), words[1], ConceptName(join(words, 2, words.size()))},
      outcome);
}

bool FaultPlan::outcome(const Statement& check) const {
  for (const auto& [rule, result] : rules_) {
    if (const auto* r = std::get_if<RelRule>(&rule)) {
      const auto* c = std::get_if<RelCheck>(&check);
      if (c && ConceptName(c->subject) == r->subject && same_verb(c->verb, r->verb) &&
          ConceptName(c->object) == r->object) {
        return result;
      }
    } else {
      const auto* v = std::get_if<ValueCheck>(&check);
      if (v && ConceptName(v->path) == std::get<PathRule>(rule).path) return result;
    }
  }
  return true;
}

TestLog run_script(const TestScript& script, const FaultPlan& plan, Tick start_time, Tick stride,
                   std::string log_id) {
  if (stride == 0) throw ValidationError("stride must be at least 1");
  TestLog log;
  log.id = std::move(log_id);
  log.script_id = script.id;
  Tick t = start_time;
  for (const auto& s : script.statements) {
    LogEntry e{t, s, std::nullopt};
    if (is_check(s)) e.observed = plan.outcome(s);
    log.entries.push_back(e);
    if (e.observed == false) {
      log.verdict = {true, t, log.entries.size() - 1};
      log.marker_time = t + stride;
      return log;
    }
    t += stride;
  }
  return log;
}

TestLog parse_log(std::string_view text, const VerbLexicon& verbs, std::string id) {
  static const std::regex time_line(R"(^time (\d+) ?(.*)$)", std::regex::icase);
  TestLog log;
  log.id = std::move(id);
  bool stopped = false;
  std::optional<Tick> last_time;

  struct Pending {
    std::size_t line;
    Tick time;
    std::string text;
  };
  std::optional<Pending> pending;

  auto flush = [&]() {
    if (!pending) return;
    Pending p = std::move(*pending);
    pending.reset();
    if (last_time && p.time <= *last_time) throw MonotonicityError(static_cast<long long>(p.time));
    last_time = p.time;
    if (log.marker_time) throw ParseError(p.line, "entry after 'test failed'");
    if (lower(p.text) == "test failed") {
      log.marker_time = p.time;
      return;
    }
    if (p.text.empty()) throw ParseError(p.line, "expected a statement after 'Time <n>'");
    LogEntry e{p.time, {}, std::nullopt};
    auto words = split_words(p.text);
    auto last = lower(words.back());
    bool parsed = false;
    if (words.size() > 1 && (last == "true" || last == "false")) {
      std::vector<std::string> scratch;
      try {
        auto s = parse_statement(join(words, 0, words.size() - 1), p.line, verbs, scratch);
        if (is_check(s)) {
          e.statement = std::move(s);
          e.observed = last == "true";
          log.warnings.insert(log.warnings.end(), scratch.begin(), scratch.end());
          parsed = true;
        }
      } catch (const ParseError&) {
      }
    }
    if (!parsed) {
      e.statement = parse_statement(p.text, p.line, verbs, log.warnings);
      if (is_check(e.statement)) {
        log.warnings.push_back("line " + std::to_string(p.line) + ": check without observed value");
      }
    }
    log.entries.push_back(std::move(e));
  };

  auto lines = split_lines(text);
  for (std::size_t i = 0; i < lines.size(); ++i) {
    auto t = normalize_line(lines[i]);
    if (t.empty()) continue;
    if (stopped) {
      if (t.front() == '(' && t.back() == ')') continue;
      if (t.starts_with("//")) continue;
      throw ParseError(i + 1, "nothing may follow 'Test Stopped'");
    }
    if (t.starts_with("//")) {
      auto body = trim(t.substr(2));
      if (auto v = after_keyword(body, "log:")) log.id = log.id.empty() ? *v : log.id;
      if (auto v = after_keyword(body, "script:")) log.script_id = *v;
      continue;
    }
    if (is_bracket_line(t) || is_loop_header(t)) continue;
    if (lower(t) == "test stopped") {
      flush();
      stopped = true;
      continue;
    }
    std::smatch m;
    if (std::regex_match(t, m, time_line)) {
      flush();
      pending = Pending{i + 1, std::stoull(m[1].str()), m[2].str()};
      continue;
    }
    if (!pending) throw ParseError(i + 1, "expected 'Time <n> <statement>'");
    pending->text += ' ' + t;
  }
  flush();

  for (std::size_t k = 0; k < log.entries.size(); ++k) {
    if (log.entries[k].observed == false) {
      log.verdict = {true, log.entries[k].time, k};
      break;
    }
  }
  if (!log.verdict.failed && log.marker_time) log.verdict = {true, *log.marker_time, std::nullopt};
  return log;
}

std::string render_log(const TestLog& log) {
  std::string out;
  if (!log.id.empty()) out += "// log: " + log.id + '\n';
  if (!log.script_id.empty()) out += "// script: " + log.script_id + '\n';
  for (const auto& e : log.entries) {
    out += "Time " + std::to_string(e.time) + ' ' + render_statement(e.statement);
    if (e.observed) out += *e.observed ? " TRUE" : " FALSE";
    out += '\n';
  }
  if (log.marker_time) {
    out += "Time " + std::to_string(*log.marker_time) + " test failed\nTest Stopped\n";
  }
  return out;
}

TripleSet log_triples(const TestLog& log, const Ontology& onto) {
  auto resolve = [&](const std::string& term) {
    if (auto r = onto.resolve(term)) return r->name;
    return ConceptName(term);
  };
  std::size_t first = log.entries.size();
  while (first > 0 && is_check(log.entries[first - 1].statement)) --first;

  TripleSet asserted;
  for (std::size_t k = first; k < log.entries.size(); ++k) {
    const auto& e = log.entries[k];
    if (const auto* c = std::get_if<RelCheck>(&e.statement)) {
      const auto* rel = onto.relation_for_verb(c->verb);
      if (!rel) continue;
      Triple t{resolve(c->subject), rel->name, resolve(c->object), Provenance::kAsserted,
               log.id,              std::nullopt, e.observed};
      if (c->recipient) t.counterpart = resolve(*c->recipient);
      add_triple(asserted, std::move(t));
    } else {
      const auto& v = std::get<ValueCheck>(e.statement);
      const auto* rel = onto.relation_for_verb(v.comparator);
      if (!rel) continue;
      std::string root = trim(v.path.substr(0, v.path.find('.')));
      add_triple(asserted, Triple{resolve(root), rel->name, resolve(strip_quotes(v.literal)),
                                  Provenance::kAsserted, log.id, std::nullopt, e.observed});
    }
  }
  return inverse_closure(asserted, onto, InverseGuard::kNone);
}

}  // namespace semtrace
