#pragma once

// Command implementations behind the CLI. Header-only so tests can run the
// commands in-process and compare outputs byte for byte.

#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "grammar_file.hpp"

namespace grules {

struct CmdResult {
  int code = 0;
  std::string out;
};

struct ParseFlags {
  bool all = false;
  bool trace = false;
  bool json = false;
  bool count = false;
  std::string goal;  // overrides the grammar's [goal]
};

inline std::vector<std::string> tokenize(const std::string& sentence) {
  std::vector<std::string> tokens;
  std::istringstream in(sentence);
  std::string tok;
  while (in >> tok) tokens.push_back(tok);
  return tokens;
}

namespace cmddetail {

inline std::string plural(std::size_t n, const char* noun) {
  return std::to_string(n) + " " + noun + (n == 1 ? "" : "s");
}

inline std::string rule_display(const TraceRecord& t) {
  std::string out;
  for (const FiredRule& fr : t.rules) {
    if (!out.empty()) out += " ";
    out += fr.rule + "[" + fr.signature + "]";
  }
  return out;
}

inline std::string entry_display(const StackEntry& e) {
  std::string out = print_category(e.syn.cat);
  if (e.sem) out += " = " + print_term(e.sem);
  return out;
}

inline std::string stack_display(const TraceRecord& t) {
  std::string out = "[";
  for (std::size_t i = 0; i < t.stack_after.size(); ++i) {
    if (i) out += ", ";
    out += print_category(t.stack_after[i].syn.cat);
  }
  out += " | " + std::to_string(t.j_after) + "]";
  return out;
}

inline std::string trace_line(const TraceRecord& t) {
  std::string body;
  switch (t.kind) {
    case StepKind::Axiom:
      body = "axiom";
      break;
    case StepKind::Shift:
      body = "shift " + t.token;
      break;
    case StepKind::Reduce: {
      body = "reduce@" + std::to_string(t.pos) + " " + rule_display(t) + " ->";
      for (std::size_t i = 0; i < t.produced.size(); ++i) {
        if (i) body += " +";
        body += " " + entry_display(t.produced[i]);
      }
      break;
    }
  }
  return std::to_string(t.step) + "  " + body + "   " + stack_display(t);
}

inline std::string trace_text(const Derivation& d) {
  std::string out;
  for (const TraceRecord& t : d.steps) out += trace_line(t) + "\n";
  return out;
}

inline nlohmann::ordered_json entries_json(const std::vector<StackEntry>& entries) {
  nlohmann::ordered_json arr = nlohmann::ordered_json::array();
  for (const StackEntry& e : entries) {
    nlohmann::ordered_json o;
    o["cat"] = print_category(e.syn.cat);
    if (e.sem) o["sem"] = print_term(e.sem);
    o["span"] = {e.syn.span.start, e.syn.span.end};
    arr.push_back(o);
  }
  return arr;
}

inline nlohmann::ordered_json step_json(const TraceRecord& t) {
  nlohmann::ordered_json o;
  o["step"] = t.step;
  switch (t.kind) {
    case StepKind::Axiom:
      o["kind"] = "axiom";
      break;
    case StepKind::Shift:
      o["kind"] = "shift";
      o["token"] = t.token;
      break;
    case StepKind::Reduce:
      o["kind"] = "reduce";
      o["pos"] = t.pos;
      break;
  }
  o["rule"] = rule_display(t);
  o["consumed"] = entries_json(t.consumed);
  o["produced"] = entries_json(t.produced);
  if (t.kind == StepKind::Axiom)
    o["span"] = nullptr;
  else
    o["span"] = {t.span.start, t.span.end};
  return o;
}

}  // namespace cmddetail

inline CmdResult cmd_check(const std::string& path) {
  using cmddetail::plural;
  std::ostringstream out;
  GrammarFile g;
  try {
    g = load_grammar_file(path);
  } catch (const GrammarError& e) {
    out << "error: " << e.what() << "\n";
    return {2, out.str()};
  }
  CheckReport report = check_grammar(g);
  out << g.name << ": " << plural(report.types, "type") << ", " << plural(report.rules, "rule")
      << ", " << plural(report.words, "word") << "\n";
  for (const std::string& c : report.conflicts) out << c << "\n";
  out << plural(report.conflicts.size(), "conflict") << "\n";
  return {report.conflicts.empty() ? 0 : 2, out.str()};
}

inline CmdResult cmd_parse(const std::string& path, const std::string& sentence,
                           const ParseFlags& flags) {
  using namespace cmddetail;
  std::ostringstream out;
  GrammarFile g;
  try {
    g = load_grammar_file(path);
  } catch (const GrammarError& e) {
    out << "error: " << e.what() << "\n";
    return {2, out.str()};
  }
  CheckReport report = check_grammar(g);
  if (!report.conflicts.empty()) {
    for (const std::string& c : report.conflicts) out << c << "\n";
    out << "error: grammar is not well formed\n";
    return {2, out.str()};
  }

  std::string goal_text = flags.goal.empty() ? g.goal_text : flags.goal;
  if (goal_text.empty()) {
    out << "error: no goal; add a [goal] section or pass --goal\n";
    return {3, out.str()};
  }

  Goal goal;
  ParseResult r;
  try {
    goal = resolve_goal(g, goal_text);
    r = run_parse(g, tokenize(sentence), goal);
  } catch (const std::exception& e) {
    out << "error: " << e.what() << "\n";
    return {2, out.str()};
  }

  if (flags.json) {
    nlohmann::ordered_json doc;
    doc["grammar"] = g.name;
    doc["sentence"] = tokenize(sentence);
    doc["goal"] = goal_text;
    doc["accepted"] = r.accepted;
    doc["stats"] = {{"items", r.stats.items},
                    {"shifts", r.stats.shifts},
                    {"reduces_attempted", r.stats.reduce_attempted},
                    {"reduces_fired", r.stats.reduce_fired}};
    nlohmann::ordered_json ds = nlohmann::ordered_json::array();
    std::size_t limit = flags.all ? r.derivations.size() : std::min<std::size_t>(1, r.derivations.size());
    for (std::size_t i = 0; i < limit; ++i) {
      nlohmann::ordered_json d;
      nlohmann::ordered_json steps = nlohmann::ordered_json::array();
      for (const TraceRecord& t : r.derivations[i].steps) steps.push_back(step_json(t));
      d["steps"] = std::move(steps);
      ds.push_back(std::move(d));
    }
    doc["derivations"] = std::move(ds);
    out << doc.dump(2) << "\n";
    return {r.accepted ? 0 : 1, out.str()};
  }

  if (!r.accepted) {
    out << "rejected: no derivation\n";
    if (flags.count) {
      out << "items: " << r.stats.items << "\n";
      out << "shifts: " << r.stats.shifts << "\n";
      out << "reduces attempted: " << r.stats.reduce_attempted << "\n";
      out << "reduces fired: " << r.stats.reduce_fired << "\n";
      out << "derivations: 0\n";
    }
    return {1, out.str()};
  }

  const Derivation& first = r.derivations.front();
  out << "accepted: " << entry_display(first.steps.back().stack_after.front()) << "\n";
  if (flags.count) {
    out << "items: " << r.stats.items << "\n";
    out << "shifts: " << r.stats.shifts << "\n";
    out << "reduces attempted: " << r.stats.reduce_attempted << "\n";
    out << "reduces fired: " << r.stats.reduce_fired << "\n";
    out << "derivations: " << r.derivations.size() << "\n";
  }
  if (flags.all) {
    out << "derivations: " << r.derivations.size() << "\n";
    for (std::size_t i = 0; i < r.derivations.size(); ++i) {
      out << "--- derivation " << (i + 1) << "\n";
      out << trace_text(r.derivations[i]);
    }
  } else if (flags.trace) {
    out << trace_text(first);
  }
  return {0, out.str()};
}

}  // namespace grules
