#pragma once

// The grammar-file format: [types], [generic NAME], [cfg], [lexicon] and
// [goal] sections with '#' comments. Loading builds the hierarchy, the
// generic rules, the lexicon and the production list; printing emits a
// canonical file that reloads to an equal grammar.

#include <fstream>
#include <functional>
#include <map>
#include <memory>
#include <optional>
#include <set>
#include <sstream>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "catgram.hpp"
#include "category.hpp"
#include "generic_rule.hpp"
#include "lambda.hpp"
#include "parser.hpp"
#include "poset.hpp"

namespace grules {

struct GrammarError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct GrammarFile {
  std::string name;
  std::shared_ptr<TypeHierarchy> hierarchy;
  std::shared_ptr<CatPool> pool;
  std::vector<std::string> type_roots;
  std::vector<std::pair<std::string, std::string>> type_edges;
  std::vector<std::unique_ptr<GenericRule>> generics;
  std::map<std::string, const GenericRule*> rules_by_name;
  Lexicon lexicon;
  std::vector<CfgProduction> productions;
  bool has_cfg = false;
  std::string goal_text;
  const GenericRule* syn = nullptr;  // first category-domain rule
  const GenericRule* sem = nullptr;  // first lambda-domain rule
};

enum class ParseMode { Syn, SynSem, Cfg };

namespace gfdetail {

inline std::string trim(const std::string& s) {
  std::size_t a = s.find_first_not_of(" \t\r");
  if (a == std::string::npos) return "";
  std::size_t b = s.find_last_not_of(" \t\r");
  return s.substr(a, b - a + 1);
}

inline std::vector<std::string> split_ws(const std::string& s) {
  std::vector<std::string> out;
  std::istringstream in(s);
  std::string tok;
  while (in >> tok) out.push_back(tok);
  return out;
}

struct SectionLine {
  int no;
  std::string text;
};

struct Section {
  std::string header;
  int no;
  std::vector<SectionLine> lines;
};

static const std::set<std::string> kPrims = {"fa", "ba", "ituple", "scan", "dtuple"};
static const std::set<std::string> kGuards = {"conj-left", "conj-right"};

// body := IDENT | comp(body, body) | disj(body, body) | opt(body)
// where bare IDENT resolves builtin prim > named rule > type constant.
class BodyParser {
 public:
  BodyParser(const std::string& src, const std::set<std::string>& rule_names)
      : src_(src), rule_names_(rule_names) {}

  BodyRef parse() {
    BodyRef b = expr();
    skip();
    if (pos_ != src_.size()) fail("unexpected trailing text \"" + src_.substr(pos_) + "\"");
    return b;
  }

 private:
  BodyRef expr() {
    skip();
    std::string id = ident();
    skip();
    if (pos_ < src_.size() && src_[pos_] == '(') {
      ++pos_;
      std::vector<BodyRef> args;
      args.push_back(expr());
      skip();
      while (pos_ < src_.size() && src_[pos_] == ',') {
        ++pos_;
        args.push_back(expr());
        skip();
      }
      if (pos_ >= src_.size() || src_[pos_] != ')') fail("expected ')' in rule body");
      ++pos_;
      if (id == "comp" || id == "disj") {
        if (args.size() != 2) fail(id + " takes exactly two arguments");
        return id == "comp" ? make_comp(args[0], args[1]) : make_disj(args[0], args[1]);
      }
      if (id == "opt") {
        if (args.size() != 1) fail("opt takes exactly one argument");
        return make_opt(args[0]);
      }
      fail("\"" + id + "\" does not take arguments");
    }
    if (kPrims.count(id)) return make_prim(id);
    if (rule_names_.count(id)) return make_rule_ref(id);
    return make_type_const(id);
  }

  std::string ident() {
    std::size_t start = pos_;
    while (pos_ < src_.size() && src_.find_first_of("(), \t", pos_) != pos_) ++pos_;
    if (pos_ == start) fail("expected a name in rule body");
    return src_.substr(start, pos_ - start);
  }

  void skip() {
    while (pos_ < src_.size() && (src_[pos_] == ' ' || src_[pos_] == '\t')) ++pos_;
  }

  [[noreturn]] void fail(const std::string& msg) { throw std::runtime_error(msg); }

  const std::string& src_;
  const std::set<std::string>& rule_names_;
  std::size_t pos_ = 0;
};

}  // namespace gfdetail

inline GrammarFile load_grammar(const std::string& text, const std::string& name = "grammar") {
  using namespace gfdetail;
  auto fail = [&](int line, const std::string& msg) -> void {
    throw GrammarError(name + ":" + std::to_string(line) + ": " + msg);
  };

  std::vector<Section> sections;
  {
    std::istringstream in(text);
    std::string raw;
    int lineno = 0;
    while (std::getline(in, raw)) {
      ++lineno;
      std::size_t hash = raw.find('#');
      if (hash != std::string::npos) raw.resize(hash);
      std::string line = trim(raw);
      if (line.empty()) continue;
      if (line.front() == '[') {
        if (line.back() != ']') fail(lineno, "malformed section header " + line);
        sections.push_back({trim(line.substr(1, line.size() - 2)), lineno, {}});
      } else {
        if (sections.empty()) fail(lineno, "content before the first section header");
        sections.back().lines.push_back({lineno, line});
      }
    }
  }

  std::set<std::string> rule_names;
  std::set<std::string> seen;
  for (const Section& s : sections) {
    if (!seen.insert(s.header).second) fail(s.no, "duplicate section [" + s.header + "]");
    if (s.header == "types" || s.header == "lexicon" || s.header == "cfg" || s.header == "goal")
      continue;
    if (s.header == "generic" || s.header.rfind("generic ", 0) == 0) {
      std::vector<std::string> toks = split_ws(s.header);
      if (toks.size() != 2) fail(s.no, "generic section needs exactly one rule name");
      if (!rule_names.insert(toks[1]).second) fail(s.no, "duplicate rule name " + toks[1]);
      continue;
    }
    fail(s.no, "unknown section [" + s.header + "]");
  }
  auto find_section = [&](const std::string& header) -> const Section* {
    for (const Section& s : sections)
      if (s.header == header) return &s;
    return nullptr;
  };

  GrammarFile g;
  g.name = name;
  g.hierarchy = std::make_shared<TypeHierarchy>();
  g.pool = std::make_shared<CatPool>();
  TypeHierarchy& h = *g.hierarchy;

  if (const Section* types = find_section("types")) {
    for (const SectionLine& ln : types->lines) {
      std::vector<std::string> toks = split_ws(ln.text);
      if (toks.size() == 1) {
        h.intern(toks[0]);
        g.type_roots.push_back(toks[0]);
      } else if (toks.size() == 3 && toks[1] == "<") {
        TypeId child = h.intern(toks[0]);
        TypeId parent = h.intern(toks[2]);
        try {
          h.add_subtype(child, parent);
        } catch (const HierarchyError& e) {
          fail(ln.no, e.what());
        }
        g.type_edges.emplace_back(toks[0], toks[2]);
      } else {
        fail(ln.no, "expected \"name\" or \"child < parent\"");
      }
    }
  }
  try {
    h.finalize();
  } catch (const HierarchyError& e) {
    throw GrammarError(name + ": " + e.what());
  }

  auto type_of = [&](int line, const std::string& tok) -> TypeId {
    std::optional<TypeId> t = h.find(tok);
    if (!t) fail(line, "unknown type " + tok);
    return *t;
  };

  for (const Section& s : sections) {
    if (s.header.rfind("generic ", 0) != 0) continue;
    auto rule = std::make_unique<GenericRule>();
    rule->name = split_ws(s.header)[1];
    rule->poset.hierarchy = g.hierarchy.get();
    rule->domain = InfoDomain::Categories;
    for (const SectionLine& ln : s.lines) {
      std::size_t colon = ln.text.find(':');
      if (colon == std::string::npos) continue;
      std::string after = trim(ln.text.substr(colon + 1));
      if (!after.empty() && after.front() == '\\') {
        rule->domain = InfoDomain::LambdaTerms;
        break;
      }
    }
    for (const SectionLine& ln : s.lines) {
      std::size_t colon = ln.text.find(':');
      if (colon == std::string::npos) fail(ln.no, "expected \"t1 t2 : body\"");
      std::vector<std::string> sig = split_ws(ln.text.substr(0, colon));
      if (sig.size() != 2) fail(ln.no, "a signature names exactly two types");
      std::string body_text = trim(ln.text.substr(colon + 1));
      std::string guard;
      std::size_t req = body_text.rfind(" requires ");
      if (req != std::string::npos && body_text.front() != '\\') {
        guard = trim(body_text.substr(req + 10));
        body_text = trim(body_text.substr(0, req));
      }
      if (body_text.empty()) fail(ln.no, "empty rule body");
      if (!guard.empty()) {
        if (rule->domain == InfoDomain::LambdaTerms)
          fail(ln.no, "guards apply to category rules only");
        if (!gfdetail::kGuards.count(guard)) fail(ln.no, "unknown guard " + guard);
      }
      BodyRef body;
      try {
        if (body_text.front() == '\\') {
          body = make_lambda_body(parse_term(body_text));
        } else {
          body = gfdetail::BodyParser(body_text, rule_names).parse();
        }
      } catch (const std::exception& e) {
        fail(ln.no, e.what());
      }
      try {
        rule->add({type_of(ln.no, sig[0]), type_of(ln.no, sig[1])}, body, guard);
      } catch (const GenericRuleError& e) {
        fail(ln.no, e.what());
      }
    }
    if (rule->domain == InfoDomain::Categories && !g.syn) g.syn = rule.get();
    if (rule->domain == InfoDomain::LambdaTerms && !g.sem) g.sem = rule.get();
    g.rules_by_name[rule->name] = rule.get();
    g.generics.push_back(std::move(rule));
  }

  // rule references: category-domain targets only, no cycles
  {
    std::map<std::string, std::vector<std::string>> refs;
    std::function<void(const std::string&, const BodyRef&)> collect =
        [&](const std::string& owner, const BodyRef& b) {
          if (!b) return;
          if (b->kind == BodyKind::RuleRef) refs[owner].push_back(b->name);
          collect(owner, b->a);
          collect(owner, b->b);
        };
    for (const auto& rule : g.generics)
      for (const PartialRule& pr : rule->rules) collect(rule->name, pr.body);
    for (auto& [owner, targets] : refs) {
      if (g.rules_by_name.at(owner)->domain != InfoDomain::Categories)
        throw GrammarError(name + ": rule " + owner +
                           " mixes rule references into a lambda-term rule");
      for (const std::string& t : targets)
        if (g.rules_by_name.at(t)->domain != InfoDomain::Categories)
          throw GrammarError(name + ": rule " + owner + " references " + t +
                             ", which is not a category rule");
    }
    std::set<std::string> done, path;
    std::function<void(const std::string&)> visit = [&](const std::string& r) {
      if (done.count(r)) return;
      if (!path.insert(r).second)
        throw GrammarError(name + ": rule reference cycle involving " + r);
      for (const std::string& t : refs[r]) visit(t);
      path.erase(r);
      done.insert(r);
    };
    for (const auto& [owner, targets] : refs) visit(owner);
  }

  if (const Section* cfg = find_section("cfg")) {
    g.has_cfg = true;
    for (const SectionLine& ln : cfg->lines) {
      std::vector<std::string> toks = split_ws(ln.text);
      if (toks.size() != 4 || toks[1] != "->") fail(ln.no, "expected \"A -> B C\"");
      g.productions.push_back(
          {type_of(ln.no, toks[0]), type_of(ln.no, toks[2]), type_of(ln.no, toks[3])});
    }
    if (!g.sem)
      throw GrammarError(name + ": a [cfg] grammar needs a lambda-term generic rule for payloads");
  }

  bool needs_sem = g.has_cfg || g.sem != nullptr;
  if (const Section* lex = find_section("lexicon")) {
    for (const SectionLine& ln : lex->lines) {
      std::size_t c1 = ln.text.find(':');
      if (c1 == std::string::npos) fail(ln.no, "expected \"word : category [ : lambda-term ]\"");
      std::string word = trim(ln.text.substr(0, c1));
      if (word.empty() || word.find(' ') != std::string::npos || word.find('\t') != std::string::npos)
        fail(ln.no, "a lexicon word is a single token");
      std::size_t c2 = ln.text.find(':', c1 + 1);
      std::string cat_text = trim(c2 == std::string::npos ? ln.text.substr(c1 + 1)
                                                          : ln.text.substr(c1 + 1, c2 - c1 - 1));
      LexEntry entry{nullptr, nullptr};
      try {
        entry.cat = parse_category(cat_text, *g.pool);
        if (c2 != std::string::npos) entry.sem = parse_term(trim(ln.text.substr(c2 + 1)));
      } catch (const std::exception& e) {
        fail(ln.no, e.what());
      }
      if (needs_sem && !entry.sem)
        fail(ln.no, "this grammar carries a semantic domain; \"" + word +
                        "\" needs a lambda term");
      g.lexicon[word].push_back(entry);
    }
  }

  if (const Section* goal = find_section("goal")) {
    if (goal->lines.size() != 1) fail(goal->no, "[goal] holds exactly one line");
    g.goal_text = goal->lines[0].text;
  }

  if (!g.has_cfg && g.sem && !g.syn)
    throw GrammarError(name + ": a semantic rule needs a category rule alongside it");
  return g;
}

inline GrammarFile load_grammar_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw GrammarError("cannot read " + path);
  std::ostringstream buf;
  buf << in.rdbuf();
  std::string base = path;
  std::size_t slash = base.find_last_of('/');
  if (slash != std::string::npos) base = base.substr(slash + 1);
  return load_grammar(buf.str(), base);
}

inline std::string print_grammar(const GrammarFile& g) {
  std::ostringstream out;
  if (!g.type_roots.empty() || !g.type_edges.empty()) {
    out << "[types]\n";
    for (const std::string& r : g.type_roots) out << r << "\n";
    for (const auto& [c, p] : g.type_edges) out << c << " < " << p << "\n";
    out << "\n";
  }
  const TypeHierarchy& h = *g.hierarchy;
  for (const auto& rule : g.generics) {
    out << "[generic " << rule->name << "]\n";
    for (const PartialRule& pr : rule->rules) {
      out << h.name(pr.signature.first) << " " << h.name(pr.signature.second) << " : "
          << body_to_string(pr.body);
      if (!pr.guard.empty()) out << " requires " << pr.guard;
      out << "\n";
    }
    out << "\n";
  }
  if (g.has_cfg) {
    out << "[cfg]\n";
    for (const CfgProduction& p : g.productions)
      out << h.name(p.lhs) << " -> " << h.name(p.left) << " " << h.name(p.right) << "\n";
    out << "\n";
  }
  if (!g.lexicon.empty()) {
    out << "[lexicon]\n";
    for (const auto& [word, entries] : g.lexicon)
      for (const LexEntry& e : entries) {
        out << word << " : " << print_category(e.cat);
        if (e.sem) out << " : " << print_term(e.sem);
        out << "\n";
      }
    out << "\n";
  }
  if (!g.goal_text.empty()) out << "[goal]\n" << g.goal_text << "\n";
  return out.str();
}

inline bool grammar_equal(const GrammarFile& a, const GrammarFile& b) {
  return print_grammar(a) == print_grammar(b);
}

inline Goal resolve_goal(const GrammarFile& g, const std::string& text) {
  Goal goal;
  if (std::optional<TypeId> t = g.hierarchy->find(text)) {
    goal.type = *t;
    return goal;
  }
  try {
    goal.cat = parse_category(text, *g.pool);
  } catch (const CategoryError& e) {
    throw GrammarError("goal \"" + text + "\" is neither a hierarchy type nor a category (" +
                       e.what() + ")");
  }
  return goal;
}

inline ParseMode parse_mode(const GrammarFile& g) {
  if (g.has_cfg) return ParseMode::Cfg;
  if (g.sem) return ParseMode::SynSem;
  return ParseMode::Syn;
}

inline ParserInput parser_input(const GrammarFile& g) {
  ParserInput in;
  in.hierarchy = g.hierarchy.get();
  in.pool = g.pool.get();
  in.lexicon = &g.lexicon;
  in.syn = g.syn;
  in.sem = g.sem;
  in.productions = g.has_cfg ? &g.productions : nullptr;
  in.rules_by_name = &g.rules_by_name;
  return in;
}

inline ParseResult run_parse(const GrammarFile& g, const std::vector<std::string>& tokens,
                             const Goal& goal, const ParseOptions& opts = {}) {
  switch (parse_mode(g)) {
    case ParseMode::Cfg:
      return parse_cfg_generic(parser_input(g), tokens, goal, opts);
    case ParseMode::SynSem:
      return parse_syn_sem(parser_input(g), tokens, goal, opts);
    case ParseMode::Syn:
      if (!g.syn) throw GrammarError(g.name + ": grammar has no generic rule to parse with");
      return parse_syn(parser_input(g), tokens, goal, opts);
  }
  throw GrammarError("unreachable");
}

struct CheckReport {
  std::vector<std::string> conflicts;
  std::size_t types = 0;
  std::size_t rules = 0;
  std::size_t words = 0;
};

inline CheckReport check_grammar(const GrammarFile& g) {
  CheckReport report;
  report.types = g.hierarchy->size();
  report.rules = g.generics.size();
  report.words = g.lexicon.size();
  for (const auto& rule : g.generics)
    for (const WellFormednessConflict& c : check_well_formed(rule->poset))
      report.conflicts.push_back("conflict in " + rule->name + ": " +
                                 display(*g.hierarchy, c.a) + " vs " + display(*g.hierarchy, c.b) +
                                 ", missing " + display(*g.hierarchy, c.missing));
  return report;
}

}  // namespace grules
