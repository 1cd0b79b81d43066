#include <catch2/catch_amalgamated.hpp>

#include <algorithm>
#include <map>
#include <memory>
#include <string>
#include <vector>

#include <grules/catgram.hpp>
#include <grules/parser.hpp>

using namespace grules;
using Catch::Matchers::ContainsSubstring;

namespace {

// S > S_i, NP, VP > {VP_2, VP_i}; SYN = {NP(x)VP: S, NP(x)VP_i: S_i}
struct ToyGrammar {
  std::shared_ptr<TypeHierarchy> h = std::make_shared<TypeHierarchy>();
  std::shared_ptr<CatPool> pool = std::make_shared<CatPool>();
  GenericRule syn;
  Lexicon lexicon;

  ToyGrammar() {
    TypeId s = h->intern("S");
    h->intern("NP");
    TypeId vp = h->intern("VP");
    TypeId vp2 = h->intern("VP_2");
    TypeId vpi = h->intern("VP_i");
    TypeId si = h->intern("S_i");
    h->add_subtype(vp2, vp);
    h->add_subtype(vpi, vp);
    h->add_subtype(si, s);
    h->finalize();
    syn.name = "SYN";
    syn.poset.hierarchy = h.get();
    syn.add({h->id("NP"), vp}, make_type_const("S"));
    syn.add({h->id("NP"), vpi}, make_type_const("S_i"));
    lexicon["Kim"].push_back({pool->atom("NP"), nullptr});
    lexicon["naps"].push_back({pool->atom("VP_2"), nullptr});
    lexicon["left"].push_back({pool->atom("VP_i"), nullptr});
  }

  ParserInput input() {
    ParserInput in;
    in.hierarchy = h.get();
    in.pool = pool.get();
    in.lexicon = &lexicon;
    in.syn = &syn;
    return in;
  }
};

// Proper-Noun < NP, VP_i < VP, S_i < S with parallel SYN and SEM rules.
struct BettyGrammar {
  std::shared_ptr<TypeHierarchy> h = std::make_shared<TypeHierarchy>();
  std::shared_ptr<CatPool> pool = std::make_shared<CatPool>();
  GenericRule syn, sem;
  Lexicon lexicon;

  BettyGrammar() {
    TypeId s = h->intern("S");
    TypeId np = h->intern("NP");
    TypeId vp = h->intern("VP");
    TypeId pn = h->intern("Proper-Noun");
    TypeId vpi = h->intern("VP_i");
    TypeId si = h->intern("S_i");
    h->add_subtype(pn, np);
    h->add_subtype(vpi, vp);
    h->add_subtype(si, s);
    h->finalize();
    syn.name = "SYN";
    syn.poset.hierarchy = h.get();
    syn.add({np, vp}, make_type_const("S"));
    syn.add({np, vpi}, make_type_const("S_i"));
    sem.name = "SEM";
    sem.domain = InfoDomain::LambdaTerms;
    sem.poset.hierarchy = h.get();
    sem.add({np, vp}, make_lambda_body(parse_term("\\x.\\y. x(y)")));
    sem.add({pn, vp}, make_lambda_body(parse_term("\\x.\\y. x(y) & y(Pete)")));
    lexicon["Betty"].push_back({pool->atom("Proper-Noun"), parse_term("\\P. P(Betty)")});
    lexicon["got+angry"].push_back({pool->atom("VP_i"), parse_term("\\x. ANGRY(x)")});
  }

  ParserInput input() {
    ParserInput in;
    in.hierarchy = h.get();
    in.pool = pool.get();
    in.lexicon = &lexicon;
    in.syn = &syn;
    in.sem = &sem;
    return in;
  }
};

ParserInput ncc_input(const NccGrammar& g) {
  ParserInput in;
  in.hierarchy = g.hierarchy.get();
  in.pool = g.pool.get();
  in.lexicon = &g.lexicon;
  in.syn = &g.syn;
  return in;
}

GenericRule strip_guards(const GenericRule& g) {
  GenericRule out;
  out.name = g.name;
  out.domain = g.domain;
  out.poset.hierarchy = g.poset.hierarchy;
  for (const PartialRule& r : g.rules) out.add(r.signature, r.body);
  return out;
}

std::vector<const TraceRecord*> reduce_steps(const Derivation& d) {
  std::vector<const TraceRecord*> out;
  for (const TraceRecord& r : d.steps)
    if (r.kind == StepKind::Reduce) out.push_back(&r);
  return out;
}

void check_tiling(const Derivation& d) {
  for (const TraceRecord& r : d.steps) {
    int expect = 0;
    for (const StackEntry& e : r.stack_after) {
      CHECK(e.syn.span.start == expect);
      CHECK(e.syn.span.start < e.syn.span.end);
      expect = e.syn.span.end;
    }
    CHECK(expect == r.j_after);
  }
}

}  // namespace

TEST_CASE("toy grammar accepts subject-verb order and dispatches on subtypes") {
  ToyGrammar g;
  Goal goal;
  goal.type = g.h->id("S");
  ParseResult r = parse_syn(g.input(), {"Kim", "naps"}, goal);
  REQUIRE(r.accepted);
  REQUIRE(r.derivations.size() == 1);
  const Derivation& d = r.derivations[0];
  REQUIRE(d.steps.size() == 4);
  CHECK(d.steps[0].kind == StepKind::Axiom);
  CHECK(d.steps[1].token == "Kim");
  CHECK(d.steps[2].token == "naps");
  const TraceRecord& red = d.steps[3];
  CHECK(red.kind == StepKind::Reduce);
  CHECK(red.pos == 0);
  REQUIRE(red.rules.size() == 1);
  CHECK(red.rules[0].rule == "SYN");
  CHECK(red.rules[0].signature == "NP⊗VP");
  REQUIRE(red.stack_after.size() == 1);
  CHECK(print_category(red.stack_after[0].syn.cat) == "S");
  CHECK(red.stack_after[0].syn.span == Span{0, 2});
  check_tiling(d);

  ParseResult ri = parse_syn(g.input(), {"Kim", "left"}, goal);
  REQUIRE(ri.accepted);
  REQUIRE(ri.derivations.size() == 1);
  CHECK(reduce_steps(ri.derivations[0])[0]->rules[0].signature == "NP⊗VP_i");
  CHECK(print_category(ri.derivations[0].steps[3].stack_after[0].syn.cat) == "S_i");
}

TEST_CASE("reversed order is rejected with no applicable binding") {
  ToyGrammar g;
  Goal goal;
  goal.type = g.h->id("S");
  ParseResult r = parse_syn(g.input(), {"naps", "Kim"}, goal);
  CHECK_FALSE(r.accepted);
  CHECK(r.derivations.empty());
  CHECK(r.stats.reduce_attempted == 1);
  CHECK(r.stats.reduce_fired == 0);
}

TEST_CASE("empty input never reaches the goal") {
  ToyGrammar g;
  Goal goal;
  goal.type = g.h->id("S");
  ParseResult r = parse_syn(g.input(), {}, goal);
  CHECK_FALSE(r.accepted);
  CHECK(r.stats.items == 1);
  CHECK(r.derivations.empty());
}

TEST_CASE("unknown words fail up front") {
  ToyGrammar g;
  Goal goal;
  goal.type = g.h->id("S");
  CHECK_THROWS_WITH(parse_syn(g.input(), {"Kim", "flies"}, goal),
                    ContainsSubstring("unknown word \"flies\" at position 1"));
}

TEST_CASE("parallel derivation composes Betty in four steps") {
  BettyGrammar bg;
  Goal goal;
  goal.type = bg.h->id("S");
  ParseResult r = parse_syn_sem(bg.input(), {"Betty", "got+angry"}, goal);
  REQUIRE(r.accepted);
  REQUIRE(r.derivations.size() == 1);
  const Derivation& d = r.derivations[0];
  REQUIRE(d.steps.size() == 4);
  CHECK(d.steps[0].kind == StepKind::Axiom);
  CHECK(d.steps[1].kind == StepKind::Shift);
  CHECK(d.steps[1].token == "Betty");
  CHECK(d.steps[2].token == "got+angry");
  const TraceRecord& red = d.steps[3];
  REQUIRE(red.rules.size() == 2);
  CHECK(red.rules[0].rule == "SYN");
  CHECK(red.rules[0].signature == "NP⊗VP_i");
  CHECK(red.rules[1].rule == "SEM");
  CHECK(red.rules[1].signature == "Proper-Noun⊗VP");
  REQUIRE(red.produced.size() == 1);
  CHECK(print_category(red.produced[0].syn.cat) == "S_i");
  CHECK(print_term(red.produced[0].sem) == "ANGRY(Betty) & ANGRY(Pete)");
  CHECK(red.produced[0].syn.span == Span{0, 2});
  CHECK(r.stats.items == 4);
  CHECK(r.stats.shifts == 2);
  CHECK(r.stats.reduce_attempted == 1);
  CHECK(r.stats.reduce_fired == 1);
  check_tiling(d);
}

TEST_CASE("coordination sentence has exactly one derivation with the frozen reduce order") {
  NccGrammar g = build_ncc_grammar();
  std::vector<std::string> tokens{"John", "met", "Jane", "yesterday", "and", "Chris", "today"};
  Goal goal;
  goal.cat = g.pool->atom("s");
  ParseResult r = parse_syn(ncc_input(g), tokens, goal);
  REQUIRE(r.accepted);
  REQUIRE(r.derivations.size() == 1);
  const Derivation& d = r.derivations[0];
  REQUIRE(d.steps.size() == 15);
  for (int i = 1; i <= 7; ++i) {
    CHECK(d.steps[i].kind == StepKind::Shift);
    CHECK(d.steps[i].token == tokens[i - 1]);
    CHECK(d.steps[i].span == Span{i - 1, i});
  }

  auto reds = reduce_steps(d);
  REQUIRE(reds.size() == 7);
  std::vector<std::string> sigs, expected{"C⊗C", "T⊗T", "C⊗c<>", "C⊗c<>", "T⊗T", "T⊗T", "T⊗T"};
  std::vector<int> poss, expected_pos{5, 4, 3, 2, 1, 1, 0};
  for (const TraceRecord* t : reds) {
    REQUIRE(t->rules.size() == 1);
    CHECK(t->rules[0].rule == "SYN");
    sigs.push_back(t->rules[0].signature);
    poss.push_back(t->pos);
  }
  CHECK(sigs == expected);
  CHECK(poss == expected_pos);

  CHECK(print_category(reds[0]->produced[0].syn.cat) == "<np, (np\\s)\\(np\\s)>");
  CHECK(reds[0]->produced[0].syn.span == Span{5, 7});
  CHECK(reds[1]->produced[0].syn.span == Span{4, 7});
  CHECK(print_category(reds[2]->produced[0].syn.cat) == "<np>\\<np, (np\\s)\\(np\\s)>");
  CHECK(reds[2]->produced[0].syn.span == Span{3, 7});

  REQUIRE(reds[3]->produced.size() == 2);
  CHECK(print_category(reds[3]->produced[0].syn.cat) == "np");
  CHECK(reds[3]->produced[0].syn.span == Span{2, 3});
  CHECK(print_category(reds[3]->produced[1].syn.cat) == "(np\\s)\\(np\\s)");
  CHECK(reds[3]->produced[1].syn.span == Span{3, 7});

  CHECK(print_category(reds[4]->produced[0].syn.cat) == "np\\s");
  CHECK(reds[4]->produced[0].syn.span == Span{1, 3});
  CHECK(reds[5]->produced[0].syn.span == Span{1, 7});
  CHECK(print_category(reds[6]->produced[0].syn.cat) == "s");
  CHECK(reds[6]->produced[0].syn.span == Span{0, 7});

  REQUIRE(d.steps.back().stack_after.size() == 1);
  CHECK(d.steps.back().stack_after[0].syn.cat == g.pool->atom("s"));
  check_tiling(d);

  CHECK(r.stats.reduce_fired >= 7);
  CHECK(r.stats.reduce_attempted > r.stats.reduce_fired);
  CHECK(r.stats.shifts >= 7);
}

TEST_CASE("closure results are deterministic across runs") {
  NccGrammar g = build_ncc_grammar();
  std::vector<std::string> tokens{"John", "met", "Jane", "yesterday", "and", "Chris", "today"};
  Goal goal;
  goal.cat = g.pool->atom("s");
  ParseResult a = parse_syn(ncc_input(g), tokens, goal);
  ParseResult b = parse_syn(ncc_input(g), tokens, goal);
  CHECK(a.stats.items == b.stats.items);
  CHECK(a.stats.reduce_attempted == b.stats.reduce_attempted);
  REQUIRE(a.derivations.size() == b.derivations.size());
  for (std::size_t i = 0; i < a.derivations.size(); ++i) {
    const auto& da = a.derivations[i].steps;
    const auto& db = b.derivations[i].steps;
    REQUIRE(da.size() == db.size());
    for (std::size_t k = 0; k < da.size(); ++k) {
      CHECK(da[k].kind == db[k].kind);
      CHECK(da[k].pos == db[k].pos);
      REQUIRE(da[k].rules.size() == db[k].rules.size());
      for (std::size_t m = 0; m < da[k].rules.size(); ++m)
        CHECK(da[k].rules[m].signature == db[k].rules[m].signature);
    }
  }
}

TEST_CASE("dropping the guards inflates the closure") {
  NccGrammar g = build_ncc_grammar();
  GenericRule open = strip_guards(g.syn);
  ParserInput guarded = ncc_input(g);
  ParserInput unrestricted = guarded;
  unrestricted.syn = &open;
  std::vector<std::string> tokens{"John", "met", "Jane", "yesterday", "and", "Chris", "today"};
  auto [attempted_g, fired_g] = count_reduce_attempts(guarded, tokens);
  auto [attempted_u, fired_u] = count_reduce_attempts(unrestricted, tokens);
  CHECK(attempted_u > attempted_g);
  CHECK(fired_u > fired_g);
}

TEST_CASE("longer coordination still accepted with a unique derivation") {
  NccGrammar g = build_ncc_grammar();
  g.lexicon["Sam"].push_back({parse_category("np", *g.pool), nullptr});
  std::vector<std::string> tokens{"John", "met",  "Jane", "yesterday", "and",
                                  "Chris", "today", "and",  "Sam",      "today"};
  Goal goal;
  goal.cat = g.pool->atom("s");
  ParseResult r = parse_syn(ncc_input(g), tokens, goal);
  REQUIRE(r.accepted);
  CHECK(r.derivations.size() >= 1);
  for (const Derivation& d : r.derivations) {
    check_tiling(d);
    REQUIRE(d.steps.back().stack_after.size() == 1);
    CHECK(d.steps.back().stack_after[0].syn.cat == g.pool->atom("s"));
  }
}

TEST_CASE("cfg productions dispatch through the hierarchy and fork per production") {
  auto h = std::make_shared<TypeHierarchy>();
  TypeId top = h->intern("TOP");
  TypeId s = h->intern("S");
  TypeId s2 = h->intern("S2");
  TypeId np = h->intern("NP");
  TypeId vp = h->intern("VP");
  TypeId vp2 = h->intern("VP_2");
  h->add_subtype(s, top);
  h->add_subtype(s2, top);
  h->add_subtype(np, top);
  h->add_subtype(vp, top);
  h->add_subtype(vp2, vp);
  h->finalize();

  GenericRule sem;
  sem.name = "SEM";
  sem.domain = InfoDomain::LambdaTerms;
  sem.poset.hierarchy = h.get();
  sem.add({np, vp}, make_lambda_body(parse_term("\\x.\\y. y(x)")));

  CatPool pool;
  Lexicon lexicon;
  lexicon["Kim"].push_back({pool.atom("NP"), parse_term("Kim")});
  lexicon["naps"].push_back({pool.atom("VP_2"), parse_term("\\x. NAP(x)")});

  std::vector<CfgProduction> productions{{s, np, vp}, {s2, np, vp2}};

  ParserInput in;
  in.hierarchy = h.get();
  in.pool = &pool;
  in.lexicon = &lexicon;
  in.sem = &sem;
  in.productions = &productions;

  Goal goal;
  goal.type = top;
  ParseResult r = parse_cfg_generic(in, {"Kim", "naps"}, goal);
  REQUIRE(r.accepted);
  REQUIRE(r.derivations.size() == 2);
  std::vector<std::string> lhs, prods;
  for (const Derivation& d : r.derivations) {
    auto reds = reduce_steps(d);
    REQUIRE(reds.size() == 1);
    REQUIRE(reds[0]->rules.size() == 2);
    CHECK(reds[0]->rules[0].rule == "cfg");
    prods.push_back(reds[0]->rules[0].signature);
    CHECK(reds[0]->rules[1].rule == "SEM");
    CHECK(reds[0]->rules[1].signature == "NP⊗VP");
    lhs.push_back(print_category(reds[0]->produced[0].syn.cat));
    CHECK(print_term(reds[0]->produced[0].sem) == "NAP(Kim)");
  }
  std::sort(lhs.begin(), lhs.end());
  std::sort(prods.begin(), prods.end());
  CHECK(lhs == std::vector<std::string>{"S", "S2"});
  CHECK(prods == std::vector<std::string>{"S -> NP VP", "S2 -> NP VP_2"});
}

TEST_CASE("named rule references resolve through the registry") {
  NccGrammar g = build_ncc_grammar();
  TypeId top = g.hierarchy->id("T");
  GenericRule fwd;
  fwd.name = "FWD";
  fwd.poset.hierarchy = g.hierarchy.get();
  fwd.add({top, top}, make_prim("fa"));
  GenericRule main;
  main.name = "SYN";
  main.poset.hierarchy = g.hierarchy.get();
  main.add({top, top}, make_rule_ref("FWD"));
  std::map<std::string, const GenericRule*> registry{{"FWD", &fwd}};

  ParserInput in = ncc_input(g);
  in.syn = &main;
  in.rules_by_name = &registry;
  Goal goal;
  goal.cat = parse_category("np\\s", *g.pool);
  ParseResult r = parse_syn(in, {"met", "Jane"}, goal);
  REQUIRE(r.accepted);
  REQUIRE(r.derivations.size() == 1);
  auto reds = reduce_steps(r.derivations[0]);
  REQUIRE(reds.size() == 1);
  CHECK(reds[0]->rules[0].signature == "T⊗T");
  CHECK(print_category(reds[0]->produced[0].syn.cat) == "np\\s");
}

TEST_CASE("shift-normal closure preserves recognition with fewer items") {
  NccGrammar g = build_ncc_grammar();
  g.lexicon["Sam"].push_back({parse_category("np", *g.pool), nullptr});
  Goal goal;
  goal.cat = g.pool->atom("s");
  std::vector<std::vector<std::string>> sents{
      {"John", "met", "Jane", "yesterday", "and", "Chris", "today"},
      {"John", "met", "Jane"},
      {"met", "Jane", "and"},
      {"John", "met", "Jane", "yesterday", "and", "Chris", "today", "and", "Sam", "today"},
  };
  for (const auto& tokens : sents) {
    ParseOptions full, normal;
    normal.shift_normal = true;
    ParseResult a = parse_syn(ncc_input(g), tokens, goal, full);
    ParseResult b = parse_syn(ncc_input(g), tokens, goal, normal);
    CHECK(a.accepted == b.accepted);
    CHECK(b.stats.items <= a.stats.items);
    CHECK(b.stats.reduce_attempted <= a.stats.reduce_attempted);
  }
  ParseOptions normal;
  normal.shift_normal = true;
  ParseResult b = parse_syn(ncc_input(g), sents[0], goal, normal);
  REQUIRE(b.derivations.size() == 1);
  CHECK(b.derivations[0].steps.size() == 15);
}

TEST_CASE("type goals accept refinements, category goals are exact") {
  ToyGrammar g;
  Goal stype;
  stype.type = g.h->id("S");
  CHECK(parse_syn(g.input(), {"Kim", "left"}, stype).accepted);  // S_i <= S

  Goal scat;
  scat.cat = g.pool->atom("S");
  CHECK_FALSE(parse_syn(g.input(), {"Kim", "left"}, scat).accepted);
  Goal sicat;
  sicat.cat = g.pool->atom("S_i");
  CHECK(parse_syn(g.input(), {"Kim", "left"}, sicat).accepted);
}
