#include <grules/catgram.hpp>

#include <catch2/catch_amalgamated.hpp>

using namespace grules;

TEST_CASE("forward and backward application instantiate variables") {
  CatPool pool;
  SpannedCat met{parse_category("(np\\s)/np", pool), {1, 2}};
  SpannedCat jane{pool.atom("np"), {2, 3}};
  auto vp = fa(met, jane, pool);
  REQUIRE(vp.has_value());
  CHECK(print_category(vp->cat) == "np\\s");
  CHECK(vp->span == Span{1, 3});

  SpannedCat john{pool.atom("np"), {0, 1}};
  auto s = ba(john, *vp, pool);
  REQUIRE(s.has_value());
  CHECK(print_category(s->cat) == "s");
  CHECK(s->span == Span{0, 3});

  // polymorphic conjunction: X binds the whole right argument
  SpannedCat conj{parse_category("(X\\X)/X", pool), {4, 5}};
  SpannedCat tup{pool.tuple({{pool.atom("np"), {5, 6}}, {parse_category("vm", pool), {6, 7}}}), {5, 7}};
  auto work = fa(conj, tup, pool);
  REQUIRE(work.has_value());
  CHECK(is_ctuple_cat(work->cat));
  CHECK(print_category(work->cat) == "<np, (np\\s)\\(np\\s)>\\<np, (np\\s)\\(np\\s)>");

  // inapplicable shapes give nil
  CHECK_FALSE(fa(jane, met, pool).has_value());
  CHECK_FALSE(ba(*vp, john, pool).has_value());
  // a result still containing variables is rejected
  SpannedCat conj2{parse_category("(X\\X)/X", pool), {5, 6}};
  CHECK_FALSE(fa(conj, conj2, pool).has_value());
}

TEST_CASE("ituple records spans and never nests on the left") {
  CatPool pool;
  SpannedCat chris{pool.atom("np"), {5, 6}};
  SpannedCat today{parse_category("vm", pool), {6, 7}};
  SpannedCat pair = ituple(chris, today, pool);
  REQUIRE(pair.cat->kind == CatKind::Tuple);
  REQUIRE(pair.cat->elems.size() == 2);
  CHECK(pair.cat->elems[0].span == Span{5, 6});
  CHECK(pair.cat->elems[1].span == Span{6, 7});
  CHECK(pair.span == Span{5, 7});

  SpannedCat more{pool.atom("pp"), {7, 8}};
  SpannedCat triple = ituple(pair, more, pool);
  REQUIRE(triple.cat->elems.size() == 3);  // flat, not nested
  CHECK(print_category(triple.cat) == "<np, (np\\s)\\(np\\s), pp>");
}

TEST_CASE("scan cancels the last left element and records the witness span") {
  CatPool pool;
  CatRef np = pool.atom("np");
  CatRef vm = parse_category("vm", pool);
  SpannedCat work{pool.backward(pool.tuple({{np, {5, 6}}, {vm, {6, 7}}}),
                                pool.tuple({{np, {5, 6}}, {vm, {6, 7}}})),
                  {4, 7}};

  SpannedCat yesterday{vm, {3, 4}};
  auto after = scan(yesterday, work, pool);
  REQUIRE(after.has_value());
  REQUIRE(after->cat->fst->elems.size() == 1);
  CHECK(after->cat->snd->elems[1].span == Span{3, 4});  // witness recorded
  CHECK(after->cat->snd->elems[0].span == Span{5, 6});  // untouched so far
  CHECK(after->span == Span{3, 7});

  SpannedCat jane{np, {2, 3}};
  auto done = scan(jane, *after, pool);
  REQUIRE(done.has_value());
  CHECK(done->cat->fst->elems.empty());
  CHECK(done->cat->snd->elems[0].span == Span{2, 3});

  // mismatched categories do not scan
  SpannedCat s_item{pool.atom("s"), {2, 3}};
  CHECK_FALSE(scan(s_item, *after, pool).has_value());
  // scan needs a coordinated tuple on the right
  CHECK_FALSE(scan(jane, yesterday, pool).has_value());
}

TEST_CASE("dtuple splices only an exhausted coordinated tuple") {
  CatPool pool;
  CatRef np = pool.atom("np");
  CatRef vm = parse_category("vm", pool);
  SpannedCat pending{pool.backward(pool.tuple({{np, {5, 6}}}), pool.tuple({{np, {5, 6}}, {vm, {3, 4}}})),
                     {3, 7}};
  CHECK_FALSE(dtuple(pending).has_value());

  SpannedCat done{pool.backward(pool.tuple({}), pool.tuple({{np, {2, 3}}, {vm, {3, 4}}})), {2, 7}};
  auto out = dtuple(done);
  REQUIRE(out.has_value());
  REQUIRE(out->size() == 2);
  CHECK((*out)[0].cat == np);
  CHECK((*out)[0].span == Span{2, 3});
  CHECK((*out)[1].cat == vm);
  CHECK((*out)[1].span == Span{3, 4});
}

TEST_CASE("classification follows category shape") {
  auto g = build_ncc_grammar();
  const TypeHierarchy& h = *g.hierarchy;
  CatPool& pool = *g.pool;
  auto cls = [&](const std::string& cat) {
    auto t = g.binding.classify(parse_category(cat, pool));
    REQUIRE(t.has_value());
    return h.name(*t);
  };
  CHECK(cls("np") == "np");
  CHECK(cls("(np\\s)/np") == "verb");
  CHECK(cls("((np\\s)/pp)/np") == "verb");
  CHECK(cls("np\\s") == "phrase");  // a predicate is a phrase, not a lexical verb
  CHECK(cls("vm") == "vm");
  CHECK(cls("vp\\vp") == "vm");
  CHECK(cls("<np, vm>") == "tuple");
  CHECK(cls("<np, vm>\\<np, vm>") == "c<>");
  CHECK(cls("(X\\X)/X") == "conj");
  CHECK(cls("(s\\s)/s") == "conj");
  CHECK(cls("s") == "phrase");
  CHECK(cls("pp/np") == "phrase");  // result chain ends at pp, not np\s

  // without the special names, atoms map to their own types and nothing else
  TypeHierarchy flat;
  flat.intern("NP");
  TypeId si = flat.intern("S_i");
  flat.finalize();
  HierarchyBinding b{&flat};
  CHECK(b.classify(pool.atom("S_i")) == si);
  CHECK_FALSE(b.classify(pool.atom("unknown")).has_value());
  CHECK_FALSE(b.classify(parse_category("np\\s", pool)).has_value());
}

TEST_CASE("the coordination grammar is well-formed and binds as expected") {
  auto g = build_ncc_grammar();
  const TypeHierarchy& h = *g.hierarchy;
  CHECK(check_well_formed(g.syn.poset).empty());

  auto sig = [&](const std::string& a, const std::string& b) {
    const PartialRule* r = dynamic_bind(g.syn, h.id(a), h.id(b));
    REQUIRE(r != nullptr);
    return display(h, r->signature);
  };
  CHECK(sig("np", "vm") == "C⊗C");
  CHECK(sig("conj", "tuple") == "T⊗T");
  CHECK(sig("np", "verb") == "np⊗verb");
  CHECK(sig("np", "c<>") == "C⊗c<>");
  CHECK(sig("vm", "c<>") == "C⊗c<>");
  CHECK(sig("phrase", "phrase") == "T⊗T");
  CHECK(sig("np", "np") == "C⊗C");

  // every pair binds without conflict under the well-formed poset
  for (TypeId a = 0; a < static_cast<TypeId>(h.size()); ++a)
    for (TypeId b = 0; b < static_cast<TypeId>(h.size()); ++b)
      CHECK_NOTHROW(dynamic_bind(g.syn, a, b));
}

TEST_CASE("a verb followed by its subject tuples only under a following conjunction") {
  auto g = build_ncc_grammar();
  const TypeHierarchy& h = *g.hierarchy;
  CatPool& pool = *g.pool;
  // "John made and ...": <np, verb> forms because a conjunction follows
  SpannedCat john{pool.atom("np"), {0, 1}};
  SpannedCat made{parse_category("(np\\s)/np", pool), {1, 2}};
  SentenceContext ctx;
  ctx.n = 8;
  ctx.conj_at.assign(8, 0);
  ctx.conj_at[2] = 1;
  CatRuleEnv env(pool, &ctx);
  auto r = apply_generic(g.syn, h.id("np"), john, h.id("verb"), made, env);
  REQUIRE(r.has_value());
  CHECK(print_category((*r)[0].cat) == "<np, (np\\s)/np>");

  SentenceContext plain;
  plain.n = 8;
  plain.conj_at.assign(8, 0);
  CatRuleEnv env2(pool, &plain);
  CHECK_FALSE(apply_generic(g.syn, h.id("np"), john, h.id("verb"), made, env2).has_value());
}

TEST_CASE("the sample lexicon covers the coordination example sentence") {
  auto g = build_ncc_grammar();
  for (const std::string& w : {"John", "met", "Jane", "yesterday", "and", "Chris", "today"}) {
    REQUIRE(g.lexicon.count(w) == 1);
    CHECK(g.lexicon[w].size() == 1);
  }
  CHECK(is_conj_cat(g.lexicon["and"][0].cat));
  CHECK(is_verb_cat(g.lexicon["met"][0].cat));
  CHECK(is_vm_cat(g.lexicon["today"][0].cat));
}
