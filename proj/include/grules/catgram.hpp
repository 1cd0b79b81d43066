#pragma once

// Categorial-grammar rules over spanned categories: forward and backward
// application, tuple introduction (ituple), incremental cancellation of a
// coordinated tuple (scan), and the splice of its recorded elements back
// into the configuration (dtuple). Also the classifier mapping category
// shapes to hierarchy types, and the stock non-constituent-coordination
// grammar built programmatically.

#include <map>
#include <memory>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "category.hpp"
#include "generic_rule.hpp"
#include "lambda.hpp"
#include "poset.hpp"

namespace grules {

template <>
struct payload_traits<SpannedCat> {
  static constexpr const char* tag = "categories";
  static bool equal(const SpannedCat& a, const SpannedCat& b) { return same_category(a.cat, b.cat); }
  static std::string print(const SpannedCat& a) { return print_category(a.cat); }
};

// ---- primitive rules ----

// x = X/Y followed by y matching Y yields X under the match bindings.
inline std::optional<SpannedCat> fa(const SpannedCat& x, const SpannedCat& y, CatPool& pool) {
  if (x.cat->kind != CatKind::Forward) return std::nullopt;
  Bindings b;
  if (!match_cat(x.cat->snd, y.cat, b)) return std::nullopt;
  CatRef r = substitute_cat(x.cat->fst, b, pool);
  if (r->has_var) return std::nullopt;  // derived entries must be variable-free
  return SpannedCat{r, {x.span.start, y.span.end}};
}

// y matching Y followed by x = Y\X yields X.
inline std::optional<SpannedCat> ba(const SpannedCat& y, const SpannedCat& x, CatPool& pool) {
  if (x.cat->kind != CatKind::Backward) return std::nullopt;
  Bindings b;
  if (!match_cat(x.cat->fst, y.cat, b)) return std::nullopt;
  CatRef r = substitute_cat(x.cat->snd, b, pool);
  if (r->has_var) return std::nullopt;
  return SpannedCat{r, {y.span.start, x.span.end}};
}

// Tuple introduction. A tuple on the left extends flat; anything else opens
// a fresh pair. Each element records the span it covered.
inline SpannedCat ituple(const SpannedCat& x, const SpannedCat& y, CatPool& pool) {
  std::vector<TupleElem> elems;
  if (x.cat->kind == CatKind::Tuple)
    elems = x.cat->elems;
  else
    elems.push_back({x.cat, x.span});
  elems.push_back({y.cat, y.span});
  return {pool.tuple(std::move(elems)), {x.span.start, y.span.end}};
}

// x followed by c = TupleL\TupleR cancels TupleL's last element against x
// and records x's span on the corresponding element of TupleR.
inline std::optional<SpannedCat> scan(const SpannedCat& x, const SpannedCat& c, CatPool& pool) {
  if (c.cat->kind != CatKind::Backward) return std::nullopt;
  CatRef left = c.cat->fst, right = c.cat->snd;
  if (left->kind != CatKind::Tuple || right->kind != CatKind::Tuple) return std::nullopt;
  if (left->elems.empty()) return std::nullopt;
  std::size_t n = left->elems.size();
  if (!same_category(left->elems.back().cat, x.cat)) return std::nullopt;
  std::vector<TupleElem> new_left(left->elems.begin(), left->elems.end() - 1);
  std::vector<TupleElem> new_right = right->elems;
  if (n - 1 < new_right.size()) new_right[n - 1] = {new_right[n - 1].cat, x.span};
  return SpannedCat{pool.backward(pool.tuple(std::move(new_left)), pool.tuple(std::move(new_right))),
                    {x.span.start, c.span.end}};
}

// Once the left tuple is exhausted (<>\TupleR), splice TupleR's elements
// back as separate entries, each carrying its recorded span.
inline std::optional<std::vector<SpannedCat>> dtuple(const SpannedCat& c) {
  if (c.cat->kind != CatKind::Backward) return std::nullopt;
  CatRef left = c.cat->fst, right = c.cat->snd;
  if (left->kind != CatKind::Tuple || !left->elems.empty()) return std::nullopt;
  if (right->kind != CatKind::Tuple || right->elems.empty()) return std::nullopt;
  std::vector<SpannedCat> out;
  out.reserve(right->elems.size());
  for (const TupleElem& e : right->elems) out.push_back({e.cat, e.span});
  return out;
}

// ---- classification ----

inline bool is_vp_cat(CatRef c) {
  return c->kind == CatKind::Backward && c->fst->kind == CatKind::Atom && c->fst->name == "np" &&
         c->snd->kind == CatKind::Atom && c->snd->name == "s";
}

inline bool is_vm_cat(CatRef c) {
  return c->kind == CatKind::Backward && is_vp_cat(c->fst) && is_vp_cat(c->snd);
}

// A coordinated-tuple category TupleL\TupleR in any state of cancellation.
inline bool is_ctuple_cat(CatRef c) {
  return c->kind == CatKind::Backward && c->fst->kind == CatKind::Tuple &&
         c->snd->kind == CatKind::Tuple;
}

// The polymorphic conjunction scheme (X\X)/X, possibly instantiated.
inline bool is_conj_cat(CatRef c) {
  return c->kind == CatKind::Forward && c->fst->kind == CatKind::Backward &&
         same_category(c->fst->fst, c->fst->snd) && same_category(c->fst->snd, c->snd);
}

// A lexical verb: forward slashes whose result chain terminates in np\s.
inline bool is_verb_cat(CatRef c) {
  if (c->kind != CatKind::Forward) return false;
  CatRef r = c;
  while (r->kind == CatKind::Forward) r = r->fst;
  return is_vp_cat(r);
}

// Maps category shapes to hierarchy types for dynamic binding. Atoms named
// after a type classify as that type; the structural shapes only matter when
// the hierarchy declares the corresponding type name. Anything else falls
// back to phrase, then to the top type.
struct HierarchyBinding {
  const TypeHierarchy* hierarchy = nullptr;

  std::optional<TypeId> classify(CatRef c) const {
    const TypeHierarchy& h = *hierarchy;
    if (c->kind == CatKind::Atom)
      if (auto t = h.find(c->name)) return t;
    if (is_vm_cat(c))
      if (auto t = h.find("vm")) return t;
    if (c->kind == CatKind::Tuple)
      if (auto t = h.find("tuple")) return t;
    if (is_ctuple_cat(c))
      if (auto t = h.find("c<>")) return t;
    if (is_conj_cat(c))
      if (auto t = h.find("conj")) return t;
    if (is_verb_cat(c))
      if (auto t = h.find("verb")) return t;
    if (auto t = h.find("phrase")) return t;
    return h.top();
  }
};

// ---- sentence context and guards ----

// What guards may consult: which token positions hold a conjunction.
struct SentenceContext {
  std::vector<char> conj_at;
  int n = 0;
};

// ---- the category-domain evaluation environment ----

class CatRuleEnv {
 public:
  CatRuleEnv(CatPool& pool, const SentenceContext* ctx = nullptr) : pool_(pool), ctx_(ctx) {}

  std::optional<std::vector<SpannedCat>> prim2(const std::string& name, const SpannedCat& x,
                                               const SpannedCat& y) {
    if (name == "fa") return wrap(fa(x, y, pool_));
    if (name == "ba") return wrap(ba(x, y, pool_));
    if (name == "ituple") return std::vector<SpannedCat>{ituple(x, y, pool_)};
    if (name == "scan") return wrap(scan(x, y, pool_));
    throw RuleDiagnostic("rule " + name + " cannot combine two payloads");
  }

  std::optional<std::vector<SpannedCat>> prim1(const std::string& name, const SpannedCat& v) {
    if (name == "dtuple") return dtuple(v);
    throw RuleDiagnostic("rule " + name + " is not unary");
  }

  std::optional<std::vector<SpannedCat>> type_const(const std::string& name) {
    return std::vector<SpannedCat>{{pool_.atom(name), Span{}}};
  }

  std::optional<std::vector<SpannedCat>> lambda_body2(const LamRef&, const SpannedCat&,
                                                      const SpannedCat&) {
    throw RuleDiagnostic("lambda-term body in a category-domain rule");
  }
  std::optional<std::vector<SpannedCat>> lambda_body1(const LamRef&, const SpannedCat&) {
    throw RuleDiagnostic("lambda-term body in a category-domain rule");
  }

  std::optional<std::vector<SpannedCat>> rule_ref(const std::string& name, const SpannedCat&,
                                                  const SpannedCat&) {
    throw RuleDiagnostic("named rule " + name + " is not available in this context");
  }

  bool guard(const std::string& name, const SpannedCat& x, const SpannedCat& y) const {
    if (name == "conj-left") {
      int p = x.span.start - 1;
      return ctx_ && p >= 0 && p < ctx_->n && ctx_->conj_at[p];
    }
    if (name == "conj-right") {
      int p = y.span.end;
      return ctx_ && p >= 0 && p < ctx_->n && ctx_->conj_at[p];
    }
    throw RuleDiagnostic("unknown guard: " + name);
  }

 private:
  static std::optional<std::vector<SpannedCat>> wrap(std::optional<SpannedCat> r) {
    if (!r) return std::nullopt;
    return std::vector<SpannedCat>{*r};
  }

  CatPool& pool_;
  const SentenceContext* ctx_;
};

// ---- lexicon ----

struct LexEntry {
  CatRef cat = nullptr;
  LamRef sem;  // null when the grammar carries no semantics
};

// Ordered for deterministic iteration.
using Lexicon = std::map<std::string, std::vector<LexEntry>>;

// ---- the stock coordination grammar ----

struct NccGrammar {
  std::shared_ptr<TypeHierarchy> hierarchy;
  std::shared_ptr<CatPool> pool;
  HierarchyBinding binding;
  GenericRule syn;
  Lexicon lexicon;
};

// The coordination hierarchy:
//   T > {phrase, word}; phrase > {c<>, C}; word > {conj, verb};
//   C > {np, vm, tuple}
// and the SYN rule:
//   T  (x) T    disj(fa, ba)
//   C  (x) C    ituple            requires conj-left
//   np (x) verb ituple            requires conj-right
//   C  (x) c<>  comp(opt(dtuple), scan)
inline NccGrammar build_ncc_grammar() {
  NccGrammar g;
  g.hierarchy = std::make_shared<TypeHierarchy>();
  g.pool = std::make_shared<CatPool>();
  TypeHierarchy& h = *g.hierarchy;

  TypeId top = h.intern("T");
  TypeId phrase = h.intern("phrase");
  TypeId word = h.intern("word");
  TypeId ctuple = h.intern("c<>");
  TypeId c = h.intern("C");
  TypeId conj = h.intern("conj");
  TypeId verb = h.intern("verb");
  TypeId np = h.intern("np");
  TypeId vm = h.intern("vm");
  TypeId tuple = h.intern("tuple");
  h.add_subtype(phrase, top);
  h.add_subtype(word, top);
  h.add_subtype(ctuple, phrase);
  h.add_subtype(c, phrase);
  h.add_subtype(conj, word);
  h.add_subtype(verb, word);
  h.add_subtype(np, c);
  h.add_subtype(vm, c);
  h.add_subtype(tuple, c);
  h.finalize();

  g.binding.hierarchy = g.hierarchy.get();

  g.syn.name = "SYN";
  g.syn.domain = InfoDomain::Categories;
  g.syn.poset.hierarchy = g.hierarchy.get();
  g.syn.add({top, top}, make_disj(make_prim("fa"), make_prim("ba")));
  g.syn.add({c, c}, make_prim("ituple"), "conj-left");
  g.syn.add({np, verb}, make_prim("ituple"), "conj-right");
  g.syn.add({c, ctuple}, make_comp(make_opt(make_prim("dtuple")), make_prim("scan")));

  CatPool& pool = *g.pool;
  auto lex = [&](const std::string& word_form, const std::string& cat) {
    g.lexicon[word_form].push_back({parse_category(cat, pool), nullptr});
  };
  lex("John", "np");
  lex("met", "(np\\s)/np");
  lex("Jane", "np");
  lex("yesterday", "vp\\vp");
  lex("and", "(X\\X)/X");
  lex("Chris", "np");
  lex("today", "vp\\vp");
  return g;
}

}  // namespace grules
