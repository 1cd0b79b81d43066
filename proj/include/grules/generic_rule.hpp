#pragma once

// Generic rules: families of partial rules indexed by cartesian types, with
// dynamic binding selecting the most specific applicable member. Rule bodies
// are small combinator expressions; what the leaves mean for a concrete
// payload type is supplied by an evaluation environment, so the same rule
// structure serves categories and lambda terms.

#include <memory>
#include <optional>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "lambda.hpp"
#include "poset.hpp"

namespace grules {

// Errors defining a rule (duplicate signature, malformed body).
struct GenericRuleError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Binding found no unique most-specific rule.
struct BindingError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Raised while evaluating a body: both branches of a disjunction succeeded,
// or a combinator was fed a result shape it cannot consume.
struct RuleDiagnostic : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// ---- rule bodies ----

enum class BodyKind { Prim, TypeConst, Lambda, RuleRef, Comp, Disj, Opt };

struct BodyExpr;
using BodyRef = std::shared_ptr<const BodyExpr>;

struct BodyExpr {
  BodyKind kind;
  std::string name;  // Prim, TypeConst, RuleRef
  LamRef term;       // Lambda
  BodyRef a, b;      // Comp/Disj children, Opt child in a
};

inline BodyRef make_prim(std::string name) {
  return std::make_shared<BodyExpr>(BodyExpr{BodyKind::Prim, std::move(name), nullptr, nullptr, nullptr});
}
inline BodyRef make_type_const(std::string name) {
  return std::make_shared<BodyExpr>(BodyExpr{BodyKind::TypeConst, std::move(name), nullptr, nullptr, nullptr});
}
inline BodyRef make_lambda_body(LamRef term) {
  return std::make_shared<BodyExpr>(BodyExpr{BodyKind::Lambda, "", std::move(term), nullptr, nullptr});
}
inline BodyRef make_rule_ref(std::string name) {
  return std::make_shared<BodyExpr>(BodyExpr{BodyKind::RuleRef, std::move(name), nullptr, nullptr, nullptr});
}
inline BodyRef make_comp(BodyRef a, BodyRef b) {
  return std::make_shared<BodyExpr>(BodyExpr{BodyKind::Comp, "", nullptr, std::move(a), std::move(b)});
}
inline BodyRef make_disj(BodyRef a, BodyRef b) {
  return std::make_shared<BodyExpr>(BodyExpr{BodyKind::Disj, "", nullptr, std::move(a), std::move(b)});
}
inline BodyRef make_opt(BodyRef a) {
  return std::make_shared<BodyExpr>(BodyExpr{BodyKind::Opt, "", nullptr, std::move(a), nullptr});
}

inline bool body_equal(const BodyRef& x, const BodyRef& y) {
  if (x == y) return true;
  if (!x || !y || x->kind != y->kind) return false;
  switch (x->kind) {
    case BodyKind::Prim:
    case BodyKind::TypeConst:
    case BodyKind::RuleRef:
      return x->name == y->name;
    case BodyKind::Lambda:
      return alpha_eq(x->term, y->term);
    case BodyKind::Comp:
    case BodyKind::Disj:
      return body_equal(x->a, y->a) && body_equal(x->b, y->b);
    case BodyKind::Opt:
      return body_equal(x->a, y->a);
  }
  return false;
}

inline std::string body_to_string(const BodyRef& e) {
  switch (e->kind) {
    case BodyKind::Prim:
    case BodyKind::TypeConst:
    case BodyKind::RuleRef:
      return e->name;
    case BodyKind::Lambda:
      return print_term(e->term);
    case BodyKind::Comp:
      return "comp(" + body_to_string(e->a) + ", " + body_to_string(e->b) + ")";
    case BodyKind::Disj:
      return "disj(" + body_to_string(e->a) + ", " + body_to_string(e->b) + ")";
    case BodyKind::Opt:
      return "opt(" + body_to_string(e->a) + ")";
  }
  return "?";
}

// ---- the rule family ----

enum class InfoDomain { Categories, LambdaTerms };

struct PartialRule {
  CartesianType signature;
  BodyRef body;
  std::string guard;  // guard name, empty when unguarded
};

struct GenericRule {
  std::string name;
  InfoDomain domain = InfoDomain::Categories;
  CartesianPoset poset;  // members parallel rules
  std::vector<PartialRule> rules;

  const TypeHierarchy& hierarchy() const { return *poset.hierarchy; }

  void add(CartesianType signature, BodyRef body, std::string guard = "") {
    if (poset.contains(signature))
      throw GenericRuleError("duplicate signature " + display(hierarchy(), signature) + " in rule " + name);
    poset.members.push_back(signature);
    rules.push_back({signature, std::move(body), std::move(guard)});
  }
};

// The most specific rule applicable to <t1, t2>: the unique minimal member
// of the signature poset that lies above the query. No member above the
// query means no rule; several incomparable minimal members is a binding
// conflict (well-formed posets never produce one).
inline const PartialRule* dynamic_bind(const GenericRule& g, TypeId t1, TypeId t2) {
  const TypeHierarchy& h = g.hierarchy();
  CartesianType q{t1, t2};
  std::vector<const PartialRule*> above;
  for (const PartialRule& r : g.rules) {
    if (r.signature == q) return &r;  // exact match is always the answer
    if (cartesian_leq(h, q, r.signature)) above.push_back(&r);
  }
  if (above.empty()) return nullptr;
  std::vector<const PartialRule*> minimal;
  for (const PartialRule* r : above) {
    bool dominated = false;
    for (const PartialRule* r2 : above)
      if (r2 != r && cartesian_leq(h, r2->signature, r->signature)) dominated = true;
    if (!dominated) minimal.push_back(r);
  }
  if (minimal.size() == 1) return minimal.front();
  std::string msg = "binding conflict in rule " + g.name + " for " + display(h, q) +
                    ": incomparable minimal signatures";
  for (const PartialRule* r : minimal) msg += " " + display(h, r->signature);
  throw BindingError(msg);
}

// ---- body evaluation ----
//
// Env supplies the leaf semantics for a payload type P:
//   prim2(name, x, y), prim1(name, v)     built-in rules
//   type_const(name)                      constant-result bodies
//   lambda_body2(f, x, y), lambda_body1(f, v)
//   rule_ref(name, x, y)                  named user rules
//   guard(name, x, y)
// Each returns optional<vector<P>> (guard returns bool).

template <class P, class Env>
std::optional<std::vector<P>> eval_body2(const BodyRef& e, const P& x, const P& y, Env& env);

template <class P, class Env>
std::optional<std::vector<P>> eval_body1(const BodyRef& e, const P& v, Env& env) {
  switch (e->kind) {
    case BodyKind::Prim:
      return env.prim1(e->name, v);
    case BodyKind::TypeConst:
      return env.type_const(e->name);
    case BodyKind::Lambda:
      return env.lambda_body1(e->term, v);
    case BodyKind::RuleRef:
      throw RuleDiagnostic("named rule " + e->name + " used in unary position");
    case BodyKind::Comp: {
      auto inner = eval_body1<P>(e->b, v, env);
      if (!inner) return std::nullopt;
      if (inner->size() != 1)
        throw RuleDiagnostic("comp expects a single-result inner rule, got " +
                             std::to_string(inner->size()));
      return eval_body1<P>(e->a, inner->front(), env);
    }
    case BodyKind::Disj: {
      auto ra = eval_body1<P>(e->a, v, env);
      auto rb = eval_body1<P>(e->b, v, env);
      if (ra && rb) throw RuleDiagnostic("both branches of disj succeeded");
      return ra ? ra : rb;
    }
    case BodyKind::Opt: {
      auto r = eval_body1<P>(e->a, v, env);
      if (r) return r;
      return std::vector<P>{v};  // identity when the inner rule does not apply
    }
  }
  throw RuleDiagnostic("corrupt body expression");
}

template <class P, class Env>
std::optional<std::vector<P>> eval_body2(const BodyRef& e, const P& x, const P& y, Env& env) {
  switch (e->kind) {
    case BodyKind::Prim:
      return env.prim2(e->name, x, y);
    case BodyKind::TypeConst:
      return env.type_const(e->name);
    case BodyKind::Lambda:
      return env.lambda_body2(e->term, x, y);
    case BodyKind::RuleRef:
      return env.rule_ref(e->name, x, y);
    case BodyKind::Comp: {
      auto inner = eval_body2<P>(e->b, x, y, env);
      if (!inner) return std::nullopt;
      if (inner->size() != 1)
        throw RuleDiagnostic("comp expects a single-result inner rule, got " +
                             std::to_string(inner->size()));
      return eval_body1<P>(e->a, inner->front(), env);
    }
    case BodyKind::Disj: {
      auto ra = eval_body2<P>(e->a, x, y, env);
      auto rb = eval_body2<P>(e->b, x, y, env);
      if (ra && rb) throw RuleDiagnostic("both branches of disj succeeded");
      return ra ? ra : rb;
    }
    case BodyKind::Opt:
      throw RuleDiagnostic("opt is a unary combinator and cannot combine two payloads");
  }
  throw RuleDiagnostic("corrupt body expression");
}

// Guard check plus body evaluation for an already-bound rule. A failing
// guard yields nil; there is no fallback to a less specific rule.
template <class P, class Env>
std::optional<std::vector<P>> apply_bound(const PartialRule& r, const P& x1, const P& x2, Env& env) {
  if (!r.guard.empty() && !env.guard(r.guard, x1, x2)) return std::nullopt;
  return eval_body2<P>(r.body, x1, x2, env);
}

// The full generic-rule application: bind, check the guard, evaluate.
template <class P, class Env>
std::optional<std::vector<P>> apply_generic(const GenericRule& g, TypeId t1, const P& x1, TypeId t2,
                                            const P& x2, Env& env) {
  const PartialRule* r = dynamic_bind(g, t1, t2);
  if (!r) return std::nullopt;
  return apply_bound(*r, x1, x2, env);
}

// ---- payload domains ----

template <class P>
struct payload_traits;

template <>
struct payload_traits<LamRef> {
  static constexpr const char* tag = "lambda-terms";
  static bool equal(const LamRef& a, const LamRef& b) { return alpha_eq(a, b); }
  static std::string print(const LamRef& t) { return print_term(t); }
};

// Evaluation environment for lambda-term payloads: a lambda body is applied
// to the payloads and normalized, a bare name denotes a constant term.
class LamRuleEnv {
 public:
  explicit LamRuleEnv(int beta_budget = kDefaultBetaBudget) : budget_(beta_budget) {}

  std::optional<std::vector<LamRef>> prim2(const std::string& name, const LamRef&, const LamRef&) {
    throw RuleDiagnostic("category rule " + name + " in a lambda-term-domain rule");
  }
  std::optional<std::vector<LamRef>> prim1(const std::string& name, const LamRef&) {
    throw RuleDiagnostic("category rule " + name + " in a lambda-term-domain rule");
  }

  std::optional<std::vector<LamRef>> type_const(const std::string& name) {
    return std::vector<LamRef>{make_const(name)};
  }

  std::optional<std::vector<LamRef>> lambda_body2(const LamRef& f, const LamRef& x, const LamRef& y) {
    return std::vector<LamRef>{normalize(make_app(make_app(f, x), y), budget_)};
  }
  std::optional<std::vector<LamRef>> lambda_body1(const LamRef& f, const LamRef& v) {
    return std::vector<LamRef>{apply_term(f, v, budget_)};
  }

  std::optional<std::vector<LamRef>> rule_ref(const std::string& name, const LamRef&, const LamRef&) {
    throw RuleDiagnostic("named rule " + name + " is not available in this context");
  }

  bool guard(const std::string& name, const LamRef&, const LamRef&) const {
    throw RuleDiagnostic("guard " + name + " in a lambda-term-domain rule");
  }

 private:
  int budget_;
};

}  // namespace grules
