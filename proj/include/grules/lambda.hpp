#pragma once

// Simply untyped lambda terms with a conjunction connective: the semantic
// payloads combined by rule bodies. Terms are immutable and shared.

#include <cctype>
#include <memory>
#include <set>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace grules {

struct LambdaError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Thrown when beta reduction exceeds its step budget.
struct BetaBudgetExceeded : std::runtime_error {
  using std::runtime_error::runtime_error;
};

enum class TermKind { Constant, Variable, Abstraction, Application, Conjunction };

struct LambdaTerm;
using LamRef = std::shared_ptr<const LambdaTerm>;

struct LambdaTerm {
  TermKind kind;
  std::string name;  // Constant and Variable name; Abstraction binder
  LamRef a, b;       // Abstraction body in a; Application fn/arg; Conjunction left/right
};

inline LamRef make_const(std::string name) {
  return std::make_shared<LambdaTerm>(LambdaTerm{TermKind::Constant, std::move(name), nullptr, nullptr});
}
inline LamRef make_var(std::string name) {
  return std::make_shared<LambdaTerm>(LambdaTerm{TermKind::Variable, std::move(name), nullptr, nullptr});
}
inline LamRef make_abs(std::string binder, LamRef body) {
  return std::make_shared<LambdaTerm>(LambdaTerm{TermKind::Abstraction, std::move(binder), std::move(body), nullptr});
}
inline LamRef make_app(LamRef f, LamRef x) {
  return std::make_shared<LambdaTerm>(LambdaTerm{TermKind::Application, "", std::move(f), std::move(x)});
}

// The conjunction of two payloads.
inline LamRef conj_terms(LamRef a, LamRef b) {
  return std::make_shared<LambdaTerm>(LambdaTerm{TermKind::Conjunction, "", std::move(a), std::move(b)});
}

inline void collect_free_vars(const LamRef& t, std::set<std::string>& bound, std::set<std::string>& out) {
  switch (t->kind) {
    case TermKind::Constant:
      break;
    case TermKind::Variable:
      if (!bound.count(t->name)) out.insert(t->name);
      break;
    case TermKind::Abstraction: {
      bool was = bound.count(t->name) > 0;
      bound.insert(t->name);
      collect_free_vars(t->a, bound, out);
      if (!was) bound.erase(t->name);
      break;
    }
    case TermKind::Application:
    case TermKind::Conjunction:
      collect_free_vars(t->a, bound, out);
      collect_free_vars(t->b, bound, out);
      break;
  }
}

inline std::set<std::string> free_vars(const LamRef& t) {
  std::set<std::string> bound, out;
  collect_free_vars(t, bound, out);
  return out;
}

inline std::string fresh_name(const std::string& base, const std::set<std::string>& avoid) {
  std::string candidate = base + "'";
  while (avoid.count(candidate)) candidate += "'";
  return candidate;
}

// Capture-avoiding substitution of value for the free variable var.
inline LamRef substitute(const LamRef& t, const std::string& var, const LamRef& value) {
  switch (t->kind) {
    case TermKind::Constant:
      return t;
    case TermKind::Variable:
      return t->name == var ? value : t;
    case TermKind::Abstraction: {
      if (t->name == var) return t;
      std::set<std::string> fv = free_vars(value);
      if (fv.count(t->name)) {
        std::set<std::string> avoid = fv;
        std::set<std::string> body_fv = free_vars(t->a);
        avoid.insert(body_fv.begin(), body_fv.end());
        avoid.insert(var);
        std::string renamed = fresh_name(t->name, avoid);
        LamRef body = substitute(t->a, t->name, make_var(renamed));
        return make_abs(renamed, substitute(body, var, value));
      }
      return make_abs(t->name, substitute(t->a, var, value));
    }
    case TermKind::Application:
      return make_app(substitute(t->a, var, value), substitute(t->b, var, value));
    case TermKind::Conjunction:
      return conj_terms(substitute(t->a, var, value), substitute(t->b, var, value));
  }
  throw LambdaError("corrupt term");
}

inline LamRef whnf(LamRef t, int& budget) {
  while (t->kind == TermKind::Application) {
    LamRef f = whnf(t->a, budget);
    if (f->kind == TermKind::Abstraction) {
      if (--budget < 0) throw BetaBudgetExceeded("beta-reduction step budget exceeded");
      t = substitute(f->a, f->name, t->b);
    } else {
      return f == t->a ? t : make_app(f, t->b);
    }
  }
  return t;
}

inline LamRef normalize_rec(LamRef t, int& budget) {
  t = whnf(std::move(t), budget);
  switch (t->kind) {
    case TermKind::Constant:
    case TermKind::Variable:
      return t;
    case TermKind::Abstraction:
      return make_abs(t->name, normalize_rec(t->a, budget));
    case TermKind::Application:
      // head is not an abstraction, and normalizing it cannot create one
      return make_app(normalize_rec(t->a, budget), normalize_rec(t->b, budget));
    case TermKind::Conjunction:
      return conj_terms(normalize_rec(t->a, budget), normalize_rec(t->b, budget));
  }
  throw LambdaError("corrupt term");
}

inline constexpr int kDefaultBetaBudget = 10000;

// Normal-order reduction to beta-normal form. budget bounds contractions.
inline LamRef normalize(LamRef t, int budget = kDefaultBetaBudget) {
  return normalize_rec(std::move(t), budget);
}

// Application followed by normalization: the workhorse of semantic rules.
inline LamRef apply_term(const LamRef& f, const LamRef& x, int budget = kDefaultBetaBudget) {
  return normalize(make_app(f, x), budget);
}

inline bool alpha_eq_rec(const LamRef& s, const LamRef& t,
                         std::vector<std::pair<std::string, std::string>>& env) {
  if (s->kind != t->kind) return false;
  switch (s->kind) {
    case TermKind::Constant:
      return s->name == t->name;
    case TermKind::Variable: {
      for (auto it = env.rbegin(); it != env.rend(); ++it) {
        if (it->first == s->name || it->second == t->name)
          return it->first == s->name && it->second == t->name;
      }
      return s->name == t->name;  // both free
    }
    case TermKind::Abstraction: {
      env.emplace_back(s->name, t->name);
      bool ok = alpha_eq_rec(s->a, t->a, env);
      env.pop_back();
      return ok;
    }
    case TermKind::Application:
    case TermKind::Conjunction:
      return alpha_eq_rec(s->a, t->a, env) && alpha_eq_rec(s->b, t->b, env);
  }
  return false;
}

inline bool alpha_eq(const LamRef& s, const LamRef& t) {
  std::vector<std::pair<std::string, std::string>> env;
  return alpha_eq_rec(s, t, env);
}

// Canonical serialization (bound variables as de Bruijn indices); equal
// strings iff alpha-equal terms. Used to key parser items.
inline void debruijn_rec(const LamRef& t, std::vector<std::string>& binders, std::string& out) {
  switch (t->kind) {
    case TermKind::Constant:
      out += "c:";
      out += t->name;
      break;
    case TermKind::Variable: {
      for (std::size_t i = binders.size(); i-- > 0;) {
        if (binders[i] == t->name) {
          out += "#" + std::to_string(binders.size() - 1 - i);
          return;
        }
      }
      out += "v:";
      out += t->name;
      break;
    }
    case TermKind::Abstraction:
      out += "(L";
      binders.push_back(t->name);
      debruijn_rec(t->a, binders, out);
      binders.pop_back();
      out += ")";
      break;
    case TermKind::Application:
      out += "(A";
      debruijn_rec(t->a, binders, out);
      out += " ";
      debruijn_rec(t->b, binders, out);
      out += ")";
      break;
    case TermKind::Conjunction:
      out += "(&";
      debruijn_rec(t->a, binders, out);
      out += " ";
      debruijn_rec(t->b, binders, out);
      out += ")";
      break;
  }
}

inline std::string debruijn_string(const LamRef& t) {
  std::vector<std::string> binders;
  std::string out;
  debruijn_rec(t, binders, out);
  return out;
}

// ---- concrete syntax ----
//
//   term        := '\' IDENT '.' term | conjunction
//   conjunction := application ('&' application)*
//   application := atom+                      (left-associative juxtaposition)
//   atom        := (IDENT | '(' term ')') ('(' term (',' term)* ')')*
//
// Identifiers starting with an uppercase letter denote constants unless
// bound by an enclosing abstraction; all bound occurrences are variables.

class TermParser {
 public:
  explicit TermParser(const std::string& src) : src_(src) {}

  LamRef parse() {
    std::vector<std::string> scope;
    LamRef t = parse_term(scope);
    skip_ws();
    if (pos_ != src_.size()) fail("unexpected trailing input");
    return t;
  }

 private:
  LamRef parse_term(std::vector<std::string>& scope) {
    skip_ws();
    if (peek() == '\\') {
      ++pos_;
      std::string binder = parse_ident();
      skip_ws();
      if (peek() != '.') fail("expected '.' after binder");
      ++pos_;
      scope.push_back(binder);
      LamRef body = parse_term(scope);
      scope.pop_back();
      return make_abs(binder, body);
    }
    return parse_conjunction(scope);
  }

  LamRef parse_conjunction(std::vector<std::string>& scope) {
    LamRef t = parse_application(scope);
    skip_ws();
    while (peek() == '&') {
      ++pos_;
      LamRef rhs = parse_application(scope);
      t = conj_terms(t, rhs);
      skip_ws();
    }
    return t;
  }

  LamRef parse_application(std::vector<std::string>& scope) {
    LamRef t = parse_atom(scope);
    while (true) {
      skip_ws();
      char c = peek();
      if (c == '(' || std::isalpha(static_cast<unsigned char>(c)) || c == '_') {
        t = make_app(t, parse_atom(scope));
      } else {
        return t;
      }
    }
  }

  LamRef parse_atom(std::vector<std::string>& scope) {
    skip_ws();
    LamRef t;
    if (peek() == '(') {
      ++pos_;
      t = parse_term(scope);
      skip_ws();
      if (peek() != ')') fail("expected ')'");
      ++pos_;
    } else {
      std::string name = parse_ident();
      bool bound = false;
      for (const std::string& s : scope)
        if (s == name) bound = true;
      if (!bound && std::isupper(static_cast<unsigned char>(name[0])))
        t = make_const(name);
      else
        t = make_var(name);
    }
    // call suffixes: f(a), f(a, b)
    while (true) {
      skip_ws();
      if (peek() != '(') return t;
      std::size_t save = pos_;
      ++pos_;
      skip_ws();
      if (peek() == ')') {  // "()" is not application syntax
        pos_ = save;
        return t;
      }
      t = make_app(t, parse_term(scope));
      skip_ws();
      while (peek() == ',') {
        ++pos_;
        t = make_app(t, parse_term(scope));
        skip_ws();
      }
      if (peek() != ')') fail("expected ')' in argument list");
      ++pos_;
    }
  }

  std::string parse_ident() {
    skip_ws();
    std::size_t start = pos_;
    while (pos_ < src_.size()) {
      char c = src_[pos_];
      if (std::isalnum(static_cast<unsigned char>(c)) || c == '_' || c == '\'')
        ++pos_;
      else
        break;
    }
    if (pos_ == start) fail("expected identifier");
    char c0 = src_[start];
    if (!std::isalpha(static_cast<unsigned char>(c0)) && c0 != '_') fail("identifier cannot start with a digit");
    return src_.substr(start, pos_ - start);
  }

  char peek() const { return pos_ < src_.size() ? src_[pos_] : '\0'; }
  void skip_ws() {
    while (pos_ < src_.size() && std::isspace(static_cast<unsigned char>(src_[pos_]))) ++pos_;
  }
  [[noreturn]] void fail(const std::string& msg) const {
    throw LambdaError("lambda syntax error at offset " + std::to_string(pos_) + ": " + msg);
  }

  const std::string& src_;
  std::size_t pos_ = 0;
};

inline LamRef parse_term(const std::string& src) { return TermParser(src).parse(); }

// Printing: abstraction binds loosest, then '&', then application.
inline void print_rec(const LamRef& t, int min_level, std::string& out) {
  // levels: 0 abstraction, 1 conjunction, 2 application/atom
  switch (t->kind) {
    case TermKind::Constant:
    case TermKind::Variable:
      out += t->name;
      break;
    case TermKind::Abstraction: {
      bool parens = min_level > 0;
      if (parens) out += "(";
      out += "\\" + t->name + ". ";
      print_rec(t->a, 0, out);
      if (parens) out += ")";
      break;
    }
    case TermKind::Conjunction: {
      bool parens = min_level > 1;
      if (parens) out += "(";
      print_rec(t->a, 1, out);
      out += " & ";
      print_rec(t->b, 2, out);
      if (parens) out += ")";
      break;
    }
    case TermKind::Application: {
      // collect the application spine: f(a, b, ...)
      std::vector<LamRef> args;
      LamRef head = t;
      while (head->kind == TermKind::Application) {
        args.push_back(head->b);
        head = head->a;
      }
      print_rec(head, 2, out);
      out += "(";
      for (std::size_t i = args.size(); i-- > 0;) {
        print_rec(args[i], 0, out);
        if (i > 0) out += ", ";
      }
      out += ")";
      break;
    }
  }
}

inline std::string print_term(const LamRef& t) {
  std::string out;
  print_rec(t, 0, out);
  return out;
}

}  // namespace grules
