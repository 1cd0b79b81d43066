#pragma once

// Categorial-grammar categories: atoms, unification variables, forward and
// backward slashes, and tuples of spanned elements. Categories are immutable
// and hash-consed through a CatPool, so pointer equality is full structural
// equality (spans included); same_category() compares modulo spans.

#include <cstddef>
#include <cstdint>
#include <mutex>
#include <memory>
#include <stdexcept>
#include <string>
#include <unordered_map>
#include <utility>
#include <vector>

namespace grules {

struct CategoryError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct Span {
  int start = 0;
  int end = 0;
  bool operator==(const Span&) const = default;
};

enum class CatKind { Atom, Var, Forward, Backward, Tuple };

struct Category;
using CatRef = const Category*;

struct TupleElem {
  CatRef cat = nullptr;
  Span span;  // source span of the conjunct element, filled by ituple/scan
};

struct Category {
  CatKind kind = CatKind::Atom;
  std::string name;      // Atom and Var
  CatRef fst = nullptr;  // Forward: result; Backward: argument
  CatRef snd = nullptr;  // Forward: argument; Backward: result
  std::vector<TupleElem> elems;
  std::size_t size = 1;  // structural node count
  bool has_var = false;
};

// A category labelling a stretch of input.
struct SpannedCat {
  CatRef cat = nullptr;
  Span span;
  bool operator==(const SpannedCat&) const = default;
};

class CatPool {
 public:
  CatRef atom(const std::string& name) {
    Category c;
    c.kind = CatKind::Atom;
    c.name = name;
    return intern(std::move(c));
  }

  CatRef var(const std::string& name) {
    Category c;
    c.kind = CatKind::Var;
    c.name = name;
    c.has_var = true;
    return intern(std::move(c));
  }

  // result/argument: X/Y
  CatRef forward(CatRef result, CatRef argument) {
    Category c;
    c.kind = CatKind::Forward;
    c.fst = result;
    c.snd = argument;
    c.size = 1 + result->size + argument->size;
    c.has_var = result->has_var || argument->has_var;
    return intern(std::move(c));
  }

  // argument\result: Y\X
  CatRef backward(CatRef argument, CatRef result) {
    Category c;
    c.kind = CatKind::Backward;
    c.fst = argument;
    c.snd = result;
    c.size = 1 + argument->size + result->size;
    c.has_var = argument->has_var || result->has_var;
    return intern(std::move(c));
  }

  CatRef tuple(std::vector<TupleElem> elems) {
    Category c;
    c.kind = CatKind::Tuple;
    c.elems = std::move(elems);
    for (const TupleElem& e : c.elems) {
      c.size += e.cat->size;
      c.has_var = c.has_var || e.cat->has_var;
    }
    return intern(std::move(c));
  }

 private:
  CatRef intern(Category c) {
    std::string key;
    key += static_cast<char>('0' + static_cast<int>(c.kind));
    key += c.name;
    key += '|';
    auto add_ptr = [&key](CatRef p) {
      auto v = reinterpret_cast<std::uintptr_t>(p);
      key.append(reinterpret_cast<const char*>(&v), sizeof(v));
    };
    if (c.fst) add_ptr(c.fst);
    if (c.snd) add_ptr(c.snd);
    for (const TupleElem& e : c.elems) {
      add_ptr(e.cat);
      key.append(reinterpret_cast<const char*>(&e.span.start), sizeof(int));
      key.append(reinterpret_cast<const char*>(&e.span.end), sizeof(int));
    }
    std::lock_guard<std::mutex> lock(mu_);
    auto it = pool_.find(key);
    if (it != pool_.end()) return it->second.get();
    auto owned = std::make_unique<Category>(std::move(c));
    CatRef ref = owned.get();
    pool_.emplace(std::move(key), std::move(owned));
    return ref;
  }

  std::unordered_map<std::string, std::unique_ptr<Category>> pool_;
  std::mutex mu_;
};

// Structural equality ignoring tuple element spans.
inline bool same_category(CatRef a, CatRef b) {
  if (a == b) return true;
  if (a->kind != b->kind) return false;
  switch (a->kind) {
    case CatKind::Atom:
    case CatKind::Var:
      return a->name == b->name;
    case CatKind::Forward:
    case CatKind::Backward:
      return same_category(a->fst, b->fst) && same_category(a->snd, b->snd);
    case CatKind::Tuple: {
      if (a->elems.size() != b->elems.size()) return false;
      for (std::size_t i = 0; i < a->elems.size(); ++i)
        if (!same_category(a->elems[i].cat, b->elems[i].cat)) return false;
      return true;
    }
  }
  return false;
}

// ---- first-order matching ----
//
// One-way: only Var nodes of the pattern bind, each consistently, and they
// bind whole subject categories. The subject's spans survive into whatever
// the substitution later builds.

using Bindings = std::vector<std::pair<std::string, CatRef>>;

inline bool match_cat(CatRef pattern, CatRef subject, Bindings& b) {
  if (pattern->kind == CatKind::Var) {
    for (const auto& [name, bound] : b)
      if (name == pattern->name) return same_category(bound, subject);
    b.emplace_back(pattern->name, subject);
    return true;
  }
  if (pattern->kind != subject->kind) return false;
  switch (pattern->kind) {
    case CatKind::Atom:
      return pattern->name == subject->name;
    case CatKind::Forward:
    case CatKind::Backward:
      return match_cat(pattern->fst, subject->fst, b) && match_cat(pattern->snd, subject->snd, b);
    case CatKind::Tuple: {
      if (pattern->elems.size() != subject->elems.size()) return false;
      for (std::size_t i = 0; i < pattern->elems.size(); ++i)
        if (!match_cat(pattern->elems[i].cat, subject->elems[i].cat, b)) return false;
      return true;
    }
    default:
      return false;
  }
}

inline CatRef substitute_cat(CatRef c, const Bindings& b, CatPool& pool) {
  if (!c->has_var) return c;
  switch (c->kind) {
    case CatKind::Var:
      for (const auto& [name, bound] : b)
        if (name == c->name) return bound;
      return c;  // unbound variable survives; callers reject such results
    case CatKind::Forward:
      return pool.forward(substitute_cat(c->fst, b, pool), substitute_cat(c->snd, b, pool));
    case CatKind::Backward:
      return pool.backward(substitute_cat(c->fst, b, pool), substitute_cat(c->snd, b, pool));
    case CatKind::Tuple: {
      std::vector<TupleElem> elems;
      elems.reserve(c->elems.size());
      for (const TupleElem& e : c->elems) elems.push_back({substitute_cat(e.cat, b, pool), e.span});
      return pool.tuple(std::move(elems));
    }
    default:
      return c;
  }
}

// ---- concrete syntax ----
//
//   category := part (('/' | '\') part)*          left-associative
//   part     := '(' category ')' | '<' category (',' category)* '>' | NAME
//
// A NAME that is a single uppercase letter is a unification variable.
// vp and vm abbreviate np\s and (np\s)\(np\s). A tuple whose first element
// is itself a tuple is flattened (tuples are left-nested pairs shown flat).

class CategoryParser {
 public:
  CategoryParser(const std::string& src, CatPool& pool) : src_(src), pool_(pool) {}

  CatRef parse() {
    CatRef c = parse_category();
    skip_ws();
    if (pos_ != src_.size()) fail("unexpected trailing input");
    return c;
  }

 private:
  CatRef parse_category() {
    CatRef c = parse_part();
    while (true) {
      skip_ws();
      char op = peek();
      if (op == '/') {
        ++pos_;
        c = pool_.forward(c, parse_part());
      } else if (op == '\\') {
        ++pos_;
        c = pool_.backward(c, parse_part());
      } else {
        return c;
      }
    }
  }

  CatRef parse_part() {
    skip_ws();
    char c = peek();
    if (c == '(') {
      ++pos_;
      CatRef inner = parse_category();
      expect(')');
      return inner;
    }
    if (c == '<') {
      ++pos_;
      std::vector<TupleElem> elems;
      elems.push_back({parse_category(), Span{}});
      skip_ws();
      while (peek() == ',') {
        ++pos_;
        elems.push_back({parse_category(), Span{}});
        skip_ws();
      }
      expect('>');
      if (!elems.empty() && elems.front().cat->kind == CatKind::Tuple) {
        // left-nested pair notation: <<a, b>, c> = <a, b, c>
        std::vector<TupleElem> flat(elems.front().cat->elems);
        flat.insert(flat.end(), elems.begin() + 1, elems.end());
        elems = std::move(flat);
      }
      return pool_.tuple(std::move(elems));
    }
    std::string name = parse_name();
    if (name == "vp") return vp();
    if (name == "vm") return pool_.backward(vp(), vp());
    if (name.size() == 1 && name[0] >= 'A' && name[0] <= 'Z') return pool_.var(name);
    return pool_.atom(name);
  }

  CatRef vp() { return pool_.backward(pool_.atom("np"), pool_.atom("s")); }

  std::string parse_name() {
    skip_ws();
    std::size_t start = pos_;
    while (pos_ < src_.size()) {
      char c = src_[pos_];
      if (c == '/' || c == '\\' || c == '(' || c == ')' || c == '<' || c == '>' || c == ',' ||
          c == ' ' || c == '\t')
        break;
      ++pos_;
    }
    if (pos_ == start) fail("expected a category");
    return src_.substr(start, pos_ - start);
  }

  void expect(char c) {
    skip_ws();
    if (peek() != c) fail(std::string("expected '") + c + "'");
    ++pos_;
  }

  char peek() const { return pos_ < src_.size() ? src_[pos_] : '\0'; }
  void skip_ws() {
    while (pos_ < src_.size() && (src_[pos_] == ' ' || src_[pos_] == '\t')) ++pos_;
  }
  [[noreturn]] void fail(const std::string& msg) const {
    throw CategoryError("category syntax error at offset " + std::to_string(pos_) + " in \"" + src_ +
                        "\": " + msg);
  }

  const std::string& src_;
  CatPool& pool_;
  std::size_t pos_ = 0;
};

inline CatRef parse_category(const std::string& src, CatPool& pool) {
  return CategoryParser(src, pool).parse();
}

inline std::string print_category(CatRef c);

inline std::string print_operand(CatRef c) {
  if (c->kind == CatKind::Forward || c->kind == CatKind::Backward)
    return "(" + print_category(c) + ")";
  return print_category(c);
}

inline std::string print_category(CatRef c) {
  switch (c->kind) {
    case CatKind::Atom:
    case CatKind::Var:
      return c->name;
    case CatKind::Forward:
      return print_operand(c->fst) + "/" + print_operand(c->snd);
    case CatKind::Backward:
      return print_operand(c->fst) + "\\" + print_operand(c->snd);
    case CatKind::Tuple: {
      std::string out = "<";
      for (std::size_t i = 0; i < c->elems.size(); ++i) {
        if (i) out += ", ";
        out += print_category(c->elems[i].cat);
      }
      out += ">";
      return out;
    }
  }
  return "?";
}

}  // namespace grules
