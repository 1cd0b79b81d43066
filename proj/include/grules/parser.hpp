#pragma once

// Deductive shift-reduce parsing as exhaustive closure over items
// [stack, j]: shift consumes the next token, reduce rewrites any adjacent
// pair of stack entries through a generic rule. Items are deduplicated on a
// canonical key; every way of deriving an item is recorded as an edge, so
// all derivations can be enumerated afterwards.

#include <algorithm>
#include <cstddef>
#include <deque>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <unordered_map>
#include <utility>
#include <vector>

#include "catgram.hpp"
#include "category.hpp"
#include "generic_rule.hpp"
#include "lambda.hpp"
#include "poset.hpp"

namespace grules {

struct ParseError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct StackEntry {
  SpannedCat syn;
  LamRef sem;  // null in purely syntactic calculi
};

struct ParseStats {
  std::size_t items = 0;
  std::size_t shifts = 0;
  std::size_t reduce_attempted = 0;
  std::size_t reduce_fired = 0;
  std::size_t pruned = 0;
};

struct FiredRule {
  std::string rule;       // e.g. "SYN"
  std::string signature;  // e.g. "NP⊗VP_i" or "S -> NP VP"
};

enum class StepKind { Axiom, Shift, Reduce };

struct TraceRecord {
  int step = 0;
  StepKind kind = StepKind::Axiom;
  std::string token;             // Shift
  int pos = -1;                  // Reduce: index of the left consumed entry
  std::vector<FiredRule> rules;  // Reduce
  std::vector<StackEntry> consumed;
  std::vector<StackEntry> produced;
  Span span;
  std::vector<StackEntry> stack_after;
  int j_after = 0;
};

struct Derivation {
  std::vector<TraceRecord> steps;
};

struct ParseResult {
  bool accepted = false;
  std::vector<Derivation> derivations;
  ParseStats stats;
  std::vector<std::string> diagnostics;
};

// Either an exact category or a hierarchy type matched via classification.
struct Goal {
  CatRef cat = nullptr;
  std::optional<TypeId> type;
};

struct ParseOptions {
  bool record = true;
  // Optimization: reduce only once every token is shifted. Guards and rule
  // bodies see a pair plus fixed sentence positions, never the suffix, so
  // reduces commute with later shifts and this normal form reaches exactly
  // the same final items while skipping interleaved duplicates.
  bool shift_normal = false;
  std::size_t max_items = 2000000;
  std::size_t max_derivations = 10000;
  std::size_t max_cat_nodes = 64;
  int beta_budget = kDefaultBetaBudget;
};

struct CfgProduction {
  TypeId lhs, left, right;
};

// Everything a parse needs. syn/sem/cfg select the calculus via the
// entry point called; rules_by_name resolves named-rule references.
struct ParserInput {
  const TypeHierarchy* hierarchy = nullptr;
  CatPool* pool = nullptr;
  const Lexicon* lexicon = nullptr;
  const GenericRule* syn = nullptr;
  const GenericRule* sem = nullptr;
  const std::vector<CfgProduction>* productions = nullptr;
  const std::map<std::string, const GenericRule*>* rules_by_name = nullptr;
};

// Category-domain environment that also resolves named rules against the
// grammar's rule registry, recursively with its own dynamic binding.
class CatRefEnv {
 public:
  CatRefEnv(CatPool& pool, const SentenceContext* ctx, HierarchyBinding binding,
            const std::map<std::string, const GenericRule*>* registry)
      : base_(pool, ctx), binding_(binding), registry_(registry) {}

  std::optional<std::vector<SpannedCat>> prim2(const std::string& n, const SpannedCat& x,
                                               const SpannedCat& y) {
    return base_.prim2(n, x, y);
  }
  std::optional<std::vector<SpannedCat>> prim1(const std::string& n, const SpannedCat& v) {
    return base_.prim1(n, v);
  }
  std::optional<std::vector<SpannedCat>> type_const(const std::string& n) {
    return base_.type_const(n);
  }
  std::optional<std::vector<SpannedCat>> lambda_body2(const LamRef& f, const SpannedCat& x,
                                                      const SpannedCat& y) {
    return base_.lambda_body2(f, x, y);
  }
  std::optional<std::vector<SpannedCat>> lambda_body1(const LamRef& f, const SpannedCat& v) {
    return base_.lambda_body1(f, v);
  }
  bool guard(const std::string& n, const SpannedCat& x, const SpannedCat& y) const {
    return base_.guard(n, x, y);
  }

  std::optional<std::vector<SpannedCat>> rule_ref(const std::string& name, const SpannedCat& x,
                                                  const SpannedCat& y) {
    if (!registry_) throw RuleDiagnostic("named rule " + name + " is not available in this context");
    auto it = registry_->find(name);
    if (it == registry_->end()) throw RuleDiagnostic("unknown rule name: " + name);
    auto t1 = binding_.classify(x.cat);
    auto t2 = binding_.classify(y.cat);
    if (!t1 || !t2) return std::nullopt;
    return apply_generic(*it->second, *t1, x, *t2, y, *this);
  }

 private:
  CatRuleEnv base_;
  HierarchyBinding binding_;
  const std::map<std::string, const GenericRule*>* registry_;
};

namespace detail {

struct ReduceOut {
  std::vector<StackEntry> produced;
  std::vector<FiredRule> rules;
};

struct Edge {
  int parent = -1;
  StepKind kind = StepKind::Axiom;
  std::string token;
  int pos = -1;
  std::vector<FiredRule> rules;
  std::vector<StackEntry> consumed;
  std::vector<StackEntry> produced;
  Span span;
};

struct ItemData {
  std::vector<StackEntry> stack;
  int j = 0;
  std::vector<Edge> in_edges;
};

inline void key_entry(const StackEntry& e, std::string& key) {
  auto v = reinterpret_cast<std::uintptr_t>(e.syn.cat);
  key.append(reinterpret_cast<const char*>(&v), sizeof(v));
  key.append(reinterpret_cast<const char*>(&e.syn.span.start), sizeof(int));
  key.append(reinterpret_cast<const char*>(&e.syn.span.end), sizeof(int));
  if (e.sem) {
    key += debruijn_string(e.sem);  // alpha-equal payloads collapse
    key += ';';
  }
}

// The closure engine, parameterized over the reduce relation.
template <class Reducer>
class Closure {
 public:
  Closure(const ParserInput& in, const std::vector<std::string>& tokens, const Goal& goal,
          const ParseOptions& opts, Reducer reducer)
      : in_(in), tokens_(tokens), goal_(goal), opts_(opts), reducer_(std::move(reducer)) {
    binding_.hierarchy = in.hierarchy;
  }

  ParseResult run() {
    ParseResult result;
    int n = static_cast<int>(tokens_.size());
    // resolve tokens up front so unknown words fail before any search
    std::vector<const std::vector<LexEntry>*> lex(n, nullptr);
    for (int p = 0; p < n; ++p) {
      auto it = in_.lexicon->find(tokens_[p]);
      if (it == in_.lexicon->end() || it->second.empty())
        throw ParseError("unknown word \"" + tokens_[p] + "\" at position " + std::to_string(p));
      lex[p] = &it->second;
    }

    add_item({}, 0);  // axiom
    std::deque<int> worklist{0};
    while (!worklist.empty()) {
      int idx = worklist.front();
      worklist.pop_front();
      // copy: emit() may grow items_ and invalidate references
      std::vector<StackEntry> stack = items_[idx].stack;
      int j = items_[idx].j;

      if (j < n) {
        for (const LexEntry& le : *lex[j]) {
          one_.assign(1, StackEntry{{le.cat, {j, j + 1}}, le.sem});
          ++stats_.shifts;
          int id = emit(stack, stack.size(), 0, one_, j + 1, worklist, result);
          if (id >= 0 && opts_.record) {
            Edge edge;
            edge.parent = idx;
            edge.kind = StepKind::Shift;
            edge.token = tokens_[j];
            edge.produced = one_;
            edge.span = {j, j + 1};
            items_[id].in_edges.push_back(std::move(edge));
          }
        }
      }

      if (opts_.shift_normal && j < n) continue;
      for (std::size_t i = 0; i + 1 < stack.size(); ++i) {
        const StackEntry& a = stack[i];
        const StackEntry& b = stack[i + 1];
        ++stats_.reduce_attempted;
        std::vector<ReduceOut> outs = reducer_(a, b, result.diagnostics);
        for (ReduceOut& out : outs) {
          ++stats_.reduce_fired;
          Span combined{a.syn.span.start, b.syn.span.end};
          if (!retile(out.produced, combined)) {
            note(result, "splice spans do not tile " + span_str(combined) + "; outcome dropped");
            continue;
          }
          int id = emit(stack, i, 2, out.produced, j, worklist, result);
          if (id >= 0 && opts_.record) {
            Edge edge;
            edge.parent = idx;
            edge.kind = StepKind::Reduce;
            edge.pos = static_cast<int>(i);
            edge.rules = std::move(out.rules);
            edge.consumed = {a, b};
            edge.produced = std::move(out.produced);
            edge.span = combined;
            items_[id].in_edges.push_back(std::move(edge));
          }
        }
      }
    }

    // goal items in discovery order
    std::vector<int> goals;
    for (std::size_t idx = 0; idx < items_.size(); ++idx) {
      const ItemData& it = items_[idx];
      if (it.j == n && it.stack.size() == 1 && goal_matches(it.stack[0].syn.cat))
        goals.push_back(static_cast<int>(idx));
    }
    result.accepted = !goals.empty();
    if (opts_.record) {
      for (int g : goals) enumerate(g, result);
      std::vector<std::pair<std::string, std::size_t>> order(result.derivations.size());
      for (std::size_t i = 0; i < result.derivations.size(); ++i)
        order[i] = {derivation_key(result.derivations[i]), i};
      std::sort(order.begin(), order.end());
      std::vector<Derivation> sorted;
      sorted.reserve(order.size());
      for (auto& [key, i] : order) sorted.push_back(std::move(result.derivations[i]));
      result.derivations = std::move(sorted);
    }
    result.stats = stats_;
    return result;
  }

  // canonical order: lexicographic by the rendered step sequence
  static std::string derivation_key(const Derivation& d) {
    std::string key;
    for (const TraceRecord& r : d.steps) {
      key += static_cast<char>('0' + static_cast<int>(r.kind));
      key += r.token;
      key += '|';
      key += std::to_string(r.pos);
      for (const FiredRule& f : r.rules) {
        key += f.rule;
        key += '[';
        key += f.signature;
        key += ']';
      }
      for (const StackEntry& e : r.produced) {
        key += print_category(e.syn.cat);
        key += '@';
        key += std::to_string(e.syn.span.start);
        key += ':';
        key += std::to_string(e.syn.span.end);
        if (e.sem) key += debruijn_string(e.sem);
      }
      key += '\n';
    }
    return key;
  }

 private:
  bool goal_matches(CatRef c) {
    if (goal_.cat) return same_category(c, goal_.cat);
    if (goal_.type) {
      auto t = classify(c);
      return t && in_.hierarchy->leq(*t, *goal_.type);
    }
    return false;
  }

  std::optional<TypeId> classify(CatRef c) {
    auto it = classify_cache_.find(c);
    if (it != classify_cache_.end()) return it->second;
    auto t = binding_.classify(c);
    classify_cache_.emplace(c, t);
    return t;
  }

  static std::string span_str(Span s) {
    return "[" + std::to_string(s.start) + "," + std::to_string(s.end) + ")";
  }

  // Spread k produced entries over the combined span: the first starts at
  // its left edge, later entries start where their recorded span starts,
  // the last ends at the right edge.
  static bool retile(std::vector<StackEntry>& produced, Span combined) {
    if (produced.empty()) return false;
    std::vector<Span> spans(produced.size());
    for (std::size_t i = 0; i < produced.size(); ++i) {
      int start = i == 0 ? combined.start : produced[i].syn.span.start;
      int end = i + 1 == produced.size() ? combined.end : produced[i + 1].syn.span.start;
      if (start >= end || start < combined.start || end > combined.end) return false;
      spans[i] = {start, end};
    }
    for (std::size_t i = 0; i < produced.size(); ++i) produced[i].syn.span = spans[i];
    return true;
  }

  void note(ParseResult& r, std::string msg) {
    if (r.diagnostics.size() < 50) r.diagnostics.push_back(std::move(msg));
  }

  // Candidate item: base with [pos, pos+len) replaced by repl, at position j.
  // The next-stack is only materialized when the item is new; entries already
  // on base passed the size bound when they were introduced. Returns the item
  // id, or -1 when the candidate is pruned.
  int emit(const std::vector<StackEntry>& base, std::size_t pos, std::size_t len,
           const std::vector<StackEntry>& repl, int j, std::deque<int>& worklist,
           ParseResult& result) {
    for (const StackEntry& e : repl) {
      if (e.syn.cat->size > opts_.max_cat_nodes) {
        ++stats_.pruned;
        note(result, "category of size " + std::to_string(e.syn.cat->size) + " exceeds the " +
                         std::to_string(opts_.max_cat_nodes) + "-node bound; item pruned");
        return -1;
      }
    }
    keybuf_.clear();
    for (std::size_t k = 0; k < pos; ++k) key_entry(base[k], keybuf_);
    for (const StackEntry& e : repl) key_entry(e, keybuf_);
    for (std::size_t k = pos + len; k < base.size(); ++k) key_entry(base[k], keybuf_);
    keybuf_.append(reinterpret_cast<const char*>(&j), sizeof(int));
    auto [it, fresh] = index_.try_emplace(keybuf_, static_cast<int>(items_.size()));
    if (fresh) {
      if (items_.size() >= opts_.max_items)
        throw ParseError("item budget exceeded (" + std::to_string(opts_.max_items) + ")");
      std::vector<StackEntry> next;
      next.reserve(base.size() - len + repl.size());
      next.insert(next.end(), base.begin(), base.begin() + pos);
      next.insert(next.end(), repl.begin(), repl.end());
      next.insert(next.end(), base.begin() + pos + len, base.end());
      items_.push_back(ItemData{std::move(next), j, {}});
      ++stats_.items;
      worklist.push_back(it->second);
    }
    return it->second;
  }

  int add_item(std::vector<StackEntry> stack, int j) {
    std::string key;
    for (const StackEntry& e : stack) key_entry(e, key);
    key.append(reinterpret_cast<const char*>(&j), sizeof(int));
    index_.emplace(std::move(key), static_cast<int>(items_.size()));
    items_.push_back(ItemData{std::move(stack), j, {}});
    ++stats_.items;
    return static_cast<int>(items_.size()) - 1;
  }

  // All acyclic edge paths from the axiom to the goal item, rebuilt into
  // step sequences.
  void enumerate(int goal_idx, ParseResult& result) {
    std::vector<char> on_path(items_.size(), 0);
    std::vector<const Edge*> rev;
    walk(goal_idx, on_path, rev, result);
  }

  void walk(int idx, std::vector<char>& on_path, std::vector<const Edge*>& rev, ParseResult& result) {
    if (result.derivations.size() >= opts_.max_derivations) {
      note(result, "derivation limit reached (" + std::to_string(opts_.max_derivations) + ")");
      return;
    }
    if (idx == 0) {  // the axiom
      result.derivations.push_back(build_derivation(rev));
      return;
    }
    on_path[idx] = 1;
    for (const Edge& e : items_[idx].in_edges) {
      if (on_path[e.parent]) continue;
      rev.push_back(&e);
      walk(e.parent, on_path, rev, result);
      rev.pop_back();
    }
    on_path[idx] = 0;
  }

  Derivation build_derivation(const std::vector<const Edge*>& rev) {
    Derivation d;
    TraceRecord axiom;
    axiom.kind = StepKind::Axiom;
    d.steps.push_back(axiom);
    std::vector<StackEntry> stack;
    int j = 0;
    int stepno = 1;
    for (auto it = rev.rbegin(); it != rev.rend(); ++it) {
      const Edge& e = **it;
      TraceRecord rec;
      rec.step = stepno++;
      rec.kind = e.kind;
      rec.token = e.token;
      rec.pos = e.pos;
      rec.rules = e.rules;
      rec.consumed = e.consumed;
      rec.produced = e.produced;
      rec.span = e.span;
      if (e.kind == StepKind::Shift) {
        stack.push_back(e.produced[0]);
        ++j;
      } else {
        stack.erase(stack.begin() + e.pos, stack.begin() + e.pos + 2);
        stack.insert(stack.begin() + e.pos, e.produced.begin(), e.produced.end());
      }
      rec.stack_after = stack;
      rec.j_after = j;
      d.steps.push_back(std::move(rec));
    }
    return d;
  }

  const ParserInput& in_;
  const std::vector<std::string>& tokens_;
  const Goal& goal_;
  const ParseOptions& opts_;
  Reducer reducer_;
  HierarchyBinding binding_;
  ParseStats stats_;
  std::vector<ItemData> items_;
  std::unordered_map<std::string, int> index_;
  std::string keybuf_;
  std::vector<StackEntry> one_;  // shift replacement, reused
  std::unordered_map<CatRef, std::optional<TypeId>> classify_cache_;
};

}  // namespace detail

// Which token positions hold a conjunction, for the guards.
inline SentenceContext make_sentence_context(const ParserInput& in,
                                             const std::vector<std::string>& tokens) {
  SentenceContext ctx;
  ctx.n = static_cast<int>(tokens.size());
  ctx.conj_at.assign(tokens.size(), 0);
  HierarchyBinding binding{in.hierarchy};
  auto conj_type = in.hierarchy->find("conj");
  if (!conj_type) return ctx;
  for (std::size_t p = 0; p < tokens.size(); ++p) {
    auto it = in.lexicon->find(tokens[p]);
    if (it == in.lexicon->end()) continue;
    for (const LexEntry& le : it->second) {
      auto t = binding.classify(le.cat);
      if (t && in.hierarchy->leq(*t, *conj_type)) ctx.conj_at[p] = 1;
    }
  }
  return ctx;
}

// ---- the three calculi ----

// Purely syntactic: one generic rule over spanned categories.
inline ParseResult parse_syn(const ParserInput& in, const std::vector<std::string>& tokens,
                             const Goal& goal, const ParseOptions& opts = {}) {
  SentenceContext ctx = make_sentence_context(in, tokens);
  CatRefEnv env(*in.pool, &ctx, HierarchyBinding{in.hierarchy}, in.rules_by_name);
  HierarchyBinding binding{in.hierarchy};
  std::unordered_map<CatRef, std::optional<TypeId>> cache;
  auto classify = [&](CatRef c) {
    auto it = cache.find(c);
    if (it != cache.end()) return it->second;
    auto t = binding.classify(c);
    cache.emplace(c, t);
    return t;
  };
  auto reducer = [&](const StackEntry& a, const StackEntry& b,
                     std::vector<std::string>&) -> std::vector<detail::ReduceOut> {
    auto t1 = classify(a.syn.cat);
    auto t2 = classify(b.syn.cat);
    if (!t1 || !t2) return {};
    const PartialRule* r = dynamic_bind(*in.syn, *t1, *t2);
    if (!r) return {};
    auto out = apply_bound(*r, a.syn, b.syn, env);
    if (!out) return {};
    detail::ReduceOut ro;
    for (SpannedCat& c : *out) ro.produced.push_back({c, nullptr});
    if (opts.record) ro.rules = {{in.syn->name, display(*in.hierarchy, r->signature)}};
    return {std::move(ro)};
  };
  return detail::Closure(in, tokens, goal, opts, reducer).run();
}

// Parallel syntactic and semantic generic rules; both must produce exactly
// one result for the reduce to go through.
inline ParseResult parse_syn_sem(const ParserInput& in, const std::vector<std::string>& tokens,
                                 const Goal& goal, const ParseOptions& opts = {}) {
  SentenceContext ctx = make_sentence_context(in, tokens);
  CatRefEnv cat_env(*in.pool, &ctx, HierarchyBinding{in.hierarchy}, in.rules_by_name);
  LamRuleEnv lam_env(opts.beta_budget);
  HierarchyBinding binding{in.hierarchy};
  auto reducer = [&](const StackEntry& a, const StackEntry& b,
                     std::vector<std::string>& diags) -> std::vector<detail::ReduceOut> {
    auto t1 = binding.classify(a.syn.cat);
    auto t2 = binding.classify(b.syn.cat);
    if (!t1 || !t2) return {};
    const PartialRule* rs = dynamic_bind(*in.syn, *t1, *t2);
    if (!rs) return {};
    auto syn_out = apply_bound(*rs, a.syn, b.syn, cat_env);
    if (!syn_out) return {};
    if (!a.sem || !b.sem) return {};
    const PartialRule* rm = dynamic_bind(*in.sem, *t1, *t2);
    if (!rm) return {};
    auto sem_out = apply_bound(*rm, a.sem, b.sem, lam_env);
    if (!sem_out) return {};
    if (syn_out->size() != 1 || sem_out->size() != 1) {
      if (diags.size() < 50)
        diags.push_back("parallel reduce needs single results, got " +
                        std::to_string(syn_out->size()) + " categories and " +
                        std::to_string(sem_out->size()) + " terms");
      return {};
    }
    detail::ReduceOut ro;
    ro.produced = {{syn_out->front(), sem_out->front()}};
    if (opts.record)
      ro.rules = {{in.syn->name, display(*in.hierarchy, rs->signature)},
                  {in.sem->name, display(*in.hierarchy, rm->signature)}};
    return {std::move(ro)};
  };
  return detail::Closure(in, tokens, goal, opts, reducer).run();
}

// Context-free productions over hierarchy types with a generic rule
// combining the payloads: A -> B C fires when the entry types refine B and
// C and the generic rule is defined on them.
inline ParseResult parse_cfg_generic(const ParserInput& in, const std::vector<std::string>& tokens,
                                     const Goal& goal, const ParseOptions& opts = {}) {
  LamRuleEnv lam_env(opts.beta_budget);
  HierarchyBinding binding{in.hierarchy};
  const TypeHierarchy& h = *in.hierarchy;
  auto reducer = [&](const StackEntry& a, const StackEntry& b,
                     std::vector<std::string>&) -> std::vector<detail::ReduceOut> {
    auto t1 = binding.classify(a.syn.cat);
    auto t2 = binding.classify(b.syn.cat);
    if (!t1 || !t2 || !a.sem || !b.sem) return {};
    const PartialRule* r = dynamic_bind(*in.sem, *t1, *t2);
    if (!r) return {};
    std::optional<std::vector<LamRef>> payload;
    bool evaluated = false;
    std::vector<detail::ReduceOut> outs;
    for (const CfgProduction& p : *in.productions) {
      if (!h.leq(*t1, p.left) || !h.leq(*t2, p.right)) continue;
      if (!evaluated) {
        payload = apply_bound(*r, a.sem, b.sem, lam_env);
        evaluated = true;
      }
      if (!payload || payload->size() != 1) continue;
      detail::ReduceOut ro;
      ro.produced = {{{in.pool->atom(h.name(p.lhs)), {}}, payload->front()}};
      if (opts.record)
        ro.rules = {{"cfg", h.name(p.lhs) + " -> " + h.name(p.left) + " " + h.name(p.right)},
                    {in.sem->name, display(h, r->signature)}};
      outs.push_back(std::move(ro));
    }
    return outs;
  };
  return detail::Closure(in, tokens, goal, opts, reducer).run();
}

// Closure-wide reduce tallies for a purely syntactic parse.
inline std::pair<std::size_t, std::size_t> count_reduce_attempts(
    const ParserInput& in, const std::vector<std::string>& tokens, const ParseOptions& opts = {}) {
  ParseOptions o = opts;
  o.record = false;
  Goal none;
  ParseResult r = parse_syn(in, tokens, none, o);
  return {r.stats.reduce_attempted, r.stats.reduce_fired};
}

}  // namespace grules
