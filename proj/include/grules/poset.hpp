#pragma once

// Type hierarchies (finite posets of grammar types) and cartesian products
// of types, the index set for generic rules.

#include <cstddef>
#include <optional>
#include <stdexcept>
#include <string>
#include <unordered_map>
#include <vector>

namespace grules {

using TypeId = int;

struct HierarchyError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Finite poset of named types. Built incrementally (intern + add_subtype),
// then finalized: finalize() checks acyclicity, precomputes the reachability
// table behind leq(), infers the top element, and (unless told otherwise)
// validates bounded completeness: no pair of types may have two or more
// incomparable maximal common subtypes.
class TypeHierarchy {
 public:
  TypeId intern(const std::string& name) {
    auto it = ids_.find(name);
    if (it != ids_.end()) return it->second;
    TypeId id = static_cast<TypeId>(names_.size());
    ids_.emplace(name, id);
    names_.push_back(name);
    parents_.emplace_back();
    return id;
  }

  std::optional<TypeId> find(const std::string& name) const {
    auto it = ids_.find(name);
    if (it == ids_.end()) return std::nullopt;
    return it->second;
  }

  TypeId id(const std::string& name) const {
    auto it = ids_.find(name);
    if (it == ids_.end()) throw HierarchyError("unknown type name: " + name);
    return it->second;
  }

  const std::string& name(TypeId t) const { return names_.at(t); }
  std::size_t size() const { return names_.size(); }
  bool finalized() const { return finalized_; }
  std::optional<TypeId> top() const { return top_; }

  void add_subtype(TypeId child, TypeId parent) {
    check_id(child);
    check_id(parent);
    if (child == parent) throw HierarchyError("type cannot be its own parent: " + names_[child]);
    parents_[child].push_back(parent);
    finalized_ = false;
  }

  // validate=false skips the bounded-completeness check; meet() still
  // detects violations lazily. Used by tests probing that path.
  void finalize(bool validate = true) {
    check_acyclic();
    build_reach();
    infer_top();
    finalized_ = true;
    if (validate) {
      for (TypeId a = 0; a < static_cast<TypeId>(size()); ++a)
        for (TypeId b = a + 1; b < static_cast<TypeId>(size()); ++b)
          meet(a, b);  // throws on violation
    }
  }

  // a <= b in the subtype order. O(1) after finalize().
  bool leq(TypeId a, TypeId b) const {
    require_finalized();
    check_id(a);
    check_id(b);
    return reach_[a][b];
  }

  // All maximal common subtypes of a and b.
  std::vector<TypeId> maximal_common_subtypes(TypeId a, TypeId b) const {
    require_finalized();
    check_id(a);
    check_id(b);
    std::vector<TypeId> common;
    for (TypeId c = 0; c < static_cast<TypeId>(size()); ++c)
      if (reach_[c][a] && reach_[c][b]) common.push_back(c);
    std::vector<TypeId> maximal;
    for (TypeId c : common) {
      bool dominated = false;
      for (TypeId d : common)
        if (d != c && reach_[c][d]) { dominated = true; break; }
      if (!dominated) maximal.push_back(c);
    }
    return maximal;
  }

  // Greatest common subtype, if any. Bounded completeness makes it unique;
  // a hierarchy violating that makes meet() throw.
  std::optional<TypeId> meet(TypeId a, TypeId b) const {
    std::vector<TypeId> maximal = maximal_common_subtypes(a, b);
    if (maximal.empty()) return std::nullopt;
    if (maximal.size() > 1) {
      std::string msg = "bounded-completeness violation: " + names_[a] + " and " + names_[b] +
                        " have incomparable maximal common subtypes:";
      for (TypeId c : maximal) msg += " " + names_[c];
      throw HierarchyError(msg);
    }
    return maximal.front();
  }

 private:
  void check_id(TypeId t) const {
    if (t < 0 || t >= static_cast<TypeId>(size())) throw HierarchyError("type id out of range");
  }

  void require_finalized() const {
    if (!finalized_) throw HierarchyError("hierarchy queried before finalize()");
  }

  void check_acyclic() const {
    // colors: 0 unvisited, 1 on stack, 2 done
    std::vector<int> color(size(), 0);
    std::vector<std::pair<TypeId, std::size_t>> stack;
    for (TypeId s = 0; s < static_cast<TypeId>(size()); ++s) {
      if (color[s] != 0) continue;
      stack.emplace_back(s, 0);
      color[s] = 1;
      while (!stack.empty()) {
        auto& [t, i] = stack.back();
        if (i < parents_[t].size()) {
          TypeId p = parents_[t][i++];
          if (color[p] == 1) throw HierarchyError("cycle in type hierarchy involving: " + names_[p]);
          if (color[p] == 0) {
            color[p] = 1;
            stack.emplace_back(p, 0);
          }
        } else {
          color[t] = 2;
          stack.pop_back();
        }
      }
    }
  }

  void build_reach() {
    std::size_t n = size();
    reach_.assign(n, std::vector<bool>(n, false));
    // ancestors via memoized DFS; the graph is acyclic by now
    std::vector<bool> done(n, false);
    for (TypeId t = 0; t < static_cast<TypeId>(n); ++t) compute_ancestors(t, done);
  }

  void compute_ancestors(TypeId t, std::vector<bool>& done) {
    if (done[t]) return;
    done[t] = true;
    reach_[t][t] = true;
    for (TypeId p : parents_[t]) {
      compute_ancestors(p, done);
      for (TypeId a = 0; a < static_cast<TypeId>(size()); ++a)
        if (reach_[p][a]) reach_[t][a] = true;
    }
  }

  void infer_top() {
    top_ = std::nullopt;
    std::optional<TypeId> root;
    for (TypeId t = 0; t < static_cast<TypeId>(size()); ++t) {
      if (parents_[t].empty()) {
        if (root) return;  // several roots, no top
        root = t;
      }
    }
    top_ = root;
  }

  std::vector<std::string> names_;
  std::unordered_map<std::string, TypeId> ids_;
  std::vector<std::vector<TypeId>> parents_;
  std::vector<std::vector<bool>> reach_;
  std::optional<TypeId> top_;
  bool finalized_ = false;
};

// A pair of types: the signature of a partial rule.
struct CartesianType {
  TypeId first = -1;
  TypeId second = -1;
  bool operator==(const CartesianType&) const = default;
};

inline std::string display(const TypeHierarchy& h, CartesianType t) {
  return h.name(t.first) + "⊗" + h.name(t.second);  // U+2297 circled times
}

// Componentwise order on pairs.
inline bool cartesian_leq(const TypeHierarchy& h, CartesianType a, CartesianType b) {
  return h.leq(a.first, b.first) && h.leq(a.second, b.second);
}

// A finite set of cartesian types over a shared hierarchy (the signature
// set T* of a generic rule).
struct CartesianPoset {
  const TypeHierarchy* hierarchy = nullptr;
  std::vector<CartesianType> members;

  bool contains(CartesianType t) const {
    for (const CartesianType& m : members)
      if (m == t) return true;
    return false;
  }
};

struct WellFormednessConflict {
  CartesianType a, b;   // the clashing members
  CartesianType missing;  // the pair of componentwise meets that must be a member
};

// Well-formedness: for every pair of members whose componentwise meets both
// exist, the pair of meets must itself be a member. Guarantees unique
// dynamic binding.
inline std::vector<WellFormednessConflict> check_well_formed(const CartesianPoset& p) {
  std::vector<WellFormednessConflict> conflicts;
  const TypeHierarchy& h = *p.hierarchy;
  for (std::size_t i = 0; i < p.members.size(); ++i) {
    for (std::size_t j = i + 1; j < p.members.size(); ++j) {
      CartesianType a = p.members[i], b = p.members[j];
      std::optional<TypeId> m1 = h.meet(a.first, b.first);
      std::optional<TypeId> m2 = h.meet(a.second, b.second);
      if (!m1 || !m2) continue;
      CartesianType need{*m1, *m2};
      if (!p.contains(need)) conflicts.push_back({a, b, need});
    }
  }
  return conflicts;
}

}  // namespace grules
