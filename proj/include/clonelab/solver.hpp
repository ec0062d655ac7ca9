#pragma once

#include <algorithm>
#include <deque>
#include <limits>
#include <map>
#include <numeric>
#include <optional>
#include <string>
#include <vector>

#include "clonelab/errors.hpp"
#include "clonelab/formula.hpp"
#include "clonelab/structure.hpp"

namespace clonelab {

using Assignment = std::map<std::string, Element>;

// Backtracking search over a finite domain with relation-table constraints
// and equalities. Domains are pruned to generalized arc consistency at the
// root and after every assignment. The next variable has the smallest live
// domain; ties go to the variable whose smallest constraint relation has the
// fewest tuples, then to the lexicographically least name.
class ConstraintSolver {
 public:
  ConstraintSolver(Element n, std::vector<std::string> names)
      : n_(n), names_(std::move(names)), parent_(names_.size()) {
    std::iota(parent_.begin(), parent_.end(), std::size_t{0});
  }

  std::size_t num_vars() const noexcept { return names_.size(); }

  void add_equal(std::size_t a, std::size_t b) {
    a = find(a);
    b = find(b);
    if (a != b) parent_[std::max(a, b)] = std::min(a, b);
    finalized_ = false;
  }

  void add_constraint(const Relation& rel, std::vector<std::size_t> vars) {
    raw_.push_back({&rel, std::move(vars)});
    finalized_ = false;
  }

  // First solution in search order, with `fixed` pinning some variables.
  std::optional<std::vector<Element>> solve(const std::vector<std::optional<Element>>& fixed = {}) {
    finalize();
    std::size_t v = names_.size();
    dom_.assign(v, std::vector<char>(n_, 1));
    size_.assign(v, n_);
    trail_.clear();
    for (std::size_t i = 0; i < fixed.size() && i < v; ++i) {
      if (!fixed[i]) continue;
      Element val = *fixed[i];
      if (val >= n_) throw DomainError("assigned value " + std::to_string(val) + " outside domain");
      std::size_t r = find(i);
      if (!dom_[r][val]) return std::nullopt;
      for (Element x = 0; x < n_; ++x)
        if (x != val && dom_[r][x]) remove(r, x);
    }
    for (const auto& c : cons_)
      if (c.tuples.empty()) return std::nullopt;
    std::vector<std::size_t> all(cons_.size());
    std::iota(all.begin(), all.end(), std::size_t{0});
    if (!propagate(all)) return std::nullopt;
    if (!search()) return std::nullopt;
    std::vector<Element> out(v);
    for (std::size_t i = 0; i < v; ++i) {
      std::size_t r = find(i);
      out[i] = first_value(r);
    }
    return out;
  }

 private:
  struct Raw {
    const Relation* rel;
    std::vector<std::size_t> vars;
  };
  struct Constraint {
    std::vector<std::size_t> vars;      // representative per position
    std::vector<std::size_t> distinct;  // distinct representatives
    std::vector<Tuple> tuples;          // tuples consistent with repeated positions
  };

  std::size_t find(std::size_t x) {
    while (parent_[x] != x) x = parent_[x] = parent_[parent_[x]];
    return x;
  }

  void finalize() {
    if (finalized_) return;
    cons_.clear();
    var_cons_.assign(names_.size(), {});
    min_rel_.assign(names_.size(), std::numeric_limits<std::size_t>::max());
    for (const auto& r : raw_) {
      Constraint c;
      for (auto x : r.vars) c.vars.push_back(find(x));
      c.distinct = c.vars;
      std::sort(c.distinct.begin(), c.distinct.end());
      c.distinct.erase(std::unique(c.distinct.begin(), c.distinct.end()), c.distinct.end());
      for (const Tuple& t : r.rel->tuples) {
        bool ok = true;
        for (std::size_t p = 0; p < t.size() && ok; ++p)
          for (std::size_t q = 0; q < p && ok; ++q)
            if (c.vars[p] == c.vars[q] && t[p] != t[q]) ok = false;
        if (ok) c.tuples.push_back(t);
      }
      std::size_t id = cons_.size();
      for (auto x : c.distinct) {
        var_cons_[x].push_back(id);
        min_rel_[x] = std::min(min_rel_[x], r.rel->tuples.size());
      }
      cons_.push_back(std::move(c));
    }
    finalized_ = true;
  }

  void remove(std::size_t var, Element val) {
    dom_[var][val] = 0;
    --size_[var];
    trail_.emplace_back(var, val);
  }

  void undo(std::size_t mark) {
    while (trail_.size() > mark) {
      auto [var, val] = trail_.back();
      trail_.pop_back();
      dom_[var][val] = 1;
      ++size_[var];
    }
  }

  Element first_value(std::size_t var) const {
    for (Element x = 0; x < n_; ++x)
      if (dom_[var][x]) return x;
    return 0;
  }

  bool propagate(std::vector<std::size_t> queue) {
    std::vector<char> queued(cons_.size(), 0);
    for (auto c : queue) queued[c] = 1;
    std::deque<std::size_t> q(queue.begin(), queue.end());
    std::vector<std::vector<char>> support;
    while (!q.empty()) {
      std::size_t ci = q.front();
      q.pop_front();
      queued[ci] = 0;
      const Constraint& c = cons_[ci];
      support.assign(c.distinct.size(), std::vector<char>(n_, 0));
      for (const Tuple& t : c.tuples) {
        bool alive = true;
        for (std::size_t p = 0; p < t.size() && alive; ++p) alive = dom_[c.vars[p]][t[p]] != 0;
        if (!alive) continue;
        for (std::size_t p = 0; p < t.size(); ++p) {
          auto pos = std::lower_bound(c.distinct.begin(), c.distinct.end(), c.vars[p]) - c.distinct.begin();
          support[pos][t[p]] = 1;
        }
      }
      for (std::size_t d = 0; d < c.distinct.size(); ++d) {
        std::size_t var = c.distinct[d];
        bool changed = false;
        for (Element x = 0; x < n_; ++x)
          if (dom_[var][x] && !support[d][x]) {
            remove(var, x);
            changed = true;
          }
        if (size_[var] == 0) return false;
        if (changed)
          for (auto other : var_cons_[var])
            if (other != ci && !queued[other]) {
              queued[other] = 1;
              q.push_back(other);
            }
      }
    }
    return true;
  }

  std::optional<std::size_t> choose() const {
    std::optional<std::size_t> best;
    for (std::size_t v = 0; v < names_.size(); ++v) {
      if (parent_[v] != v || size_[v] <= 1) continue;
      if (!best) {
        best = v;
        continue;
      }
      std::size_t b = *best;
      if (size_[v] != size_[b]) {
        if (size_[v] < size_[b]) best = v;
      } else if (min_rel_[v] != min_rel_[b]) {
        if (min_rel_[v] < min_rel_[b]) best = v;
      } else if (names_[v] < names_[b]) {
        best = v;
      }
    }
    return best;
  }

  bool search() {
    auto pick = choose();
    if (!pick) return true;
    std::size_t v = *pick;
    for (Element val = 0; val < n_; ++val) {
      if (!dom_[v][val]) continue;
      std::size_t mark = trail_.size();
      for (Element x = 0; x < n_; ++x)
        if (x != val && dom_[v][x]) remove(v, x);
      if (propagate(var_cons_[v]) && search()) return true;
      undo(mark);
    }
    return false;
  }

  Element n_;
  std::vector<std::string> names_;
  std::vector<std::size_t> parent_;
  std::vector<Raw> raw_;
  bool finalized_ = false;
  std::vector<Constraint> cons_;
  std::vector<std::vector<std::size_t>> var_cons_;
  std::vector<std::size_t> min_rel_;
  std::vector<std::vector<char>> dom_;
  std::vector<std::size_t> size_;
  std::vector<std::pair<std::size_t, Element>> trail_;
};

// A formula compiled against a structure: variables numbered, bound variables
// renamed apart, atoms resolved to relations.
class CompiledFormula {
 public:
  CompiledFormula(const FiniteStructure& s, const Formula& f) : n_(s.domain_size()) {
    std::vector<std::pair<std::string, std::size_t>> scope;
    walk(s, f, scope, true);
    solver_.emplace(n_, names_);
    for (const auto& a : atoms_) solver_->add_constraint(*a.first, a.second);
    for (const auto& [x, y] : eqs_) solver_->add_equal(x, y);
  }

  const std::vector<std::string>& free_names() const noexcept { return free_names_; }
  const std::vector<std::size_t>& free_indices() const noexcept { return free_; }
  const std::vector<std::size_t>& outer_block() const noexcept { return outer_; }
  const std::vector<std::string>& names() const noexcept { return names_; }

  std::optional<std::vector<Element>> solve(const std::vector<std::optional<Element>>& fixed = {}) {
    return solver_->solve(fixed);
  }

  // Truth under an assignment of the free variables, given positionally in
  // free_names() order.
  bool holds(const Tuple& free_values) {
    std::vector<std::optional<Element>> fixed(names_.size());
    for (std::size_t i = 0; i < free_.size(); ++i) fixed[free_[i]] = free_values[i];
    return solve(fixed).has_value();
  }

 private:
  std::size_t fresh(const std::string& name) {
    names_.push_back(name);
    return names_.size() - 1;
  }

  std::size_t lookup(const std::string& v, const std::vector<std::pair<std::string, std::size_t>>& scope) {
    for (auto it = scope.rbegin(); it != scope.rend(); ++it)
      if (it->first == v) return it->second;
    if (auto it = free_map_.find(v); it != free_map_.end()) return it->second;
    std::size_t idx = fresh(v);
    free_.push_back(idx);
    free_names_.push_back(v);
    free_map_.emplace(v, idx);
    return idx;
  }

  void walk(const FiniteStructure& s, const Formula& f, std::vector<std::pair<std::string, std::size_t>>& scope,
            bool top) {
    switch (f.kind) {
      case Formula::Kind::Rel: {
        const Relation& rel = s.relation(f.symbol);
        if (rel.arity != f.vars.size())
          throw ArityMismatch("atom " + to_string(f) + " has " + std::to_string(f.vars.size()) +
                              " arguments but '" + f.symbol + "' has arity " + std::to_string(rel.arity));
        std::vector<std::size_t> args;
        for (const auto& v : f.vars) args.push_back(lookup(v, scope));
        atoms_.emplace_back(&rel, std::move(args));
        break;
      }
      case Formula::Kind::Eq:
        eqs_.emplace_back(lookup(f.vars[0], scope), lookup(f.vars[1], scope));
        break;
      case Formula::Kind::And:
        for (const auto& c : f.children) walk(s, c, scope, false);
        break;
      case Formula::Kind::Exists: {
        std::size_t mark = scope.size();
        for (const auto& v : f.vars) {
          std::size_t idx = fresh(v);
          if (top) outer_.push_back(idx);
          scope.emplace_back(v, idx);
        }
        walk(s, f.body(), scope, false);
        scope.resize(mark);
        break;
      }
    }
  }

  Element n_;
  std::vector<std::string> names_;
  std::vector<std::size_t> free_;
  std::vector<std::string> free_names_;
  std::vector<std::size_t> outer_;
  std::vector<std::pair<const Relation*, std::vector<std::size_t>>> atoms_;
  std::vector<std::pair<std::size_t, std::size_t>> eqs_;
  std::map<std::string, std::size_t> free_map_;
  std::optional<ConstraintSolver> solver_;
};

// Tarskian truth of `f` in `s` under `a`. Every free variable of `f` must be
// assigned; extra entries are ignored.
inline bool eval_formula(const FiniteStructure& s, const Formula& f, const Assignment& a) {
  CompiledFormula cf(s, f);
  Tuple values;
  for (const auto& v : cf.free_names()) {
    auto it = a.find(v);
    if (it == a.end()) throw UnboundVariable("free variable '" + v + "' has no assignment");
    if (it->second >= s.domain_size())
      throw DomainError("variable '" + v + "' assigned " + std::to_string(it->second) + " outside domain");
    values.push_back(it->second);
  }
  return cf.holds(values);
}

struct SolveResult {
  bool sat = false;
  // Values for the outermost existential block of the sentence (empty when
  // the sentence does not start with a quantifier).
  Assignment witness;
};

inline SolveResult solve_pp_sentence(const FiniteStructure& s, const Formula& f) {
  CompiledFormula cf(s, f);
  if (!cf.free_names().empty())
    throw NotASentence("formula has free variable '" + cf.free_names().front() + "'");
  auto sol = cf.solve();
  SolveResult out;
  if (!sol) return out;
  out.sat = true;
  for (auto idx : cf.outer_block()) out.witness[cf.names()[idx]] = (*sol)[idx];
  return out;
}

// The relation {t in D^k : s |= f(params := t)}. Free variables of `f` must
// be among `params`.
inline Relation defined_relation(const FiniteStructure& s, const Formula& f, const std::vector<std::string>& params) {
  CompiledFormula cf(s, f);
  std::vector<std::size_t> slot;  // param position for each free variable
  for (const auto& v : cf.free_names()) {
    auto it = std::find(params.begin(), params.end(), v);
    if (it == params.end()) throw UnboundVariable("free variable '" + v + "' is not a parameter");
    slot.push_back(static_cast<std::size_t>(it - params.begin()));
  }
  Relation out{params.size(), {}};
  Tuple t(params.size(), 0);
  Tuple free_vals(slot.size());
  do {
    for (std::size_t i = 0; i < slot.size(); ++i) free_vals[i] = t[slot[i]];
    if (cf.holds(free_vals)) out.tuples.insert(t);
  } while (next_tuple(t, s.domain_size()));
  return out;
}

}  // namespace clonelab
