#pragma once

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstdint>
#include <functional>
#include <memory>
#include <optional>
#include <set>
#include <thread>
#include <vector>

#include "clonelab/budget.hpp"
#include "clonelab/operation.hpp"
#include "clonelab/structure.hpp"

namespace clonelab {

// Outcome of a preservation check. On failure `columns` holds the chosen
// relation tuples (one per argument of f) and `image` the componentwise
// result, which lies outside the relation.
struct Preservation {
  bool preserved = true;
  std::vector<Tuple> columns;
  Tuple image;

  explicit operator bool() const noexcept { return preserved; }
};

inline Tuple apply_columnwise(const OperationTable& f, const std::vector<Tuple>& columns, std::size_t rel_arity) {
  Tuple image(rel_arity);
  Tuple args(f.arity());
  for (std::size_t j = 0; j < rel_arity; ++j) {
    for (std::size_t i = 0; i < f.arity(); ++i) args[i] = columns[i][j];
    image[j] = f(args);
  }
  return image;
}

// First violating choice of arity(f) tuples in lexicographic order, if any.
inline Preservation preserves(const OperationTable& f, const Relation& rel) {
  std::vector<Tuple> tuples(rel.tuples.begin(), rel.tuples.end());
  if (tuples.empty() && f.arity() > 0) return {};
  std::vector<std::size_t> idx(f.arity(), 0);
  std::vector<Tuple> cols(f.arity());
  do {
    for (std::size_t i = 0; i < idx.size(); ++i) cols[i] = tuples[idx[i]];
    Tuple image = apply_columnwise(f, cols, rel.arity);
    if (!rel.contains(image)) return {false, cols, image};
  } while (next_index(idx, tuples.size()));
  return {};
}

inline Preservation preserves(const OperationTable& f, const FiniteStructure& s, const std::string& sym) {
  const Relation& rel = s.relation(sym);
  if (f.domain_size() != s.domain_size()) throw ShapeError("operation and structure have different domains");
  return preserves(f, rel);
}

inline bool is_polymorphism(const OperationTable& f, const FiniteStructure& s) {
  for (const auto& [sym, rel] : s.relations())
    if (!preserves(f, s, sym)) return false;
  return true;
}

// Enumerates the k-ary polymorphisms of a structure as value tables. The next
// entry is the open one with the fewest remaining values, ties to the lowest
// rank; values go in ascending order. A constraint (one relation applied to
// one choice of k tuples) is checked as soon as its last entry is set, and
// when a single entry remains open that entry's domain is filtered to the
// values completing a tuple. Emission order is not lexicographic.
class PolymorphismSearch {
 public:
  PolymorphismSearch(const FiniteStructure& s, std::size_t k) : n_(s.domain_size()), k_(k) {
    if (n_ > 64) throw DomainError("polymorphism search supports domains of at most 64 elements");
    entries_ = static_cast<std::size_t>(ipow(n_, k_));
    cons_of_.assign(entries_, {});
    for (const auto& [sym, rel] : s.relations()) add_relation(rel);
  }

  std::size_t entries() const noexcept { return entries_; }
  std::size_t constraints() const noexcept { return cons_.size(); }

  // Calls `emit` for each solution; stop early by returning false. `first`
  // optionally pins entry 0 (used to split work across threads). `fixed`
  // optionally pins arbitrary entries.
  void run(const std::function<bool(const std::vector<Element>&)>& emit, std::optional<Element> first = {},
           const std::vector<std::optional<Element>>& fixed = {}) const {
    State st;
    st.val.assign(entries_, 0);
    st.assigned.assign(entries_, 0);
    st.dom.assign(entries_, full_mask());
    if (first) st.dom[0] = bit(*first);
    for (std::size_t e = 0; e < fixed.size() && e < entries_; ++e)
      if (fixed[e]) st.dom[e] &= bit(*fixed[e]);
    for (std::size_t e = 0; e < entries_; ++e)
      if (!st.dom[e]) return;
    bool stop = false;
    recurse(st, 0, emit, stop);
  }

 private:
  struct Constraint {
    const std::vector<char>* member;  // membership bitmap by tuple rank
    std::vector<std::size_t> pos;     // table entry per relation coordinate
  };
  struct State {
    std::vector<Element> val;
    std::vector<char> assigned;
    std::vector<std::uint64_t> dom;
    std::vector<std::pair<std::size_t, std::uint64_t>> trail;
  };

  std::uint64_t full_mask() const { return n_ == 64 ? ~0ULL : ((1ULL << n_) - 1); }
  static std::uint64_t bit(Element v) { return 1ULL << v; }

  void add_relation(const Relation& rel) {
    members_.push_back(std::make_unique<std::vector<char>>(ipow(n_, rel.arity), 0));
    auto& member = *members_.back();
    for (const auto& t : rel.tuples) member[rank_of(t, n_)] = 1;
    std::vector<Tuple> tuples(rel.tuples.begin(), rel.tuples.end());
    if (tuples.empty() && k_ > 0) return;
    std::set<std::vector<std::size_t>> seen;
    std::vector<std::size_t> idx(k_, 0);
    do {
      std::vector<std::size_t> pos(rel.arity);
      for (std::size_t j = 0; j < rel.arity; ++j) {
        Rank r = 0;
        for (std::size_t i = 0; i < k_; ++i) r = r * n_ + tuples[idx[i]][j];
        pos[j] = static_cast<std::size_t>(r);
      }
      if (!seen.insert(pos).second) continue;
      std::size_t id = cons_.size();
      cons_.push_back({&member, pos});
      std::vector<std::size_t> distinct = pos;
      std::sort(distinct.begin(), distinct.end());
      distinct.erase(std::unique(distinct.begin(), distinct.end()), distinct.end());
      for (auto e : distinct) cons_of_[e].push_back(id);
    } while (next_index(idx, tuples.size()));
  }

  Rank image_rank(const Constraint& c, const State& st, std::size_t open, Element w) const {
    Rank r = 0;
    for (auto e : c.pos) r = r * n_ + (e == open ? w : st.val[e]);
    return r;
  }

  // Applies constraint effects of assigning entry e. Returns false on wipeout.
  bool propagate(State& st, std::size_t e) const {
    for (auto ci : cons_of_[e]) {
      const Constraint& c = cons_[ci];
      std::optional<std::size_t> open;
      bool multiple = false;
      for (auto p : c.pos) {
        if (st.assigned[p]) continue;
        if (open && *open != p) {
          multiple = true;
          break;
        }
        open = p;
      }
      if (multiple) continue;
      if (!open) {
        if (!(*c.member)[image_rank(c, st, entries_, 0)]) return false;
        continue;
      }
      std::uint64_t keep = 0;
      for (Element w = 0; w < n_; ++w)
        if ((st.dom[*open] & bit(w)) && (*c.member)[image_rank(c, st, *open, w)]) keep |= bit(w);
      if (keep != st.dom[*open]) {
        st.trail.emplace_back(*open, st.dom[*open]);
        st.dom[*open] = keep;
        if (!keep) return false;
      }
    }
    return true;
  }

  void recurse(State& st, std::size_t depth, const std::function<bool(const std::vector<Element>&)>& emit,
               bool& stop) const {
    if (depth == entries_) {
      if (!emit(st.val)) stop = true;
      return;
    }
    std::size_t e = entries_;
    int best = 65;
    for (std::size_t i = 0; i < entries_; ++i) {
      if (st.assigned[i]) continue;
      int c = std::popcount(st.dom[i]);
      if (c < best) {
        best = c;
        e = i;
        if (c <= 1) break;
      }
    }
    for (Element v = 0; v < n_ && !stop; ++v) {
      if (!(st.dom[e] & bit(v))) continue;
      std::size_t mark = st.trail.size();
      st.val[e] = v;
      st.assigned[e] = 1;
      if (propagate(st, e)) recurse(st, depth + 1, emit, stop);
      st.assigned[e] = 0;
      while (st.trail.size() > mark) {
        st.dom[st.trail.back().first] = st.trail.back().second;
        st.trail.pop_back();
      }
    }
  }

  Element n_;
  std::size_t k_;
  std::size_t entries_ = 0;
  std::vector<std::unique_ptr<std::vector<char>>> members_;
  std::vector<Constraint> cons_;
  std::vector<std::vector<std::size_t>> cons_of_;
};

inline void check_polymorphism_budget(Element n, std::size_t k, const Budget& budget) {
  double entries = power_estimate(n, static_cast<double>(k));
  budget.check("table entries of " + std::to_string(k) + "-ary operations", entries, budget.max_table_entries);
  // n^(n^k) candidate tables, compared in log space.
  double log2_candidates = entries * std::log2(static_cast<double>(n));
  double log2_limit = std::log2(budget.max_candidates);
  if (log2_candidates > log2_limit)
    throw BudgetExceeded("candidate " + std::to_string(k) + "-ary tables (log2)", log2_candidates, log2_limit);
}

// All k-ary polymorphisms of `s`, lexicographically ordered by table.
inline std::vector<OperationTable> polymorphisms(const FiniteStructure& s, std::size_t k, const Budget& budget = {}) {
  const Element n = s.domain_size();
  check_polymorphism_budget(n, k, budget);
  PolymorphismSearch search(s, k);
  auto collect = [&](std::optional<Element> first) {
    std::vector<OperationTable> out;
    search.run(
        [&](const std::vector<Element>& vals) {
          out.emplace_back(n, k, vals);
          return true;
        },
        first);
    std::sort(out.begin(), out.end());
    return out;
  };
  if (budget.jobs <= 1 || n == 1 || search.entries() == 0) return collect(std::nullopt);
  // Partition on the value of entry 0; concatenating in value order keeps the
  // output identical to the sequential run.
  std::vector<std::vector<OperationTable>> parts(n);
  std::vector<std::thread> workers;
  std::size_t next = 0;
  while (next < n) {
    workers.clear();
    for (unsigned j = 0; j < budget.jobs && next < n; ++j, ++next)
      workers.emplace_back([&, v = static_cast<Element>(next)] { parts[v] = collect(v); });
    for (auto& w : workers) w.join();
  }
  std::vector<OperationTable> out;
  for (auto& p : parts) out.insert(out.end(), std::make_move_iterator(p.begin()), std::make_move_iterator(p.end()));
  return out;
}

// All relations of arity 1..m on an n-set preserved by every operation in
// `ops`, ordered by arity and then by the bitmask of member tuple ranks.
inline std::vector<Relation> invariants(const std::vector<OperationTable>& ops, Element n, std::size_t m,
                                        const Budget& budget = {}) {
  for (const auto& f : ops)
    if (f.domain_size() != n) throw ShapeError("invariants: operations on different domains");
  std::vector<Relation> out;
  for (std::size_t r = 1; r <= m; ++r) {
    double cells = power_estimate(n, static_cast<double>(r));
    budget.check("relations of arity " + std::to_string(r), std::pow(2.0, cells), budget.max_candidates);
    const Rank size = ipow(n, r);
    for (std::uint64_t mask = 0; mask < (std::uint64_t{1} << size); ++mask) {
      Relation rel{r, {}};
      for (Rank t = 0; t < size; ++t)
        if (mask >> t & 1) rel.tuples.insert(unrank(t, n, r));
      bool ok = true;
      for (const auto& f : ops)
        if (!preserves(f, rel)) {
          ok = false;
          break;
        }
      if (ok) out.push_back(std::move(rel));
    }
  }
  return out;
}

}  // namespace clonelab
