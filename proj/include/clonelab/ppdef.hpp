#pragma once

#include <optional>
#include <string>
#include <vector>

#include "clonelab/budget.hpp"
#include "clonelab/errors.hpp"
#include "clonelab/formula.hpp"
#include "clonelab/operation.hpp"
#include "clonelab/polymorphism.hpp"
#include "clonelab/solver.hpp"
#include "clonelab/structure.hpp"

namespace clonelab {

struct PPDefinability {
  bool definable = true;
  // On failure: an m-ary polymorphism of the structure, m = |r|, together
  // with the tuples of r it is applied to and the image outside r.
  std::optional<OperationTable> witness;
  Preservation violation;

  explicit operator bool() const noexcept { return definable; }
};

inline std::vector<std::string> parameter_names(std::size_t k, const std::string& base = "x") {
  std::vector<std::string> out;
  for (std::size_t i = 1; i <= k; ++i) out.push_back(base + std::to_string(i));
  return out;
}

namespace detail {

inline bool is_equality(const Relation& r, Element n) {
  if (r.arity != 2 || r.tuples.size() != n) return false;
  for (const auto& t : r.tuples)
    if (t[0] != t[1]) return false;
  return true;
}

inline bool is_full(const Relation& r, Element n) {
  return static_cast<double>(r.tuples.size()) == power_estimate(n, static_cast<double>(r.arity));
}

inline std::optional<std::string> matching_symbol(const FiniteStructure& s, const Relation& r) {
  for (const auto& [sym, rel] : s.relations())
    if (rel == r) return sym;
  return std::nullopt;
}

// The canonical instance: one variable per element of D^m (m = |r|), and a
// constraint R(a_1, ..., a_k) whenever the a_j hold coordinatewise in R.
// Solutions are exactly the m-ary polymorphisms.
class CanonicalInstance {
 public:
  CanonicalInstance(const FiniteStructure& s, const Relation& r, const Budget& budget)
      : s_(&s), n_(s.domain_size()), m_(r.tuples.size()), rows_(r.tuples.begin(), r.tuples.end()) {
    budget.check("canonical formula variables", power_estimate(n_, static_cast<double>(m_)), budget.max_table_entries);
    double atoms = 0;
    for (const auto& [sym, rel] : s.relations())
      atoms += power_estimate(static_cast<double>(rel.tuples.size()), static_cast<double>(m_));
    budget.check("canonical formula atoms", atoms, budget.max_candidates);
    size_ = ipow(n_, m_);
    // Columns of r: the j-th column lists r's tuples at coordinate j.
    for (std::size_t j = 0; j < r.arity; ++j) {
      Tuple col(m_);
      for (std::size_t i = 0; i < m_; ++i) col[i] = rows_[i][j];
      columns_.push_back(rank_of(col, n_));
    }
    for (const auto& [sym, rel] : s.relations()) {
      std::vector<Tuple> tuples(rel.tuples.begin(), rel.tuples.end());
      if (tuples.empty() && m_ > 0) continue;
      std::vector<std::size_t> pick(m_, 0);
      do {
        std::vector<Rank> args(rel.arity);
        for (std::size_t a = 0; a < rel.arity; ++a) {
          Tuple v(m_);
          for (std::size_t c = 0; c < m_; ++c) v[c] = tuples[pick[c]][a];
          args[a] = rank_of(v, n_);
        }
        if (tuples.empty()) {
          // m = 0 over an empty relation: no tuple of D^0 lies in it, so the
          // conjunct is the unsatisfiable atom itself.
          args.assign(rel.arity, 0);
        }
        atoms_.push_back({sym, std::move(args)});
      } while (next_index(pick, tuples.size()));
    }
  }

  Rank size() const { return size_; }
  std::size_t m() const { return m_; }
  const std::vector<Rank>& columns() const { return columns_; }
  const std::vector<Tuple>& rows() const { return rows_; }

  // A polymorphism of arity m sending the columns of r to t, if any.
  std::optional<OperationTable> extension(const Tuple& t) const {
    std::vector<std::optional<Element>> fixed(size_);
    for (std::size_t j = 0; j < columns_.size(); ++j) {
      auto& slot = fixed[columns_[j]];
      if (slot && *slot != t[j]) return std::nullopt;
      slot = t[j];
    }
    std::vector<std::string> names;
    for (Rank i = 0; i < size_; ++i) names.push_back("v" + std::to_string(i));
    ConstraintSolver solver(n_, names);
    for (const auto& [sym, args] : atoms_)
      solver.add_constraint(s_->relation(sym), std::vector<std::size_t>(args.begin(), args.end()));
    auto sol = solver.solve(fixed);
    if (!sol) return std::nullopt;
    return OperationTable(n_, m_, *sol);
  }

  Formula formula(std::size_t k) const {
    std::vector<Formula> parts;
    std::vector<char> used(size_, 0);
    auto var = [&](Rank i) {
      used[i] = 1;
      return "v" + std::to_string(i);
    };
    auto params = parameter_names(k);
    for (std::size_t j = 0; j < k; ++j) parts.push_back(Formula::eq(params[j], var(columns_[j])));
    for (const auto& [sym, args] : atoms_) {
      std::vector<std::string> names;
      for (Rank a : args) names.push_back(var(a));
      parts.push_back(Formula::rel(sym, names));
    }
    std::vector<std::string> bound;
    for (Rank i = 0; i < size_; ++i)
      if (used[i]) bound.push_back("v" + std::to_string(i));
    Formula body = Formula::conj(std::move(parts));
    return bound.empty() ? body : Formula::exists(bound, std::move(body));
  }

 private:
  const FiniteStructure* s_;
  Element n_;
  std::size_t m_;
  std::vector<Tuple> rows_;
  Rank size_ = 0;
  std::vector<Rank> columns_;
  std::vector<std::pair<std::string, std::vector<Rank>>> atoms_;
};

inline void validate_relation(const FiniteStructure& s, const Relation& r) {
  if (r.arity == 0) throw ArityMismatch("relations must have arity at least 1");
  for (const auto& t : r.tuples) {
    if (t.size() != r.arity) throw ArityMismatch("tuple length differs from relation arity");
    for (Element e : t)
      if (e >= s.domain_size()) throw DomainError("tuple entry " + std::to_string(e) + " outside domain");
  }
}

}  // namespace detail

// r is pp-definable in s iff every polymorphism of arity |r| maps the columns
// of r back into r. Each tuple outside r, in lexicographic order, is tested
// as a possible image.
inline PPDefinability is_pp_definable(const FiniteStructure& s, const Relation& r, const Budget& budget = {}) {
  detail::validate_relation(s, r);
  const Element n = s.domain_size();
  if (detail::is_equality(r, n) || detail::is_full(r, n) || detail::matching_symbol(s, r)) return {};
  detail::CanonicalInstance inst(s, r, budget);
  Tuple t(r.arity, 0);
  do {
    if (r.contains(t)) continue;
    if (auto f = inst.extension(t)) {
      PPDefinability out;
      out.definable = false;
      out.violation = Preservation{false, inst.rows(), t};
      out.witness = std::move(f);
      return out;
    }
  } while (next_tuple(t, n));
  return {};
}

// Defining formula over parameters x1..xk, model-checked before return.
inline Formula construct_pp_definition(const FiniteStructure& s, const Relation& r, const Budget& budget = {}) {
  detail::validate_relation(s, r);
  const Element n = s.domain_size();
  auto params = parameter_names(r.arity);
  Formula f;
  if (detail::is_equality(r, n)) {
    f = Formula::eq("x1", "x2");
  } else if (detail::is_full(r, n)) {
    std::vector<Formula> parts;
    for (const auto& p : params) parts.push_back(Formula::eq(p, p));
    f = Formula::conj(std::move(parts));
  } else if (auto sym = detail::matching_symbol(s, r)) {
    f = Formula::rel(*sym, params);
  } else {
    f = detail::CanonicalInstance(s, r, budget).formula(r.arity);
  }
  if (!(defined_relation(s, f, params) == r))
    throw NotDefinableError("relation is not primitive positive definable in " + s.name());
  return f;
}

}  // namespace clonelab
