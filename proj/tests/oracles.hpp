#pragma once

// Test-only reference implementations. Nothing here calls into the solver,
// the polymorphism search, or the algebra searches it is used to check.

#include <map>
#include <random>
#include <string>
#include <vector>

#include "clonelab/formula.hpp"
#include "clonelab/structure.hpp"

namespace oracle {

using clonelab::Element;
using clonelab::FiniteStructure;
using clonelab::Formula;

// Direct recursive Tarskian semantics: existential quantifiers loop over the
// whole domain.
inline bool eval(const FiniteStructure& s, const Formula& f, std::map<std::string, Element>& a) {
  switch (f.kind) {
    case Formula::Kind::Rel: {
      clonelab::Tuple t;
      for (const auto& v : f.vars) t.push_back(a.at(v));
      return s.relation(f.symbol).contains(t);
    }
    case Formula::Kind::Eq:
      return a.at(f.vars[0]) == a.at(f.vars[1]);
    case Formula::Kind::And:
      for (const auto& c : f.children)
        if (!eval(s, c, a)) return false;
      return true;
    case Formula::Kind::Exists: {
      std::map<std::string, Element> saved;
      std::map<std::string, bool> had;
      for (const auto& v : f.vars) {
        had[v] = a.count(v) != 0;
        if (had[v]) saved[v] = a[v];
      }
      std::vector<Element> vals(f.vars.size(), 0);
      bool found = false;
      while (true) {
        for (std::size_t i = 0; i < vals.size(); ++i) a[f.vars[i]] = vals[i];
        if (eval(s, f.body(), a)) {
          found = true;
          break;
        }
        std::size_t i = vals.size();
        while (i > 0 && ++vals[i - 1] == s.domain_size()) vals[--i] = 0;
        if (i == 0) break;
      }
      for (const auto& v : f.vars) {
        if (had[v]) a[v] = saved[v];
        else a.erase(v);
      }
      return found;
    }
  }
  return false;
}

inline FiniteStructure random_structure(std::mt19937& rng, Element max_domain, std::size_t max_rels,
                                        std::size_t max_arity) {
  std::uniform_int_distribution<Element> dn(1, max_domain);
  Element n = dn(rng);
  FiniteStructure s("R", n);
  std::size_t rels = std::uniform_int_distribution<std::size_t>(1, max_rels)(rng);
  for (std::size_t r = 0; r < rels; ++r) {
    std::size_t k = std::uniform_int_distribution<std::size_t>(1, max_arity)(rng);
    clonelab::Relation rel{k, {}};
    clonelab::Tuple t(k, 0);
    std::bernoulli_distribution keep(0.45);
    do {
      if (keep(rng)) rel.tuples.insert(t);
    } while (clonelab::next_tuple(t, n));
    s.add_relation("R" + std::to_string(r), std::move(rel));
  }
  return s;
}

// Random pp-sentence over the relations of `s` using at most `max_vars`
// variables, with nested quantifier blocks.
inline Formula random_sentence(std::mt19937& rng, const FiniteStructure& s, std::size_t max_vars,
                               std::size_t max_atoms) {
  std::size_t nv = std::uniform_int_distribution<std::size_t>(1, max_vars)(rng);
  std::vector<std::string> vars;
  for (std::size_t i = 0; i < nv; ++i) vars.push_back("v" + std::to_string(i));
  std::vector<std::string> syms;
  for (const auto& [sym, rel] : s.relations()) syms.push_back(sym);
  std::size_t na = std::uniform_int_distribution<std::size_t>(0, max_atoms)(rng);
  std::uniform_int_distribution<std::size_t> pick_var(0, nv - 1);
  std::vector<Formula> atoms;
  for (std::size_t i = 0; i < na; ++i) {
    if (syms.empty() || std::bernoulli_distribution(0.15)(rng)) {
      atoms.push_back(Formula::eq(vars[pick_var(rng)], vars[pick_var(rng)]));
      continue;
    }
    const auto& sym = syms[std::uniform_int_distribution<std::size_t>(0, syms.size() - 1)(rng)];
    std::vector<std::string> args;
    for (std::size_t j = 0; j < s.relation(sym).arity; ++j) args.push_back(vars[pick_var(rng)]);
    atoms.push_back(Formula::rel(sym, args));
  }
  // Split the variables into an outer block and an inner block quantified
  // around the second half of the atoms.
  std::size_t split = std::uniform_int_distribution<std::size_t>(0, nv)(rng);
  std::size_t half = atoms.size() / 2;
  std::vector<Formula> outer(atoms.begin(), atoms.begin() + static_cast<long>(half));
  std::vector<Formula> inner(atoms.begin() + static_cast<long>(half), atoms.end());
  std::vector<std::string> outer_vars(vars.begin(), vars.begin() + static_cast<long>(split));
  std::vector<std::string> inner_vars(vars.begin() + static_cast<long>(split), vars.end());
  // Inner-block variables used by outer atoms would be free; move them out.
  for (const auto& a : outer)
    for (const auto& v : a.vars) {
      auto it = std::find(inner_vars.begin(), inner_vars.end(), v);
      if (it != inner_vars.end()) {
        outer_vars.push_back(v);
        inner_vars.erase(it);
      }
    }
  Formula body = Formula::conj(std::move(inner));
  if (!inner_vars.empty()) body = Formula::exists(inner_vars, std::move(body));
  outer.push_back(std::move(body));
  Formula f = Formula::conj(std::move(outer));
  if (!outer_vars.empty()) f = Formula::exists(outer_vars, std::move(f));
  return f;
}

}  // namespace oracle

namespace oracle {

// Every k-ary table on an n-set, checked against the definition of a
// polymorphism by looping over all choices of k tuples per relation.
inline std::vector<std::vector<Element>> brute_polymorphisms(const FiniteStructure& s, std::size_t k) {
  const Element n = s.domain_size();
  std::size_t entries = 1;
  for (std::size_t i = 0; i < k; ++i) entries *= n;
  std::vector<std::vector<Element>> out;
  std::vector<Element> table(entries, 0);
  auto apply = [&](const std::vector<Element>& args) {
    std::size_t r = 0;
    for (auto a : args) r = r * n + a;
    return table[r];
  };
  while (true) {
    bool ok = true;
    for (const auto& [sym, rel] : s.relations()) {
      std::vector<clonelab::Tuple> tuples(rel.tuples.begin(), rel.tuples.end());
      if (tuples.empty()) continue;
      std::vector<std::size_t> idx(k, 0);
      while (ok) {
        clonelab::Tuple image;
        for (std::size_t j = 0; j < rel.arity; ++j) {
          std::vector<Element> args;
          for (std::size_t i = 0; i < k; ++i) args.push_back(tuples[idx[i]][j]);
          image.push_back(apply(args));
        }
        if (!rel.contains(image)) ok = false;
        std::size_t i = k;
        while (i > 0 && ++idx[i - 1] == tuples.size()) idx[--i] = 0;
        if (i == 0) break;
      }
      if (!ok) break;
    }
    if (ok) out.push_back(table);
    std::size_t i = entries;
    while (i > 0 && ++table[i - 1] == n) table[--i] = 0;
    if (i == 0) break;
  }
  return out;
}

}  // namespace oracle

namespace oracle {

// Relations of arity k definable by pp-formulas with at most `extra`
// existential variables: solution sets over D^(k+extra) of conjunctions of
// atoms (closed under intersection), projected onto the first k variables.
inline std::set<std::set<clonelab::Tuple>> pp_definable_by_enumeration(const FiniteStructure& s, std::size_t k,
                                                                       std::size_t extra) {
  using clonelab::Tuple;
  const Element n = s.domain_size();
  const std::size_t v = k + extra;
  std::vector<Tuple> points;
  Tuple t(v, 0);
  do points.push_back(t);
  while (clonelab::next_tuple(t, n));
  const std::size_t words = (points.size() + 63) / 64;
  using Mask = std::vector<std::uint64_t>;
  auto make = [&](auto pred) {
    Mask m(words, 0);
    for (std::size_t p = 0; p < points.size(); ++p)
      if (pred(points[p])) m[p / 64] |= std::uint64_t{1} << (p % 64);
    return m;
  };
  std::vector<Mask> atoms;
  for (std::size_t i = 0; i < v; ++i)
    for (std::size_t j = i + 1; j < v; ++j) atoms.push_back(make([&](const Tuple& p) { return p[i] == p[j]; }));
  for (const auto& [sym, rel] : s.relations()) {
    std::vector<std::size_t> idx(rel.arity, 0);
    do {
      atoms.push_back(make([&](const Tuple& p) {
        Tuple a;
        for (auto i : idx) a.push_back(p[i]);
        return rel.contains(a);
      }));
    } while (clonelab::next_index(idx, v));
  }
  std::set<Mask> seen;
  std::vector<Mask> queue{make([](const Tuple&) { return true; })};
  seen.insert(queue[0]);
  for (std::size_t q = 0; q < queue.size(); ++q)
    for (const auto& a : atoms) {
      Mask m = queue[q];
      for (std::size_t w = 0; w < words; ++w) m[w] &= a[w];
      if (seen.insert(m).second) queue.push_back(m);
    }
  std::set<std::set<Tuple>> out;
  for (const auto& m : seen) {
    std::set<Tuple> proj;
    for (std::size_t p = 0; p < points.size(); ++p)
      if (m[p / 64] >> (p % 64) & 1) proj.insert(Tuple(points[p].begin(), points[p].begin() + static_cast<long>(k)));
    out.insert(std::move(proj));
  }
  return out;
}

}  // namespace oracle
