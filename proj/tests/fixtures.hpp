#pragma once

// Shared instances for the unit and acceptance suites.

#include <random>
#include <set>
#include <string>

#include "clonelab/interpretation.hpp"
#include "oracles.hpp"

namespace fixtures {

using namespace clonelab;

inline FiniteStructure oit() {
  FiniteStructure s("OIT", 2);
  s.add_relation("OIT", 3, {{0, 0, 1}, {0, 1, 0}, {1, 0, 0}});
  return s;
}

inline FiniteStructure neq(Element n) {
  FiniteStructure s("K" + std::to_string(n), n);
  Relation r{2, {}};
  for (Element a = 0; a < n; ++a)
    for (Element b = 0; b < n; ++b)
      if (a != b) r.tuples.insert({a, b});
  s.add_relation("NEQ", r);
  return s;
}

inline Interpretation identity_interpretation(const FiniteStructure& s) {
  Interpretation in;
  in.atoms.emplace("=", Formula::eq("x1", "y1"));
  for (const auto& [sym, rel] : s.relations()) in.atoms.emplace(sym, Formula::rel(sym, parameter_names(rel.arity)));
  in.map.emplace();
  for (Element a = 0; a < s.domain_size(); ++a) (*in.map)[{a}] = a;
  return in;
}

// Finite fragment of the pair structure: domain {0..n-1}^2, pair (a,b)
// encoded as a*n+b, M((u1,u2),(v1,v2)) iff u2 = v1.
namespace fragments {

inline FiniteStructure gamma(Element n) {
  FiniteStructure s("Gamma" + std::to_string(n), n * n);
  Relation m{2, {}};
  for (Element u = 0; u < n * n; ++u)
    for (Element v = 0; v < n * n; ++v)
      if (u % n == v / n) m.tuples.insert({u, v});
  s.add_relation("M", m);
  return s;
}

// The pure set {0..n-1}; equality is the only atom.
inline FiniteStructure delta(Element n) { return FiniteStructure("Delta" + std::to_string(n), n); }

// Gamma in Delta: pairs with the identity coordinate map.
inline Interpretation gamma_in_delta(Element n) {
  Interpretation in;
  in.dimension = 2;
  in.atoms.emplace("=", parse_formula("(and (= x1 y1) (= x2 y2))"));
  in.atoms.emplace("M", parse_formula("(= x2 x3)"));
  in.map.emplace();
  for (Element a = 0; a < n; ++a)
    for (Element b = 0; b < n; ++b) (*in.map)[{a, b}] = a * n + b;
  return in;
}

// Delta in Gamma: a pair maps to its first coordinate.
inline Interpretation delta_in_gamma(Element n) {
  Interpretation in;
  in.atoms.emplace("=", parse_formula("(exists (p) (and (rel M p x1) (rel M p y1)))"));
  in.map.emplace();
  for (Element u = 0; u < n * n; ++u) (*in.map)[{u}] = u / n;
  return in;
}

inline const char* kLiteral = "(and (rel M x1 x3) (exists (p) (and (rel M x2 p) (rel M x1 p))))";
inline const char* kCorrected = "(and (rel M x1 x3) (exists (p) (and (rel M p x2) (rel M p x1))))";

// Gamma expanded by C(w,u,v) iff w = (u1, v1), the composite of the two
// coordinate maps, ordered with w first.
inline FiniteStructure composite_target(Element n) {
  FiniteStructure s = gamma(n);
  Relation c{3, {}};
  for (Element u = 0; u < n * n; ++u)
    for (Element v = 0; v < n * n; ++v) c.tuples.insert({(u / n) * n + v / n, u, v});
  s.add_relation("C", c);
  return s;
}

inline Interpretation composite_interpretation(Element n, const char* formula) {
  Interpretation in = identity_interpretation(gamma(n));
  in.atoms.emplace("C", parse_formula(formula));
  return in;
}

}  // namespace fragments

struct RandomInterpretation {
  FiniteStructure host, target;
  Interpretation interp;
};

// A valid interpretation by construction. "=" identifies tuples agreeing on a
// random set of coordinates; every target relation is the image of a formula
// closed under that kernel, so the defining equivalence holds exactly.
inline RandomInterpretation random_interpretation(std::mt19937& rng) {
  std::size_t d = rng() % 3 == 0 ? 2 : 1;
  FiniteStructure host = oracle::random_structure(rng, d == 2 ? 2 : 4, 2, 2);
  while (d == 2 && host.domain_size() != 2) host = oracle::random_structure(rng, 2, 2, 2);
  std::vector<std::string> syms;
  for (const auto& [sym, rel] : host.relations()) syms.push_back(sym);
  auto xs = parameter_names(d);
  auto pick = [&](std::size_t n) { return static_cast<std::size_t>(rng() % n); };
  auto random_atom = [&](const std::vector<std::string>& vars) {
    const auto& sym = syms[pick(syms.size())];
    std::vector<std::string> args;
    for (std::size_t j = 0; j < host.relation(sym).arity; ++j) args.push_back(vars[pick(vars.size())]);
    return Formula::rel(sym, args);
  };

  Interpretation in;
  in.dimension = d;
  if (rng() % 2) {
    in.domain = random_atom(xs);
    if (defined_relation(host, in.domain, xs).tuples.empty()) in.domain = Formula::conj();
  }
  std::vector<std::size_t> kept;
  for (std::size_t c = 0; c < d; ++c)
    if (rng() % 3 != 0) kept.push_back(c);
  if (kept.empty()) kept.push_back(pick(d));
  std::vector<Formula> eqs;
  for (auto c : kept) eqs.push_back(Formula::eq("x" + std::to_string(c + 1), "y" + std::to_string(c + 1)));
  in.atoms.emplace("=", Formula::conj(eqs));

  auto dom = defined_relation(host, in.domain, xs).tuples;
  std::map<Tuple, Element> cls;
  in.map.emplace();
  for (const auto& t : dom) {
    Tuple key;
    for (auto c : kept) key.push_back(t[c]);
    auto [it, fresh] = cls.emplace(key, static_cast<Element>(cls.size()));
    (*in.map)[t] = it->second;
  }
  FiniteStructure target("T", static_cast<Element>(cls.size()));

  FreshNames fresh;
  std::size_t rels = 1 + pick(2);
  for (std::size_t r = 0; r < rels; ++r) {
    std::size_t k = 1 + pick(2);
    auto params = parameter_names(k * d);
    std::vector<std::string> zs;
    for (std::size_t i = 1; i <= k * d; ++i) zs.push_back("z" + std::to_string(i));
    std::vector<Formula> parts;
    std::size_t atoms = pick(3);
    for (std::size_t a = 0; a < atoms; ++a)
      parts.push_back(rng() % 4 == 0 ? Formula::eq(zs[pick(zs.size())], zs[pick(zs.size())]) : random_atom(zs));
    for (std::size_t j = 0; j < k; ++j) {
      std::map<std::string, std::string> sub;
      for (std::size_t c = 0; c < d; ++c) sub["x" + std::to_string(c + 1)] = zs[j * d + c];
      parts.push_back(substitute(in.domain, sub, fresh));
      for (auto c : kept) parts.push_back(Formula::eq(zs[j * d + c], params[j * d + c]));
    }
    Formula psi = Formula::exists(zs, Formula::conj(parts));
    std::string sym = "T" + std::to_string(r);
    Relation image{k, {}};
    for (const auto& t : defined_relation(host, psi, params).tuples) {
      Tuple img;
      bool inside = true;
      for (std::size_t j = 0; j < k && inside; ++j) {
        Tuple a(t.begin() + static_cast<long>(j * d), t.begin() + static_cast<long>((j + 1) * d));
        auto it = in.map->find(a);
        if (it == in.map->end()) inside = false;
        else img.push_back(it->second);
      }
      if (inside) image.tuples.insert(img);
    }
    target.add_relation(sym, image);
    in.atoms.emplace(sym, psi);
  }
  return {std::move(host), std::move(target), std::move(in)};
}

}  // namespace fixtures
