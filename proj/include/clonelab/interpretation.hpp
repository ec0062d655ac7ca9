#pragma once

#include <map>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <vector>

#include "clonelab/budget.hpp"
#include "clonelab/errors.hpp"
#include "clonelab/formula.hpp"
#include "clonelab/ppdef.hpp"
#include "clonelab/solver.hpp"
#include "clonelab/structure.hpp"

namespace clonelab {

// A pp interpretation (d, S, h) of a target in a host. The domain formula has
// parameters x1..xd; the "=" formula x1..xd, y1..yd; a k-ary symbol
// x1..x(k*d), argument j occupying x((j-1)d+1)..x(jd).
struct Interpretation {
  std::size_t dimension = 1;
  Formula domain = Formula::conj();
  std::map<std::string, Formula> atoms;
  std::optional<std::map<Tuple, Element>> map;
};

inline std::vector<std::string> atom_parameters(const std::string& symbol, std::size_t arity, std::size_t d) {
  if (symbol == "=") {
    auto out = parameter_names(d, "x");
    for (auto& y : parameter_names(d, "y")) out.push_back(y);
    return out;
  }
  return parameter_names(arity * d, "x");
}

class NotInterpretable : public Error {
 public:
  NotInterpretable(std::string symbol, PPDefinability witness)
      : Error("the " + (symbol == "" ? std::string("domain") : "'" + symbol + "'") +
              " relation is not primitive positive definable in the host"),
        symbol_(std::move(symbol)),
        witness_(std::move(witness)) {}
  const std::string& symbol() const noexcept { return symbol_; }
  const PPDefinability& witness() const noexcept { return witness_; }

 private:
  std::string symbol_;
  PPDefinability witness_;
};

namespace detail {

inline void check_parameters(const Formula& f, const std::vector<std::string>& params, const std::string& what) {
  for (const auto& v : free_variables(f))
    if (std::find(params.begin(), params.end(), v) == params.end())
      throw ArityMismatch(what + " uses free variable '" + v + "' outside its " + std::to_string(params.size()) +
                          " parameters");
}

// Parameters of every formula are within range; "=" is present.
inline void validate(const Interpretation& in) {
  if (in.dimension == 0) throw ShapeError("interpretation dimension must be positive");
  check_parameters(in.domain, parameter_names(in.dimension), "domain formula");
  if (!in.atoms.count("=")) throw UnknownTargetRelation("interpretation has no defining formula for '='");
  check_parameters(in.atoms.at("="), atom_parameters("=", 2, in.dimension), "formula for '='");
}

// Parameters of the formula for a target symbol of known arity.
inline void validate_symbol(const Interpretation& in, const std::string& sym, std::size_t arity) {
  auto it = in.atoms.find(sym);
  if (it == in.atoms.end()) throw UnknownTargetRelation("interpretation has no defining formula for '" + sym + "'");
  check_parameters(it->second, atom_parameters(sym, arity, in.dimension), "formula for '" + sym + "'");
}

inline std::string formula_text(const std::vector<text::Line>& ls, std::size_t& i, std::size_t skip) {
  // Text after the first `skip` tokens, continued while parentheses are open.
  std::string raw = ls[i].raw;
  std::size_t pos = 0;
  for (std::size_t t = 0; t < skip; ++t) {
    while (pos < raw.size() && std::isspace(static_cast<unsigned char>(raw[pos]))) ++pos;
    while (pos < raw.size() && !std::isspace(static_cast<unsigned char>(raw[pos]))) ++pos;
  }
  std::string out = raw.substr(pos);
  auto depth = [](const std::string& s) {
    long d = 0;
    for (char c : s) d += c == '(' ? 1 : c == ')' ? -1 : 0;
    return d;
  };
  std::size_t start = ls[i].number;
  ++i;
  while (depth(out) > 0) {
    if (i >= ls.size()) throw ParseError(start, "unbalanced parentheses in formula");
    out += "\n" + ls[i].raw;
    ++i;
  }
  return out;
}

inline Formula parse_formula_at(const std::string& s, std::size_t line) {
  try {
    return parse_formula(s);
  } catch (const ParseError& e) {
    throw ParseError(line + e.line() - 1, e.reason());
  }
}

}  // namespace detail

// interpretation d=<d> / domain <f> / atom <SYM> <f> ... / map / <tuple> -> <e> / end
inline Interpretation parse_interpretation(std::string_view text) {
  auto ls = text::lines(text);
  if (ls.empty()) throw ParseError(1, "empty interpretation file");
  Interpretation in;
  const auto& head = ls[0];
  if (head.tokens.size() != 2 || head.tokens[0] != "interpretation" || head.tokens[1].rfind("d=", 0) != 0)
    throw ParseError(head.number, "expected 'interpretation d=<d>'");
  in.dimension = text::parse_uint(head.tokens[1].substr(2), head.number, "dimension");
  if (in.dimension == 0) throw ParseError(head.number, "dimension must be positive");
  std::size_t i = 1;
  bool ended = false, have_domain = false;
  while (i < ls.size()) {
    const auto& ln = ls[i];
    const auto& kw = ln.tokens[0];
    if (kw == "end" && ln.tokens.size() == 1) {
      ended = true;
      ++i;
      break;
    }
    if (kw == "domain") {
      if (have_domain) throw ParseError(ln.number, "duplicate domain formula");
      std::size_t line = ln.number;
      in.domain = detail::parse_formula_at(detail::formula_text(ls, i, 1), line);
      have_domain = true;
    } else if (kw == "atom") {
      if (ln.tokens.size() < 3) throw ParseError(ln.number, "expected 'atom <SYMBOL> <formula>'");
      std::string sym = ln.tokens[1];
      if (in.atoms.count(sym)) throw ParseError(ln.number, "duplicate atom '" + sym + "'");
      std::size_t line = ln.number;
      in.atoms.emplace(sym, detail::parse_formula_at(detail::formula_text(ls, i, 2), line));
    } else if (kw == "map" && ln.tokens.size() == 1) {
      if (in.map) throw ParseError(ln.number, "duplicate map block");
      in.map.emplace();
      ++i;
      for (; i < ls.size() && ls[i].tokens[0] != "end"; ++i) {
        const auto& row = ls[i];
        if (row.tokens.size() != in.dimension + 2 || row.tokens[in.dimension] != "->")
          throw ParseError(row.number, "expected '<" + std::to_string(in.dimension) + "-tuple> -> <element>'");
        Tuple key;
        for (std::size_t j = 0; j < in.dimension; ++j)
          key.push_back(static_cast<Element>(text::parse_uint(row.tokens[j], row.number, "host element")));
        auto val = static_cast<Element>(text::parse_uint(row.tokens.back(), row.number, "target element"));
        if (!in.map->emplace(key, val).second) throw ParseError(row.number, "duplicate map entry");
      }
    } else {
      throw ParseError(ln.number, "unexpected '" + kw + "'");
    }
  }
  if (!ended) throw ParseError(ls.back().number, "missing 'end'");
  if (i < ls.size()) throw ParseError(ls[i].number, "content after 'end'");
  if (!in.atoms.count("=")) throw ParseError(head.number, "missing 'atom =' line");
  return in;
}

inline std::string serialize(const Interpretation& in) {
  std::string out = "interpretation d=" + std::to_string(in.dimension) + "\n";
  out += "domain " + to_string(in.domain) + "\n";
  for (const auto& [sym, f] : in.atoms) out += "atom " + sym + " " + to_string(f) + "\n";
  if (in.map) {
    out += "map\n";
    for (const auto& [k, v] : *in.map) {
      for (Element e : k) out += std::to_string(e) + " ";
      out += "-> " + std::to_string(v) + "\n";
    }
  }
  return out + "end\n";
}

// δ(host^d) in lexicographic order.
inline std::vector<Tuple> domain_tuples(const FiniteStructure& host, const Interpretation& in) {
  detail::validate(in);
  auto r = defined_relation(host, in.domain, parameter_names(in.dimension));
  return {r.tuples.begin(), r.tuples.end()};
}

struct AtomCounterexample {
  std::string symbol;
  std::vector<Tuple> host_tuples;
  Tuple target_elements;
  bool target_holds = false;
  bool formula_holds = false;
};

struct InterpretationCheck {
  bool valid = true;
  std::string reason;  // map defects
  std::optional<AtomCounterexample> counterexample;
  explicit operator bool() const noexcept { return valid; }
};

// Exhaustive check of Δ |= R(h(a_1),...,h(a_k)) <=> Γ |= φ_R(a_1,...,a_k) for
// "=" and every target symbol, tuples of δ(Γ^d) in lexicographic order.
inline InterpretationCheck verify_interpretation(const FiniteStructure& host, const FiniteStructure& target,
                                                 const Interpretation& in) {
  detail::validate(in);
  if (!in.map) throw MissingMap("interpretation has no coordinate map");
  for (const auto& [sym, rel] : target.relations()) detail::validate_symbol(in, sym, rel.arity);
  const auto& h = *in.map;
  auto dom = domain_tuples(host, in);
  InterpretationCheck out;
  auto defect = [&](std::string why) {
    out.valid = false;
    out.reason = std::move(why);
    return out;
  };
  if (target.domain_size() > 0 && dom.empty()) return defect("domain formula defines the empty set");
  std::vector<Element> image;
  std::set<Element> hit;
  for (const auto& t : dom) {
    auto it = h.find(t);
    if (it == h.end()) return defect("coordinate map undefined on a domain tuple");
    if (it->second >= target.domain_size()) throw DomainError("coordinate map value outside target domain");
    image.push_back(it->second);
    hit.insert(it->second);
  }
  for (const auto& [k, v] : h)
    if (!std::binary_search(dom.begin(), dom.end(), k)) return defect("coordinate map defined outside the domain");
  if (hit.size() != target.domain_size()) return defect("coordinate map is not surjective");

  std::vector<std::pair<std::string, std::size_t>> symbols{{"=", 2}};
  for (const auto& [sym, rel] : target.relations()) symbols.emplace_back(sym, rel.arity);
  const std::size_t d = in.dimension;
  for (const auto& [sym, k] : symbols) {
    const Formula& f = in.atoms.at(sym);
    auto params = atom_parameters(sym, k, d);
    CompiledFormula cf(host, f);
    std::vector<std::size_t> slot;
    for (const auto& v : cf.free_names())
      slot.push_back(static_cast<std::size_t>(std::find(params.begin(), params.end(), v) - params.begin()));
    std::vector<std::size_t> idx(k, 0);
    Tuple flat(k * d), free_vals(slot.size()), elems(k);
    do {
      for (std::size_t j = 0; j < k; ++j) {
        elems[j] = image[idx[j]];
        for (std::size_t c = 0; c < d; ++c) flat[j * d + c] = dom[idx[j]][c];
      }
      bool want = sym == "=" ? elems[0] == elems[1] : target.relation(sym).contains(elems);
      for (std::size_t i = 0; i < slot.size(); ++i) free_vals[i] = flat[slot[i]];
      bool got = cf.holds(free_vals);
      if (want != got) {
        out.valid = false;
        AtomCounterexample c{sym, {}, elems, want, got};
        for (std::size_t j = 0; j < k; ++j) c.host_tuples.push_back(dom[idx[j]]);
        out.counterexample = std::move(c);
        return out;
      }
    } while (next_index(idx, dom.size()));
  }
  return out;
}

// Interpretation from explicit data: δ defines S, "=" the kernel of h, and
// each symbol the h-preimage of its relation. Checked before return.
inline Interpretation build_interpretation(const FiniteStructure& host, const FiniteStructure& target, std::size_t d,
                                           const std::set<Tuple>& S, const std::map<Tuple, Element>& h,
                                           const Budget& budget = {}) {
  if (d == 0) throw ShapeError("interpretation dimension must be positive");
  std::set<Element> hit;
  for (const auto& t : S) {
    if (t.size() != d) throw ShapeError("domain tuple of wrong length");
    auto it = h.find(t);
    if (it == h.end()) throw MissingMap("coordinate map undefined on a domain tuple");
    if (it->second >= target.domain_size()) throw DomainError("coordinate map value outside target domain");
    hit.insert(it->second);
  }
  if (hit.size() != target.domain_size()) throw DomainError("coordinate map is not surjective");
  std::vector<Tuple> dom(S.begin(), S.end());

  auto define = [&](const std::string& sym, const Relation& r) {
    auto res = is_pp_definable(host, r, budget);
    if (!res) throw NotInterpretable(sym, std::move(res));
    return construct_pp_definition(host, r, budget);
  };
  auto preimage = [&](std::size_t k, auto&& pred) {
    Relation r{k * d, {}};
    std::vector<std::size_t> idx(k, 0);
    Tuple elems(k);
    if (dom.empty()) return r;
    do {
      Tuple flat;
      for (std::size_t j = 0; j < k; ++j) {
        elems[j] = h.at(dom[idx[j]]);
        flat.insert(flat.end(), dom[idx[j]].begin(), dom[idx[j]].end());
      }
      if (pred(elems)) r.tuples.insert(std::move(flat));
    } while (next_index(idx, dom.size()));
    return r;
  };

  Interpretation in;
  in.dimension = d;
  in.domain = define("", Relation{d, S});
  auto eq = define("=", preimage(2, [](const Tuple& e) { return e[0] == e[1]; }));
  std::map<std::string, std::string> rename;
  for (std::size_t c = 1; c <= d; ++c) rename["x" + std::to_string(d + c)] = "y" + std::to_string(c);
  FreshNames fresh;
  in.atoms.emplace("=", substitute(eq, rename, fresh));
  for (const auto& [sym, rel] : target.relations())
    in.atoms.emplace(sym, define(sym, preimage(rel.arity, [&](const Tuple& e) { return rel.contains(e); })));
  in.map = h;
  auto check = verify_interpretation(host, target, in);
  if (!check) throw Error("internal: built interpretation failed verification");
  return in;
}

namespace detail {

inline std::vector<std::string> coordinates(const std::string& v, std::size_t d) {
  std::vector<std::string> out;
  for (std::size_t i = 1; i <= d; ++i) out.push_back(v + "@" + std::to_string(i));
  return out;
}

inline Formula domain_instance(const Interpretation& in, const std::string& v, FreshNames& fresh) {
  std::map<std::string, std::string> sub;
  auto params = parameter_names(in.dimension);
  auto coords = coordinates(v, in.dimension);
  for (std::size_t i = 0; i < params.size(); ++i) sub[params[i]] = coords[i];
  return substitute(in.domain, sub, fresh);
}

inline Formula translate(const Interpretation& in, const Formula& f, FreshNames& fresh) {
  const std::size_t d = in.dimension;
  switch (f.kind) {
    case Formula::Kind::Rel:
    case Formula::Kind::Eq: {
      std::string sym = f.kind == Formula::Kind::Eq ? "=" : f.symbol;
      auto it = in.atoms.find(sym);
      if (it == in.atoms.end()) throw UnknownTargetRelation("no defining formula for '" + sym + "'");
      auto params = atom_parameters(sym, f.vars.size(), d);
      std::map<std::string, std::string> sub;
      for (std::size_t j = 0; j < f.vars.size(); ++j) {
        auto coords = coordinates(f.vars[j], d);
        for (std::size_t c = 0; c < d; ++c) sub[params[j * d + c]] = coords[c];
      }
      return substitute(it->second, sub, fresh);
    }
    case Formula::Kind::And: {
      std::vector<Formula> parts;
      for (const auto& c : f.children) parts.push_back(translate(in, c, fresh));
      return Formula::conj(std::move(parts));
    }
    case Formula::Kind::Exists: {
      std::vector<std::string> bound;
      std::vector<Formula> parts;
      for (const auto& v : f.vars) {
        for (auto& c : coordinates(v, d)) bound.push_back(c);
        parts.push_back(domain_instance(in, v, fresh));
      }
      parts.push_back(translate(in, f.body(), fresh));
      return Formula::exists(std::move(bound), Formula::conj(std::move(parts)));
    }
  }
  return f;
}

}  // namespace detail

// Each variable x of φ becomes x@1..x@d restricted by δ; atoms become
// instances of their defining formulas. Structure of φ is preserved.
inline Formula translate_sentence(const Interpretation& in, const Formula& phi) {
  detail::validate(in);
  FreshNames fresh;
  Formula body = detail::translate(in, phi, fresh);
  auto free = free_variables(phi);
  if (free.empty()) return body;
  std::vector<Formula> parts;
  for (const auto& v : free) parts.push_back(detail::domain_instance(in, v, fresh));
  parts.push_back(std::move(body));
  return Formula::conj(std::move(parts));
}

struct BiInterpretationFailure {
  std::string which;  // "R_IJ" or "R_JI"
  PPDefinability witness;
};

struct BiInterpretationResult {
  bool bi_interpretable = true;
  Relation r_ij, r_ji;
  std::optional<Formula> formula_ij, formula_ji;
  std::vector<BiInterpretationFailure> failures;
  std::vector<std::string> notes;
};

namespace detail {

// {(h_outer(h_inner(y_1),...,h_inner(y_d_outer)), y_1, ..., y_d_outer)}
// over the inner host, ordered x-first.
inline Relation composite_relation(const std::map<Tuple, Element>& outer, std::size_t d_outer,
                                   const std::map<Tuple, Element>& inner, std::size_t d_inner) {
  Relation r{1 + d_outer * d_inner, {}};
  std::vector<const std::pair<const Tuple, Element>*> entries;
  for (const auto& e : inner) entries.push_back(&e);
  if (entries.empty()) return r;
  std::vector<std::size_t> idx(d_outer, 0);
  do {
    Tuple mid(d_outer);
    for (std::size_t j = 0; j < d_outer; ++j) mid[j] = entries[idx[j]]->second;
    auto it = outer.find(mid);
    if (it == outer.end()) continue;
    Tuple t{it->second};
    for (std::size_t j = 0; j < d_outer; ++j) t.insert(t.end(), entries[idx[j]]->first.begin(), entries[idx[j]]->first.end());
    r.tuples.insert(std::move(t));
  } while (next_index(idx, entries.size()));
  return r;
}

}  // namespace detail

// i interprets Δ in Γ and j interprets Γ in Δ. R_IJ lives over Δ, R_JI over
// Γ. Optional candidate formulas are model-checked first; ppdef decides the
// rest.
inline BiInterpretationResult check_bi_interpretation(const FiniteStructure& gamma, const FiniteStructure& delta,
                                                      const Interpretation& i, const Interpretation& j,
                                                      const std::optional<Formula>& hint_ij = std::nullopt,
                                                      const std::optional<Formula>& hint_ji = std::nullopt,
                                                      const Budget& budget = {}) {
  auto ci = verify_interpretation(gamma, delta, i);
  if (!ci) throw Error("interpretation I of " + delta.name() + " in " + gamma.name() + " is not valid");
  auto cj = verify_interpretation(delta, gamma, j);
  if (!cj) throw Error("interpretation J of " + gamma.name() + " in " + delta.name() + " is not valid");
  BiInterpretationResult res;
  res.r_ij = detail::composite_relation(*i.map, i.dimension, *j.map, j.dimension);
  res.r_ji = detail::composite_relation(*j.map, j.dimension, *i.map, i.dimension);
  auto decide = [&](const FiniteStructure& s, const Relation& r, const std::optional<Formula>& hint,
                    const std::string& which, std::optional<Formula>& formula) {
    auto params = parameter_names(r.arity);
    if (hint) {
      if (defined_relation(s, *hint, params) == r) {
        formula = *hint;
        return;
      }
      res.notes.push_back("candidate formula for " + which + " does not define it");
    }
    auto d = is_pp_definable(s, r, budget);
    if (d) {
      formula = construct_pp_definition(s, r, budget);
    } else {
      res.bi_interpretable = false;
      res.failures.push_back({which, std::move(d)});
    }
  };
  decide(delta, res.r_ij, hint_ij, "R_IJ", res.formula_ij);
  decide(gamma, res.r_ji, hint_ji, "R_JI", res.formula_ji);
  return res;
}

}  // namespace clonelab
