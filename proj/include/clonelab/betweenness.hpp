#pragma once

#include <algorithm>
#include <array>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "clonelab/errors.hpp"
#include "clonelab/expression.hpp"
#include "clonelab/rational.hpp"
#include "clonelab/text.hpp"

namespace clonelab {

inline bool betw(const Rational& x, const Rational& y, const Rational& z) {
  return (x < y && y < z) || (z < y && y < x);
}

// ---------------------------------------------------------------------------
// CSP(Q; Betw)

struct BetwInstance {
  std::vector<std::string> vars;
  std::vector<std::array<std::size_t, 3>> constraints;

  std::size_t index(const std::string& v) const {
    auto it = std::find(vars.begin(), vars.end(), v);
    if (it == vars.end()) throw UndeclaredVariable("variable '" + v + "' is not declared");
    return static_cast<std::size_t>(it - vars.begin());
  }

  void add(const std::string& a, const std::string& b, const std::string& c) {
    constraints.push_back({index(a), index(b), index(c)});
  }
};

inline BetwInstance parse_betw_instance(std::string_view src) {
  BetwInstance inst;
  bool declared = false;
  for (const auto& ln : text::lines(src)) {
    const auto& t = ln.tokens;
    if (t[0] == "vars") {
      if (declared) throw ParseError(ln.number, "duplicate 'vars' line");
      declared = true;
      for (std::size_t i = 1; i < t.size(); ++i) {
        if (!text::is_identifier(t[i])) throw ParseError(ln.number, "invalid variable name '" + t[i] + "'");
        if (std::find(inst.vars.begin(), inst.vars.end(), t[i]) != inst.vars.end())
          throw ParseError(ln.number, "variable '" + t[i] + "' declared twice");
        inst.vars.push_back(t[i]);
      }
    } else if (t[0] == "betw") {
      if (!declared) throw ParseError(ln.number, "'betw' before 'vars'");
      if (t.size() != 4) throw ParseError(ln.number, "'betw' takes exactly three variables");
      inst.add(t[1], t[2], t[3]);
    } else {
      throw ParseError(ln.number, "expected 'vars' or 'betw', got '" + t[0] + "'");
    }
  }
  if (!declared) throw ParseError(0, "missing 'vars' line");
  return inst;
}

inline std::string serialize(const BetwInstance& inst) {
  std::string out = "vars";
  for (const auto& v : inst.vars) out += " " + v;
  out += "\n";
  for (const auto& c : inst.constraints)
    out += "betw " + inst.vars[c[0]] + " " + inst.vars[c[1]] + " " + inst.vars[c[2]] + "\n";
  return out;
}

struct BetwSolution {
  bool sat = false;
  // Variable indices from smallest to largest.
  std::vector<std::size_t> order;

  explicit operator bool() const noexcept { return sat; }
};

// Position of each variable in `order`; checks every constraint.
inline bool verify_order(const BetwInstance& inst, const std::vector<std::size_t>& order) {
  if (order.size() != inst.vars.size()) return false;
  std::vector<std::size_t> pos(order.size(), order.size());
  for (std::size_t i = 0; i < order.size(); ++i) {
    if (order[i] >= order.size() || pos[order[i]] != order.size()) return false;
    pos[order[i]] = i;
  }
  for (const auto& c : inst.constraints) {
    auto a = pos[c[0]], b = pos[c[1]], d = pos[c[2]];
    if (!((a < b && b < d) || (d < b && b < a))) return false;
  }
  return true;
}

// Inserts variables in declaration order into a growing chain, trying the
// slots from the top down. Insertion keeps the relative order of placed
// variables, so a constraint is checked once its last variable is placed.
inline BetwSolution solve_betweenness(const BetwInstance& inst) {
  const std::size_t n = inst.vars.size();
  for (const auto& c : inst.constraints)
    for (auto v : c)
      if (v >= n) throw UndeclaredVariable("constraint refers to variable #" + std::to_string(v));
  std::vector<std::vector<std::array<std::size_t, 3>>> closes(n);
  for (const auto& c : inst.constraints) {
    if (c[0] == c[1] || c[1] == c[2] || c[0] == c[2]) return {};
    closes[std::max({c[0], c[1], c[2]})].push_back(c);
  }
  std::vector<std::size_t> chain;
  auto holds = [&](const std::array<std::size_t, 3>& c) {
    std::size_t p[3];
    for (int i = 0; i < 3; ++i) p[i] = static_cast<std::size_t>(std::find(chain.begin(), chain.end(), c[i]) - chain.begin());
    return (p[0] < p[1] && p[1] < p[2]) || (p[2] < p[1] && p[1] < p[0]);
  };
  auto rec = [&](auto&& self, std::size_t v) -> bool {
    if (v == n) return true;
    for (std::size_t slot = chain.size() + 1; slot-- > 0;) {
      chain.insert(chain.begin() + static_cast<long>(slot), v);
      bool ok = std::all_of(closes[v].begin(), closes[v].end(), holds);
      if (ok && self(self, v + 1)) return true;
      chain.erase(chain.begin() + static_cast<long>(slot));
    }
    return false;
  };
  if (!rec(rec, 0)) return {};
  return {true, chain};
}

// ---------------------------------------------------------------------------
// Finite observations of a function on Q^k

struct SampleRow {
  std::vector<Rational> x;
  Rational value;
};

class FunctionSample {
 public:
  explicit FunctionSample(std::size_t k) : k_(k) {}

  std::size_t arity() const noexcept { return k_; }
  const std::vector<SampleRow>& rows() const noexcept { return rows_; }
  std::size_t size() const noexcept { return rows_.size(); }
  const SampleRow& operator[](std::size_t i) const { return rows_[i]; }

  // Identical rows may repeat; the same x with another value may not.
  void add(std::vector<Rational> x, Rational v) {
    if (x.size() != k_) throw ShapeError("sample row has " + std::to_string(x.size()) + " arguments, expected " +
                                         std::to_string(k_));
    for (const auto& r : rows_)
      if (r.x == x && r.value != v) throw DomainError("sample is not functional at " + format(x));
    rows_.push_back({std::move(x), std::move(v)});
  }

  static std::string format(const std::vector<Rational>& x) {
    std::string out = "(";
    for (std::size_t i = 0; i < x.size(); ++i) out += (i ? "," : "") + to_string(x[i]);
    return out + ")";
  }

 private:
  std::size_t k_;
  std::vector<SampleRow> rows_;
};

inline FunctionSample parse_sample(std::string_view src) {
  std::optional<FunctionSample> fs;
  for (const auto& ln : text::lines(src)) {
    const auto& t = ln.tokens;
    if (!fs) {
      if (t[0] != "arity" || t.size() != 2) throw ParseError(ln.number, "expected 'arity <k>'");
      fs.emplace(static_cast<std::size_t>(text::parse_uint(t[1], ln.number, "arity")));
      continue;
    }
    if (t.size() != fs->arity() + 2 || t[fs->arity()] != "->")
      throw ParseError(ln.number, "expected " + std::to_string(fs->arity()) + " arguments, '->' and a value");
    std::vector<Rational> x;
    try {
      for (std::size_t i = 0; i < fs->arity(); ++i) x.push_back(parse_rational(t[i]));
      fs->add(std::move(x), parse_rational(t.back()));
    } catch (const ParseError& e) {
      throw ParseError(ln.number, e.reason());
    } catch (const DomainError& e) {
      throw ParseError(ln.number, e.what());
    }
  }
  if (!fs) throw ParseError(0, "missing 'arity' line");
  return *fs;
}

inline std::string serialize(const FunctionSample& fs) {
  std::string out = "arity " + std::to_string(fs.arity()) + "\n";
  for (const auto& r : fs.rows()) {
    for (const auto& q : r.x) out += to_string(q) + " ";
    out += "-> " + to_string(r.value) + "\n";
  }
  return out;
}

inline FunctionSample sample_function(const Expr& f, std::size_t k, const std::vector<std::vector<Rational>>& points) {
  FunctionSample fs(k);
  for (const auto& p : points) fs.add(p, eval(f, p));
  return fs;
}

// All points of {lo..hi}^k in lexicographic order.
inline std::vector<std::vector<Rational>> grid_points(std::size_t k, long lo, long hi) {
  std::vector<std::vector<Rational>> out;
  std::vector<long> p(k, lo);
  while (true) {
    std::vector<Rational> q;
    for (long v : p) q.emplace_back(v);
    out.push_back(std::move(q));
    std::size_t i = k;
    while (i > 0 && ++p[i - 1] > hi) p[--i] = lo;
    if (i == 0) break;
  }
  return out;
}

// ≠(x,y): the tuples differ in every coordinate.
inline bool all_distinct(const std::vector<Rational>& x, const std::vector<Rational>& y) {
  for (std::size_t i = 0; i < x.size(); ++i)
    if (x[i] == y[i]) return false;
  return true;
}

struct PartialPolymorphismCheck {
  bool consistent = true;
  std::array<std::size_t, 3> rows{};  // on violation, in argument order

  explicit operator bool() const noexcept { return consistent; }
};

// First ordered triple of distinct rows whose argument columns are all Betw
// and whose value column is not.
inline PartialPolymorphismCheck check_partial_polymorphism(const FunctionSample& fs) {
  const auto& r = fs.rows();
  const std::size_t m = r.size();
  for (std::size_t a = 0; a < m; ++a)
    for (std::size_t b = 0; b < m; ++b) {
      if (b == a) continue;
      for (std::size_t c = 0; c < m; ++c) {
        if (c == a || c == b) continue;
        bool cols = true;
        for (std::size_t i = 0; i < fs.arity() && cols; ++i) cols = betw(r[a].x[i], r[b].x[i], r[c].x[i]);
        if (cols && !betw(r[a].value, r[b].value, r[c].value)) return {false, {a, b, c}};
      }
    }
  return {};
}

// ---------------------------------------------------------------------------
// Classification: the dominant coordinate d and its direction

struct Candidate {
  std::size_t d = 1;  // 1-based
  bool increasing = true;

  auto operator<=>(const Candidate&) const = default;
};

inline std::string to_string(const Candidate& c) {
  return "d=" + std::to_string(c.d) + " " + (c.increasing ? "increasing" : "decreasing");
}

struct Classification {
  enum class Kind { Classified, Ambiguous, Unclassifiable };
  Kind kind = Kind::Ambiguous;
  Candidate candidate;                  // when Classified
  std::vector<Candidate> survivors;     // consistent candidates, ascending
  // For each rejected candidate: the first row pair (x, y) in row order with
  // ≠(x,y), x_d < y_d and the value order not matching the direction.
  std::map<Candidate, std::pair<std::size_t, std::size_t>> violations;
};

inline const char* kind_name(Classification::Kind k) {
  switch (k) {
    case Classification::Kind::Classified: return "classified";
    case Classification::Kind::Ambiguous: return "ambiguous";
    case Classification::Kind::Unclassifiable: return "unclassifiable";
  }
  return "";
}

inline Classification classify(const FunctionSample& fs) {
  const auto& r = fs.rows();
  Classification out;
  for (std::size_t d = 1; d <= fs.arity(); ++d)
    for (bool inc : {true, false}) {
      Candidate c{d, inc};
      bool ok = true;
      for (std::size_t a = 0; a < r.size() && ok; ++a)
        for (std::size_t b = 0; b < r.size() && ok; ++b) {
          if (!(r[a].x[d - 1] < r[b].x[d - 1]) || !all_distinct(r[a].x, r[b].x)) continue;
          bool good = inc ? r[a].value < r[b].value : r[a].value > r[b].value;
          if (!good) {
            out.violations[c] = {a, b};
            ok = false;
          }
        }
      if (ok) out.survivors.push_back(c);
    }
  std::sort(out.survivors.begin(), out.survivors.end());
  if (out.survivors.size() == 1) {
    out.kind = Classification::Kind::Classified;
    out.candidate = out.survivors[0];
  } else {
    out.kind = out.survivors.empty() ? Classification::Kind::Unclassifiable : Classification::Kind::Ambiguous;
  }
  return out;
}

// ---------------------------------------------------------------------------
// The sign-pattern observation

struct ObservationCheck {
  bool holds = true;
  std::array<std::size_t, 4> rows{};  // a, a', b, b'

  explicit operator bool() const noexcept { return holds; }
};

inline bool same_pattern(const std::vector<Rational>& a, const std::vector<Rational>& a2, const std::vector<Rational>& b,
                         const std::vector<Rational>& b2) {
  for (std::size_t i = 0; i < a.size(); ++i)
    if ((a[i] < a2[i]) != (b[i] < b2[i])) return false;
  return true;
}

inline ObservationCheck check_observation(const FunctionSample& fs) {
  const auto& r = fs.rows();
  const std::size_t m = r.size();
  for (std::size_t a = 0; a < m; ++a)
    for (std::size_t a2 = 0; a2 < m; ++a2) {
      if (!all_distinct(r[a].x, r[a2].x)) continue;
      bool lt = r[a].value < r[a2].value;
      for (std::size_t b = 0; b < m; ++b)
        for (std::size_t b2 = 0; b2 < m; ++b2) {
          if (!all_distinct(r[b].x, r[b2].x) || !same_pattern(r[a].x, r[a2].x, r[b].x, r[b2].x)) continue;
          if ((r[b].value < r[b2].value) != lt) return {false, {a, a2, b, b2}};
        }
    }
  return {};
}

// ---------------------------------------------------------------------------
// The falsifier: from clause-(1) failures at every d to a Betw violation

using Point = std::vector<Rational>;

struct WitnessPair {
  Point x, y;
};

struct FalsifierStep {
  std::size_t d = 0;  // coordinate whose witness is used
  WitnessPair witness;
  Point t;
  Point next;  // c^{j+1}
};

struct BetwViolation {
  std::array<Point, 3> args;
  std::array<Rational, 3> values;
};

struct FalsifierTrace {
  enum class Kind { Violation, PreconditionFailed, NotApplicable };
  Kind kind = Kind::NotApplicable;
  int sign = 1;  // +1 runs on f, -1 on -f
  std::vector<Point> c;
  std::vector<FalsifierStep> steps;
  // Where the argument broke down: "step j: ..." or "final: ...".
  std::string stage;
  std::optional<BetwViolation> violation;
  std::string reason;  // for NotApplicable
};

inline const char* kind_name(FalsifierTrace::Kind k) {
  switch (k) {
    case FalsifierTrace::Kind::Violation: return "violation";
    case FalsifierTrace::Kind::PreconditionFailed: return "precondition-failed";
    case FalsifierTrace::Kind::NotApplicable: return "not-applicable";
  }
  return "";
}

// Three argument tuples with Betw columns must give Betw values.
inline bool verify_violation(const Expr& f, const BetwViolation& v) {
  FunctionSample fs(v.args[0].size());
  for (std::size_t i = 0; i < 3; ++i) {
    if (eval(f, v.args[i]) != v.values[i]) return false;
    try {
      fs.add(v.args[i], v.values[i]);
    } catch (const Error&) {
      return false;
    }
  }
  if (fs.arity() == 0) return !betw(v.values[0], v.values[1], v.values[2]);
  return !check_partial_polymorphism(fs);
}

namespace detail {

// g(a) < g(a') while g(b) >= g(b'), with (a,a') and (b,b') of equal sign
// pattern. Outer points c (before a) and e (past a') are chosen beyond all
// four tuples; one of the four triples below must break Betw.
inline BetwViolation observation_violation(const Expr& f, const Point& a, const Point& a2, const Point& b,
                                           const Point& b2) {
  const std::size_t k = a.size();
  Point c(k), e(k);
  for (std::size_t i = 0; i < k; ++i) {
    Rational lo = std::min({a[i], a2[i], b[i], b2[i]}), hi = std::max({a[i], a2[i], b[i], b2[i]});
    c[i] = a[i] < a2[i] ? lo - 1 : hi + 1;
    e[i] = a[i] < a2[i] ? hi + 1 : lo - 1;
  }
  const std::array<std::array<const Point*, 3>, 4> triples{{{&c, &a, &a2}, {&a, &a2, &e}, {&c, &b, &b2}, {&b, &b2, &e}}};
  for (const auto& tr : triples) {
    BetwViolation v;
    for (int i = 0; i < 3; ++i) {
      v.args[i] = *tr[i];
      v.values[i] = eval(f, *tr[i]);
    }
    if (!betw(v.values[0], v.values[1], v.values[2])) return v;
  }
  throw Error("internal: observation argument produced no Betw violation");
}

}  // namespace detail

// Witnesses are indexed by d-1; each must satisfy ≠(x,y), x_d < y_d and
// g(x) >= g(y), where g = f if f(0..0) < f(1..1) and g = -f otherwise.
inline FalsifierTrace run_falsifier(const Expr& f, std::size_t k, const std::vector<std::optional<WitnessPair>>& witnesses) {
  FalsifierTrace tr;
  const Point zero(k, Rational(0)), one(k, Rational(1)), two(k, Rational(2));
  Rational f0 = eval(f, zero), f1 = eval(f, one);
  if (f0 == f1) {
    tr.kind = FalsifierTrace::Kind::PreconditionFailed;
    tr.stage = "diagonal: f(0,...,0) = f(1,...,1)";
    tr.violation = BetwViolation{{zero, one, two}, {f0, f1, eval(f, two)}};
    return tr;
  }
  tr.sign = f0 < f1 ? 1 : -1;
  auto g = [&](const Point& p) { return tr.sign * eval(f, p); };
  for (std::size_t d = 1; d <= k; ++d) {
    const auto& w = d - 1 < witnesses.size() ? witnesses[d - 1] : std::nullopt;
    if (!w) {
      tr.reason = "no witness for d=" + std::to_string(d);
      return tr;
    }
    if (w->x.size() != k || w->y.size() != k || !all_distinct(w->x, w->y) || !(w->x[d - 1] < w->y[d - 1]) ||
        g(w->x) < g(w->y)) {
      tr.reason = "witness for d=" + std::to_string(d) + " does not violate the clause";
      return tr;
    }
  }
  auto found = [&](std::string stage, const Point& a, const Point& a2, const Point& b, const Point& b2) {
    tr.kind = FalsifierTrace::Kind::Violation;
    tr.stage = std::move(stage);
    tr.violation = detail::observation_violation(f, a, a2, b, b2);
    return tr;
  };
  tr.c.push_back(zero);
  for (std::size_t j = 0; j < k; ++j) {
    const Point& cj = tr.c.back();
    FalsifierStep st;
    st.d = j + 1;
    st.witness = *witnesses[j];
    st.t.resize(k);
    st.next.resize(k);
    for (std::size_t i = 0; i < k; ++i) {
      st.t[i] = st.witness.x[i] < st.witness.y[i] ? cj[i] + 1 : cj[i] - 1;
      st.next[i] = st.t[i] > cj[i] ? cj[i] + static_cast<long>(k) : cj[i] - 1;
    }
    tr.steps.push_back(st);
    std::string at = "step " + std::to_string(j);
    // (c^j, t) has the pattern of (x, y), and g(x) >= g(y).
    if (g(cj) < g(st.t)) return found(at + ": f(c^j) < f(t)", cj, st.t, st.witness.x, st.witness.y);
    // (c^j, c^{j+1}) has the pattern of (c^j, t).
    if (g(cj) < g(st.next)) return found(at + ": f(c^j) < f(c^{j+1})", cj, st.next, cj, st.t);
    tr.c.push_back(st.next);
  }
  // c^0 < c^k coordinatewise, as 0 < 1, but g(c^0) >= g(c^k).
  return found("final: f(c^0) >= f(c^k)", zero, one, tr.c.front(), tr.c.back());
}

// Picks witnesses from a classification of a sample of f: for each d, the
// recorded violation of the clause matching the sign of f(1..1) - f(0..0).
inline std::vector<std::optional<WitnessPair>> falsifier_witnesses(const Expr& f, std::size_t k,
                                                                   const FunctionSample& fs,
                                                                   const Classification& cls) {
  const Point zero(k, Rational(0)), one(k, Rational(1));
  bool inc = eval(f, zero) <= eval(f, one);
  std::vector<std::optional<WitnessPair>> out(k);
  for (std::size_t d = 1; d <= k; ++d) {
    auto it = cls.violations.find(Candidate{d, inc});
    if (it != cls.violations.end()) out[d - 1] = WitnessPair{fs[it->second.first].x, fs[it->second.second].x};
  }
  return out;
}

}  // namespace clonelab
