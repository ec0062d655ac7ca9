#pragma once

#include <optional>
#include <set>
#include <string>
#include <vector>

#include "clonelab/algebra.hpp"
#include "clonelab/budget.hpp"
#include "clonelab/polymorphism.hpp"
#include "clonelab/projection_clone.hpp"
#include "clonelab/structure.hpp"

namespace clonelab {

struct ProjectionCloneCheck {
  bool yes = true;
  std::optional<OperationTable> witness;  // first non-projection polymorphism
  explicit operator bool() const noexcept { return yes; }
};

inline ProjectionCloneCheck is_projection_clone(const FiniteStructure& s, std::size_t K, const Budget& budget = {}) {
  for (std::size_t k = 1; k <= K; ++k)
    for (auto& f : polymorphisms(s, k, budget))
      if (!f.is_projection()) return {false, std::move(f)};
  return {};
}

// Polymorphisms of arity 1..K in arity order, each arity lexicographic.
inline std::vector<OperationTable> polymorphism_algebra(const FiniteStructure& s, std::size_t K, const Budget& budget = {}) {
  std::vector<OperationTable> ops;
  for (std::size_t k = 1; k <= K; ++k)
    for (auto& f : polymorphisms(s, k, budget)) ops.push_back(std::move(f));
  return ops;
}

// A two-element quotient of S <= C^n on which every polymorphism up to arity K
// acts as a projection.
struct ProjectionQuotientCertificate {
  std::size_t max_arity = 0;
  std::size_t power = 0;
  std::vector<Rank> generators;   // elements of D^n as ranks
  std::vector<Rank> subalgebra;   // sorted
  Congruence theta;               // two blocks of elements of `subalgebra`
  std::vector<Projection> induced;  // per operation, in polymorphism_algebra order
};

namespace detail {

// Componentwise action of a table on elements of D^n.
inline Rank apply_in_power(const OperationTable& f, const std::vector<Tuple>& decoded, const std::vector<Rank>& args,
                           std::size_t n, Element d) {
  Tuple out(n);
  for (std::size_t c = 0; c < n; ++c) {
    Rank r = 0;
    for (Rank a : args) r = r * d + decoded[a][c];
    out[c] = f.at(r);
  }
  return rank_of(out, d);
}

inline std::vector<Tuple> decode_all(Element d, std::size_t n) {
  std::vector<Tuple> out;
  Rank size = ipow(d, n);
  for (Rank r = 0; r < size; ++r) out.push_back(unrank(r, d, n));
  return out;
}

// For each operation, the induced projection index when `cls` (0/1 per
// element of S) makes every operation a projection; empty otherwise. `image`
// holds each operation's values on S^k as positions in S.
inline std::optional<std::vector<Projection>> projection_quotient(const std::vector<std::vector<std::uint32_t>>& image,
                                                                  const std::vector<std::size_t>& arity,
                                                                  const std::vector<char>& cls) {
  std::vector<Projection> out;
  const std::size_t m = cls.size();
  for (std::size_t o = 0; o < image.size(); ++o) {
    std::size_t k = arity[o];
    std::vector<char> alive(k, 1);
    std::size_t live = k;
    std::vector<std::size_t> idx(k, 0);
    std::size_t pos = 0;
    do {
      char c = cls[image[o][pos++]];
      for (std::size_t i = 0; i < k; ++i)
        if (alive[i] && cls[idx[i]] != c) {
          alive[i] = 0;
          --live;
        }
      if (live == 0) return std::nullopt;
    } while (next_index(idx, m));
    std::size_t i = 0;
    while (!alive[i]) ++i;
    out.emplace_back(k, i + 1);
  }
  return out;
}

}  // namespace detail

struct QuotientSearchResult {
  enum class Kind { Certificate, Exhausted };
  Kind kind = Kind::Exhausted;
  std::optional<ProjectionQuotientCertificate> certificate;
  bool constant_obstruction = false;
  std::size_t max_arity = 0, max_power = 0;
};

// Search order: n ascending, generator sets by size (1 or 2) then
// lexicographically, two-class partitions by the class mask of S.
inline QuotientSearchResult find_projection_quotient(const FiniteStructure& s, std::size_t K, std::size_t N,
                                                     const Budget& budget = {}) {
  QuotientSearchResult res;
  res.max_arity = K;
  res.max_power = N;
  if (K == 0) throw ShapeError("arity bound must be positive");
  // A constant c stays constant on every quotient, and no constant on two
  // elements is a projection.
  for (const auto& f : polymorphisms(s, 1, budget))
    if (f.is_constant()) {
      res.constant_obstruction = true;
      return res;
    }
  auto ops = polymorphism_algebra(s, K, budget);
  std::vector<std::size_t> arity;
  for (const auto& f : ops) arity.push_back(f.arity());
  const Element d = s.domain_size();
  for (std::size_t n = 1; n <= N; ++n) {
    double size = power_estimate(d, static_cast<double>(n));
    budget.check("power domain size", size, budget.max_elements);
    auto decoded = detail::decode_all(d, n);
    Rank total = ipow(d, n);
    std::set<std::vector<Rank>> seen;
    for (std::size_t g = 1; g <= 2 && g <= total; ++g) {
      std::vector<Rank> gens(g);
      for (std::size_t i = 0; i < g; ++i) gens[i] = i;
      while (true) {
        auto elems = detail::closure(
            gens, arity,
            [&](std::size_t o, const std::vector<Rank>& args) {
              return detail::apply_in_power(ops[o], decoded, args, n, d);
            },
            budget.max_elements);
        std::sort(elems.begin(), elems.end());
        const std::size_t m = elems.size();
        if (m >= 2 && seen.insert(elems).second) {
          double work = 0;
          for (auto k : arity) work += power_estimate(static_cast<double>(m), static_cast<double>(k));
          budget.check("operation images on S", work, budget.max_candidates);
          budget.check("two-class partitions of S", std::ldexp(1.0, static_cast<int>(std::min<std::size_t>(m, 1000)) - 1),
                       budget.max_partitions);
          std::vector<std::vector<std::uint32_t>> image(ops.size());
          for (std::size_t o = 0; o < ops.size(); ++o) {
            std::vector<std::size_t> idx(arity[o], 0);
            std::vector<Rank> args(arity[o]);
            do {
              for (std::size_t j = 0; j < args.size(); ++j) args[j] = elems[idx[j]];
              Rank r = detail::apply_in_power(ops[o], decoded, args, n, d);
              image[o].push_back(static_cast<std::uint32_t>(std::lower_bound(elems.begin(), elems.end(), r) - elems.begin()));
            } while (next_index(idx, m));
          }
          // Element 0 of S sits in class 0; masks over the rest.
          std::uint64_t masks = std::uint64_t{1} << (m - 1);
          std::vector<char> cls(m, 0);
          for (std::uint64_t mask = 1; mask < masks; ++mask) {
            for (std::size_t i = 1; i < m; ++i) cls[i] = static_cast<char>(mask >> (m - 1 - i) & 1);
            if (auto induced = detail::projection_quotient(image, arity, cls)) {
              ProjectionQuotientCertificate c;
              c.max_arity = K;
              c.power = n;
              c.generators = gens;
              c.subalgebra = elems;
              c.theta = Congruence::from_labels(std::vector<Element>(cls.begin(), cls.end()));
              c.induced = std::move(*induced);
              res.kind = QuotientSearchResult::Kind::Certificate;
              res.certificate = std::move(c);
              return res;
            }
          }
        }
        std::size_t i = g;
        while (i > 0 && gens[i - 1] == total - (g - i) - 1) --i;
        if (i == 0) break;
        ++gens[i - 1];
        for (std::size_t j = i; j < g; ++j) gens[j] = gens[j - 1] + 1;
      }
    }
  }
  return res;
}

struct CertificateVerdict {
  bool ok = true;
  std::string reason;
  explicit operator bool() const noexcept { return ok; }
};

// Re-verification from the structure alone: recomputes the polymorphisms up
// to the certificate's arity, then checks closure of S in C^n, that θ has two
// blocks covering S, and that each operation induces its stated projection.
inline CertificateVerdict verify_projection_certificate(const FiniteStructure& s, const ProjectionQuotientCertificate& c,
                                                        const Budget& budget = {}) {
  auto fail = [](std::string r) { return CertificateVerdict{false, std::move(r)}; };
  auto ops = polymorphism_algebra(s, c.max_arity, budget);
  if (ops.size() != c.induced.size()) return fail("induced projection list does not match the polymorphisms");
  const Element d = s.domain_size();
  auto decoded = detail::decode_all(d, c.power);
  std::set<Rank> S(c.subalgebra.begin(), c.subalgebra.end());
  for (Rank e : S)
    if (e >= decoded.size()) return fail("element outside D^n");
  for (Rank g : c.generators)
    if (!S.count(g)) return fail("generator outside S");
  if (c.theta.blocks.size() != 2) return fail("theta does not have two blocks");
  if (c.theta.domain_size() != S.size()) return fail("theta does not partition S");
  auto label = c.theta.labels();
  std::vector<Rank> elems(S.begin(), S.end());
  for (std::size_t o = 0; o < ops.size(); ++o) {
    std::size_t k = ops[o].arity();
    const auto& p = c.induced[o];
    if (p.arity != k) return fail("induced projection has the wrong arity");
    std::vector<std::size_t> idx(k, 0);
    std::vector<Rank> args(k);
    do {
      for (std::size_t j = 0; j < k; ++j) args[j] = elems[idx[j]];
      Rank r = detail::apply_in_power(ops[o], decoded, args, c.power, d);
      auto it = std::lower_bound(elems.begin(), elems.end(), r);
      if (it == elems.end() || *it != r) return fail("S is not closed under polymorphism #" + std::to_string(o));
      auto pos = static_cast<std::size_t>(it - elems.begin());
      if (label[pos] != label[idx[p.index - 1]]) return fail("polymorphism #" + std::to_string(o) + " is not " + to_string(p));
    } while (next_index(idx, elems.size()));
  }
  return {};
}

struct HardnessReport {
  enum class Verdict { Hard, Inconclusive };
  Verdict verdict = Verdict::Inconclusive;
  ProjectionCloneCheck projection_clone;
  QuotientSearchResult search;
  std::string text;
};

inline const char* kNotTractability = "Exhausted is not a proof of tractability.";

inline HardnessReport hardness_report(const FiniteStructure& s, std::size_t K, std::size_t N, const Budget& budget = {}) {
  HardnessReport rep;
  rep.projection_clone = is_projection_clone(s, K, budget);
  rep.search = find_projection_quotient(s, K, N, budget);
  std::string bounds = "(K=" + std::to_string(K) + ", N=" + std::to_string(N) + ")";
  std::string out;
  if (rep.search.certificate) {
    rep.verdict = HardnessReport::Verdict::Hard;
    const auto& c = *rep.search.certificate;
    out = "hard: ";
    if (rep.projection_clone) out += "projection clone at K=" + std::to_string(K) + "; ";
    out += "certificate n=" + std::to_string(c.power) + " at " + bounds + "\n";
    out += "generators:";
    for (Rank g : c.generators) {
      out += " (";
      auto t = unrank(g, s.domain_size(), c.power);
      for (std::size_t i = 0; i < t.size(); ++i) out += (i ? "," : "") + std::to_string(t[i]);
      out += ")";
    }
    out += "\n|S| = " + std::to_string(c.subalgebra.size()) + "\ntheta:";
    for (const auto& b : c.theta.blocks) {
      out += " {";
      for (std::size_t i = 0; i < b.size(); ++i) {
        auto t = unrank(c.subalgebra[b[i]], s.domain_size(), c.power);
        out += i ? " " : "";
        out += "(";
        for (std::size_t j = 0; j < t.size(); ++j) out += (j ? "," : "") + std::to_string(t[j]);
        out += ")";
      }
      out += "}";
    }
    out += "\npolymorphisms up to arity " + std::to_string(K) + ": " + std::to_string(c.induced.size()) +
           ", each inducing a projection on S/theta\n";
    out += "CSP of a finite-signature reduct is NP-hard.\n";
  } else {
    rep.verdict = HardnessReport::Verdict::Inconclusive;
    out = "inconclusive at " + bounds;
    if (rep.search.constant_obstruction)
      out += "; constant polymorphism present: no 2-class projection quotient exists at any bound";
    else if (!rep.projection_clone)
      out += "; non-projection polymorphism found, no projection quotient within the bounds";
    out += "\n";
    out += kNotTractability;
    out += "\n";
  }
  rep.text = std::move(out);
  return rep;
}

}  // namespace clonelab
