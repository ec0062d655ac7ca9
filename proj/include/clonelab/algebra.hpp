#pragma once

#include <algorithm>
#include <cstddef>
#include <map>
#include <memory>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <unordered_map>
#include <utility>
#include <vector>

#include "clonelab/budget.hpp"
#include "clonelab/errors.hpp"
#include "clonelab/operation.hpp"
#include "clonelab/text.hpp"
#include "clonelab/tuple.hpp"

namespace clonelab {

// A finite algebra: domain 0..n-1 and an ordered signature of interpreted
// operation symbols. Zero-ary symbols are constants.
class Algebra {
 public:
  struct Op {
    std::string symbol;
    OperationTable table;
  };

  Algebra() = default;
  Algebra(std::string name, Element n) : name_(std::move(name)), n_(n) {
    if (n == 0) throw DomainError("algebra domain must be nonempty");
  }

  void add_operation(const std::string& symbol, OperationTable table) {
    if (!text::is_identifier(symbol)) throw ParseError(0, "invalid operation symbol '" + symbol + "'");
    if (table.domain_size() != n_)
      throw DomainError("operation " + symbol + " has domain " + std::to_string(table.domain_size()) +
                        ", algebra has " + std::to_string(n_));
    for (const auto& op : ops_)
      if (op.symbol == symbol) throw ParseError(0, "duplicate operation symbol '" + symbol + "'");
    ops_.push_back({symbol, std::move(table)});
  }

  const std::string& name() const { return name_; }
  Element size() const { return n_; }
  const std::vector<Op>& ops() const { return ops_; }
  const Op& op(std::size_t i) const { return ops_.at(i); }

  std::vector<std::pair<std::string, std::size_t>> signature() const {
    std::vector<std::pair<std::string, std::size_t>> sig;
    for (const auto& op : ops_) sig.emplace_back(op.symbol, op.table.arity());
    return sig;
  }

  bool operator==(const Algebra& o) const {
    if (n_ != o.n_ || ops_.size() != o.ops_.size()) return false;
    for (std::size_t i = 0; i < ops_.size(); ++i)
      if (ops_[i].symbol != o.ops_[i].symbol || !(ops_[i].table == o.ops_[i].table)) return false;
    return true;
  }

 private:
  std::string name_ = "A";
  Element n_ = 1;
  std::vector<Op> ops_;
};

inline void require_same_signature(const Algebra& a, const Algebra& b) {
  if (a.signature() != b.signature()) throw SignatureMismatch("algebras " + a.name() + " and " + b.name() + " have different signatures");
}

inline std::string serialize(const Algebra& a) {
  std::string out = "algebra " + a.name() + "\ndomain " + std::to_string(a.size()) + "\n";
  for (const auto& op : a.ops()) {
    out += "op " + op.symbol + " " + std::to_string(op.table.arity()) + "\nvalues";
    for (Element v : op.table.values()) out += " " + std::to_string(v);
    out += "\n";
  }
  return out + "end\n";
}

// Same layout as a structure file with `op <SYM> <k>` sections in place of
// relations; the header keyword may be `algebra` or `structure`.
inline Algebra parse_algebra(std::string_view text) {
  auto ls = text::lines(text);
  if (ls.empty()) throw ParseError(1, "empty algebra file");
  std::size_t i = 0;
  if ((ls[0].tokens[0] != "algebra" && ls[0].tokens[0] != "structure") || ls[0].tokens.size() != 2)
    throw ParseError(ls[0].number, "expected 'algebra <name>'");
  std::string name = ls[0].tokens[1];
  ++i;
  if (i >= ls.size() || ls[i].tokens[0] != "domain" || ls[i].tokens.size() != 2)
    throw ParseError(i < ls.size() ? ls[i].number : ls.back().number, "expected 'domain <n>'");
  auto n = text::parse_uint(ls[i].tokens[1], ls[i].number, "domain size");
  if (n < 1) throw DomainError("line " + std::to_string(ls[i].number) + ": domain size must be at least 1");
  Algebra a(name, static_cast<Element>(n));
  ++i;
  bool ended = false;
  while (i < ls.size()) {
    const auto& ln = ls[i];
    if (ln.tokens[0] == "end" && ln.tokens.size() == 1) {
      ended = true;
      ++i;
      break;
    }
    if (ln.tokens[0] != "op" || ln.tokens.size() != 3) throw ParseError(ln.number, "expected 'op <SYMBOL> <arity>'");
    if (!text::is_identifier(ln.tokens[1])) throw ParseError(ln.number, "invalid operation symbol '" + ln.tokens[1] + "'");
    for (const auto& op : a.ops())
      if (op.symbol == ln.tokens[1]) throw ParseError(ln.number, "duplicate operation symbol '" + ln.tokens[1] + "'");
    auto k = text::parse_uint(ln.tokens[2], ln.number, "arity");
    ++i;
    auto vals = detail::read_values(ls, i, ipow(static_cast<Element>(n), k), static_cast<Element>(n));
    a.add_operation(ln.tokens[1], OperationTable(static_cast<Element>(n), k, std::move(vals)));
  }
  if (!ended) throw ParseError(ls.back().number, "missing 'end'");
  if (i < ls.size()) throw ParseError(ls[i].number, "content after 'end'");
  return a;
}

namespace detail {

// Least superset of `gens` closed under the given operations. `apply(op,
// args)` evaluates operation `op` on element arguments. Each round only
// visits argument tuples touching an element discovered in the previous
// round. Elements are returned in discovery order.
template <class Apply>
std::vector<Rank> closure(std::vector<Rank> gens, const std::vector<std::size_t>& arities, Apply&& apply,
                          double max_elements) {
  std::vector<Rank> elems;
  std::unordered_map<Rank, std::size_t> seen;
  auto add = [&](Rank e) {
    if (seen.emplace(e, elems.size()).second) {
      elems.push_back(e);
      if (static_cast<double>(elems.size()) > max_elements)
        throw BudgetExceeded("subalgebra size", static_cast<double>(elems.size()), max_elements);
    }
  };
  std::vector<Rank> args;
  for (std::size_t o = 0; o < arities.size(); ++o)
    if (arities[o] == 0) add(apply(o, args));
  for (Rank g : gens) add(g);
  std::size_t done = 0;
  while (done < elems.size()) {
    std::size_t end = elems.size();
    for (std::size_t o = 0; o < arities.size(); ++o) {
      std::size_t k = arities[o];
      if (k == 0) continue;
      std::vector<std::size_t> idx(k, 0);
      args.assign(k, 0);
      while (true) {
        bool fresh = false;
        for (std::size_t j = 0; j < k; ++j) fresh = fresh || idx[j] >= done;
        if (fresh) {
          for (std::size_t j = 0; j < k; ++j) args[j] = elems[idx[j]];
          add(apply(o, args));
        }
        if (!next_index(idx, end)) break;
      }
    }
    done = end;
  }
  return elems;
}

inline std::vector<std::size_t> arities(const Algebra& a) {
  std::vector<std::size_t> out;
  for (const auto& op : a.ops()) out.push_back(op.table.arity());
  return out;
}

// Componentwise application in A^n, elements encoded as ranks.
class PowerView {
 public:
  PowerView(const Algebra& a, std::size_t n) : a_(&a), n_(n) {}
  Rank size() const { return ipow(a_->size(), n_); }
  Rank apply(std::size_t op, const std::vector<Rank>& args) const {
    const auto& f = a_->op(op).table;
    std::vector<Tuple> cols;
    cols.reserve(args.size());
    for (Rank r : args) cols.push_back(unrank(r, a_->size(), n_));
    Tuple out(n_), in(args.size());
    for (std::size_t c = 0; c < n_; ++c) {
      for (std::size_t j = 0; j < args.size(); ++j) in[j] = cols[j][c];
      out[c] = f(in);
    }
    return rank_of(out, a_->size());
  }

 private:
  const Algebra* a_;
  std::size_t n_;
};

}  // namespace detail

inline Algebra power(const Algebra& a, std::size_t n, const Budget& budget = {}) {
  if (n == 0) throw DomainError("power exponent must be positive");
  double size = power_estimate(a.size(), static_cast<double>(n));
  budget.check("power domain size", size, budget.max_elements);
  auto m = static_cast<Element>(size);
  Algebra p(a.name() + "^" + std::to_string(n), m);
  detail::PowerView view(a, n);
  for (std::size_t o = 0; o < a.ops().size(); ++o) {
    std::size_t k = a.op(o).table.arity();
    budget.check("power table size", power_estimate(m, static_cast<double>(k)), budget.max_elements);
    std::vector<Element> vals;
    vals.reserve(ipow(m, k));
    Tuple t(k, 0);
    std::vector<Rank> args(k);
    do {
      for (std::size_t j = 0; j < k; ++j) args[j] = t[j];
      vals.push_back(static_cast<Element>(view.apply(o, args)));
    } while (next_tuple(t, m));
    p.add_operation(a.op(o).symbol, OperationTable(m, k, std::move(vals)));
  }
  return p;
}

// Sorted element set of the subalgebra generated by `gens`.
inline std::vector<Element> subalgebra_generated(const Algebra& a, const std::vector<Element>& gens,
                                                 const Budget& budget = {}) {
  bool has_constant = false;
  for (const auto& op : a.ops()) has_constant = has_constant || op.table.arity() == 0;
  if (gens.empty() && !has_constant) throw EmptyGenerators("no generators and no constants in the signature");
  std::vector<Rank> g;
  for (Element e : gens) {
    if (e >= a.size()) throw DomainError("generator " + std::to_string(e) + " outside domain");
    g.push_back(e);
  }
  auto elems = detail::closure(
      g, detail::arities(a),
      [&](std::size_t o, const std::vector<Rank>& args) {
        Tuple t(args.begin(), args.end());
        return static_cast<Rank>(a.op(o).table(t));
      },
      budget.max_elements);
  std::vector<Element> out(elems.begin(), elems.end());
  std::sort(out.begin(), out.end());
  return out;
}

// Partition of 0..n-1; blocks sorted internally and by least element.
struct Congruence {
  std::vector<std::vector<Element>> blocks;

  static Congruence from_labels(const std::vector<Element>& label) {
    std::map<Element, std::vector<Element>> by;
    for (Element i = 0; i < label.size(); ++i) by[label[i]].push_back(i);
    Congruence c;
    for (auto& [l, b] : by) c.blocks.push_back(std::move(b));
    std::sort(c.blocks.begin(), c.blocks.end(), [](const auto& x, const auto& y) { return x.front() < y.front(); });
    return c;
  }

  // Block index of every element, following block order.
  std::vector<Element> labels() const {
    std::size_t n = 0;
    for (const auto& b : blocks) n += b.size();
    std::vector<Element> out(n);
    for (Element i = 0; i < blocks.size(); ++i)
      for (Element e : blocks[i]) out.at(e) = i;
    return out;
  }

  std::size_t domain_size() const {
    std::size_t n = 0;
    for (const auto& b : blocks) n += b.size();
    return n;
  }

  bool operator==(const Congruence&) const = default;
};

inline std::string to_string(const Congruence& c) {
  std::string out;
  for (const auto& b : c.blocks) {
    out += "{";
    for (std::size_t i = 0; i < b.size(); ++i) out += (i ? "," : "") + std::to_string(b[i]);
    out += "}";
  }
  return out;
}

struct CompatibilityViolation {
  std::string symbol;
  Tuple args;
  std::size_t position = 0;  // 0-based argument replaced
  Element replacement = 0;
};

// First single-argument replacement inside a block that separates outputs.
inline std::optional<CompatibilityViolation> compatibility_violation(const Algebra& a, const std::vector<Element>& label) {
  for (const auto& op : a.ops()) {
    std::size_t k = op.table.arity();
    Tuple t(k, 0);
    do {
      Element out = label[op.table(t)];
      for (std::size_t j = 0; j < k; ++j)
        for (Element b = 0; b < a.size(); ++b) {
          if (b == t[j] || label[b] != label[t[j]]) continue;
          Tuple u = t;
          u[j] = b;
          if (label[op.table(u)] != out) return CompatibilityViolation{op.symbol, t, j, b};
        }
    } while (next_tuple(t, a.size()));
  }
  return std::nullopt;
}

inline double bell_number(std::size_t n) {
  std::vector<double> row{1.0};
  for (std::size_t i = 0; i < n; ++i) {
    std::vector<double> next{row.back()};
    for (double v : row) next.push_back(next.back() + v);
    row = std::move(next);
  }
  return row.front();
}

// All congruences, ordered by block count and then by restricted growth string.
inline std::vector<Congruence> congruences(const Algebra& a, const Budget& budget = {}) {
  Element n = a.size();
  budget.check("set partitions", bell_number(n), budget.max_partitions);
  std::vector<std::pair<std::size_t, std::vector<Element>>> found;
  std::vector<Element> rgs(n, 0), maxp(n, 0);
  while (true) {
    if (!compatibility_violation(a, rgs)) found.emplace_back(*std::max_element(rgs.begin(), rgs.end()) + 1u, rgs);
    // Next restricted growth string: rgs[i] <= 1 + max(rgs[0..i-1]).
    std::size_t i = n;
    while (i > 1) {
      --i;
      if (rgs[i] <= maxp[i - 1]) {
        ++rgs[i];
        maxp[i] = std::max(maxp[i - 1], rgs[i]);
        for (std::size_t j = i + 1; j < n; ++j) {
          rgs[j] = 0;
          maxp[j] = maxp[i];
        }
        goto advanced;
      }
    }
    break;
  advanced:;
  }
  std::stable_sort(found.begin(), found.end(), [](const auto& x, const auto& y) { return x.first < y.first; });
  std::vector<Congruence> out;
  for (const auto& [k, l] : found) out.push_back(Congruence::from_labels(l));
  return out;
}

struct QuotientResult {
  Algebra algebra;
  std::vector<Element> projection;  // element -> block index
};

inline QuotientResult quotient(const Algebra& a, const Congruence& c) {
  if (c.domain_size() != a.size()) throw DomainError("partition does not cover the algebra domain");
  auto label = c.labels();
  if (auto v = compatibility_violation(a, label)) {
    std::string args;
    for (std::size_t i = 0; i < v->args.size(); ++i) args += (i ? "," : "") + std::to_string(v->args[i]);
    throw NotACongruence("operation " + v->symbol + "(" + args + ") changes block when argument " +
                         std::to_string(v->position + 1) + " is replaced by " + std::to_string(v->replacement));
  }
  auto m = static_cast<Element>(c.blocks.size());
  Algebra q(a.name() + "/~", m);
  for (const auto& op : a.ops()) {
    std::size_t k = op.table.arity();
    std::vector<Element> vals;
    Tuple t(k, 0);
    do {
      Tuple rep(k);
      for (std::size_t j = 0; j < k; ++j) rep[j] = c.blocks[t[j]].front();
      vals.push_back(label[op.table(rep)]);
    } while (next_tuple(t, m));
    q.add_operation(op.symbol, OperationTable(m, k, std::move(vals)));
  }
  return {std::move(q), label};
}

// Pointwise check that h: a -> b is a homomorphism.
inline bool is_homomorphism(const Algebra& a, const Algebra& b, const std::vector<Element>& h) {
  require_same_signature(a, b);
  if (h.size() != a.size()) return false;
  for (std::size_t o = 0; o < a.ops().size(); ++o) {
    const auto& fa = a.op(o).table;
    const auto& fb = b.op(o).table;
    Tuple t(fa.arity(), 0), ht(fa.arity());
    do {
      for (std::size_t j = 0; j < t.size(); ++j) ht[j] = h[t[j]];
      if (h[fa(t)] != fb(ht)) return false;
    } while (next_tuple(t, a.size()));
  }
  return true;
}

// B as a homomorphic image of a subalgebra S of A^n.
struct HSPCertificate {
  std::size_t power = 0;
  std::vector<Rank> generators;    // elements of A^n as ranks
  std::vector<Rank> subalgebra;    // sorted
  std::map<Rank, Element> h;       // S -> B
  Congruence kernel;               // on positions in `subalgebra`
  std::vector<std::string> transcript;
};

struct CertificateCheck {
  bool ok = true;
  std::string reason;
  explicit operator bool() const { return ok; }
};

// Independent re-check: closure of S, homomorphism law at every point,
// surjectivity, and that the stated kernel is ker h.
inline CertificateCheck verify_certificate(const Algebra& a, const Algebra& b, const HSPCertificate& c) {
  require_same_signature(a, b);
  auto fail = [](std::string r) { return CertificateCheck{false, std::move(r)}; };
  if (c.power == 0) return fail("power must be positive");
  detail::PowerView view(a, c.power);
  std::set<Rank> s(c.subalgebra.begin(), c.subalgebra.end());
  if (s.size() != c.subalgebra.size()) return fail("duplicate subalgebra elements");
  for (Rank e : s)
    if (e >= view.size()) return fail("element outside A^n");
  for (Rank g : c.generators)
    if (!s.count(g)) return fail("generator outside S");
  if (c.h.size() != s.size()) return fail("h is not defined on exactly S");
  for (const auto& [e, v] : c.h)
    if (!s.count(e) || v >= b.size()) return fail("h has an entry outside S x B");
  std::vector<Rank> elems(s.begin(), s.end());
  for (std::size_t o = 0; o < a.ops().size(); ++o) {
    std::size_t k = a.op(o).table.arity();
    std::vector<std::size_t> idx(k, 0);
    std::vector<Rank> args(k);
    Tuple bargs(k);
    if (elems.empty()) break;
    while (true) {
      for (std::size_t j = 0; j < k; ++j) {
        args[j] = elems[idx[j]];
        bargs[j] = c.h.at(args[j]);
      }
      Rank r = view.apply(o, args);
      if (!s.count(r)) return fail("S not closed under " + a.op(o).symbol);
      if (c.h.at(r) != b.op(o).table(bargs)) return fail("h violates " + a.op(o).symbol);
      if (!next_index(idx, elems.size())) break;
    }
  }
  std::set<Element> image;
  for (const auto& [e, v] : c.h) image.insert(v);
  if (image.size() != b.size()) return fail("h is not surjective");
  std::vector<Element> label;
  for (Rank e : elems) label.push_back(c.h.at(e));
  if (!(Congruence::from_labels(label) == c.kernel)) return fail("kernel does not match h");
  return {};
}

struct HspResult {
  enum class Kind { Certificate, NotMember, Exhausted };
  Kind kind = Kind::Exhausted;
  std::optional<HSPCertificate> certificate;
  std::size_t n_max = 0;
  std::size_t bound = 0;
  std::vector<std::string> transcript;
};

inline const char* to_string(HspResult::Kind k) {
  switch (k) {
    case HspResult::Kind::Certificate: return "Certificate";
    case HspResult::Kind::NotMember: return "NotMember";
    case HspResult::Kind::Exhausted: return "Exhausted";
  }
  return "?";
}

namespace detail {

// Grow h from generator images by closure in A^n; nullopt when h would not
// be well-defined or not onto B.
inline std::optional<HSPCertificate> extend_homomorphism(const Algebra& a, const Algebra& b, std::size_t n,
                                                         const std::vector<Rank>& gens, const std::vector<Element>& images,
                                                         const Budget& budget) {
  PowerView view(a, n);
  std::unordered_map<Rank, Element> h;
  std::vector<Rank> order;
  auto arity = arities(a);
  bool clash = false;
  auto put = [&](Rank e, Element v) {
    auto [it, fresh] = h.emplace(e, v);
    if (fresh) order.push_back(e);
    else if (it->second != v) clash = true;
  };
  for (std::size_t i = 0; i < gens.size(); ++i) put(gens[i], images[i]);
  for (std::size_t o = 0; o < arity.size(); ++o)
    if (arity[o] == 0) put(view.apply(o, {}), b.op(o).table(Tuple{}));
  std::size_t done = 0;
  std::vector<Rank> args;
  Tuple bargs;
  while (!clash && done < order.size()) {
    std::size_t end = order.size();
    for (std::size_t o = 0; o < arity.size() && !clash; ++o) {
      std::size_t k = arity[o];
      if (k == 0) continue;
      std::vector<std::size_t> idx(k, 0);
      args.assign(k, 0);
      bargs.assign(k, 0);
      while (!clash) {
        bool fresh = false;
        for (std::size_t j = 0; j < k; ++j) fresh = fresh || idx[j] >= done;
        if (fresh) {
          for (std::size_t j = 0; j < k; ++j) {
            args[j] = order[idx[j]];
            bargs[j] = h[args[j]];
          }
          put(view.apply(o, args), b.op(o).table(bargs));
          if (static_cast<double>(order.size()) > budget.max_elements)
            throw BudgetExceeded("subalgebra size", static_cast<double>(order.size()), budget.max_elements);
        }
        if (!next_index(idx, end)) break;
      }
    }
    done = end;
  }
  if (clash) return std::nullopt;
  std::set<Element> image;
  for (const auto& [e, v] : h) image.insert(v);
  if (image.size() != b.size()) return std::nullopt;
  HSPCertificate c;
  c.power = n;
  c.generators = gens;
  c.subalgebra = order;
  std::sort(c.subalgebra.begin(), c.subalgebra.end());
  std::vector<Element> label;
  for (Rank e : c.subalgebra) {
    c.h[e] = h[e];
    label.push_back(h[e]);
  }
  c.kernel = Congruence::from_labels(label);
  return c;
}

// Generator ranks of the |B| coordinate projections of A^(|A|^|B|): the
// free algebra on |B| generators sits inside this power.
inline std::vector<Rank> free_generators(Element a_size, Element b_size) {
  Rank coords = ipow(a_size, b_size);
  std::vector<Rank> gens;
  for (Element j = 0; j < b_size; ++j) {
    Tuple t(coords);
    for (Rank c = 0; c < coords; ++c) t[c] = unrank(c, a_size, b_size)[j];
    gens.push_back(rank_of(t, a_size));
  }
  return gens;
}

inline double binomial(double n, double k) {
  double r = 1;
  for (double i = 0; i < k; ++i) r = r * (n - i) / (i + 1);
  return r;
}

}  // namespace detail

// Search for B in HSP^fin(A) through powers n = 1..min(n_max, |A|^|B|).
// Below the bound, subalgebras are closures of generator sets of size at most
// |B|; at the bound the free-algebra check decides membership exactly.
inline HspResult hsp_fin_member(const Algebra& a, const Algebra& b, std::size_t n_max, const Budget& budget = {}) {
  require_same_signature(a, b);
  HspResult res;
  res.n_max = n_max;
  double bound_d = power_estimate(a.size(), b.size());
  res.bound = bound_d > 1e18 ? static_cast<std::size_t>(-1) : static_cast<std::size_t>(bound_d);
  std::size_t top = std::min(n_max, res.bound);
  for (std::size_t n = 1; n <= top; ++n) {
    double elems = power_estimate(a.size(), static_cast<double>(n));
    if (n == res.bound) {
      budget.check("free algebra power", elems, budget.max_elements);
      res.transcript.push_back("n=" + std::to_string(n) + ": free-algebra check");
      auto gens = detail::free_generators(a.size(), b.size());
      std::vector<Element> images(b.size());
      for (Element j = 0; j < b.size(); ++j) images[j] = j;
      if (auto c = detail::extend_homomorphism(a, b, n, gens, images, budget)) {
        c->transcript = res.transcript;
        res.kind = HspResult::Kind::Certificate;
        res.certificate = std::move(c);
      } else {
        res.transcript.push_back("generator map does not extend to a homomorphism");
        res.kind = HspResult::Kind::NotMember;
      }
      return res;
    }
    double sets = 0;
    for (std::size_t g = 1; g <= b.size(); ++g)
      sets += detail::binomial(elems, static_cast<double>(g)) * power_estimate(b.size(), static_cast<double>(g));
    if (!(elems <= budget.max_elements && sets <= budget.max_candidates)) {
      if (n_max >= res.bound) {
        res.transcript.push_back("n=" + std::to_string(n) + ": skipped, search size over budget");
        n = res.bound - 1;
        continue;
      }
      budget.check("generator sets at n=" + std::to_string(n), sets, budget.max_candidates);
      budget.check("power domain size", elems, budget.max_elements);
    }
    res.transcript.push_back("n=" + std::to_string(n) + ": generator search");
    Rank size = ipow(a.size(), n);
    for (std::size_t g = 1; g <= b.size() && g <= size; ++g) {
      // Strictly increasing generator ranks.
      std::vector<Rank> gens(g);
      for (std::size_t i = 0; i < g; ++i) gens[i] = i;
      while (true) {
        std::vector<Element> images(g, 0);
        do {
          if (auto c = detail::extend_homomorphism(a, b, n, gens, images, budget)) {
            c->transcript = res.transcript;
            res.kind = HspResult::Kind::Certificate;
            res.certificate = std::move(c);
            return res;
          }
        } while (next_tuple(images, b.size()));
        std::size_t i = g;
        while (i > 0 && gens[i - 1] == size - (g - i) - 1) --i;
        if (i == 0) break;
        ++gens[i - 1];
        for (std::size_t j = i; j < g; ++j) gens[j] = gens[j - 1] + 1;
      }
    }
  }
  res.kind = HspResult::Kind::Exhausted;
  return res;
}

// Term over variables x, y, z, ... and the algebra's signature.
struct Term {
  int var = -1;  // >= 0 for a variable
  std::size_t op = 0;
  std::vector<std::shared_ptr<const Term>> args;
};
using TermPtr = std::shared_ptr<const Term>;

inline std::string variable_name(std::size_t i) {
  static const char* names[] = {"x", "y", "z", "u", "v", "w"};
  return i < 6 ? names[i] : "x" + std::to_string(i + 1);
}

inline std::string to_string(const Term& t, const Algebra& sig) {
  if (t.var >= 0) return variable_name(static_cast<std::size_t>(t.var));
  std::string out = sig.op(t.op).symbol;
  if (t.args.empty()) return out;
  out += "(";
  for (std::size_t i = 0; i < t.args.size(); ++i) out += (i ? "," : "") + to_string(*t.args[i], sig);
  return out + ")";
}

inline Element eval_term(const Term& t, const Algebra& a, const Tuple& env) {
  if (t.var >= 0) return env.at(static_cast<std::size_t>(t.var));
  Tuple args;
  for (const auto& s : t.args) args.push_back(eval_term(*s, a, env));
  return a.op(t.op).table(args);
}

// Term function as a table over all assignments of `vars` variables.
inline std::vector<Element> term_table(const Term& t, const Algebra& a, std::size_t vars) {
  std::vector<Element> out;
  Tuple env(vars, 0);
  do out.push_back(eval_term(t, a, env));
  while (next_tuple(env, a.size()));
  return out;
}

struct EquationWitness {
  TermPtr s, t;
  std::size_t variables = 0;
};

// s = t holds in A and fails in B.
inline bool verify_equation_witness(const Algebra& a, const Algebra& b, const EquationWitness& w) {
  return term_table(*w.s, a, w.variables) == term_table(*w.t, a, w.variables) &&
         term_table(*w.s, b, w.variables) != term_table(*w.t, b, w.variables);
}

// Terms by depth over |B| variables, one representative per pair of term
// functions (t^A, t^B). A repeated t^A with a new t^B is an equation of A
// failing in B.
inline std::optional<EquationWitness> equation_search(const Algebra& a, const Algebra& b, std::size_t depth,
                                                      const Budget& budget = {}) {
  require_same_signature(a, b);
  std::size_t vars = b.size();
  budget.check("term table size", power_estimate(a.size(), static_cast<double>(vars)), budget.max_table_entries);
  struct Entry {
    TermPtr term;
    std::vector<Element> ta, tb;
  };
  std::vector<Entry> terms;
  std::map<std::vector<Element>, std::size_t> by_a;  // t^A -> first term index
  std::set<std::pair<std::vector<Element>, std::vector<Element>>> pairs;
  auto arity = detail::arities(a);
  Rank rows_a = ipow(a.size(), vars), rows_b = ipow(b.size(), vars);
  std::optional<EquationWitness> found;
  auto consider = [&](TermPtr t, std::vector<Element> ta, std::vector<Element> tb) {
    if (!pairs.insert({ta, tb}).second) return;
    auto it = by_a.find(ta);
    if (it != by_a.end()) {
      found = EquationWitness{terms[it->second].term, t, vars};
      return;
    }
    by_a.emplace(ta, terms.size());
    terms.push_back({std::move(t), std::move(ta), std::move(tb)});
    if (static_cast<double>(terms.size()) > budget.max_elements)
      throw BudgetExceeded("distinct terms", static_cast<double>(terms.size()), budget.max_elements);
  };
  for (std::size_t v = 0; v < vars && !found; ++v) {
    auto t = std::make_shared<Term>();
    t->var = static_cast<int>(v);
    consider(t, term_table(*t, a, vars), term_table(*t, b, vars));
  }
  for (std::size_t o = 0; o < arity.size() && !found; ++o)
    if (arity[o] == 0) {
      auto t = std::make_shared<Term>();
      t->op = o;
      consider(t, term_table(*t, a, vars), term_table(*t, b, vars));
    }
  std::size_t prev_begin = 0;
  for (std::size_t d = 1; d <= depth && !found; ++d) {
    std::size_t end = terms.size();
    for (std::size_t o = 0; o < arity.size() && !found; ++o) {
      std::size_t k = arity[o];
      if (k == 0) continue;
      std::vector<std::size_t> idx(k, 0);
      while (!found) {
        bool fresh = false;
        for (std::size_t j = 0; j < k; ++j) fresh = fresh || idx[j] >= prev_begin;
        if (fresh) {
          auto t = std::make_shared<Term>();
          t->op = o;
          for (std::size_t j = 0; j < k; ++j) t->args.push_back(terms[idx[j]].term);
          // Tables from the argument tables, row by row.
          std::vector<Element> ta(rows_a), tb(rows_b);
          Tuple in(k);
          for (Rank r = 0; r < rows_a; ++r) {
            for (std::size_t j = 0; j < k; ++j) in[j] = terms[idx[j]].ta[r];
            ta[r] = a.op(o).table(in);
          }
          for (Rank r = 0; r < rows_b; ++r) {
            for (std::size_t j = 0; j < k; ++j) in[j] = terms[idx[j]].tb[r];
            tb[r] = b.op(o).table(in);
          }
          consider(t, std::move(ta), std::move(tb));
        }
        if (!next_index(idx, end)) break;
      }
    }
    prev_begin = end;
  }
  return found;
}

struct NatHomResult {
  enum class Kind { Exists, Fails, Inconclusive };
  Kind kind = Kind::Inconclusive;
  std::optional<EquationWitness> witness;
  std::optional<HSPCertificate> certificate;
  std::size_t depth = 0;
  std::string note;
};

inline const char* to_string(NatHomResult::Kind k) {
  switch (k) {
    case NatHomResult::Kind::Exists: return "Exists";
    case NatHomResult::Kind::Fails: return "Fails";
    case NatHomResult::Kind::Inconclusive: return "Inconclusive";
  }
  return "?";
}

// Fails only with an equation witness; Exists only with an HSP certificate at
// the Birkhoff bound.
inline NatHomResult natural_homomorphism_exists(const Algebra& a, const Algebra& b, std::size_t depth = 3,
                                                const Budget& budget = {}) {
  require_same_signature(a, b);
  NatHomResult res;
  res.depth = depth;
  if (auto w = equation_search(a, b, depth, budget)) {
    res.kind = NatHomResult::Kind::Fails;
    res.witness = std::move(w);
    return res;
  }
  auto h = hsp_fin_member(a, b, static_cast<std::size_t>(power_estimate(a.size(), b.size())), budget);
  if (h.kind == HspResult::Kind::Certificate) {
    res.kind = NatHomResult::Kind::Exists;
    res.certificate = std::move(h.certificate);
  } else {
    res.kind = NatHomResult::Kind::Inconclusive;
    res.note = "no equation witness up to depth " + std::to_string(depth) + "; membership check returned " +
               to_string(h.kind);
  }
  return res;
}

}  // namespace clonelab
