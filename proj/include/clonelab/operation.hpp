#pragma once

#include <compare>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include "clonelab/errors.hpp"
#include "clonelab/text.hpp"
#include "clonelab/tuple.hpp"

namespace clonelab {

// A total operation D^k -> D stored as its value table, indexed by the
// lexicographic rank of the argument tuple (first argument most significant).
class OperationTable {
 public:
  OperationTable() = default;
  OperationTable(Element n, std::size_t arity, std::vector<Element> values)
      : n_(n), arity_(arity), values_(std::move(values)) {
    if (n_ < 1) throw DomainError("operation domain size must be at least 1");
    if (values_.size() != ipow(n_, arity_))
      throw ShapeError("operation table of arity " + std::to_string(arity_) + " on " + std::to_string(n_) +
                       " elements needs " + std::to_string(ipow(n_, arity_)) + " values, got " +
                       std::to_string(values_.size()));
    for (Element v : values_)
      if (v >= n_) throw DomainError("operation value " + std::to_string(v) + " outside domain");
  }

  Element domain_size() const noexcept { return n_; }
  std::size_t arity() const noexcept { return arity_; }
  const std::vector<Element>& values() const noexcept { return values_; }
  std::size_t size() const noexcept { return values_.size(); }

  Element at(Rank r) const { return values_[r]; }
  Element operator()(const Tuple& args) const {
    if (args.size() != arity_) throw ShapeError("operation applied to wrong number of arguments");
    return values_[rank_of(args, n_)];
  }

  bool is_projection() const {
    for (std::size_t i = 1; i <= arity_; ++i)
      if (projection_index_matches(i)) return true;
    return false;
  }

  // Coordinate i (1-based) such that this table is pi^k_i, or 0.
  std::size_t projection_index() const {
    for (std::size_t i = 1; i <= arity_; ++i)
      if (projection_index_matches(i)) return i;
    return 0;
  }

  bool is_constant() const {
    for (Element v : values_)
      if (v != values_.front()) return false;
    return true;
  }

  auto operator<=>(const OperationTable&) const = default;

 private:
  bool projection_index_matches(std::size_t i) const {
    Tuple t(arity_, 0);
    Rank r = 0;
    do {
      if (values_[r++] != t[i - 1]) return false;
    } while (next_tuple(t, n_));
    return true;
  }

  Element n_ = 1;
  std::size_t arity_ = 1;
  std::vector<Element> values_{0};
};

// pi^k_i on an n-element domain (i is 1-based).
inline OperationTable projection(Element n, std::size_t k, std::size_t i) {
  if (k < 1 || i < 1 || i > k)
    throw IndexError("projection index " + std::to_string(i) + " outside 1.." + std::to_string(k));
  std::vector<Element> vals;
  vals.reserve(ipow(n, k));
  Tuple t(k, 0);
  do vals.push_back(t[i - 1]);
  while (next_tuple(t, n));
  return OperationTable(n, k, std::move(vals));
}

inline OperationTable constant_operation(Element n, std::size_t k, Element c) {
  return OperationTable(n, k, std::vector<Element>(ipow(n, k), c));
}

// f(g_1, ..., g_m): the l-ary table t |-> f(g_1(t), ..., g_m(t)).
inline OperationTable compose(const OperationTable& f, const std::vector<OperationTable>& gs) {
  if (gs.size() != f.arity())
    throw ShapeError("compose: " + std::to_string(gs.size()) + " inner operations for an outer arity of " +
                     std::to_string(f.arity()));
  if (gs.empty()) throw ShapeError("compose: no inner operations");
  const Element n = f.domain_size();
  const std::size_t l = gs.front().arity();
  for (const auto& g : gs) {
    if (g.domain_size() != n) throw ShapeError("compose: domain sizes differ");
    if (g.arity() != l) throw ShapeError("compose: inner operations have different arities");
  }
  const Rank size = ipow(n, l);
  std::vector<Element> vals(size);
  std::vector<Element> args(gs.size());
  for (Rank r = 0; r < size; ++r) {
    Rank inner = 0;
    for (std::size_t j = 0; j < gs.size(); ++j) inner = inner * n + gs[j].at(r);
    vals[r] = f.at(inner);
  }
  return OperationTable(n, l, std::move(vals));
}

struct NamedOperation {
  std::string name;
  OperationTable table;
};

inline std::string serialize(const NamedOperation& op) {
  std::ostringstream out;
  out << "op " << op.name << " arity " << op.table.arity() << " domain " << op.table.domain_size() << "\n";
  out << "values";
  for (Element v : op.table.values()) out << ' ' << v;
  out << "\n";
  return out.str();
}

namespace detail {

inline std::vector<Element> read_values(const std::vector<text::Line>& ls, std::size_t& i, Rank count,
                                        Element n) {
  if (i >= ls.size() || ls[i].tokens[0] != "values")
    throw ParseError(i < ls.size() ? ls[i].number : (ls.empty() ? 1 : ls.back().number), "expected 'values'");
  std::vector<Element> vals;
  std::size_t line = ls[i].number;
  for (std::size_t t = 1; t < ls[i].tokens.size(); ++t)
    vals.push_back(static_cast<Element>(text::parse_uint(ls[i].tokens[t], line, "table value")));
  ++i;
  // Long tables may continue on following lines of bare numbers.
  while (vals.size() < count && i < ls.size() && std::isdigit(static_cast<unsigned char>(ls[i].tokens[0][0]))) {
    for (const auto& tok : ls[i].tokens)
      vals.push_back(static_cast<Element>(text::parse_uint(tok, ls[i].number, "table value")));
    ++i;
  }
  if (vals.size() != count)
    throw ParseError(line, "expected " + std::to_string(count) + " table values, got " + std::to_string(vals.size()));
  for (Element v : vals)
    if (v >= n) throw DomainError("line " + std::to_string(line) + ": table value " + std::to_string(v) + " outside domain");
  return vals;
}

}  // namespace detail

// `op <name> arity <k> domain <n>` followed by `values v_0 ... v_{n^k-1}`.
inline NamedOperation parse_operation(std::string_view text) {
  auto ls = text::lines(text);
  if (ls.empty()) throw ParseError(1, "empty operation file");
  const auto& h = ls[0].tokens;
  if (h.size() != 6 || h[0] != "op" || h[2] != "arity" || h[4] != "domain")
    throw ParseError(ls[0].number, "expected 'op <name> arity <k> domain <n>'");
  auto k = text::parse_uint(h[3], ls[0].number, "arity");
  auto n = text::parse_uint(h[5], ls[0].number, "domain size");
  if (n < 1) throw DomainError("operation domain size must be at least 1");
  std::size_t i = 1;
  auto vals = detail::read_values(ls, i, ipow(n, k), static_cast<Element>(n));
  if (i < ls.size()) throw ParseError(ls[i].number, "unexpected content after values");
  return {h[1], OperationTable(static_cast<Element>(n), k, std::move(vals))};
}

}  // namespace clonelab
