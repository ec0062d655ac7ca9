#pragma once

#include <map>
#include <set>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include "clonelab/errors.hpp"
#include "clonelab/text.hpp"
#include "clonelab/tuple.hpp"

namespace clonelab {

struct Relation {
  std::size_t arity = 1;
  std::set<Tuple> tuples;

  bool contains(const Tuple& t) const { return tuples.count(t) != 0; }
  bool operator==(const Relation&) const = default;
};

// A finite relational structure on the domain {0, ..., domain_size - 1}.
// Equality is built into the formula language and is never a declared symbol.
class FiniteStructure {
 public:
  FiniteStructure() = default;
  FiniteStructure(std::string name, Element domain_size) : name_(std::move(name)), n_(domain_size) {
    if (n_ < 1) throw DomainError("domain size must be at least 1");
  }

  const std::string& name() const noexcept { return name_; }
  Element domain_size() const noexcept { return n_; }
  const std::map<std::string, Relation>& relations() const noexcept { return relations_; }

  bool has_relation(const std::string& sym) const { return relations_.count(sym) != 0; }

  const Relation& relation(const std::string& sym) const {
    auto it = relations_.find(sym);
    if (it == relations_.end()) throw UnknownRelation("unknown relation symbol '" + sym + "'");
    return it->second;
  }

  // Adds a relation, validating every tuple against arity and domain.
  void add_relation(const std::string& sym, Relation rel) {
    if (sym == "=") throw Error("'=' is built in and cannot be declared");
    if (!text::is_identifier(sym)) throw Error("invalid relation symbol '" + sym + "'");
    if (rel.arity < 1) throw ArityMismatch("relation '" + sym + "' must have positive arity");
    if (relations_.count(sym)) throw Error("duplicate relation symbol '" + sym + "'");
    for (const Tuple& t : rel.tuples) validate(sym, rel.arity, t);
    relations_.emplace(sym, std::move(rel));
  }

  void add_relation(const std::string& sym, std::size_t arity, std::initializer_list<Tuple> tuples) {
    add_relation(sym, Relation{arity, std::set<Tuple>(tuples)});
  }

  void validate(const std::string& sym, std::size_t arity, const Tuple& t) const {
    if (t.size() != arity)
      throw ArityMismatch("tuple of length " + std::to_string(t.size()) + " in relation '" + sym +
                          "' of arity " + std::to_string(arity));
    for (Element v : t)
      if (v >= n_)
        throw DomainError("element " + std::to_string(v) + " outside domain of size " +
                          std::to_string(n_) + " in relation '" + sym + "'");
  }

  bool operator==(const FiniteStructure&) const = default;

 private:
  std::string name_ = "S";
  Element n_ = 1;
  std::map<std::string, Relation> relations_;
};

inline std::string serialize(const FiniteStructure& s) {
  std::ostringstream out;
  out << "structure " << s.name() << "\n";
  out << "domain " << s.domain_size() << "\n";
  for (const auto& [sym, rel] : s.relations()) {
    out << "relation " << sym << " " << rel.arity << "\n";
    for (const Tuple& t : rel.tuples) {
      for (std::size_t i = 0; i < t.size(); ++i) out << (i ? " " : "") << t[i];
      out << "\n";
    }
  }
  out << "end\n";
  return out.str();
}

namespace detail {

// Reads tuple lines into `rel` starting at lines[i], stopping at the first
// keyword line. Entries are checked against `n` when n > 0.
inline std::size_t read_tuples(const std::vector<text::Line>& lines, std::size_t i, const std::string& sym,
                               Relation& rel, Element n) {
  for (; i < lines.size(); ++i) {
    const auto& ln = lines[i];
    const std::string& head = ln.tokens.front();
    if (head == "relation" || head == "end" || head == "op") break;
    if (ln.tokens.size() != rel.arity)
      throw ParseError(ln.number, "tuple of length " + std::to_string(ln.tokens.size()) + " in relation '" +
                                      sym + "' of arity " + std::to_string(rel.arity));
    Tuple t;
    t.reserve(rel.arity);
    for (const auto& tok : ln.tokens) {
      auto v = text::parse_uint(tok, ln.number, "element index");
      if (n > 0 && v >= n)
        throw DomainError("line " + std::to_string(ln.number) + ": element " + tok +
                          " outside domain of size " + std::to_string(n));
      t.push_back(static_cast<Element>(v));
    }
    rel.tuples.insert(std::move(t));
  }
  return i;
}

inline std::pair<std::string, std::size_t> read_relation_header(const text::Line& ln) {
  if (ln.tokens.size() != 3 || ln.tokens[0] != "relation")
    throw ParseError(ln.number, "expected 'relation <SYMBOL> <arity>'");
  if (!text::is_identifier(ln.tokens[1]) || ln.tokens[1] == "=")
    throw ParseError(ln.number, "invalid relation symbol '" + ln.tokens[1] + "'");
  auto k = text::parse_uint(ln.tokens[2], ln.number, "arity");
  if (k < 1) throw ParseError(ln.number, "relation arity must be positive");
  return {ln.tokens[1], static_cast<std::size_t>(k)};
}

}  // namespace detail

// Parses the line-oriented structure format:
//   structure <name> / domain <n> / (relation <SYM> <k> / tuple lines)* / end
inline FiniteStructure parse_structure(std::string_view text) {
  auto ls = text::lines(text);
  std::size_t i = 0;
  if (ls.empty()) throw ParseError(1, "empty structure file");
  if (ls[i].tokens[0] != "structure" || ls[i].tokens.size() != 2)
    throw ParseError(ls[i].number, "expected 'structure <name>'");
  std::string name = ls[i].tokens[1];
  ++i;
  if (i >= ls.size() || ls[i].tokens[0] != "domain" || ls[i].tokens.size() != 2)
    throw ParseError(i < ls.size() ? ls[i].number : ls.back().number, "expected 'domain <n>'");
  auto n = text::parse_uint(ls[i].tokens[1], ls[i].number, "domain size");
  if (n < 1) throw DomainError("line " + std::to_string(ls[i].number) + ": domain size must be at least 1");
  FiniteStructure s(name, static_cast<Element>(n));
  ++i;
  bool ended = false;
  while (i < ls.size()) {
    const auto& ln = ls[i];
    if (ln.tokens[0] == "end") {
      if (ln.tokens.size() != 1) throw ParseError(ln.number, "unexpected tokens after 'end'");
      ended = true;
      ++i;
      break;
    }
    auto [sym, arity] = detail::read_relation_header(ln);
    if (s.has_relation(sym)) throw ParseError(ln.number, "duplicate relation symbol '" + sym + "'");
    Relation rel{arity, {}};
    i = detail::read_tuples(ls, i + 1, sym, rel, s.domain_size());
    s.add_relation(sym, std::move(rel));
  }
  if (!ended) throw ParseError(ls.back().number, "missing 'end'");
  if (i < ls.size()) throw ParseError(ls[i].number, "content after 'end'");
  return s;
}

// Headerless relation file: `relation <SYM> <k>` followed by tuple lines and
// an optional `end`. The domain comes from the host structure.
inline std::pair<std::string, Relation> parse_relation(std::string_view text, Element domain_size) {
  auto ls = text::lines(text);
  if (ls.empty()) throw ParseError(1, "empty relation file");
  auto [sym, arity] = detail::read_relation_header(ls[0]);
  Relation rel{arity, {}};
  std::size_t i = detail::read_tuples(ls, 1, sym, rel, domain_size);
  if (i < ls.size() && ls[i].tokens[0] == "end" && ls[i].tokens.size() == 1) ++i;
  if (i < ls.size()) throw ParseError(ls[i].number, "unexpected content in relation file");
  return {sym, std::move(rel)};
}

}  // namespace clonelab
