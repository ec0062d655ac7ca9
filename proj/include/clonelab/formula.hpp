#pragma once

#include <algorithm>
#include <map>
#include <set>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include "clonelab/errors.hpp"
#include "clonelab/text.hpp"

namespace clonelab {

// Primitive positive formula: relational atoms, equality atoms, conjunction,
// and existential quantification. An empty conjunction is "true".
struct Formula {
  enum class Kind { Rel, Eq, And, Exists };

  Kind kind = Kind::And;
  std::string symbol;             // Rel
  std::vector<std::string> vars;  // Rel arguments, the Eq pair, Exists bound list
  std::vector<Formula> children;  // And conjuncts, Exists body (exactly one)

  static Formula rel(std::string sym, std::vector<std::string> args) {
    Formula f;
    f.kind = Kind::Rel;
    f.symbol = std::move(sym);
    f.vars = std::move(args);
    return f;
  }
  static Formula eq(std::string a, std::string b) {
    Formula f;
    f.kind = Kind::Eq;
    f.vars = {std::move(a), std::move(b)};
    return f;
  }
  static Formula conj(std::vector<Formula> parts = {}) {
    Formula f;
    f.kind = Kind::And;
    f.children = std::move(parts);
    return f;
  }
  static Formula exists(std::vector<std::string> bound, Formula body) {
    std::set<std::string> seen;
    for (const auto& v : bound)
      if (!seen.insert(v).second) throw Error("variable '" + v + "' bound twice in one quantifier");
    Formula f;
    f.kind = Kind::Exists;
    f.vars = std::move(bound);
    f.children.push_back(std::move(body));
    return f;
  }

  const Formula& body() const { return children.front(); }
  bool is_true() const { return kind == Kind::And && children.empty(); }

  bool operator==(const Formula&) const = default;
};

namespace detail {

inline void collect_free(const Formula& f, std::vector<std::string>& bound, std::vector<std::string>& out,
                         std::set<std::string>& seen) {
  auto visit = [&](const std::string& v) {
    if (std::find(bound.begin(), bound.end(), v) != bound.end()) return;
    if (seen.insert(v).second) out.push_back(v);
  };
  switch (f.kind) {
    case Formula::Kind::Rel:
    case Formula::Kind::Eq:
      for (const auto& v : f.vars) visit(v);
      break;
    case Formula::Kind::And:
      for (const auto& c : f.children) collect_free(c, bound, out, seen);
      break;
    case Formula::Kind::Exists: {
      std::size_t mark = bound.size();
      bound.insert(bound.end(), f.vars.begin(), f.vars.end());
      collect_free(f.body(), bound, out, seen);
      bound.resize(mark);
      break;
    }
  }
}

}  // namespace detail

// Free variables in order of first occurrence.
inline std::vector<std::string> free_variables(const Formula& f) {
  std::vector<std::string> bound, out;
  std::set<std::string> seen;
  detail::collect_free(f, bound, out, seen);
  return out;
}

// Node count plus variable occurrences; the size measure for reductions.
inline std::size_t formula_size(const Formula& f) {
  std::size_t s = 1 + f.vars.size();
  for (const auto& c : f.children) s += formula_size(c);
  return s;
}

inline void write(std::ostream& out, const Formula& f) {
  switch (f.kind) {
    case Formula::Kind::Rel:
      out << "(rel " << f.symbol;
      for (const auto& v : f.vars) out << ' ' << v;
      out << ')';
      break;
    case Formula::Kind::Eq:
      out << "(= " << f.vars[0] << ' ' << f.vars[1] << ')';
      break;
    case Formula::Kind::And:
      out << "(and";
      for (const auto& c : f.children) {
        out << ' ';
        write(out, c);
      }
      out << ')';
      break;
    case Formula::Kind::Exists:
      out << "(exists (";
      for (std::size_t i = 0; i < f.vars.size(); ++i) out << (i ? " " : "") << f.vars[i];
      out << ") ";
      write(out, f.body());
      out << ')';
      break;
  }
}

inline std::string to_string(const Formula& f) {
  std::ostringstream out;
  write(out, f);
  return out.str();
}

namespace detail {

struct SexpToken {
  std::string text;  // "(" , ")" or an atom
  std::size_t line;
};

inline std::vector<SexpToken> sexp_tokens(std::string_view s) {
  std::vector<SexpToken> out;
  std::size_t line = 1;
  for (std::size_t i = 0; i < s.size();) {
    char c = s[i];
    if (c == '\n') {
      ++line;
      ++i;
    } else if (c == ';' || c == '#') {
      while (i < s.size() && s[i] != '\n') ++i;
    } else if (std::isspace(static_cast<unsigned char>(c))) {
      ++i;
    } else if (c == '(' || c == ')') {
      out.push_back({std::string(1, c), line});
      ++i;
    } else {
      std::size_t j = i;
      while (j < s.size() && !std::isspace(static_cast<unsigned char>(s[j])) && s[j] != '(' && s[j] != ')') ++j;
      out.push_back({std::string(s.substr(i, j - i)), line});
      i = j;
    }
  }
  return out;
}

class FormulaParser {
 public:
  explicit FormulaParser(std::string_view s) : toks_(sexp_tokens(s)) {}

  Formula parse_all() {
    if (toks_.empty()) throw ParseError(1, "empty formula");
    Formula f = parse();
    if (pos_ != toks_.size()) throw ParseError(toks_[pos_].line, "trailing input after formula");
    return f;
  }

 private:
  const SexpToken& peek() {
    if (pos_ >= toks_.size()) throw ParseError(toks_.empty() ? 1 : toks_.back().line, "unexpected end of formula");
    return toks_[pos_];
  }
  SexpToken take() {
    SexpToken t = peek();
    ++pos_;
    return t;
  }
  void expect(const char* s) {
    auto t = take();
    if (t.text != s) throw ParseError(t.line, std::string("expected '") + s + "', got '" + t.text + "'");
  }
  std::string variable() {
    auto t = take();
    if (t.text == "(" || t.text == ")" || !text::is_identifier(t.text))
      throw ParseError(t.line, "expected variable, got '" + t.text + "'");
    return t.text;
  }

  Formula parse() {
    auto t = take();
    if (t.text == "true") return Formula::conj();
    if (t.text != "(") throw ParseError(t.line, "expected '(' or 'true', got '" + t.text + "'");
    auto head = take();
    if (head.text == "rel") {
      auto sym = take();
      if (!text::is_identifier(sym.text) || sym.text == "=") throw ParseError(sym.line, "bad relation symbol");
      std::vector<std::string> args;
      while (peek().text != ")") args.push_back(variable());
      expect(")");
      return Formula::rel(sym.text, std::move(args));
    }
    if (head.text == "=") {
      auto a = variable();
      auto b = variable();
      expect(")");
      return Formula::eq(a, b);
    }
    if (head.text == "and") {
      std::vector<Formula> parts;
      while (peek().text != ")") parts.push_back(parse());
      expect(")");
      return Formula::conj(std::move(parts));
    }
    if (head.text == "exists") {
      expect("(");
      std::vector<std::string> bound;
      while (peek().text != ")") bound.push_back(variable());
      expect(")");
      Formula body = parse();
      expect(")");
      try {
        return Formula::exists(std::move(bound), std::move(body));
      } catch (const Error& e) {
        throw ParseError(head.line, e.what());
      }
    }
    throw ParseError(head.line, "unknown formula head '" + head.text + "'");
  }

  std::vector<SexpToken> toks_;
  std::size_t pos_ = 0;
};

}  // namespace detail

// Parses `(rel SYM v1 .. vk)`, `(= a b)`, `(and f ..)`, `(exists (v ..) f)`
// and the literal `true`.
inline Formula parse_formula(std::string_view s) { return detail::FormulaParser(s).parse_all(); }

// Deterministic fresh-name source for capture-avoiding substitution.
class FreshNames {
 public:
  std::string next(const std::string& base) { return base + "$" + std::to_string(counter_++); }

 private:
  std::size_t counter_ = 0;
};

// Replaces free occurrences of variables per `subst`. Every bound variable is
// renamed through `fresh`, so no substituted name can be captured.
inline Formula substitute(const Formula& f, const std::map<std::string, std::string>& subst, FreshNames& fresh) {
  auto name = [&](const std::string& v) {
    auto it = subst.find(v);
    return it == subst.end() ? v : it->second;
  };
  switch (f.kind) {
    case Formula::Kind::Rel: {
      std::vector<std::string> args;
      for (const auto& v : f.vars) args.push_back(name(v));
      return Formula::rel(f.symbol, std::move(args));
    }
    case Formula::Kind::Eq:
      return Formula::eq(name(f.vars[0]), name(f.vars[1]));
    case Formula::Kind::And: {
      std::vector<Formula> parts;
      for (const auto& c : f.children) parts.push_back(substitute(c, subst, fresh));
      return Formula::conj(std::move(parts));
    }
    case Formula::Kind::Exists: {
      auto inner = subst;
      std::vector<std::string> bound;
      for (const auto& v : f.vars) {
        auto base = v.substr(0, v.find('$'));
        bound.push_back(fresh.next(base));
        inner[v] = bound.back();
      }
      return Formula::exists(std::move(bound), substitute(f.body(), inner, fresh));
    }
  }
  return f;
}

}  // namespace clonelab
