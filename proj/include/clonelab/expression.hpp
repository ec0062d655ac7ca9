#pragma once

#include <memory>
#include <string>
#include <string_view>
#include <vector>

#include "clonelab/errors.hpp"
#include "clonelab/formula.hpp"
#include "clonelab/rational.hpp"

namespace clonelab {

// Arithmetic over rationals: constants, variables x1..xk, + - * min max.
// `(- a)` negates; `(- a b ...)` subtracts left to right.
struct Expr {
  enum class Kind { Const, Var, Add, Sub, Mul, Min, Max };
  Kind kind = Kind::Const;
  Rational value;
  std::size_t var = 0;  // 1-based
  std::vector<std::shared_ptr<const Expr>> args;
};
using ExprPtr = std::shared_ptr<const Expr>;

inline ExprPtr constant(Rational v) {
  auto e = std::make_shared<Expr>();
  e->value = std::move(v);
  return e;
}

inline ExprPtr variable(std::size_t i) {
  auto e = std::make_shared<Expr>();
  e->kind = Expr::Kind::Var;
  e->var = i;
  return e;
}

inline ExprPtr apply(Expr::Kind k, std::vector<ExprPtr> args) {
  auto e = std::make_shared<Expr>();
  e->kind = k;
  e->args = std::move(args);
  return e;
}

inline Rational eval(const Expr& e, const std::vector<Rational>& x) {
  switch (e.kind) {
    case Expr::Kind::Const: return e.value;
    case Expr::Kind::Var:
      if (e.var < 1 || e.var > x.size()) throw EvalError("variable x" + std::to_string(e.var) + " outside the argument list");
      return x[e.var - 1];
    case Expr::Kind::Sub: {
      Rational r = eval(*e.args[0], x);
      if (e.args.size() == 1) return -r;
      for (std::size_t i = 1; i < e.args.size(); ++i) r -= eval(*e.args[i], x);
      return r;
    }
    default: {
      Rational r = eval(*e.args[0], x);
      for (std::size_t i = 1; i < e.args.size(); ++i) {
        Rational v = eval(*e.args[i], x);
        if (e.kind == Expr::Kind::Add) r += v;
        else if (e.kind == Expr::Kind::Mul) r *= v;
        else if (e.kind == Expr::Kind::Min) r = v < r ? v : r;
        else r = v > r ? v : r;
      }
      return r;
    }
  }
}

// Largest variable index used.
inline std::size_t arity(const Expr& e) {
  std::size_t k = e.kind == Expr::Kind::Var ? e.var : 0;
  for (const auto& a : e.args) k = std::max(k, arity(*a));
  return k;
}

inline std::string to_string(const Expr& e) {
  switch (e.kind) {
    case Expr::Kind::Const: return to_string(e.value);
    case Expr::Kind::Var: return "x" + std::to_string(e.var);
    default: break;
  }
  static const char* ops[] = {"", "", "+", "-", "*", "min", "max"};
  std::string out = "(" + std::string(ops[static_cast<int>(e.kind)]);
  for (const auto& a : e.args) out += " " + to_string(*a);
  return out + ")";
}

// Replaces x_i by gs[i-1].
inline ExprPtr compose(const ExprPtr& f, const std::vector<ExprPtr>& gs) {
  if (f->kind == Expr::Kind::Var) {
    if (f->var < 1 || f->var > gs.size()) throw ShapeError("composition is missing argument x" + std::to_string(f->var));
    return gs[f->var - 1];
  }
  if (f->kind == Expr::Kind::Const) return f;
  std::vector<ExprPtr> args;
  for (const auto& a : f->args) args.push_back(compose(a, gs));
  return apply(f->kind, std::move(args));
}

namespace detail {

class ExprParser {
 public:
  explicit ExprParser(std::string_view s) : toks_(sexp_tokens(s)) {}

  ExprPtr parse_all() {
    if (toks_.empty()) throw ParseError(1, "empty expression");
    auto e = parse();
    if (pos_ < toks_.size()) throw ParseError(toks_[pos_].line, "unexpected '" + toks_[pos_].text + "' after expression");
    return e;
  }

 private:
  ExprPtr parse() {
    if (pos_ >= toks_.size()) throw ParseError(toks_.empty() ? 1 : toks_.back().line, "unexpected end of expression");
    const auto& t = toks_[pos_++];
    if (t.text == ")") throw ParseError(t.line, "unexpected ')'");
    if (t.text != "(") return atom(t);
    if (pos_ >= toks_.size()) throw ParseError(t.line, "unexpected end of expression");
    const auto& op = toks_[pos_++];
    Expr::Kind k;
    if (op.text == "+") k = Expr::Kind::Add;
    else if (op.text == "-") k = Expr::Kind::Sub;
    else if (op.text == "*") k = Expr::Kind::Mul;
    else if (op.text == "min") k = Expr::Kind::Min;
    else if (op.text == "max") k = Expr::Kind::Max;
    else throw ParseError(op.line, "unknown operator '" + op.text + "'");
    std::vector<ExprPtr> args;
    while (pos_ < toks_.size() && toks_[pos_].text != ")") args.push_back(parse());
    if (pos_ >= toks_.size()) throw ParseError(op.line, "missing ')'");
    ++pos_;
    if (args.empty()) throw ParseError(op.line, "'" + op.text + "' needs at least one argument");
    return apply(k, std::move(args));
  }

  static ExprPtr atom(const SexpToken& t) {
    if (t.text.size() > 1 && t.text[0] == 'x') {
      std::size_t i = 0;
      try {
        i = static_cast<std::size_t>(text::parse_uint(t.text.substr(1), t.line, "variable index"));
      } catch (const ParseError&) {
        throw ParseError(t.line, "invalid variable '" + t.text + "'");
      }
      if (i == 0) throw ParseError(t.line, "variables are numbered from x1");
      return variable(i);
    }
    try {
      return constant(parse_rational(t.text));
    } catch (const ParseError&) {
      throw ParseError(t.line, "expected a number or a variable x<i>, got '" + t.text + "'");
    }
  }

  std::vector<SexpToken> toks_;
  std::size_t pos_ = 0;
};

}  // namespace detail

inline ExprPtr parse_expression(std::string_view s) { return detail::ExprParser(s).parse_all(); }

}  // namespace clonelab
