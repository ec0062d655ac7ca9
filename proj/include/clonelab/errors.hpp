#pragma once

#include <cstddef>
#include <cstdio>
#include <stdexcept>
#include <string>

namespace clonelab {

// Base of every error raised by the library. The CLI maps BudgetExceeded to
// exit code 3 and everything else to exit code 2.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class ParseError : public Error {
 public:
  ParseError(std::size_t line, const std::string& reason)
      : Error("line " + std::to_string(line) + ": " + reason), line_(line), reason_(reason) {}
  std::size_t line() const noexcept { return line_; }
  const std::string& reason() const noexcept { return reason_; }

 private:
  std::size_t line_;
  std::string reason_;
};

class DomainError : public Error { using Error::Error; };
class ArityMismatch : public Error { using Error::Error; };
class UnknownRelation : public Error { using Error::Error; };
class UnboundVariable : public Error { using Error::Error; };
class NotASentence : public Error { using Error::Error; };
class ShapeError : public Error { using Error::Error; };
class IndexError : public Error { using Error::Error; };
class SignatureMismatch : public Error { using Error::Error; };
class EmptyGenerators : public Error { using Error::Error; };
class NotACongruence : public Error { using Error::Error; };
class NotDefinableError : public Error { using Error::Error; };
class MissingMap : public Error { using Error::Error; };
class UnknownTargetRelation : public Error { using Error::Error; };
class UndeclaredVariable : public Error { using Error::Error; };
class EvalError : public Error { using Error::Error; };

class BudgetExceeded : public Error {
 public:
  BudgetExceeded(const std::string& what, double estimate, double limit)
      : Error(what + ": estimate " + fmt_num(estimate) + " exceeds limit " + fmt_num(limit)),
        estimate_(estimate),
        limit_(limit) {}
  double estimate() const noexcept { return estimate_; }
  double limit() const noexcept { return limit_; }

 private:
  static std::string fmt_num(double v) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.6g", v);
    return buf;
  }
  double estimate_;
  double limit_;
};

}  // namespace clonelab
