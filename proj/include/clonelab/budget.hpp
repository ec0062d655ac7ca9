#pragma once

#include <cmath>
#include <cstddef>
#include <string>

#include "clonelab/errors.hpp"

namespace clonelab {

// Resource limits shared by the exhaustive searches. Every search estimates
// its size up front and throws BudgetExceeded instead of running away.
struct Budget {
  // Full enumeration of k-ary tables on an n-set: n^(n^k) candidates.
  double max_candidates = 16777216.0;  // 2^24
  // Table entries of a single polymorphism search (n^k), also the variable
  // count of canonical pp-formulas.
  double max_table_entries = 65536.0;
  // Elements of a power A^n, a generated subalgebra, or a clone layer.
  double max_elements = 1048576.0;
  // Set partitions enumerated by congruence search.
  double max_partitions = 2000000.0;
  // Worker threads for searches that partition their candidate space.
  unsigned jobs = 1;

  void check(const std::string& what, double estimate, double limit) const {
    if (!(estimate <= limit)) throw BudgetExceeded(what, estimate, limit);
  }
};

// n^e as a double, saturating at infinity.
inline double power_estimate(double n, double e) { return std::pow(n, e); }

}  // namespace clonelab
