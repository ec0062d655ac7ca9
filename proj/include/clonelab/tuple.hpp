#pragma once

#include <cstdint>
#include <vector>

#include "clonelab/errors.hpp"

namespace clonelab {

using Element = std::uint32_t;
using Tuple = std::vector<Element>;
// Rank of a tuple in lexicographic order, first coordinate most significant.
using Rank = std::uint64_t;

inline Rank ipow(Rank base, std::size_t exp) {
  Rank r = 1;
  for (std::size_t i = 0; i < exp; ++i) r *= base;
  return r;
}

inline Rank rank_of(const Tuple& t, Element n) {
  Rank r = 0;
  for (Element v : t) r = r * n + v;
  return r;
}

inline Tuple unrank(Rank r, Element n, std::size_t arity) {
  Tuple t(arity);
  for (std::size_t i = arity; i-- > 0;) {
    t[i] = static_cast<Element>(r % n);
    r /= n;
  }
  return t;
}

// Odometer over {0..n-1}^arity in lexicographic order. Returns false after the
// last tuple. An arity-0 odometer yields exactly one (empty) tuple.
inline bool next_tuple(Tuple& t, Element n) {
  for (std::size_t i = t.size(); i-- > 0;) {
    if (++t[i] < n) return true;
    t[i] = 0;
  }
  return false;
}

// Same odometer with a per-position bound.
inline bool next_index(std::vector<std::size_t>& idx, std::size_t bound) {
  for (std::size_t i = idx.size(); i-- > 0;) {
    if (++idx[i] < bound) return true;
    idx[i] = 0;
  }
  return false;
}

}  // namespace clonelab
