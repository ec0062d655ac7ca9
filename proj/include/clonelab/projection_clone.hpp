#pragma once

#include <cstddef>
#include <string>
#include <vector>

#include "clonelab/errors.hpp"

namespace clonelab {

// An element π^k_i of the abstract clone of projections (1-based i).
struct Projection {
  std::size_t arity = 1;
  std::size_t index = 1;

  Projection() = default;
  Projection(std::size_t k, std::size_t i) : arity(k), index(i) {
    if (i < 1 || i > k) throw IndexError("projection index " + std::to_string(i) + " outside 1.." + std::to_string(k));
  }

  bool operator==(const Projection&) const = default;
};

inline std::string to_string(const Projection& p) {
  return "pi^" + std::to_string(p.arity) + "_" + std::to_string(p.index);
}

// π^k_i(g_1, ..., g_k) = g_i; all g_j share one arity.
inline Projection compose(const Projection& p, const std::vector<Projection>& gs) {
  if (gs.size() != p.arity) throw ShapeError("composition needs " + std::to_string(p.arity) + " arguments");
  for (const auto& g : gs)
    if (g.arity != gs.front().arity) throw ShapeError("inner projections differ in arity");
  return gs[p.index - 1];
}

}  // namespace clonelab
