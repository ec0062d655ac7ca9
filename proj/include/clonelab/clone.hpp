#pragma once

#include <map>
#include <string>
#include <vector>

#include "clonelab/budget.hpp"
#include "clonelab/operation.hpp"

namespace clonelab {

struct CloneMember {
  OperationTable table;
  // "pi^k_i" for projections, otherwise "g<j>(#a,#b,...)": generator j
  // applied to earlier members of the same layer.
  std::string origin;
};

// The arity 1..K part of the clone generated by a set of operations.
struct CloneFragment {
  Element domain_size = 1;
  std::size_t max_arity = 0;
  std::vector<std::vector<CloneMember>> layers;  // layers[k-1] holds arity k

  const std::vector<CloneMember>& layer(std::size_t k) const { return layers.at(k - 1); }

  bool contains(const OperationTable& f) const {
    if (f.arity() < 1 || f.arity() > max_arity) return false;
    for (const auto& m : layer(f.arity()))
      if (m.table == f) return true;
    return false;
  }

  std::size_t size() const {
    std::size_t s = 0;
    for (const auto& l : layers) s += l.size();
    return s;
  }
};

// Layer k is the closure of the k projections under the generators applied
// pointwise: every k-ary term operation is a generator applied to k-ary term
// operations, so no intermediate arity above k is ever needed.
inline CloneFragment generate_clone(const std::vector<OperationTable>& gens, std::size_t max_arity,
                                    const Budget& budget = {}) {
  if (max_arity < 1) throw ShapeError("generate_clone: maximal arity must be at least 1");
  Element n = gens.empty() ? 1 : gens.front().domain_size();
  for (const auto& g : gens) {
    if (g.domain_size() != n) throw ShapeError("generate_clone: generators on different domains");
    if (g.arity() < 1) throw ShapeError("generate_clone: generators must have positive arity");
    if (g.arity() > max_arity) throw ShapeError("generate_clone: generator arity exceeds the maximal arity");
  }
  CloneFragment frag;
  frag.domain_size = n;
  frag.max_arity = max_arity;
  for (std::size_t k = 1; k <= max_arity; ++k) {
    budget.check("table entries of arity " + std::to_string(k), power_estimate(n, double(k)),
                 budget.max_table_entries);
    std::vector<CloneMember> members;
    std::map<std::vector<Element>, std::size_t> index;
    auto add = [&](OperationTable t, std::string origin) {
      if (index.count(t.values())) return;
      index.emplace(t.values(), members.size());
      members.push_back({std::move(t), std::move(origin)});
      budget.check("clone layer of arity " + std::to_string(k), double(members.size()), budget.max_elements);
    };
    for (std::size_t i = 1; i <= k; ++i)
      add(projection(n, k, i), "pi^" + std::to_string(k) + "_" + std::to_string(i));
    std::size_t done = 0;
    while (done < members.size()) {
      std::size_t frontier = members.size();
      for (std::size_t gi = 0; gi < gens.size(); ++gi) {
        const auto& g = gens[gi];
        std::vector<std::size_t> idx(g.arity(), 0);
        std::size_t bound = frontier;
        do {
          // Skip argument lists built only from members already combined.
          bool fresh = false;
          for (auto x : idx) fresh = fresh || x >= done;
          if (!fresh) continue;
          std::vector<OperationTable> args;
          args.reserve(idx.size());
          for (auto x : idx) args.push_back(members[x].table);
          std::string origin = "g" + std::to_string(gi + 1) + "(";
          for (std::size_t j = 0; j < idx.size(); ++j) origin += (j ? ",#" : "#") + std::to_string(idx[j]);
          add(compose(g, args), origin + ")");
        } while (next_index(idx, bound));
      }
      done = frontier;
    }
    frag.layers.push_back(std::move(members));
  }
  return frag;
}

}  // namespace clonelab
