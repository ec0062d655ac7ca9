#include <gtest/gtest.h>

#include <random>

#include "clonelab/algebra.hpp"

using namespace clonelab;

namespace {

Algebra binary(const std::string& name, std::vector<Element> vals) {
  Algebra a(name, 2);
  a.add_operation("f", OperationTable(2, 2, std::move(vals)));
  return a;
}

const Algebra kAnd = binary("AND", {0, 0, 0, 1});
const Algebra kXor = binary("XOR", {0, 1, 1, 0});

Algebra one_element() {
  Algebra a("one", 1);
  a.add_operation("f", OperationTable(1, 2, {0}));
  return a;
}

Rank r2(Element x, Element y) { return rank_of(Tuple{x, y}, 2); }

// Naive fixpoint: apply every operation to every argument tuple until stable.
std::set<Element> naive_closure(const Algebra& a, std::set<Element> s) {
  while (true) {
    auto before = s.size();
    for (const auto& op : a.ops()) {
      std::vector<Element> cur(s.begin(), s.end());
      std::vector<std::size_t> idx(op.table.arity(), 0);
      if (op.table.arity() == 0) {
        s.insert(op.table(Tuple{}));
        continue;
      }
      do {
        Tuple t;
        for (auto i : idx) t.push_back(cur[i]);
        s.insert(op.table(t));
      } while (next_index(idx, cur.size()));
    }
    if (s.size() == before) return s;
  }
}

// Congruence by definition: equivalence pairs preserved by each operation
// applied to pairs of related argument tuples.
bool naive_is_congruence(const Algebra& a, const std::vector<Element>& label) {
  for (const auto& op : a.ops()) {
    std::size_t k = op.table.arity();
    Tuple s(k, 0);
    do {
      Tuple t(k, 0);
      do {
        bool related = true;
        for (std::size_t j = 0; j < k; ++j) related = related && label[s[j]] == label[t[j]];
        if (related && label[op.table(s)] != label[op.table(t)]) return false;
      } while (next_tuple(t, a.size()));
    } while (next_tuple(s, a.size()));
  }
  return true;
}

Algebra random_algebra(std::mt19937& rng, Element n) {
  Algebra a("R", n);
  std::size_t ops = 1 + rng() % 2;
  for (std::size_t o = 0; o < ops; ++o) {
    std::size_t k = rng() % 3;
    std::vector<Element> v(ipow(n, k));
    for (auto& x : v) x = static_cast<Element>(rng() % n);
    a.add_operation("f" + std::to_string(o), OperationTable(n, k, v));
  }
  return a;
}

}  // namespace

TEST(AlgebraFile, RoundTrip) {
  auto a = parse_algebra("algebra XOR\ndomain 2\nop f 2\nvalues 0 1 1 0\nend\n");
  EXPECT_EQ(a, kXor);
  EXPECT_EQ(parse_algebra(serialize(a)), a);
  EXPECT_THROW(parse_algebra("algebra A\ndomain 2\nop f 2\nvalues 0 1 1\nend\n"), ParseError);
  EXPECT_THROW(parse_algebra("algebra A\ndomain 2\nop f 1\nvalues 0 2\nend\n"), DomainError);
  EXPECT_THROW(parse_algebra("algebra A\ndomain 2\nop f 1\nvalues 0 1\n"), ParseError);
}

TEST(Power, AndSquared) {
  auto p = power(kAnd, 2);
  EXPECT_EQ(p.size(), 4u);
  EXPECT_EQ(p.op(0).table(Tuple{static_cast<Element>(r2(0, 1)), static_cast<Element>(r2(1, 0))}), r2(0, 0));
  Tuple t(2, 0);
  do {
    auto x = unrank(t[0], 2, 2), y = unrank(t[1], 2, 2);
    EXPECT_EQ(p.op(0).table(t), r2(x[0] & y[0], x[1] & y[1]));
  } while (next_tuple(t, 4));
}

TEST(Power, FirstPowerIsIdentity) { EXPECT_EQ(power(kXor, 1).op(0).table, kXor.op(0).table); }

TEST(Power, Budget) {
  Budget b;
  b.max_elements = 8;
  EXPECT_THROW(power(kAnd, 4, b), BudgetExceeded);
}

TEST(Subalgebra, Examples) {
  auto p = power(kAnd, 2);
  auto e01 = static_cast<Element>(r2(0, 1)), e10 = static_cast<Element>(r2(1, 0));
  EXPECT_EQ(subalgebra_generated(p, {e01}), (std::vector<Element>{e01}));
  EXPECT_EQ(subalgebra_generated(p, {e01, e10}), (std::vector<Element>{static_cast<Element>(r2(0, 0)), e01, e10}));
  EXPECT_EQ(subalgebra_generated(p, {0, 1, 2, 3}).size(), 4u);
  EXPECT_THROW(subalgebra_generated(p, {}), EmptyGenerators);
}

TEST(Subalgebra, ConstantsWithoutGenerators) {
  Algebra a("c", 3);
  a.add_operation("c", OperationTable(3, 0, {2}));
  EXPECT_EQ(subalgebra_generated(a, {}), (std::vector<Element>{2}));
}

TEST(Subalgebra, MatchesNaiveClosure) {
  std::mt19937 rng(7);
  for (int trial = 0; trial < 300; ++trial) {
    auto a = random_algebra(rng, 2 + rng() % 4);
    std::set<Element> g{static_cast<Element>(rng() % a.size())};
    if (rng() % 2) g.insert(static_cast<Element>(rng() % a.size()));
    auto got = subalgebra_generated(a, {g.begin(), g.end()});
    auto want = naive_closure(a, g);
    EXPECT_EQ(got, (std::vector<Element>(want.begin(), want.end())));
  }
}

TEST(Congruences, Examples) {
  EXPECT_EQ(congruences(kAnd).size(), 2u);
  Algebra c("c0", 3);
  c.add_operation("g", OperationTable(3, 1, {0, 0, 0}));
  auto cs = congruences(c);
  ASSERT_EQ(cs.size(), 5u);
  EXPECT_EQ(cs.front().blocks.size(), 1u);
  EXPECT_EQ(cs.back().blocks.size(), 3u);
  EXPECT_EQ(congruences(one_element()).size(), 1u);
}

TEST(Congruences, MatchDefinition) {
  std::mt19937 rng(9);
  for (int trial = 0; trial < 100; ++trial) {
    auto a = random_algebra(rng, 2 + rng() % 3);
    auto cs = congruences(a);
    std::size_t count = 0;
    // Every labelling with labels < n; dedupe through canonical form.
    std::set<std::vector<std::vector<Element>>> seen;
    Tuple l(a.size(), 0);
    do {
      auto c = Congruence::from_labels(l);
      if (!seen.insert(c.blocks).second) continue;
      if (naive_is_congruence(a, l)) {
        ++count;
        EXPECT_NE(std::find(cs.begin(), cs.end(), c), cs.end());
      }
    } while (next_tuple(l, a.size()));
    EXPECT_EQ(cs.size(), count);
    for (std::size_t i = 1; i < cs.size(); ++i) EXPECT_LE(cs[i - 1].blocks.size(), cs[i].blocks.size());
  }
}

TEST(Quotient, EqualityAndTotal) {
  auto eq = quotient(kAnd, Congruence{{{0}, {1}}});
  EXPECT_EQ(eq.algebra.op(0).table, kAnd.op(0).table);
  auto tot = quotient(kAnd, Congruence{{{0, 1}}});
  EXPECT_EQ(tot.algebra.size(), 1u);
  EXPECT_EQ(tot.algebra.op(0).table.values(), (std::vector<Element>{0}));
}

TEST(Quotient, NotACongruence) {
  Algebra c("c", 3);
  c.add_operation("g", OperationTable(3, 1, {1, 2, 0}));
  EXPECT_THROW(quotient(c, Congruence{{{0, 1}, {2}}}), NotACongruence);
}

TEST(Quotient, ProjectionIsSurjectiveHomomorphism) {
  std::mt19937 rng(13);
  for (int trial = 0; trial < 60; ++trial) {
    auto a = random_algebra(rng, 2 + rng() % 3);
    for (const auto& c : congruences(a)) {
      auto q = quotient(a, c);
      EXPECT_TRUE(is_homomorphism(a, q.algebra, q.projection));
      std::set<Element> image(q.projection.begin(), q.projection.end());
      EXPECT_EQ(image.size(), q.algebra.size());
    }
  }
}

TEST(Hsp, SelfMembership) {
  auto r = hsp_fin_member(kAnd, kAnd, 1);
  ASSERT_EQ(r.kind, HspResult::Kind::Certificate);
  const auto& c = *r.certificate;
  EXPECT_EQ(c.power, 1u);
  EXPECT_EQ(c.subalgebra, (std::vector<Rank>{0, 1}));
  EXPECT_EQ(c.h.at(0), 0u);
  EXPECT_EQ(c.h.at(1), 1u);
  EXPECT_TRUE(verify_certificate(kAnd, kAnd, c));
}

TEST(Hsp, XorDoesNotGenerateAnd) {
  auto r = hsp_fin_member(kXor, kAnd, 4);
  EXPECT_EQ(r.kind, HspResult::Kind::NotMember);
  auto partial = hsp_fin_member(kXor, kAnd, 3);
  EXPECT_EQ(partial.kind, HspResult::Kind::Exhausted);
}

TEST(Hsp, OneElementImage) {
  auto r = hsp_fin_member(kAnd, one_element(), 1);
  ASSERT_EQ(r.kind, HspResult::Kind::Certificate);
  EXPECT_TRUE(verify_certificate(kAnd, one_element(), *r.certificate));
  EXPECT_EQ(r.certificate->kernel.blocks.size(), 1u);
}

TEST(Hsp, SignatureMismatch) {
  Algebra u("u", 2);
  u.add_operation("g", OperationTable(2, 1, {1, 0}));
  EXPECT_THROW(hsp_fin_member(kAnd, u, 2), SignatureMismatch);
  EXPECT_THROW(natural_homomorphism_exists(kAnd, u), SignatureMismatch);
}

TEST(Hsp, TamperedCertificateFails) {
  auto c = *hsp_fin_member(kAnd, kAnd, 1).certificate;
  c.h[0] = 1;
  EXPECT_FALSE(verify_certificate(kAnd, kAnd, c));
  auto d = *hsp_fin_member(kAnd, kAnd, 1).certificate;
  d.subalgebra.pop_back();
  EXPECT_FALSE(verify_certificate(kAnd, kAnd, d));
}

TEST(Hsp, LeastPowerFirst) {
  // XOR on Z/2 squared: B = A^2 itself, reachable at n = 2 but not n = 1.
  auto b = power(kXor, 2);
  auto r = hsp_fin_member(kXor, b, 2);
  ASSERT_EQ(r.kind, HspResult::Kind::Certificate);
  EXPECT_EQ(r.certificate->power, 2u);
  EXPECT_TRUE(verify_certificate(kXor, b, *r.certificate));
}

TEST(NatHom, Examples) {
  EXPECT_EQ(natural_homomorphism_exists(kAnd, kAnd).kind, NatHomResult::Kind::Exists);
  auto r = natural_homomorphism_exists(kXor, kAnd);
  ASSERT_EQ(r.kind, NatHomResult::Kind::Fails);
  EXPECT_EQ(to_string(*r.witness->s, kXor), "f(x,x)");
  EXPECT_EQ(to_string(*r.witness->t, kXor), "f(y,y)");
  EXPECT_TRUE(verify_equation_witness(kXor, kAnd, *r.witness));
  EXPECT_EQ(natural_homomorphism_exists(kAnd, one_element()).kind, NatHomResult::Kind::Exists);
}

TEST(NatHom, GridConsistency) {
  for (Rank i = 0; i < 16; ++i)
    for (Rank j = 0; j < 16; ++j) {
      auto a = binary("A", unrank(i, 2, 4)), b = binary("B", unrank(j, 2, 4));
      auto h = hsp_fin_member(a, b, 4);
      ASSERT_NE(h.kind, HspResult::Kind::Exhausted);
      if (h.certificate) {
        EXPECT_TRUE(verify_certificate(a, b, *h.certificate));
      }
      auto nh = natural_homomorphism_exists(a, b);
      if (nh.kind == NatHomResult::Kind::Fails) {
        EXPECT_TRUE(verify_equation_witness(a, b, *nh.witness));
        EXPECT_EQ(h.kind, HspResult::Kind::NotMember) << i << " " << j;
      }
      if (nh.kind == NatHomResult::Kind::Exists) {
        EXPECT_EQ(h.kind, HspResult::Kind::Certificate);
      }
    }
}
