#include <gtest/gtest.h>

#include <algorithm>
#include <numeric>
#include <random>

#include "clonelab/betweenness.hpp"

using namespace clonelab;

namespace {

// Every permutation of the variables, checked against the definition.
bool sat_by_enumeration(const BetwInstance& inst) {
  std::vector<std::size_t> perm(inst.vars.size());
  std::iota(perm.begin(), perm.end(), 0);
  do {
    std::vector<Rational> val(perm.size());
    for (std::size_t i = 0; i < perm.size(); ++i) val[perm[i]] = Rational(static_cast<long>(i));
    bool ok = true;
    for (const auto& c : inst.constraints) ok = ok && betw(val[c[0]], val[c[1]], val[c[2]]);
    if (ok) return true;
  } while (std::next_permutation(perm.begin(), perm.end()));
  return false;
}

BetwInstance instance(std::vector<std::string> vars, std::vector<std::array<std::string, 3>> cons) {
  BetwInstance inst;
  inst.vars = std::move(vars);
  for (const auto& c : cons) inst.add(c[0], c[1], c[2]);
  return inst;
}

FunctionSample sample(const std::string& expr, std::vector<std::vector<long>> pts) {
  auto f = parse_expression(expr);
  std::vector<Point> ps;
  for (const auto& p : pts) {
    Point q;
    for (long v : p) q.emplace_back(v);
    ps.push_back(q);
  }
  return sample_function(*f, pts.empty() ? 2 : pts[0].size(), ps);
}

}  // namespace

TEST(Rational, ParsesAndPrintsCanonically) {
  EXPECT_EQ(to_string(parse_rational("6/4")), "3/2");
  EXPECT_EQ(to_string(parse_rational("-2/4")), "-1/2");
  EXPECT_EQ(to_string(parse_rational("8/4")), "2");
  EXPECT_EQ(parse_rational("1/3") + parse_rational("2/3"), Rational(1));
  EXPECT_LT(parse_rational("-1/2"), parse_rational("-1/3"));
  EXPECT_THROW(parse_rational("1/0"), DomainError);
  EXPECT_THROW(parse_rational("1/-2"), ParseError);
  EXPECT_THROW(parse_rational("x"), ParseError);
}

TEST(Betw, Definition) {
  EXPECT_TRUE(betw(0, 1, 2));
  EXPECT_TRUE(betw(2, 1, 0));
  EXPECT_FALSE(betw(0, 2, 1));
  EXPECT_FALSE(betw(0, 0, 1));
}

TEST(Expression, ParseEvalPrint) {
  auto e = parse_expression("(max (- x1) (* 1/2 x2) (min x1 3))");
  EXPECT_EQ(to_string(*e), "(max (- x1) (* 1/2 x2) (min x1 3))");
  EXPECT_EQ(arity(*e), 2u);
  EXPECT_EQ(eval(*e, {Rational(-4), Rational(2)}), Rational(4));
  EXPECT_EQ(eval(*parse_expression("(- x1 x2 1)"), {Rational(5), Rational(2)}), Rational(2));
  EXPECT_THROW(parse_expression("(pow x1 2)"), ParseError);
  EXPECT_THROW(parse_expression("(+ x1"), ParseError);
  EXPECT_THROW(parse_expression("x0"), ParseError);
  EXPECT_THROW(parse_expression("(+)"), ParseError);
  EXPECT_THROW(eval(*parse_expression("x3"), {Rational(1)}), EvalError);
}

TEST(Expression, Compose) {
  auto f = parse_expression("(+ x1 (* 2 x2))");
  auto h = compose(f, {parse_expression("x2"), parse_expression("(- x1)")});
  EXPECT_EQ(to_string(*h), "(+ x2 (* 2 (- x1)))");
  EXPECT_THROW(compose(f, {parse_expression("x1")}), ShapeError);
}

TEST(BetwSolve, SingleConstraintGivesIncreasingOrder) {
  auto inst = instance({"a", "b", "c"}, {{"a", "b", "c"}});
  auto s = solve_betweenness(inst);
  ASSERT_TRUE(s);
  EXPECT_EQ(s.order, (std::vector<std::size_t>{0, 1, 2}));
}

TEST(BetwSolve, CyclicPairIsUnsat) {
  EXPECT_FALSE(solve_betweenness(instance({"a", "b", "c"}, {{"a", "b", "c"}, {"b", "c", "a"}})));
}

TEST(BetwSolve, SharedEndpointsSat) {
  auto inst = instance({"a", "b", "c", "d"}, {{"a", "b", "c"}, {"c", "d", "a"}});
  auto s = solve_betweenness(inst);
  ASSERT_TRUE(s);
  EXPECT_TRUE(verify_order(inst, s.order));
  EXPECT_TRUE(sat_by_enumeration(inst));
}

TEST(BetwSolve, RepeatedVariableIsUnsat) {
  EXPECT_FALSE(solve_betweenness(instance({"a", "b"}, {{"a", "a", "b"}})));
}

TEST(BetwSolve, EmptyInstances) {
  EXPECT_TRUE(solve_betweenness(BetwInstance{}));
  EXPECT_TRUE(solve_betweenness(instance({"a"}, {})));
}

TEST(BetwSolve, UndeclaredVariable) {
  BetwInstance inst;
  inst.vars = {"a", "b"};
  EXPECT_THROW(inst.add("a", "b", "z"), UndeclaredVariable);
  EXPECT_THROW(parse_betw_instance("vars a b c\nbetw a b d\n"), UndeclaredVariable);
}

TEST(BetwSolve, FileRoundTrip) {
  auto inst = parse_betw_instance("# cyclic\nvars a b c\nbetw a b c\nbetw b c a\n");
  EXPECT_EQ(inst.constraints.size(), 2u);
  EXPECT_EQ(serialize(parse_betw_instance(serialize(inst))), serialize(inst));
  EXPECT_THROW(parse_betw_instance("betw a b c\n"), ParseError);
  EXPECT_THROW(parse_betw_instance("vars a b c\nbetw a b\n"), ParseError);
  EXPECT_THROW(parse_betw_instance("vars a a\n"), ParseError);
}

TEST(BetwSolve, AgreesWithEnumerationOnRandomInstances) {
  std::mt19937 rng(7);
  for (int it = 0; it < 300; ++it) {
    std::size_t n = std::uniform_int_distribution<std::size_t>(3, 6)(rng);
    BetwInstance inst;
    for (std::size_t i = 0; i < n; ++i) inst.vars.push_back("v" + std::to_string(i));
    std::size_t m = std::uniform_int_distribution<std::size_t>(0, 7)(rng);
    std::uniform_int_distribution<std::size_t> pick(0, n - 1);
    for (std::size_t j = 0; j < m; ++j) inst.constraints.push_back({pick(rng), pick(rng), pick(rng)});
    auto s = solve_betweenness(inst);
    ASSERT_EQ(static_cast<bool>(s), sat_by_enumeration(inst)) << serialize(inst);
    if (s) {
      EXPECT_TRUE(verify_order(inst, s.order));
    }
  }
}

TEST(Sample, ParseAndFunctionality) {
  auto fs = parse_sample("arity 2\n0 1/2 -> 3\n-1 2 -> -4/6\n");
  ASSERT_EQ(fs.size(), 2u);
  EXPECT_EQ(fs[1].value, parse_rational("-2/3"));
  EXPECT_EQ(serialize(parse_sample(serialize(fs))), serialize(fs));
  EXPECT_NO_THROW(parse_sample("arity 1\n0 -> 1\n0 -> 1\n"));
  EXPECT_THROW(parse_sample("arity 1\n0 -> 1\n0 -> 2\n"), ParseError);
  EXPECT_THROW(parse_sample("arity 2\n0 -> 1\n"), ParseError);
  EXPECT_THROW(parse_sample("0 1 -> 1\n"), ParseError);
  FunctionSample raw(2);
  EXPECT_THROW(raw.add({Rational(1)}, Rational(0)), ShapeError);
}

TEST(PartialPolymorphism, ProjectionIsConsistent) {
  auto fs = sample("x1", {{0, 2}, {1, 1}, {2, 0}, {3, 5}, {-1, 4}});
  EXPECT_TRUE(check_partial_polymorphism(fs));
}

TEST(PartialPolymorphism, MinViolates) {
  auto fs = sample("(min x1 x2)", {{0, 2}, {1, 1}, {2, 0}});
  auto r = check_partial_polymorphism(fs);
  ASSERT_FALSE(r);
  EXPECT_EQ(r.rows, (std::array<std::size_t, 3>{0, 1, 2}));
  EXPECT_EQ(fs[0].value, Rational(0));
  EXPECT_EQ(fs[1].value, Rational(1));
  EXPECT_EQ(fs[2].value, Rational(0));
}

TEST(PartialPolymorphism, SumViolates) {
  auto fs = sample("(+ x1 x2)", {{0, 2}, {1, 1}, {2, 0}});
  auto r = check_partial_polymorphism(fs);
  ASSERT_FALSE(r);
  for (auto i : r.rows) EXPECT_EQ(fs[i].value, Rational(2));
}

TEST(Classify, ProjectionIncreasing) {
  auto c = classify(sample("x1", {{0, 0}, {1, -1}, {2, 3}, {-1, 1}}));
  ASSERT_EQ(c.kind, Classification::Kind::Classified);
  EXPECT_EQ(c.candidate, (Candidate{1, true}));
}

TEST(Classify, NegationDecreasing) {
  auto c = classify(sample("(- x1)", {{0, 0}, {1, -1}, {2, 3}, {-1, 1}}));
  ASSERT_EQ(c.kind, Classification::Kind::Classified);
  EXPECT_EQ(c.candidate, (Candidate{1, false}));
}

TEST(Classify, SumIsUnclassifiable) {
  auto c = classify(sample("(+ x1 x2)", {{0, 0}, {1, -1}}));
  ASSERT_EQ(c.kind, Classification::Kind::Unclassifiable);
  EXPECT_EQ(c.violations.size(), 4u);
  EXPECT_EQ(c.violations.at(Candidate{1, true}), (std::pair<std::size_t, std::size_t>{0, 1}));
  EXPECT_EQ(c.violations.at(Candidate{2, true}), (std::pair<std::size_t, std::size_t>{1, 0}));
}

TEST(Classify, NoDistinctPairsIsAmbiguous) {
  auto c = classify(sample("x1", {{0, 0}, {0, 1}}));
  EXPECT_EQ(c.kind, Classification::Kind::Ambiguous);
  EXPECT_EQ(c.survivors.size(), 4u);
  EXPECT_EQ(classify(FunctionSample(3)).survivors.size(), 6u);
}

TEST(Classify, ClosedUnderSupersets) {
  std::mt19937 rng(11);
  const char* exprs[] = {"x1", "(- x2)", "(+ x1 x2)", "(min x1 x2)", "(+ (* 5 x2) x1)", "(max x1 (* 3 x2))"};
  for (int it = 0; it < 60; ++it) {
    auto f = parse_expression(exprs[it % 6]);
    std::uniform_int_distribution<long> v(-3, 3);
    std::vector<Point> pts;
    for (int r = 0; r < 8; ++r) pts.push_back({Rational(v(rng)), Rational(v(rng))});
    std::sort(pts.begin(), pts.end());
    pts.erase(std::unique(pts.begin(), pts.end()), pts.end());
    std::vector<Point> prefix;
    std::vector<Candidate> prev;
    bool first = true;
    for (const auto& p : pts) {
      prefix.push_back(p);
      auto c = classify(sample_function(*f, 2, prefix));
      if (!first) {
        EXPECT_TRUE(std::includes(prev.begin(), prev.end(), c.survivors.begin(), c.survivors.end()));
      }
      prev = c.survivors;
      first = false;
    }
  }
}

TEST(Classify, MonotoneInOneCoordinate) {
  std::mt19937 rng(3);
  for (int it = 0; it < 40; ++it) {
    std::size_t k = std::uniform_int_distribution<std::size_t>(1, 4)(rng);
    std::size_t d = std::uniform_int_distribution<std::size_t>(1, k)(rng);
    bool inc = it % 2 == 0;
    std::string xd = "x" + std::to_string(d);
    auto f = parse_expression(inc ? "(+ (* 3 " + xd + ") (min " + xd + " 1))" : "(- (* 1/2 " + xd + "))");
    auto fs = sample_function(*f, k, grid_points(k, -1, 1));
    auto c = classify(fs);
    ASSERT_EQ(c.kind, Classification::Kind::Classified) << to_string(*f);
    EXPECT_EQ(c.candidate, (Candidate{d, inc}));
  }
}

TEST(Observation, ProjectionHolds) {
  EXPECT_TRUE(check_observation(sample("x2", {{0, 0}, {1, -1}, {2, 3}, {-1, 1}})));
}

TEST(Observation, SumCounterexample) {
  auto r = check_observation(sample("(+ x1 x2)", {{0, 0}, {1, -1}, {0, 0}, {2, -1}}));
  ASSERT_FALSE(r);
  EXPECT_EQ(r.rows, (std::array<std::size_t, 4>{0, 1, 0, 3}));
}

TEST(Observation, EmptyHolds) { EXPECT_TRUE(check_observation(FunctionSample(2))); }

TEST(Falsifier, SumWithGivenWitnesses) {
  auto f = parse_expression("(+ x1 x2)");
  std::vector<std::optional<WitnessPair>> w{WitnessPair{{0, 0}, {1, -1}}, WitnessPair{{0, 0}, {-1, 1}}};
  auto tr = run_falsifier(*f, 2, w);
  ASSERT_EQ(tr.kind, FalsifierTrace::Kind::Violation);
  ASSERT_TRUE(tr.violation);
  EXPECT_TRUE(verify_violation(*f, *tr.violation));
  EXPECT_EQ(tr.sign, 1);
}

TEST(Falsifier, ProjectionNotApplicable) {
  auto f = parse_expression("x1");
  auto fs = sample_function(*f, 2, grid_points(2, -2, 2));
  auto cls = classify(fs);
  auto tr = run_falsifier(*f, 2, falsifier_witnesses(*f, 2, fs, cls));
  EXPECT_EQ(tr.kind, FalsifierTrace::Kind::NotApplicable);
  EXPECT_FALSE(tr.violation);
}

TEST(Falsifier, DifferenceFailsPrecondition) {
  auto f = parse_expression("(- x1 x2)");
  auto tr = run_falsifier(*f, 2, {});
  ASSERT_EQ(tr.kind, FalsifierTrace::Kind::PreconditionFailed);
  ASSERT_TRUE(tr.violation);
  EXPECT_EQ(tr.violation->args[2], (Point{2, 2}));
  EXPECT_TRUE(verify_violation(*f, *tr.violation));
}

TEST(Falsifier, RejectsInvalidWitnesses) {
  auto f = parse_expression("(+ x1 x2)");
  std::vector<std::optional<WitnessPair>> w{WitnessPair{{0, 0}, {1, 1}}, WitnessPair{{0, 0}, {-1, 1}}};
  EXPECT_EQ(run_falsifier(*f, 2, w).kind, FalsifierTrace::Kind::NotApplicable);
}

TEST(Falsifier, TraceInvariants) {
  const char* exprs[] = {"(+ x1 x2)", "(min x1 x2)", "(max x1 x2)", "(- (+ x1 x2 x3))", "(min (* 2 x1) (- x2 x3))",
                         "(+ x1 (* 1/3 x2))", "(max (- x1) x2)"};
  for (const char* src : exprs) {
    auto f = parse_expression(src);
    std::size_t k = arity(*f);
    auto fs = sample_function(*f, k, grid_points(k, -2, 2));
    auto cls = classify(fs);
    ASSERT_EQ(cls.kind, Classification::Kind::Unclassifiable) << src;
    auto tr = run_falsifier(*f, k, falsifier_witnesses(*f, k, fs, cls));
    ASSERT_NE(tr.kind, FalsifierTrace::Kind::NotApplicable) << src << ": " << tr.reason;
    ASSERT_TRUE(tr.violation) << src;
    EXPECT_TRUE(verify_violation(*f, *tr.violation)) << src;
    if (tr.stage.rfind("final", 0) == 0) {
      ASSERT_EQ(tr.c.size(), k + 1);
      for (std::size_t i = 0; i < k; ++i) EXPECT_LT(tr.c.front()[i], tr.c.back()[i]);
    }
  }
}
