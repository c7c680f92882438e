#include <doctest.h>

#include "fixtures.hpp"
#include "qcegar/generators.hpp"
#include "qcegar/parser.hpp"
#include "qcegar/preprocess.hpp"
#include "qcegar/solver.hpp"

using namespace qcegar;

TEST_CASE("preprocess: tautology and contradiction fold") {
  QbfProblem taut = parse_qcir("#QCIR-G14\nexists(x)\noutput(g)\ng = or(x, -x)\n");
  QbfProblem s = simplify(taut);
  CHECK(s.is_constant());
  CHECK(s.constant_value());
  QbfProblem contra = parse_qcir("#QCIR-G14\nforall(x)\noutput(g)\ng = and(x, -x)\n");
  QbfProblem c = simplify(contra);
  CHECK(c.is_constant());
  CHECK_FALSE(c.constant_value());
}

TEST_CASE("preprocess: forced existential literal") {
  QbfProblem p = parse_qcir("#QCIR-G14\nexists(x, y)\noutput(g)\ng = and(x, h)\nh = or(-x, y)\n");
  FixedVars fixed;
  QbfProblem s = simplify(p, &fixed);
  CHECK(fixed.at(*p.find_var("x")) == true);
  CHECK(fixed.at(*p.find_var("y")) == true);
  CHECK(s.is_constant());
  CHECK(s.constant_value());
}

TEST_CASE("preprocess: pure literals") {
  QbfProblem a = parse_qcir("#QCIR-G14\nexists(x, y)\noutput(g)\ng = and(h, k)\nh = or(x, y)\nk = or(x, -y)\n");
  FixedVars fa;
  QbfProblem ra = pure_literals(a, &fa);
  CHECK(fa.at(*a.find_var("x")) == true);
  CHECK(ra.is_constant());
  CHECK(ra.constant_value());

  QbfProblem b = parse_qcir("#QCIR-G14\nforall(x)\nexists(y)\noutput(g)\ng = or(x, y)\n");
  FixedVars fb;
  QbfProblem rb = pure_literals(b, &fb);
  CHECK(fb.at(*b.find_var("x")) == false);
  CHECK(rb.constant_value());

  QbfProblem ex = testing::phi_ex();
  FixedVars fe;
  QbfProblem re = pure_literals(ex, &fe);
  CHECK(fe.count(1) == 0);
  CHECK(fe.at(2) == true);
  CHECK(re.is_constant());
  CHECK(re.constant_value());
  CHECK(brute_force_eval(ex) == TruthValue::True);
}

TEST_CASE("preprocess: scope merging") {
  Formula f;
  NodeId m = f.make_and({f.make_or({f.literal(Literal::positive(1)), f.literal(Literal::positive(3))}),
                         f.make_or({f.literal(Literal::positive(2)), f.literal(Literal::negative(3))})});
  QbfProblem p({Scope{Quantifier::Exists, {1}}, Scope{Quantifier::Exists, {2}}, Scope{Quantifier::Forall, {3}}}, f, m,
               {"", "a", "b", "c"});
  QbfProblem q = merge_scopes(p);
  REQUIRE(q.num_scopes() == 2);
  CHECK(q.scope(1).vars == std::vector<Var>{1, 2});

  // A universal scope whose variable no longer occurs disappears, and its
  // neighbours merge.
  Formula g;
  NodeId m2 = g.make_or({g.literal(Literal::positive(1)), g.literal(Literal::positive(3))});
  QbfProblem r({Scope{Quantifier::Exists, {1}}, Scope{Quantifier::Forall, {2}}, Scope{Quantifier::Exists, {3}}}, g, m2);
  CHECK(merge_scopes(r).num_scopes() == 1);

  // c_{2i-1} c_{2i} merge with the next e: n = 3 gives 2n+1 blocks before and after.
  QbfProblem eh = gen_expansion_hard(3);
  CHECK(eh.num_scopes() == 7);
  CHECK(eh.scope(3).vars.size() == 3);
  CHECK(merge_scopes(eh).num_scopes() == 7);
}

TEST_CASE("preprocess: truth preserved and idempotent on random problems") {
  for (std::uint64_t seed = 0; seed < 500; ++seed) {
    QbfProblem p = gen_random(seed);
    Preprocessed once = preprocess(p);
    INFO("seed " << seed);
    CHECK(brute_force_eval(once.problem) == brute_force_eval(p));
    Preprocessed twice = preprocess(once.problem);
    CHECK(twice.problem.structurally_equal(once.problem));
    CHECK(twice.fixed.empty());
    // The fixed values are part of a winning strategy only for the player they
    // belong to, but substituting them never changes the truth value.
    CHECK(brute_force_eval(substitute(p, once.fixed)) == brute_force_eval(p));
  }
}
