#include <doctest.h>

#include <sstream>

#include "qcegar/generators.hpp"
#include "qcegar/parser.hpp"

using namespace qcegar;

TEST_CASE("generators: QParity shape") {
  CHECK_THROWS_AS(gen_qparity(1), Error);
  QbfProblem p = gen_qparity(3);
  REQUIRE(p.num_scopes() == 2);
  CHECK(p.scope(1).vars.size() == 3);
  CHECK(p.scope(2).quantifier == Quantifier::Forall);
  CHECK(p.name(p.scope(2).vars[0]) == "z");
  for (std::size_t n = 2; n <= 10; ++n) CHECK(brute_force_eval(gen_qparity(n)) == TruthValue::False);
  CHECK(brute_force_eval(gen_qparity(6, true)) == TruthValue::False);
}

TEST_CASE("generators: expansion family shape") {
  CHECK_THROWS_AS(gen_expansion_hard(0), Error);
  QbfProblem p = gen_expansion_hard(2);
  CHECK(p.num_vars() == 8);
  CHECK(p.num_scopes() == 5);
  CHECK(p.name(1) == "e1");
  CHECK(p.name(4) == "c2");
  for (std::size_t n = 1; n <= 3; ++n) CHECK(brute_force_eval(gen_expansion_hard(n)) == TruthValue::False);
}

TEST_CASE("generators: random problems are reproducible and bounded") {
  RandomShape shape;
  for (std::uint64_t seed = 0; seed < 300; ++seed) {
    QbfProblem a = gen_random(seed);
    QbfProblem b = gen_random(seed);
    CHECK(a.structurally_equal(b));
    CHECK(a.num_vars() <= shape.max_vars);
    CHECK(a.num_scopes() <= shape.max_blocks + 1);
    CHECK(a.formula().size() <= shape.max_nodes);
    CHECK(parse_qcir(write_qcir(a)).structurally_equal(a));
  }
}

TEST_CASE("generators: experiment rows and CSV") {
  ExperimentSpec spec;
  spec.n_from = 2;
  spec.n_to = 4;
  auto rows = run_experiment(spec);
  REQUIRE(rows.size() == 6);
  CHECK(rows[0].algorithm == Algorithm::Abstraction);
  CHECK(rows[1].algorithm == Algorithm::Assignment);
  CHECK(rows[5].n == 4);
  CHECK(rows[5].scope_refinements[0] == 16);
  spec.jobs = 4;
  auto par = run_experiment(spec);
  REQUIRE(par.size() == rows.size());
  for (std::size_t i = 0; i < rows.size(); ++i) {
    CHECK(par[i].n == rows[i].n);
    CHECK(par[i].scope_refinements == rows[i].scope_refinements);
    CHECK(par[i].total_iterations == rows[i].total_iterations);
  }
  std::ostringstream os;
  write_csv(os, rows);
  std::string first = os.str().substr(0, os.str().find('\n'));
  CHECK(first == "family,n,algorithm,truth,scope_refinements,total_iterations,wall_ms");
  CHECK(os.str().find("\nqparity,2,assignment,FALSE,4;0,9,") != std::string::npos);
  spec.n_from = 5;
  CHECK_THROWS_AS(run_experiment(spec), Error);
  CHECK_THROWS_AS(parse_family("bogus"), Error);
}
