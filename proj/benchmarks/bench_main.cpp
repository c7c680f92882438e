#include <benchmark/benchmark.h>

#include <random>

#include "qcegar/certify.hpp"
#include "qcegar/generators.hpp"
#include "qcegar/sat.hpp"
#include "qcegar/solver.hpp"

using namespace qcegar;

namespace {

void solve_family(benchmark::State& state, Family family, Algorithm algorithm) {
  GenSpec spec;
  spec.family = family;
  spec.n = static_cast<std::size_t>(state.range(0));
  QbfProblem p = generate(spec);
  SolverConfig cfg;
  cfg.algorithm = algorithm;
  cfg.record_trace = false;
  std::size_t iterations = 0;
  for (auto _ : state) {
    SolveOutcome out = solve(p, cfg, false);
    iterations = out.stats.total_iterations;
    benchmark::DoNotOptimize(out.truth);
  }
  state.counters["iterations"] = static_cast<double>(iterations);
}

void BM_QParityAbstraction(benchmark::State& s) { solve_family(s, Family::QParity, Algorithm::Abstraction); }
void BM_QParityAssignment(benchmark::State& s) { solve_family(s, Family::QParity, Algorithm::Assignment); }
void BM_ExpansionAbstraction(benchmark::State& s) { solve_family(s, Family::ExpansionHard, Algorithm::Abstraction); }

BENCHMARK(BM_QParityAbstraction)->DenseRange(2, 12, 2);
BENCHMARK(BM_QParityAssignment)->DenseRange(2, 10, 2);
BENCHMARK(BM_ExpansionAbstraction)->DenseRange(1, 8, 1);

// Random 3-CNF near the threshold.
void BM_SatRandom3Cnf(benchmark::State& state) {
  const int nv = static_cast<int>(state.range(0));
  const int nc = nv * 426 / 100;
  std::mt19937_64 rng(7);
  std::vector<std::vector<SatLit>> clauses(nc);
  for (auto& c : clauses)
    for (int k = 0; k < 3; ++k)
      c.push_back(SatLit(static_cast<SatVar>(rng() % nv), (rng() & 1) != 0));
  for (auto _ : state) {
    SatSolver s;
    for (int v = 0; v < nv; ++v) s.new_var();
    for (const auto& c : clauses) s.add_clause(c);
    benchmark::DoNotOptimize(s.solve().status);
  }
}
BENCHMARK(BM_SatRandom3Cnf)->Arg(50)->Arg(100)->Arg(150);

void BM_ExtractQParity(benchmark::State& state) {
  QbfProblem p = gen_qparity(static_cast<std::size_t>(state.range(0)));
  SolveOutcome out = solve(p, SolverConfig{}, false);
  for (auto _ : state) {
    Certificate c = extract_functions(out, p);
    benchmark::DoNotOptimize(c.gate_count());
  }
}
BENCHMARK(BM_ExtractQParity)->DenseRange(2, 12, 2);

void BM_VerifyExpansion(benchmark::State& state) {
  QbfProblem p = gen_expansion_hard(static_cast<std::size_t>(state.range(0)));
  Certificate c = extract_functions(solve(p, SolverConfig{}, false), p);
  for (auto _ : state) benchmark::DoNotOptimize(verify(p, c).status);
}
BENCHMARK(BM_VerifyExpansion)->DenseRange(1, 8, 1);

}  // namespace

BENCHMARK_MAIN();
