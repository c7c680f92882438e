#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include "qcegar/formula.hpp"
#include "qcegar/solver.hpp"

namespace qcegar {

enum class Family { QParity, ExpansionHard, Random };

const char* to_string(Family f);
/// Accepts "qparity", "expansion" (or "expansion-hard") and "random".
Family parse_family(const std::string& name);

struct RandomShape {
  std::size_t max_vars = 9;
  std::size_t max_blocks = 3;
  std::size_t max_nodes = 40;
};

struct GenSpec {
  Family family = Family::QParity;
  std::size_t n = 2;
  std::uint64_t seed = 0;
  RandomShape shape;
};

/// Exists x1..xn forall z. (z | P) & (-z | -P), P the parity of x1..xn expanded into
/// And/Or as a balanced XOR tree (or a left-leaning chain).
QbfProblem gen_qparity(std::size_t n, bool chain = false);

/// Exists e1 forall u1 exists c1 c2 ... with matrix
/// AND_i ((-e_i & -u_i) | c_{2i-1}) & ((e_i & u_i) | c_{2i}) & OR_j -c_j.
QbfProblem gen_expansion_hard(std::size_t n);

/// Seeded random closed prenex NNF problem within the shape bounds.
QbfProblem gen_random(std::uint64_t seed, const RandomShape& shape = {});

QbfProblem generate(const GenSpec& spec);

struct ExperimentSpec {
  Family family = Family::QParity;
  std::size_t n_from = 2;
  std::size_t n_to = 5;
  std::vector<Algorithm> algorithms{Algorithm::Abstraction, Algorithm::Assignment};
  std::uint64_t seed = 0;
  RandomShape shape;
  bool preprocess = true;
  /// Worker threads; each instance gets its own solver.
  std::size_t jobs = 1;
};

struct ExperimentRow {
  Family family = Family::QParity;
  std::size_t n = 0;
  Algorithm algorithm = Algorithm::Abstraction;
  TruthValue truth = TruthValue::False;
  std::vector<std::uint64_t> scope_refinements;
  std::vector<Quantifier> scope_quantifiers;
  std::uint64_t total_iterations = 0;
  double wall_ms = 0.0;
};

/// Rows in (n, algorithm) order regardless of the worker count.
std::vector<ExperimentRow> run_experiment(const ExperimentSpec& spec);

/// Header: family,n,algorithm,truth,scope_refinements,total_iterations,wall_ms
/// scope_refinements lists per-scope counts separated by ';'.
void write_csv(std::ostream& os, const std::vector<ExperimentRow>& rows);

}  // namespace qcegar
