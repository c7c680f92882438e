#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "qcegar/formula.hpp"
#include "qcegar/preprocess.hpp"

namespace qcegar {

/// Raised when an internal contract of the CEGAR loop is violated (for example a
/// dual query that should be unsatisfiable is not). Never a wrong answer.
class InvariantViolation : public Error {
 public:
  using Error::Error;
};

enum class Algorithm { Abstraction, Assignment };

const char* to_string(Algorithm a);

struct SolverConfig {
  Algorithm algorithm = Algorithm::Abstraction;
  std::uint64_t seed = 0;
  /// Raise b literals of a candidate before handing it to the inner scope.
  bool adjust = true;
  /// Greedy shrinking of failed-assumption cores.
  bool shrink_cores = false;
  bool record_trace = true;
  /// Order X assumptions before complemented T assumptions in dual queries.
  bool x_first = true;
  /// Re-check SAT models and adjusted assignments against their clauses.
  bool self_check = false;
};

/// One recorded dual-query result: the scope, the T nodes of its (complemented)
/// core and the scope variables the candidate set to true.
struct ProofPair {
  std::size_t scope = 0;
  std::vector<NodeId> t_set;
  std::vector<Var> x_set;

  friend bool operator==(const ProofPair&, const ProofPair&) = default;
};

using ProofTrace = std::vector<ProofPair>;

struct ScopeStats {
  std::size_t scope = 0;
  Quantifier quantifier = Quantifier::Exists;
  std::uint64_t sat_queries = 0;
  std::uint64_t refinements = 0;
  std::uint64_t dual_refinements = 0;
};

struct SolveStats {
  std::vector<ScopeStats> scopes;
  std::uint64_t total_iterations = 0;
  double wall_ms = 0.0;

  /// Refinements at scopes of the given quantifier, summed.
  std::uint64_t refinements(Quantifier q) const;
};

struct SolveOutcome {
  TruthValue truth = TruthValue::False;
  /// The problem the trace refers to (scopes without occurring variables removed).
  QbfProblem solved;
  ProofTrace trace;
  SolveStats stats;
  /// Variables with constant witnesses (eliminated or decided without search).
  FixedVars fixed;
};

/// Abstraction-based CEGAR (per-scope CNF abstractions with interface literals).
SolveOutcome solve_abstraction(const QbfProblem& problem, const SolverConfig& config = {});

/// Assignment-based CEGAR baseline; produces no trace.
SolveOutcome solve_assignment(const QbfProblem& problem, const SolverConfig& config = {});

/// Optional preprocessing, then the configured algorithm. Eliminated variables are
/// merged into the outcome's constant witnesses.
SolveOutcome solve(const QbfProblem& problem, const SolverConfig& config, bool preprocess_first = true);

/// Exhaustive expansion over the prefix.
TruthValue brute_force_eval(const QbfProblem& problem);

}  // namespace qcegar
