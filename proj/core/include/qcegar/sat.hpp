#pragma once

#include <cstdint>
#include <functional>
#include <iosfwd>
#include <memory>
#include <span>
#include <vector>

#include "qcegar/formula.hpp"

namespace qcegar {

/// Solver variable, 0-based and distinct from formula variables.
using SatVar = std::uint32_t;

class SatLit {
 public:
  constexpr SatLit() = default;
  constexpr SatLit(SatVar var, bool negated) : code_(2 * var + (negated ? 1 : 0)) {}

  static constexpr SatLit pos(SatVar v) { return SatLit(v, false); }
  static constexpr SatLit neg(SatVar v) { return SatLit(v, true); }
  static constexpr SatLit from_code(std::uint32_t code) {
    SatLit l;
    l.code_ = code;
    return l;
  }

  constexpr SatVar var() const { return code_ >> 1; }
  constexpr bool negated() const { return (code_ & 1) != 0; }
  constexpr std::uint32_t code() const { return code_; }
  constexpr SatLit operator~() const { return from_code(code_ ^ 1); }
  constexpr SatLit operator^(bool flip) const { return flip ? ~*this : *this; }

  /// DIMACS rendering: +/-(var+1).
  int dimacs() const { return negated() ? -static_cast<int>(var() + 1) : static_cast<int>(var() + 1); }

  friend constexpr auto operator<=>(SatLit, SatLit) = default;

 private:
  std::uint32_t code_ = 0;
};

using Clause = std::vector<SatLit>;

enum class SatStatus : std::uint8_t { Sat, Unsat };

struct SolveResult {
  SatStatus status = SatStatus::Unsat;
  /// Total assignment over allocated variables (Sat only).
  std::vector<bool> model;
  /// Failed assumptions (Unsat only); a sufficient, not necessarily minimal, core.
  std::vector<SatLit> failed;

  bool sat() const { return status == SatStatus::Sat; }
  bool value(SatVar v) const { return model.at(v); }
  bool value(SatLit l) const { return model.at(l.var()) != l.negated(); }
};

struct SatOptions {
  /// 0 keeps the decision order purely index-based on ties.
  std::uint64_t seed = 0;
  /// Greedily drop literals from failed-assumption cores.
  bool shrink_cores = false;
  /// Re-check every model against the clause log.
  bool self_check = false;
};

/// Incremental CDCL solver: two watched literals, first-UIP learning, VSIDS with
/// index tie-break, phase saving (initial phase false), Luby restarts.
/// Assumptions are the leading decisions; failed cores come from final conflict
/// analysis over the assumption levels. Single-owner; not thread-safe.
class SatSolver {
 public:
  explicit SatSolver(SatOptions options = {});
  ~SatSolver();
  SatSolver(SatSolver&&) noexcept;
  SatSolver& operator=(SatSolver&&) noexcept;
  SatSolver(const SatSolver&) = delete;
  SatSolver& operator=(const SatSolver&) = delete;

  SatVar new_var();
  std::size_t num_vars() const;

  /// Permanently adds a clause. Duplicate literals are removed and tautologies
  /// dropped. Throws Error on a literal over an unallocated variable.
  void add_clause(std::span<const SatLit> clause);
  void add_clause(std::initializer_list<SatLit> clause) { add_clause({clause.begin(), clause.size()}); }

  /// Solves under assumptions. Complementary assumptions give Unsat with the pair
  /// as core. Throws Error on assumptions over unallocated variables.
  SolveResult solve(std::span<const SatLit> assumptions = {});
  SolveResult solve(std::initializer_list<SatLit> assumptions) {
    return solve(std::span<const SatLit>(assumptions.begin(), assumptions.size()));
  }

  /// Clauses as added (after duplicate removal; tautologies omitted).
  const std::vector<Clause>& clauses() const;

  void write_dimacs(std::ostream& os) const;

  std::uint64_t num_solves() const;
  std::uint64_t num_conflicts() const;

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

/// One-sided (polarity-aware) encoding: returns a literal o with clauses o -> node.
/// With `negated`, encodes the NNF negation of node instead. Literal leaves are
/// mapped through `map` without introducing auxiliary variables.
SatLit encode_nnf(SatSolver& solver, const Formula& formula, NodeId node,
                  const std::function<SatLit(Literal)>& map, bool negated = false);

}  // namespace qcegar
