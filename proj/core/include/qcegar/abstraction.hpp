#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "qcegar/formula.hpp"
#include "qcegar/sat.hpp"

namespace qcegar {

/// Per node, the sorted set of scope indices whose variables occur below it.
class InfluenceInfo {
 public:
  InfluenceInfo() = default;
  explicit InfluenceInfo(const QbfProblem& problem);

  const std::vector<std::uint32_t>& scopes(NodeId id) const { return scopes_[index(id)]; }
  /// Innermost influencing scope; 0 for constants.
  std::uint32_t max_scope(NodeId id) const { return max_[index(id)]; }

 private:
  std::vector<std::vector<std::uint32_t>> scopes_;
  std::vector<std::uint32_t> max_;
};

InfluenceInfo compute_influence(const QbfProblem& problem);

/// Interface between scope s and s+1: compound subformulas that still depend on an
/// inner scope and have a direct part (literal or fully decided subtree) bound at
/// scope <= s. These are the B nodes of scope s and the T nodes of scope s+1.
std::vector<NodeId> interface_nodes(const QbfProblem& problem, const InfluenceInfo& influence,
                                    std::size_t boundary);

/// CNF abstraction of one scope and its dual.
///
/// The abstraction of a universal scope is the existential abstraction of the
/// negated matrix; the dual is the abstraction of the same scope under the other
/// quantifier. Both solvers allocate x, t and b variables in the same order so the
/// same SatVar names the same thing in either solver.
class ScopeAbstraction {
 public:
  ScopeAbstraction(const QbfProblem& problem, std::size_t scope, const InfluenceInfo& influence,
                   SatOptions options = {});

  std::size_t scope_index() const { return scope_; }
  Quantifier quantifier() const { return quantifier_; }

  SatSolver& theta() { return theta_; }
  SatSolver& dual() { return dual_; }
  const SatSolver& theta() const { return theta_; }
  const SatSolver& dual() const { return dual_; }

  const std::vector<Var>& vars() const { return vars_; }
  const std::vector<NodeId>& t_nodes() const { return t_nodes_; }
  const std::vector<NodeId>& b_nodes() const { return b_nodes_; }

  SatVar x_of(Var v) const;
  std::optional<SatVar> t_of(NodeId id) const;
  std::optional<SatVar> b_of(NodeId id) const;

  /// Adds the clause OR(b_n) over nodes of B to theta. Throws Error for nodes outside B.
  void refine(std::span<const NodeId> nodes);
  void refine_dual(std::span<const NodeId> nodes);

  std::size_t refinement_count() const { return refinements_; }
  std::size_t dual_refinement_count() const { return dual_refinements_; }

  /// Raises b variables (children first) wherever every encoding clause with the
  /// negative b literal stays satisfied. Returns the adjusted model.
  std::vector<bool> adjust_b(std::vector<bool> model) const;

  /// Human-readable name of a solver variable: "x:<name>", "t:<node>" or "b:<node>".
  std::string legend(SatVar v) const;

  /// Encoding clauses (without refinements) rendered with legend names, each clause
  /// as sorted literal strings; "-" marks negation.
  std::vector<std::vector<std::string>> render(bool dual_side) const;

  /// Encoding clauses as emitted (without refinements).
  const std::vector<Clause>& encoding(bool dual_side) const { return dual_side ? dual_clauses_ : theta_clauses_; }

 private:
  struct Emitter;

  const QbfProblem* problem_;
  const InfluenceInfo* influence_;
  std::size_t scope_;
  Quantifier quantifier_;
  std::vector<Var> vars_;
  std::vector<NodeId> t_nodes_;
  std::vector<NodeId> b_nodes_;
  std::vector<std::int64_t> x_var_;  // by formula Var
  std::vector<std::int64_t> t_var_;  // by node index
  std::vector<std::int64_t> b_var_;  // by node index
  std::vector<std::string> legend_;
  SatSolver theta_;
  SatSolver dual_;
  std::vector<Clause> theta_clauses_;
  std::vector<Clause> dual_clauses_;
  std::vector<bool> in_b_;
  // Encoding clauses of theta containing the negative literal of each b variable.
  std::vector<std::vector<std::uint32_t>> neg_b_occurrences_;
  std::size_t refinements_ = 0;
  std::size_t dual_refinements_ = 0;
};

}  // namespace qcegar
