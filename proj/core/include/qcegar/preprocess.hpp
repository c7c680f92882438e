#pragma once

#include <map>

#include "qcegar/formula.hpp"

namespace qcegar {

/// Variables eliminated by preprocessing, with the constant they were fixed to.
using FixedVars = std::map<Var, bool>;

/// Constant folding, complementary literals under one node, and forced literals of a
/// top-level conjunction (existential: fixed to satisfy; universal: the problem is
/// false). Runs to fixpoint. Variable ids and names are kept.
QbfProblem simplify(const QbfProblem& problem, FixedVars* fixed = nullptr);

/// Eliminates single-polarity variables (existential: satisfying value, universal:
/// falsifying value) to fixpoint, re-simplifying in between.
QbfProblem pure_literals(const QbfProblem& problem, FixedVars* fixed = nullptr);

/// Drops non-occurring variables from the prefix, merges adjacent same-quantifier
/// scopes and removes empty scopes.
QbfProblem merge_scopes(const QbfProblem& problem);

struct Preprocessed {
  QbfProblem problem;
  FixedVars fixed;
};

/// simplify, pure_literals and merge_scopes to fixpoint.
Preprocessed preprocess(const QbfProblem& problem);

/// Replaces variables by constants and rebuilds the matrix with the folding rules.
QbfProblem substitute(const QbfProblem& problem, const FixedVars& values);

}  // namespace qcegar
