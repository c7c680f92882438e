#pragma once

#include "qcegar/formula.hpp"

namespace qcegar::testing {

// forall x exists y. x | (-x & y)
inline QbfProblem phi_ex() {
  Formula f;
  NodeId x = f.literal(Literal::positive(1));
  NodeId nx = f.literal(Literal::negative(1));
  NodeId y = f.literal(Literal::positive(2));
  NodeId m = f.make_or({x, f.make_and({nx, y})});
  return QbfProblem({Scope{Quantifier::Forall, {1}}, Scope{Quantifier::Exists, {2}}}, f, m, {"", "x", "y"});
}

}  // namespace qcegar::testing
