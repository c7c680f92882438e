#include "qcegar/preprocess.hpp"

#include <algorithm>
#include <set>

namespace qcegar {

namespace {

// Rebuilds the tree rooted at id into `out`, fixing variables and folding an
// And/Or that holds a literal together with its complement.
NodeId rebuild(const Formula& src, NodeId id, const FixedVars& values, Formula& out) {
  const Node& n = src[id];
  switch (n.kind) {
    case NodeKind::True:
    case NodeKind::False:
      return out.constant(n.kind == NodeKind::True);
    case NodeKind::Lit: {
      auto it = values.find(n.lit.var());
      if (it == values.end()) return out.literal(n.lit);
      return out.constant(it->second != n.lit.negated());
    }
    case NodeKind::And:
    case NodeKind::Or: {
      std::vector<NodeId> kids;
      kids.reserve(n.children.size());
      for (NodeId c : n.children) kids.push_back(rebuild(src, c, values, out));
      NodeId built = out.build(n.kind, kids);
      const Node& b = out[built];
      if (b.is_gate()) {
        std::set<std::uint32_t> lits;
        for (NodeId c : b.children) {
          const Node& cn = out[c];
          if (cn.kind != NodeKind::Lit) continue;
          if (lits.count((~cn.lit).code())) return out.constant(b.kind == NodeKind::Or);
          lits.insert(cn.lit.code());
        }
      }
      return built;
    }
  }
  return id;
}

QbfProblem with_matrix(const QbfProblem& p, const Formula& f, NodeId root) {
  return QbfProblem(p.prefix(), f, root, p.names());
}

}  // namespace

QbfProblem substitute(const QbfProblem& problem, const FixedVars& values) {
  Formula out;
  NodeId root = rebuild(problem.formula(), problem.matrix(), values, out);
  return with_matrix(problem, out, root);
}

QbfProblem simplify(const QbfProblem& problem, FixedVars* fixed) {
  QbfProblem current = substitute(problem, {});
  for (;;) {
    const Formula& f = current.formula();
    const Node& root = f[current.matrix()];
    std::vector<Literal> units;
    if (root.kind == NodeKind::Lit) {
      units.push_back(root.lit);
    } else if (root.kind == NodeKind::And) {
      for (NodeId c : root.children)
        if (f[c].kind == NodeKind::Lit) units.push_back(f[c].lit);
    }
    if (units.empty()) return current;

    FixedVars step;
    for (Literal l : units) {
      if (current.quantifier_of(l.var()) == Quantifier::Forall) {
        if (fixed) (*fixed)[l.var()] = l.negated();
        Formula out;
        return with_matrix(current, out, out.constant(false));
      }
      step[l.var()] = !l.negated();
    }
    if (fixed) fixed->insert(step.begin(), step.end());
    current = substitute(current, step);
  }
}

QbfProblem pure_literals(const QbfProblem& problem, FixedVars* fixed) {
  QbfProblem current = simplify(problem, fixed);
  for (;;) {
    const Formula& f = current.formula();
    std::vector<std::uint8_t> polarity(current.num_vars() + 1, 0);  // bit 0 positive, bit 1 negative
    for (NodeId id : f.subformulas(current.matrix())) {
      const Node& n = f[id];
      if (n.kind == NodeKind::Lit) polarity[n.lit.var()] |= n.lit.negated() ? 2 : 1;
    }
    FixedVars step;
    for (Var v = 1; v < polarity.size(); ++v) {
      if (polarity[v] != 1 && polarity[v] != 2) continue;
      bool positive = polarity[v] == 1;
      bool exists = current.quantifier_of(v) == Quantifier::Exists;
      step[v] = exists ? positive : !positive;
    }
    if (step.empty()) return current;
    if (fixed) fixed->insert(step.begin(), step.end());
    current = simplify(substitute(current, step), fixed);
  }
}

QbfProblem merge_scopes(const QbfProblem& problem) {
  std::vector<bool> occurs = problem.occurring_vars();
  std::vector<Scope> prefix;
  for (const auto& s : problem.prefix()) {
    Scope kept{s.quantifier, {}};
    for (Var v : s.vars)
      if (v < occurs.size() && occurs[v]) kept.vars.push_back(v);
    prefix.push_back(std::move(kept));
  }
  return QbfProblem(std::move(prefix), problem.formula(), problem.matrix(), problem.names());
}

Preprocessed preprocess(const QbfProblem& problem) {
  Preprocessed r;
  r.problem = merge_scopes(pure_literals(problem, &r.fixed));
  return r;
}

}  // namespace qcegar
