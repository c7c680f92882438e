#include "qcegar/abstraction.hpp"

#include <algorithm>

namespace qcegar {

InfluenceInfo::InfluenceInfo(const QbfProblem& problem) {
  const Formula& f = problem.formula();
  scopes_.assign(f.size(), {});
  max_.assign(f.size(), 0);
  // Preorder numbering: every child has a larger index than its parent.
  for (std::size_t i = f.size(); i-- > 0;) {
    const Node& n = f[node_id(i)];
    auto& set = scopes_[i];
    if (n.kind == NodeKind::Lit) {
      set.push_back(static_cast<std::uint32_t>(problem.scope_of(n.lit.var())));
    } else {
      for (NodeId c : n.children) {
        std::vector<std::uint32_t> merged;
        std::set_union(set.begin(), set.end(), scopes_[index(c)].begin(), scopes_[index(c)].end(),
                       std::back_inserter(merged));
        set = std::move(merged);
      }
    }
    max_[i] = set.empty() ? 0 : set.back();
  }
}

InfluenceInfo compute_influence(const QbfProblem& problem) { return InfluenceInfo(problem); }

std::vector<NodeId> interface_nodes(const QbfProblem& problem, const InfluenceInfo& influence,
                                    std::size_t boundary) {
  const Formula& f = problem.formula();
  std::vector<NodeId> out;
  for (std::size_t i = 0; i < f.size(); ++i) {
    const NodeId id = node_id(i);
    const Node& n = f[id];
    if (!n.is_gate() || influence.max_scope(id) <= boundary) continue;
    bool direct = std::any_of(n.children.begin(), n.children.end(), [&](NodeId c) {
      const Node& cn = f[c];
      if (cn.kind == NodeKind::Lit) return problem.scope_of(cn.lit.var()) <= boundary;
      return influence.max_scope(c) <= boundary;
    });
    if (direct) out.push_back(id);
  }
  return out;
}

struct ScopeAbstraction::Emitter {
  const ScopeAbstraction& abs;
  bool negated;  // encode the negated matrix
  std::vector<Clause> clauses;
  std::vector<bool> needed;

  const Formula& f() const { return abs.problem_->formula(); }
  std::uint32_t scope() const { return static_cast<std::uint32_t>(abs.scope_); }

  bool conj(NodeId id) const { return (f()[id].kind == NodeKind::And) != negated; }
  SatLit b(NodeId id) const { return SatLit::pos(static_cast<SatVar>(abs.b_var_[index(id)])); }
  SatLit t(NodeId id) const {
    if (abs.t_var_[index(id)] < 0) throw Error("internal: missing t literal for node " + std::to_string(index(id)));
    return SatLit::pos(static_cast<SatVar>(abs.t_var_[index(id)]));
  }
  SatLit x(Literal l) const {
    Literal v = l ^ negated;
    return SatLit(static_cast<SatVar>(abs.x_var_[v.var()]), v.negated());
  }

  void emit(Clause c) {
    Clause d;
    for (SatLit l : c)
      if (std::find(d.begin(), d.end(), l) == d.end()) d.push_back(l);
    clauses.push_back(std::move(d));
  }

  // Disjunctive combination used for the output of a disjunctive root and,
  // recursively, for its disjunctive children.
  void enc_or(NodeId id, Clause& out) {
    bool have_t = false;
    bool have_escape = false;
    for (NodeId c : f()[id].children) {
      const Node& cn = f()[c];
      if (cn.kind == NodeKind::Lit) {
        std::size_t sc = abs.problem_->scope_of(cn.lit.var());
        if (sc == scope()) {
          out.push_back(x(cn.lit));
        } else if (sc < scope()) {
          if (!have_t) out.push_back(t(id));
          have_t = true;
        } else {
          if (!have_escape) out.push_back(~b(id));
          have_escape = true;
        }
      } else if (abs.influence_->max_scope(c) < scope()) {
        if (!have_t) out.push_back(t(id));
        have_t = true;
      } else if (conj(c)) {
        out.push_back(b(c));
        needed[index(c)] = true;
      } else {
        enc_or(c, out);
      }
    }
  }

  void enc(NodeId id) {
    std::vector<SatLit> parts;
    bool have_t = false;
    for (NodeId c : f()[id].children) {
      const Node& cn = f()[c];
      if (cn.kind == NodeKind::Lit) {
        std::size_t sc = abs.problem_->scope_of(cn.lit.var());
        if (sc == scope()) {
          parts.push_back(x(cn.lit));
        } else if (sc < scope()) {
          if (!have_t) parts.push_back(t(id));
          have_t = true;
        }
        // Inner literals: nothing inside a conjunction; absorbed by -b in a disjunction.
      } else {
        std::uint32_t m = abs.influence_->max_scope(c);
        if (m < scope()) {
          if (!have_t) parts.push_back(t(id));
          have_t = true;
        } else if (m == scope()) {
          parts.push_back(b(c));
          needed[index(c)] = true;
        }
      }
    }
    if (conj(id)) {
      for (SatLit p : parts) emit({~b(id), p});
    } else {
      Clause c{~b(id)};
      c.insert(c.end(), parts.begin(), parts.end());
      emit(std::move(c));
    }
  }

  void run() {
    const Formula& form = f();
    needed.assign(form.size(), false);
    const NodeId root = abs.problem_->matrix();
    if (conj(root)) {
      emit({b(root)});
      needed[index(root)] = true;
    } else {
      Clause out;
      enc_or(root, out);
      emit(std::move(out));
    }
    for (NodeId id : abs.b_nodes_) needed[index(id)] = true;
    for (std::size_t i = 0; i < form.size(); ++i) {
      if (needed[i] && form[node_id(i)].is_gate()) enc(node_id(i));
    }
  }
};

ScopeAbstraction::ScopeAbstraction(const QbfProblem& problem, std::size_t scope, const InfluenceInfo& influence,
                                   SatOptions options)
    : problem_(&problem), influence_(&influence), scope_(scope), theta_(options), dual_(options) {
  if (scope == 0 || scope > problem.num_scopes()) throw Error("scope index out of range: " + std::to_string(scope));
  const Formula& f = problem.formula();
  if (!f[problem.matrix()].is_gate()) throw Error("abstraction needs a compound matrix");
  quantifier_ = problem.scope(scope).quantifier;
  vars_ = problem.scope(scope).vars;
  if (scope > 1) t_nodes_ = interface_nodes(problem, influence, scope - 1);
  if (scope < problem.num_scopes()) b_nodes_ = interface_nodes(problem, influence, scope);

  x_var_.assign(problem.num_vars() + 1, -1);
  t_var_.assign(f.size(), -1);
  b_var_.assign(f.size(), -1);
  in_b_.assign(f.size(), false);
  for (NodeId id : b_nodes_) in_b_[index(id)] = true;

  auto alloc = [&](std::string name) {
    SatVar v = theta_.new_var();
    SatVar w = dual_.new_var();
    if (v != w) throw Error("internal: solver variable allocation diverged");
    legend_.push_back(std::move(name));
    return static_cast<std::int64_t>(v);
  };
  for (Var v : vars_) x_var_[v] = alloc("x:" + problem.name(v));
  for (NodeId id : t_nodes_) t_var_[index(id)] = alloc("t:" + std::to_string(index(id)));
  for (std::size_t i = 0; i < f.size(); ++i) {
    if (f[node_id(i)].is_gate() && influence.max_scope(node_id(i)) >= scope)
      b_var_[i] = alloc("b:" + std::to_string(i));
  }

  const bool forall = quantifier_ == Quantifier::Forall;
  Emitter primary{*this, forall, {}, {}};
  primary.run();
  Emitter other{*this, !forall, {}, {}};
  other.run();
  theta_clauses_ = std::move(primary.clauses);
  dual_clauses_ = std::move(other.clauses);
  for (const auto& c : theta_clauses_) theta_.add_clause(c);
  for (const auto& c : dual_clauses_) dual_.add_clause(c);

  neg_b_occurrences_.assign(legend_.size(), {});
  for (std::uint32_t ci = 0; ci < theta_clauses_.size(); ++ci) {
    for (SatLit l : theta_clauses_[ci])
      if (l.negated()) neg_b_occurrences_[l.var()].push_back(ci);
  }
}

SatVar ScopeAbstraction::x_of(Var v) const {
  if (v >= x_var_.size() || x_var_[v] < 0) throw Error("variable is not bound by this scope");
  return static_cast<SatVar>(x_var_[v]);
}

std::optional<SatVar> ScopeAbstraction::t_of(NodeId id) const {
  if (index(id) >= t_var_.size() || t_var_[index(id)] < 0) return std::nullopt;
  return static_cast<SatVar>(t_var_[index(id)]);
}

std::optional<SatVar> ScopeAbstraction::b_of(NodeId id) const {
  if (index(id) >= b_var_.size() || b_var_[index(id)] < 0) return std::nullopt;
  return static_cast<SatVar>(b_var_[index(id)]);
}

void ScopeAbstraction::refine(std::span<const NodeId> nodes) {
  Clause c;
  for (NodeId id : nodes) {
    if (index(id) >= in_b_.size() || !in_b_[index(id)])
      throw Error("refinement node " + std::to_string(index(id)) + " is not a B node of scope " + std::to_string(scope_));
    c.push_back(SatLit::pos(static_cast<SatVar>(b_var_[index(id)])));
  }
  theta_.add_clause(c);
  ++refinements_;
}

void ScopeAbstraction::refine_dual(std::span<const NodeId> nodes) {
  Clause c;
  for (NodeId id : nodes) {
    if (index(id) >= in_b_.size() || !in_b_[index(id)])
      throw Error("refinement node " + std::to_string(index(id)) + " is not a B node of scope " + std::to_string(scope_));
    c.push_back(SatLit::pos(static_cast<SatVar>(b_var_[index(id)])));
  }
  dual_.add_clause(c);
  ++dual_refinements_;
}

std::vector<bool> ScopeAbstraction::adjust_b(std::vector<bool> model) const {
  auto holds = [&](SatLit l) { return model[l.var()] != l.negated(); };
  for (std::size_t i = b_var_.size(); i-- > 0;) {
    if (b_var_[i] < 0) continue;
    auto v = static_cast<SatVar>(b_var_[i]);
    if (model[v]) continue;
    const SatLit neg = SatLit::neg(v);
    bool free = std::all_of(neg_b_occurrences_[v].begin(), neg_b_occurrences_[v].end(), [&](std::uint32_t ci) {
      return std::any_of(theta_clauses_[ci].begin(), theta_clauses_[ci].end(),
                         [&](SatLit l) { return l != neg && holds(l); });
    });
    if (free) model[v] = true;
  }
  return model;
}

std::string ScopeAbstraction::legend(SatVar v) const { return legend_.at(v); }

std::vector<std::vector<std::string>> ScopeAbstraction::render(bool dual_side) const {
  std::vector<std::vector<std::string>> out;
  for (const auto& c : encoding(dual_side)) {
    std::vector<std::string> lits;
    for (SatLit l : c) lits.push_back((l.negated() ? "-" : "") + legend_[l.var()]);
    std::sort(lits.begin(), lits.end());
    out.push_back(std::move(lits));
  }
  return out;
}

}  // namespace qcegar
