#include "qcegar/formula.hpp"

#include <algorithm>
#include <sstream>
#include <unordered_map>

namespace qcegar {

namespace {

std::uint64_t mix(std::uint64_t h, std::uint64_t v) {
  h ^= v + 0x9e3779b97f4a7c15ULL + (h << 6) + (h >> 2);
  return h * 0xff51afd7ed558ccdULL;
}

NodeKind dual(NodeKind k) {
  switch (k) {
    case NodeKind::And: return NodeKind::Or;
    case NodeKind::Or: return NodeKind::And;
    case NodeKind::True: return NodeKind::False;
    case NodeKind::False: return NodeKind::True;
    case NodeKind::Lit: return NodeKind::Lit;
  }
  return k;
}

}  // namespace

PartialAssignment::Value PartialAssignment::get(Var v) const {
  auto it = values_.find(v);
  if (it == values_.end()) throw Error("variable " + std::to_string(v) + " outside assignment domain");
  return it->second;
}

bool compatible(const PartialAssignment& beta, const PartialAssignment& alpha) {
  if (beta.size() != alpha.size()) return false;
  for (const auto& [v, value] : beta.values()) {
    if (!alpha.contains(v)) return false;
    if (value != PartialAssignment::Value::Undef && alpha.get(v) != value) return false;
  }
  return true;
}

PartialAssignment combine(const PartialAssignment& a, const PartialAssignment& b) {
  PartialAssignment out = a;
  for (const auto& [v, value] : b.values()) {
    if (a.contains(v)) throw Error("combine: domains overlap on variable " + std::to_string(v));
    out.set(v, value);
  }
  return out;
}

PartialAssignment complement(const PartialAssignment& a) {
  PartialAssignment out;
  for (const auto& [v, value] : a.values()) {
    using V = PartialAssignment::Value;
    out.set(v, value == V::Undef ? V::Undef : (value == V::True ? V::False : V::True));
  }
  return out;
}

NodeId Formula::push(Node node) {
  nodes_.push_back(std::move(node));
  return node_id(nodes_.size() - 1);
}

NodeId Formula::literal(Literal lit) {
  Node n;
  n.kind = NodeKind::Lit;
  n.lit = lit;
  n.hash = mix(1, lit.code());
  return push(std::move(n));
}

NodeId Formula::constant(bool value) {
  Node n;
  n.kind = value ? NodeKind::True : NodeKind::False;
  n.hash = mix(value ? 2 : 3, 0);
  return push(std::move(n));
}

NodeId Formula::build(NodeKind kind, std::span<const NodeId> children) {
  if (kind != NodeKind::And && kind != NodeKind::Or) throw Error("build: not a connective");
  const bool is_and = kind == NodeKind::And;

  std::vector<NodeId> flat;
  flat.reserve(children.size());
  for (NodeId c : children) {
    const Node& child = nodes_.at(index(c));
    if (child.kind == kind) {
      flat.insert(flat.end(), child.children.begin(), child.children.end());
    } else if (child.is_constant()) {
      const bool value = child.kind == NodeKind::True;
      if (value != is_and) return constant(value);  // absorbing element
    } else {
      flat.push_back(c);
    }
  }

  std::vector<NodeId> kept;
  std::unordered_multimap<std::uint64_t, NodeId> seen;
  for (NodeId c : flat) {
    const auto h = nodes_[index(c)].hash;
    auto [lo, hi] = seen.equal_range(h);
    bool dup = false;
    for (auto it = lo; it != hi && !dup; ++it) dup = equal(it->second, c);
    if (dup) continue;
    seen.emplace(h, c);
    kept.push_back(c);
  }

  if (kept.empty()) return constant(is_and);
  if (kept.size() == 1) return kept.front();

  Node n;
  n.kind = kind;
  n.hash = mix(is_and ? 4 : 5, kept.size());
  for (NodeId c : kept) n.hash = mix(n.hash, nodes_[index(c)].hash);
  n.children = std::move(kept);
  return push(std::move(n));
}

NodeId Formula::negate(NodeId id) {
  const Node& n = nodes_.at(index(id));
  switch (n.kind) {
    case NodeKind::Lit: return literal(~n.lit);
    case NodeKind::True: return constant(false);
    case NodeKind::False: return constant(true);
    case NodeKind::And:
    case NodeKind::Or: {
      const NodeKind k = dual(n.kind);
      std::vector<NodeId> children = n.children;
      for (NodeId& c : children) c = negate(c);
      return build(k, children);
    }
  }
  return id;
}

NodeId Formula::import(const Formula& src, NodeId id, const std::function<NodeId(Literal)>& map_lit) {
  const Node& n = src[id];
  switch (n.kind) {
    case NodeKind::Lit: return map_lit ? map_lit(n.lit) : literal(n.lit);
    case NodeKind::True: return constant(true);
    case NodeKind::False: return constant(false);
    case NodeKind::And:
    case NodeKind::Or: {
      // src may alias this arena, so copy before pushing.
      const NodeKind kind = n.kind;
      std::vector<NodeId> children = n.children;
      for (NodeId& c : children) c = import(src, c, map_lit);
      return build(kind, children);
    }
  }
  return id;
}

NodeType Formula::type(NodeId id) const {
  switch ((*this)[id].kind) {
    case NodeKind::And: return NodeType::And;
    case NodeKind::Or: return NodeType::Or;
    default: return NodeType::Lit;
  }
}

std::vector<NodeId> Formula::subformulas(NodeId id) const {
  std::vector<NodeId> out;
  std::vector<NodeId> stack{id};
  while (!stack.empty()) {
    NodeId cur = stack.back();
    stack.pop_back();
    out.push_back(cur);
    const auto& ch = (*this)[cur].children;
    for (auto it = ch.rbegin(); it != ch.rend(); ++it) stack.push_back(*it);
  }
  return out;
}

bool Formula::evaluate(NodeId id, const PartialAssignment& assignment) const {
  const Node& n = (*this)[id];
  switch (n.kind) {
    case NodeKind::True: return true;
    case NodeKind::False: return false;
    case NodeKind::Lit: {
      const Var v = n.lit.var();
      if (!assignment.contains(v) || assignment.get(v) == PartialAssignment::Value::Undef) {
        throw Error("evaluate: variable " + std::to_string(v) + " is unassigned");
      }
      return (assignment.get(v) == PartialAssignment::Value::True) != n.lit.negated();
    }
    case NodeKind::And:
      for (NodeId c : n.children)
        if (!evaluate(c, assignment)) return false;
      return true;
    case NodeKind::Or:
      for (NodeId c : n.children)
        if (evaluate(c, assignment)) return true;
      return false;
  }
  return false;
}

bool Formula::evaluate(NodeId id, std::span<const std::uint8_t> values) const {
  const Node& n = (*this)[id];
  switch (n.kind) {
    case NodeKind::True: return true;
    case NodeKind::False: return false;
    case NodeKind::Lit: return (values[n.lit.var()] != 0) != n.lit.negated();
    case NodeKind::And:
      for (NodeId c : n.children)
        if (!evaluate(c, values)) return false;
      return true;
    case NodeKind::Or:
      for (NodeId c : n.children)
        if (evaluate(c, values)) return true;
      return false;
  }
  return false;
}

bool Formula::equal(NodeId a, const Formula& other, NodeId b) const {
  const Node& x = (*this)[a];
  const Node& y = other[b];
  if (x.kind != y.kind || x.hash != y.hash) return false;
  if (x.kind == NodeKind::Lit) return x.lit == y.lit;
  if (x.children.size() != y.children.size()) return false;
  for (std::size_t i = 0; i < x.children.size(); ++i)
    if (!equal(x.children[i], other, y.children[i])) return false;
  return true;
}

std::size_t Formula::tree_size(NodeId id) const {
  std::size_t total = 1;
  for (NodeId c : (*this)[id].children) total += tree_size(c);
  return total;
}

void Formula::collect_vars(NodeId id, std::vector<bool>& seen) const {
  const Node& n = (*this)[id];
  if (n.kind == NodeKind::Lit) {
    if (seen.size() <= n.lit.var()) seen.resize(n.lit.var() + 1, false);
    seen[n.lit.var()] = true;
  }
  for (NodeId c : n.children) collect_vars(c, seen);
}

const char* to_string(Quantifier q) { return q == Quantifier::Exists ? "exists" : "forall"; }
const char* to_string(TruthValue t) { return t == TruthValue::True ? "TRUE" : "FALSE"; }

namespace {

// Copies a normalized tree so that node ids follow preorder and no node is shared.
NodeId copy_preorder(const Formula& src, NodeId id, std::vector<Node>& out) {
  const std::size_t slot = out.size();
  out.push_back(src[id]);
  std::vector<NodeId> children;
  children.reserve(src[id].children.size());
  for (NodeId c : src[id].children) children.push_back(copy_preorder(src, c, out));
  out[slot].children = std::move(children);
  return node_id(slot);
}

}  // namespace

QbfProblem::QbfProblem(std::vector<Scope> prefix, const Formula& arena, NodeId matrix,
                       std::vector<std::string> names) {
  Formula scratch;
  const NodeId root = scratch.import(arena, matrix);
  std::vector<Node> ordered;
  ordered.reserve(scratch.tree_size(root));
  copy_preorder(scratch, root, ordered);
  formula_.adopt(std::move(ordered));

  Var max_var = 0;
  for (const auto& s : prefix)
    for (Var v : s.vars) max_var = std::max(max_var, v);
  std::vector<bool> occurs;
  formula_.collect_vars(this->matrix(), occurs);
  if (!occurs.empty()) max_var = std::max<Var>(max_var, static_cast<Var>(occurs.size() - 1));
  occurs.resize(max_var + 1, false);

  if (names.empty()) {
    names.resize(max_var + 1);
    for (Var v = 1; v <= max_var; ++v) names[v] = std::to_string(v);
  } else if (names.size() < max_var + 1) {
    const std::size_t old = names.size();
    names.resize(max_var + 1);
    for (std::size_t v = std::max<std::size_t>(old, 1); v <= max_var; ++v) names[v] = std::to_string(v);
  }
  names_ = std::move(names);

  std::vector<std::uint32_t> bound(max_var + 1, 0);
  for (std::size_t i = 0; i < prefix.size(); ++i) {
    for (Var v : prefix[i].vars) {
      if (v == 0) throw Error("variable id 0 is reserved");
      if (bound[v] != 0) throw Error("variable '" + names_[v] + "' is bound twice");
      bound[v] = static_cast<std::uint32_t>(i + 1);
    }
  }
  Scope free_scope{Quantifier::Exists, {}};
  for (Var v = 1; v <= max_var; ++v)
    if (occurs[v] && bound[v] == 0) free_scope.vars.push_back(v);
  if (!free_scope.vars.empty()) prefix.insert(prefix.begin(), std::move(free_scope));

  for (auto& s : prefix) {
    if (s.vars.empty()) continue;
    if (!prefix_.empty() && prefix_.back().quantifier == s.quantifier) {
      prefix_.back().vars.insert(prefix_.back().vars.end(), s.vars.begin(), s.vars.end());
    } else {
      prefix_.push_back(std::move(s));
    }
  }

  var_scope_.assign(max_var + 1, 0);
  for (std::size_t i = 0; i < prefix_.size(); ++i)
    for (Var v : prefix_[i].vars) var_scope_[v] = static_cast<std::uint32_t>(i + 1);
}

std::optional<Var> QbfProblem::find_var(const std::string& name) const {
  for (Var v = 1; v < names_.size(); ++v)
    if (names_[v] == name) return v;
  return std::nullopt;
}

std::vector<bool> QbfProblem::occurring_vars() const {
  std::vector<bool> occurs;
  formula_.collect_vars(matrix(), occurs);
  occurs.resize(names_.size(), false);
  return occurs;
}

namespace {

bool equal_by_name(const QbfProblem& a, NodeId x, const QbfProblem& b, NodeId y) {
  const Node& n = a.formula()[x];
  const Node& m = b.formula()[y];
  if (n.kind != m.kind) return false;
  if (n.kind == NodeKind::Lit)
    return n.lit.negated() == m.lit.negated() && a.name(n.lit.var()) == b.name(m.lit.var());
  if (n.children.size() != m.children.size()) return false;
  for (std::size_t i = 0; i < n.children.size(); ++i)
    if (!equal_by_name(a, n.children[i], b, m.children[i])) return false;
  return true;
}

}  // namespace

bool QbfProblem::structurally_equal(const QbfProblem& other) const {
  if (prefix_.size() != other.prefix_.size()) return false;
  for (std::size_t i = 0; i < prefix_.size(); ++i) {
    const auto& s = prefix_[i];
    const auto& t = other.prefix_[i];
    if (s.quantifier != t.quantifier || s.vars.size() != t.vars.size()) return false;
    for (std::size_t j = 0; j < s.vars.size(); ++j)
      if (name(s.vars[j]) != other.name(t.vars[j])) return false;
  }
  return equal_by_name(*this, matrix(), other, other.matrix());
}

std::vector<Var> dependencies(const QbfProblem& problem, Var var) {
  const std::size_t k = problem.scope_of(var);
  if (k == 0) throw Error("dependencies: variable " + std::to_string(var) + " is not bound");
  const Quantifier q = problem.scope(k).quantifier;
  std::vector<Var> deps;
  for (std::size_t i = 1; i < k; ++i) {
    const Scope& s = problem.scope(i);
    if (s.quantifier != q) deps.insert(deps.end(), s.vars.begin(), s.vars.end());
  }
  return deps;
}

std::string to_string(const Formula& f, NodeId id, const std::vector<std::string>* names) {
  const Node& n = f[id];
  switch (n.kind) {
    case NodeKind::True: return "T";
    case NodeKind::False: return "F";
    case NodeKind::Lit: {
      std::string s = n.lit.negated() ? "-" : "";
      return s + (names ? names->at(n.lit.var()) : std::to_string(n.lit.var()));
    }
    default: {
      std::ostringstream os;
      os << '(';
      for (std::size_t i = 0; i < n.children.size(); ++i) {
        if (i) os << (n.kind == NodeKind::And ? " & " : " | ");
        os << to_string(f, n.children[i], names);
      }
      os << ')';
      return os.str();
    }
  }
}

}  // namespace qcegar
