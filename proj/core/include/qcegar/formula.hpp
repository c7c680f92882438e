#pragma once

#include <cstdint>
#include <functional>
#include <map>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace qcegar {

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Variable index. Valid variables are 1-based and dense within a problem.
using Var = std::uint32_t;

/// A variable together with a polarity bit, packed as 2*var + negated.
class Literal {
 public:
  constexpr Literal() = default;
  constexpr Literal(Var var, bool negated) : code_(2 * var + (negated ? 1 : 0)) {}

  static constexpr Literal positive(Var v) { return Literal(v, false); }
  static constexpr Literal negative(Var v) { return Literal(v, true); }

  constexpr Var var() const { return code_ >> 1; }
  constexpr bool negated() const { return (code_ & 1) != 0; }
  constexpr bool sign() const { return !negated(); }
  constexpr std::uint32_t code() const { return code_; }

  constexpr Literal operator~() const {
    Literal l;
    l.code_ = code_ ^ 1;
    return l;
  }
  constexpr Literal operator^(bool flip) const { return flip ? ~*this : *this; }

  friend constexpr auto operator<=>(Literal, Literal) = default;

 private:
  std::uint32_t code_ = 0;
};

enum class NodeId : std::uint32_t {};

constexpr std::uint32_t index(NodeId id) { return static_cast<std::uint32_t>(id); }
constexpr NodeId node_id(std::size_t i) { return static_cast<NodeId>(i); }

enum class NodeKind : std::uint8_t { Lit, And, Or, True, False };

/// Connective of a subformula as seen by the abstraction.
enum class NodeType : std::uint8_t { Lit, And, Or };

struct Node {
  NodeKind kind = NodeKind::True;
  Literal lit{};
  std::vector<NodeId> children;
  std::uint64_t hash = 0;

  bool is_constant() const { return kind == NodeKind::True || kind == NodeKind::False; }
  bool is_gate() const { return kind == NodeKind::And || kind == NodeKind::Or; }
};

/// Three-valued variable map with a fixed domain.
class PartialAssignment {
 public:
  enum class Value : std::uint8_t { False, True, Undef };

  PartialAssignment() = default;
  PartialAssignment(std::initializer_list<std::pair<const Var, Value>> init) : values_(init) {}

  void set(Var v, Value value) { values_[v] = value; }
  void set(Var v, bool value) { values_[v] = value ? Value::True : Value::False; }
  Value get(Var v) const;
  bool contains(Var v) const { return values_.count(v) != 0; }
  std::size_t size() const { return values_.size(); }
  const std::map<Var, Value>& values() const { return values_; }

  friend bool operator==(const PartialAssignment&, const PartialAssignment&) = default;

 private:
  std::map<Var, Value> values_;
};

/// beta is compatible with alpha: same domain and agreement wherever beta is defined.
bool compatible(const PartialAssignment& beta, const PartialAssignment& alpha);
/// Throws Error when the domains overlap.
PartialAssignment combine(const PartialAssignment& a, const PartialAssignment& b);
PartialAssignment complement(const PartialAssignment& a);

/// Arena of NNF nodes. Nodes are never shared by construction of a QbfProblem;
/// the arena itself allows any DAG while building.
class Formula {
 public:
  NodeId literal(Literal lit);
  NodeId constant(bool value);

  /// Builds a normalized And/Or node: same-connective children are flattened,
  /// structural duplicates dropped, constants folded and single children collapsed.
  NodeId build(NodeKind kind, std::span<const NodeId> children);
  NodeId make_and(std::span<const NodeId> children) { return build(NodeKind::And, children); }
  NodeId make_or(std::span<const NodeId> children) { return build(NodeKind::Or, children); }
  NodeId make_and(std::initializer_list<NodeId> c) { return build(NodeKind::And, {c.begin(), c.size()}); }
  NodeId make_or(std::initializer_list<NodeId> c) { return build(NodeKind::Or, {c.begin(), c.size()}); }

  /// NNF of the negation (De Morgan plus literal flips).
  NodeId negate(NodeId node);

  /// Copies the tree rooted at `node` of `src` into this arena, renormalizing.
  /// `map_lit` may replace literals by arbitrary subtrees of this arena.
  NodeId import(const Formula& src, NodeId node,
                const std::function<NodeId(Literal)>& map_lit = nullptr);

  const Node& operator[](NodeId id) const { return nodes_[index(id)]; }
  std::size_t size() const { return nodes_.size(); }

  NodeType type(NodeId id) const;
  /// Preorder, including the node itself.
  std::vector<NodeId> subformulas(NodeId id) const;
  std::vector<NodeId> direct_subformulas(NodeId id) const { return (*this)[id].children; }

  /// Throws Error on a variable missing from (or undefined in) the assignment.
  bool evaluate(NodeId id, const PartialAssignment& assignment) const;
  /// Dense evaluation: values[v] for variable v.
  bool evaluate(NodeId id, std::span<const std::uint8_t> values) const;

  /// Ordered structural equality, comparing variables by id.
  bool equal(NodeId a, const Formula& other, NodeId b) const;
  bool equal(NodeId a, NodeId b) const { return equal(a, *this, b); }

  /// Number of nodes in the tree rooted at id.
  std::size_t tree_size(NodeId id) const;

  void collect_vars(NodeId id, std::vector<bool>& seen) const;

 private:
  friend class QbfProblem;
  NodeId push(Node node);
  void adopt(std::vector<Node> nodes) { nodes_ = std::move(nodes); }

  std::vector<Node> nodes_;
};

enum class Quantifier : std::uint8_t { Exists, Forall };

constexpr Quantifier flip(Quantifier q) {
  return q == Quantifier::Exists ? Quantifier::Forall : Quantifier::Exists;
}
const char* to_string(Quantifier q);

struct Scope {
  Quantifier quantifier = Quantifier::Exists;
  std::vector<Var> vars;

  friend bool operator==(const Scope&, const Scope&) = default;
};

enum class TruthValue : std::uint8_t { False, True };

inline TruthValue truth_of(bool b) { return b ? TruthValue::True : TruthValue::False; }
const char* to_string(TruthValue t);

/// Closed prenex QBF over an NNF matrix.
///
/// Construction copies the matrix into a private tree-shaped arena numbered in
/// preorder (the matrix root is node 0), closes free variables in an outermost
/// existential scope, merges adjacent scopes of the same quantifier and drops
/// empty scopes. Scope indices used throughout the library are 1-based; 0 marks
/// a variable that does not occur in the prefix.
class QbfProblem {
 public:
  QbfProblem() = default;
  QbfProblem(std::vector<Scope> prefix, const Formula& arena, NodeId matrix,
             std::vector<std::string> names = {});

  const Formula& formula() const { return formula_; }
  NodeId matrix() const { return node_id(0); }
  const std::vector<Scope>& prefix() const { return prefix_; }
  std::size_t num_scopes() const { return prefix_.size(); }
  const Scope& scope(std::size_t index) const { return prefix_.at(index - 1); }

  std::size_t num_vars() const { return names_.size() - 1; }
  const std::string& name(Var v) const { return names_.at(v); }
  const std::vector<std::string>& names() const { return names_; }
  std::optional<Var> find_var(const std::string& name) const;

  std::size_t scope_of(Var v) const { return v < var_scope_.size() ? var_scope_[v] : 0; }
  Quantifier quantifier_of(Var v) const { return scope(scope_of(v)).quantifier; }

  bool is_constant() const { return formula_[matrix()].is_constant(); }
  bool constant_value() const { return formula_[matrix()].kind == NodeKind::True; }

  /// Variables occurring in the matrix.
  std::vector<bool> occurring_vars() const;

  /// Prefix compared by variable names, matrix compared structurally by names.
  bool structurally_equal(const QbfProblem& other) const;

 private:
  Formula formula_;
  std::vector<Scope> prefix_;
  std::vector<std::string> names_;
  std::vector<std::uint32_t> var_scope_;
};

/// Dependency set: for an existential variable the universal variables of outer
/// scopes; for a universal variable the existential variables of outer scopes.
/// Free variables were closed as an outermost existential scope, which covers the
/// "plus free variables" clause. Throws Error for unbound variables.
std::vector<Var> dependencies(const QbfProblem& problem, Var var);

std::string to_string(const Formula& f, NodeId id, const std::vector<std::string>* names = nullptr);

}  // namespace qcegar

template <>
struct std::hash<qcegar::NodeId> {
  std::size_t operator()(qcegar::NodeId id) const noexcept {
    return std::hash<std::uint32_t>{}(qcegar::index(id));
  }
};
