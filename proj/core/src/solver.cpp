#include "qcegar/solver.hpp"

#include <algorithm>
#include <chrono>
#include <memory>
#include <optional>
#include <type_traits>
#include <unordered_map>

#include "qcegar/abstraction.hpp"
#include "qcegar/sat.hpp"

namespace qcegar {

const char* to_string(Algorithm a) { return a == Algorithm::Abstraction ? "abstraction" : "assignment"; }

std::uint64_t SolveStats::refinements(Quantifier q) const {
  std::uint64_t sum = 0;
  for (const auto& s : scopes)
    if (s.quantifier == q) sum += s.refinements;
  return sum;
}

namespace {

using Clock = std::chrono::steady_clock;

double elapsed_ms(Clock::time_point start) {
  return std::chrono::duration<double, std::milli>(Clock::now() - start).count();
}

SolveStats empty_stats(const QbfProblem& p) {
  SolveStats st;
  for (std::size_t s = 1; s <= p.num_scopes(); ++s) st.scopes.push_back({s, p.scope(s).quantifier, 0, 0, 0});
  return st;
}

// Handles constant and single-literal matrices, which need no search.
std::optional<SolveOutcome> decide_trivial(const QbfProblem& solved, const SolverConfig& config) {
  const Node& root = solved.formula()[solved.matrix()];
  if (root.is_gate()) return std::nullopt;
  SolveOutcome out;
  out.solved = solved;
  out.stats = empty_stats(solved);
  if (root.is_constant()) {
    out.truth = truth_of(root.kind == NodeKind::True);
    return out;
  }
  const Var v = root.lit.var();
  const bool exists = solved.quantifier_of(v) == Quantifier::Exists;
  out.truth = truth_of(exists);
  // The single remaining scope wins with one candidate; record it like a dual query
  // with an empty interface so certification needs no special case.
  const bool value = exists ? !root.lit.negated() : root.lit.negated();
  out.stats.total_iterations = 1;
  out.stats.scopes[0].sat_queries = 1;
  if (config.record_trace) {
    ProofPair pair{solved.scope_of(v), {}, {}};
    if (value) pair.x_set.push_back(v);
    out.trace.push_back(std::move(pair));
  } else {
    out.fixed[v] = value;
  }
  return out;
}

void check_model(const SatSolver& s, const std::vector<bool>& model, const char* what) {
  for (const auto& c : s.clauses()) {
    bool ok = std::any_of(c.begin(), c.end(), [&](SatLit l) { return model[l.var()] != l.negated(); });
    if (!ok) throw InvariantViolation(std::string(what) + ": assignment violates a clause");
  }
}

class AbstractionEngine {
 public:
  AbstractionEngine(const QbfProblem& p, const SolverConfig& cfg, SolveStats& stats, ProofTrace& trace)
      : p_(p), cfg_(cfg), stats_(stats), trace_(trace), influence_(p) {
    SatOptions opts;
    opts.seed = cfg.seed;
    opts.shrink_cores = cfg.shrink_cores;
    opts.self_check = cfg.self_check;
    scopes_.resize(p.num_scopes() + 1);
    t_node_.resize(p.num_scopes() + 1);
    for (std::size_t s = 1; s <= p.num_scopes(); ++s) {
      scopes_[s] = std::make_unique<ScopeAbstraction>(p, s, influence_, opts);
      for (NodeId id : scopes_[s]->t_nodes()) t_node_[s].emplace(*scopes_[s]->t_of(id), id);
    }
    for (std::size_t s = 1; s < p.num_scopes(); ++s) {
      if (scopes_[s]->b_nodes() != scopes_[s + 1]->t_nodes())
        throw InvariantViolation("interface mismatch between scopes " + std::to_string(s) + " and " + std::to_string(s + 1));
    }
  }

  bool run() { return solve_scope(1, {}).win; }

 private:
  struct Result {
    bool win = false;
    std::vector<NodeId> witness;
  };

  const QbfProblem& p_;
  const SolverConfig& cfg_;
  SolveStats& stats_;
  ProofTrace& trace_;
  InfluenceInfo influence_;
  std::vector<std::unique_ptr<ScopeAbstraction>> scopes_;
  std::vector<std::unordered_map<SatVar, NodeId>> t_node_;

  std::vector<NodeId> core_nodes(std::size_t s, const std::vector<SatLit>& failed) const {
    std::vector<NodeId> nodes;
    for (SatLit l : failed) {
      auto it = t_node_[s].find(l.var());
      if (it == t_node_[s].end()) continue;
      if (!l.negated()) throw InvariantViolation("positive interface literal in a failed core");
      nodes.push_back(it->second);
    }
    std::sort(nodes.begin(), nodes.end());
    return nodes;
  }

  // The scope has a move that the opponent cannot answer: confirm with the dual
  // abstraction and return its core as the witness.
  Result win_with_dual(std::size_t s, const std::vector<bool>& model, const std::vector<bool>& alpha) {
    ScopeAbstraction& a = *scopes_[s];
    std::vector<SatLit> xs;
    for (Var v : a.vars()) {
      SatVar x = a.x_of(v);
      xs.push_back(SatLit(x, !model[x]));
    }
    std::vector<SatLit> ts;
    const auto& tn = a.t_nodes();
    for (std::size_t i = 0; i < tn.size(); ++i) ts.push_back(SatLit(*a.t_of(tn[i]), alpha[i]));
    std::vector<SatLit> assumptions = cfg_.x_first ? xs : ts;
    const auto& rest = cfg_.x_first ? ts : xs;
    assumptions.insert(assumptions.end(), rest.begin(), rest.end());

    SolveResult r = a.dual().solve(assumptions);
    if (r.sat()) {
      throw InvariantViolation("dual abstraction of scope " + std::to_string(s) +
                               " is satisfiable under the candidate; expected unsatisfiable");
    }
    Result res{true, core_nodes(s, r.failed)};
    if (cfg_.record_trace) {
      ProofPair pair{s, res.witness, {}};
      for (Var v : a.vars())
        if (model[a.x_of(v)]) pair.x_set.push_back(v);
      trace_.push_back(std::move(pair));
    }
    return res;
  }

  Result solve_scope(std::size_t s, const std::vector<bool>& alpha) {
    ScopeAbstraction& a = *scopes_[s];
    ScopeStats& st = stats_.scopes[s - 1];
    const auto& tn = a.t_nodes();
    std::vector<SatLit> assumptions;
    for (std::size_t i = 0; i < tn.size(); ++i) assumptions.push_back(SatLit(*a.t_of(tn[i]), !alpha[i]));

    for (;;) {
      ++st.sat_queries;
      ++stats_.total_iterations;
      SolveResult r = a.theta().solve(assumptions);
      if (!r.sat()) return {false, core_nodes(s, r.failed)};

      std::vector<bool> model = cfg_.adjust ? a.adjust_b(r.model) : r.model;
      if (cfg_.self_check) check_model(a.theta(), model, "adjusted candidate");
      if (s == p_.num_scopes()) return win_with_dual(s, model, alpha);

      std::vector<bool> inner_alpha;
      for (NodeId id : a.b_nodes()) inner_alpha.push_back(!model[*a.b_of(id)]);
      Result inner = solve_scope(s + 1, inner_alpha);
      if (!inner.win) {
        a.refine_dual(inner.witness);
        ++st.dual_refinements;
        return win_with_dual(s, model, alpha);
      }
      for (NodeId id : inner.witness) {
        if (model[*a.b_of(id)]) throw InvariantViolation("refinement clause is satisfied by the refuted candidate");
      }
      a.refine(inner.witness);
      ++st.refinements;
    }
  }
};

class AssignmentEngine {
 public:
  AssignmentEngine(const QbfProblem& p, const SolverConfig& cfg, SolveStats& stats) : p_(p), cfg_(cfg), stats_(stats) {
    SatOptions opts;
    opts.seed = cfg.seed;
    opts.shrink_cores = cfg.shrink_cores;
    opts.self_check = cfg.self_check;
    const std::size_t n = p.num_scopes();
    theta_.reserve(n + 1);
    theta_.emplace_back(opts);
    for (std::size_t s = 1; s <= n; ++s) {
      theta_.emplace_back(opts);
      load(theta_.back(), p.scope(s).quantifier == Quantifier::Forall);
    }
    complement_ = std::make_unique<SatSolver>(opts);
    load(*complement_, p.scope(n).quantifier == Quantifier::Exists);
  }

  bool run() { return solve_scope(1, {}).win; }

 private:
  struct Result {
    bool win = false;
    std::vector<SatLit> witness;
  };

  const QbfProblem& p_;
  const SolverConfig& cfg_;
  SolveStats& stats_;
  std::vector<SatSolver> theta_;
  std::unique_ptr<SatSolver> complement_;

  void load(SatSolver& s, bool negated) {
    for (std::size_t v = 1; v <= p_.num_vars(); ++v) s.new_var();
    auto map = [](Literal l) { return SatLit(l.var() - 1, l.negated()); };
    SatLit out = encode_nnf(s, p_.formula(), p_.matrix(), map, negated);
    s.add_clause({out});
  }

  std::vector<SatLit> outer_part(const std::vector<SatLit>& lits, std::size_t s) const {
    std::vector<SatLit> r;
    for (SatLit l : lits)
      if (p_.scope_of(l.var() + 1) < s) r.push_back(l);
    return r;
  }

  Result solve_scope(std::size_t s, const std::vector<SatLit>& alpha) {
    ScopeStats& st = stats_.scopes[s - 1];
    SatSolver& theta = theta_[s];
    for (;;) {
      ++st.sat_queries;
      ++stats_.total_iterations;
      SolveResult r = theta.solve(alpha);
      if (!r.sat()) return {false, r.failed};
      std::vector<SatLit> extended = alpha;
      for (Var v : p_.scope(s).vars) extended.push_back(SatLit(v - 1, !r.model[v - 1]));
      if (s == p_.num_scopes()) {
        SolveResult c = complement_->solve(extended);
        if (c.sat()) throw InvariantViolation("complement of the innermost scope is satisfiable under the candidate");
        return {true, outer_part(c.failed, s)};
      }
      Result inner = solve_scope(s + 1, extended);
      if (!inner.win) return {true, outer_part(inner.witness, s)};
      Clause block;
      for (SatLit l : inner.witness) block.push_back(~l);
      theta.add_clause(block);
      ++st.refinements;
    }
  }
};

template <typename Engine>
SolveOutcome run_engine(const QbfProblem& problem, const SolverConfig& config) {
  const auto start = Clock::now();
  QbfProblem solved = merge_scopes(problem);
  if (auto trivial = decide_trivial(solved, config)) {
    trivial->stats.wall_ms = elapsed_ms(start);
    return *trivial;
  }
  SolveOutcome out;
  out.solved = std::move(solved);
  out.stats = empty_stats(out.solved);
  bool win = false;
  if constexpr (std::is_same_v<Engine, AbstractionEngine>) {
    AbstractionEngine engine(out.solved, config, out.stats, out.trace);
    win = engine.run();
  } else {
    AssignmentEngine engine(out.solved, config, out.stats);
    win = engine.run();
  }
  const bool exists = out.solved.scope(1).quantifier == Quantifier::Exists;
  out.truth = truth_of(win == exists);
  out.stats.wall_ms = elapsed_ms(start);
  return out;
}

}  // namespace

SolveOutcome solve_abstraction(const QbfProblem& problem, const SolverConfig& config) {
  return run_engine<AbstractionEngine>(problem, config);
}

SolveOutcome solve_assignment(const QbfProblem& problem, const SolverConfig& config) {
  return run_engine<AssignmentEngine>(problem, config);
}

SolveOutcome solve(const QbfProblem& problem, const SolverConfig& config, bool preprocess_first) {
  const auto start = Clock::now();
  Preprocessed pp;
  if (preprocess_first) {
    pp = preprocess(problem);
  } else {
    pp.problem = problem;
  }
  SolveOutcome out = config.algorithm == Algorithm::Abstraction ? solve_abstraction(pp.problem, config)
                                                                 : solve_assignment(pp.problem, config);
  out.fixed.insert(pp.fixed.begin(), pp.fixed.end());
  out.stats.wall_ms = elapsed_ms(start);
  return out;
}

namespace {

bool expand(const QbfProblem& p, const std::vector<Var>& order, std::size_t i, std::vector<std::uint8_t>& values) {
  if (i == order.size()) return p.formula().evaluate(p.matrix(), values);
  const Var v = order[i];
  const bool exists = p.quantifier_of(v) == Quantifier::Exists;
  for (std::uint8_t b : {std::uint8_t{0}, std::uint8_t{1}}) {
    values[v] = b;
    bool r = expand(p, order, i + 1, values);
    if (r == exists) return r;
  }
  return !exists;
}

}  // namespace

TruthValue brute_force_eval(const QbfProblem& problem) {
  std::vector<bool> occurs = problem.occurring_vars();
  std::vector<Var> order;
  for (const auto& s : problem.prefix())
    for (Var v : s.vars)
      if (v < occurs.size() && occurs[v]) order.push_back(v);
  std::vector<std::uint8_t> values(problem.num_vars() + 1, 0);
  return truth_of(expand(problem, order, 0, values));
}

}  // namespace qcegar
