#include "qcegar/certify.hpp"

#include <algorithm>
#include <functional>
#include <map>
#include <ostream>
#include <set>
#include <sstream>
#include <unordered_set>

#include "qcegar/abstraction.hpp"
#include "qcegar/parser.hpp"
#include "qcegar/sat.hpp"

namespace qcegar {

AigLit Aig::add_input() {
  if (!ands_.empty()) throw Error("AIG inputs must precede gates");
  ++inputs_;
  return static_cast<AigLit>(2 * inputs_);
}

AigLit Aig::add_raw_and(AigLit a, AigLit b) {
  ands_.emplace_back(a, b);
  return 2 * max_var();
}

AigLit Aig::make_and(AigLit a, AigLit b) {
  if (a > b) std::swap(a, b);
  if (a == aig_false || a == (b ^ 1)) return aig_false;
  if (a == aig_true || a == b) return b;
  const std::uint64_t key = (static_cast<std::uint64_t>(a) << 32) | b;
  auto it = strash_.find(key);
  if (it != strash_.end()) return it->second;
  AigLit r = add_raw_and(a, b);
  strash_.emplace(key, r);
  return r;
}

std::vector<bool> Aig::simulate(const std::vector<bool>& inputs) const {
  if (inputs.size() != inputs_) throw Error("input vector has the wrong length");
  std::vector<bool> sim(max_var() + 1, false);
  for (std::size_t i = 0; i < inputs_; ++i) sim[i + 1] = inputs[i];
  for (std::size_t g = 0; g < ands_.size(); ++g) {
    const auto& [a, b] = ands_[g];
    sim[inputs_ + 1 + g] = value(sim, a) && value(sim, b);
  }
  return sim;
}

std::vector<std::size_t> Aig::support(AigLit l) const {
  std::vector<bool> seen(max_var() + 1, false);
  std::vector<std::uint32_t> stack{l >> 1};
  std::vector<std::size_t> out;
  while (!stack.empty()) {
    std::uint32_t v = stack.back();
    stack.pop_back();
    if (v == 0 || seen[v]) continue;
    seen[v] = true;
    if (v <= inputs_) {
      out.push_back(v - 1);
    } else {
      const auto& [a, b] = fanins(v);
      stack.push_back(a >> 1);
      stack.push_back(b >> 1);
    }
  }
  std::sort(out.begin(), out.end());
  return out;
}

const char* to_string(CertificateKind k) { return k == CertificateKind::Skolem ? "skolem" : "herbrand"; }

std::vector<bool> Certificate::evaluate(const std::vector<bool>& input_values) const {
  std::vector<bool> sim = aig.simulate(input_values);
  std::vector<bool> out;
  for (const auto& o : outputs) out.push_back(Aig::value(sim, o.second));
  return out;
}

namespace {

// Children of t that lie entirely outside (before) the scope.
std::vector<NodeId> outer_children(const QbfProblem& problem, const InfluenceInfo& influence, NodeId t,
                                   std::size_t scope) {
  std::vector<NodeId> out;
  const Formula& f = problem.formula();
  for (NodeId c : f[t].children) {
    const Node& n = f[c];
    bool outer = n.kind == NodeKind::Lit ? problem.scope_of(n.lit.var()) < scope : influence.max_scope(c) < scope;
    if (outer) out.push_back(c);
  }
  return out;
}

void check_interface(const QbfProblem& problem, const InfluenceInfo& influence, NodeId t, std::size_t scope) {
  if (scope < 2 || scope > problem.num_scopes()) throw Error("scope " + std::to_string(scope) + " has no interface");
  if (index(t) >= problem.formula().size()) throw Error("node " + std::to_string(index(t)) + " does not exist");
  auto tn = interface_nodes(problem, influence, scope - 1);
  if (!std::binary_search(tn.begin(), tn.end(), t))
    throw Error("node " + std::to_string(index(t)) + " is not an interface node of scope " + std::to_string(scope));
}

// Circuit of a subtree, optionally negated; literals resolved through var_lit.
class AigBuilder {
 public:
  AigBuilder(Aig& aig, const Formula& f, std::function<AigLit(Var)> var_lit)
      : aig_(aig), f_(f), var_lit_(std::move(var_lit)) {}

  AigLit build(NodeId id, bool negate) {
    const Node& n = f_[id];
    switch (n.kind) {
      case NodeKind::True: return negate ? aig_false : aig_true;
      case NodeKind::False: return negate ? aig_true : aig_false;
      case NodeKind::Lit: return var_lit_(n.lit.var()) ^ static_cast<AigLit>(n.lit.negated() != negate);
      default: return combine(n.kind, n.children, negate);
    }
  }

  AigLit combine(NodeKind kind, const std::vector<NodeId>& children, bool negate) {
    const bool conj = (kind == NodeKind::And) != negate;
    AigLit acc = conj ? aig_true : aig_false;
    for (NodeId c : children) {
      AigLit l = build(c, negate);
      acc = conj ? aig_.make_and(acc, l) : aig_.make_or(acc, l);
    }
    return acc;
  }

 private:
  Aig& aig_;
  const Formula& f_;
  std::function<AigLit(Var)> var_lit_;
};

}  // namespace

NodeId condition_formula(const QbfProblem& problem, NodeId t, std::size_t scope, Formula& out) {
  InfluenceInfo influence(problem);
  check_interface(problem, influence, t, scope);
  std::vector<NodeId> parts;
  for (NodeId c : outer_children(problem, influence, t, scope)) parts.push_back(out.import(problem.formula(), c));
  return problem.formula()[t].kind == NodeKind::And ? out.make_and(parts) : out.make_or(parts);
}

Certificate extract_functions(const QbfProblem& solved, const ProofTrace& trace, TruthValue truth,
                              const FixedVars& fixed, const QbfProblem& original) {
  const Quantifier func_q = truth == TruthValue::True ? Quantifier::Exists : Quantifier::Forall;
  Certificate cert;
  cert.kind = truth == TruthValue::True ? CertificateKind::Skolem : CertificateKind::Herbrand;

  // Opponent variables that some function may depend on become inputs.
  std::size_t last_func_scope = 0;
  for (std::size_t s = 1; s <= original.num_scopes(); ++s)
    if (original.scope(s).quantifier == func_q) last_func_scope = s;
  std::vector<AigLit> lit_of(original.num_vars() + 1, aig_false);
  std::vector<bool> defined(original.num_vars() + 1, false);
  for (std::size_t s = 1; s < last_func_scope; ++s) {
    if (original.scope(s).quantifier == func_q) continue;
    for (Var v : original.scope(s).vars) {
      lit_of[v] = cert.aig.add_input();
      defined[v] = true;
      cert.inputs.push_back(original.name(v));
    }
  }

  if (solved.num_vars() != original.num_vars()) throw Error("solved problem does not match the original's variables");
  for (const auto& [v, value] : fixed) {
    if (v > original.num_vars()) throw Error("constant witness for unknown variable " + std::to_string(v));
    if (original.quantifier_of(v) != func_q) continue;
    lit_of[v] = value ? aig_true : aig_false;
    defined[v] = true;
  }

  InfluenceInfo influence(solved);
  std::map<std::size_t, std::vector<const ProofPair*>> by_scope;
  for (const auto& pair : trace) {
    if (pair.scope == 0 || pair.scope > solved.num_scopes()) throw Error("trace pair names an unknown scope");
    if (solved.scope(pair.scope).quantifier != func_q) continue;  // the losing player's moves
    by_scope[pair.scope].push_back(&pair);
  }

  AigBuilder builder(cert.aig, solved.formula(), [&](Var v) {
    if (!defined[v]) throw Error("condition refers to variable " + solved.name(v) + " before its function");
    return lit_of[v];
  });
  // A universal scope plays on the negated matrix, so its conditions are negated.
  const bool negate = func_q == Quantifier::Forall;
  for (std::size_t s = 1; s <= solved.num_scopes(); ++s) {
    const Scope& scope = solved.scope(s);
    if (scope.quantifier != func_q) continue;
    std::set<Var> members(scope.vars.begin(), scope.vars.end());
    std::vector<AigLit> f(solved.num_vars() + 1, aig_false);
    std::vector<NodeId> tn = s > 1 ? interface_nodes(solved, influence, s - 1) : std::vector<NodeId>{};
    std::map<NodeId, AigLit> cond_of;
    AigLit none_before = aig_true;
    const auto& pairs = by_scope[s];
    for (std::size_t k = 0; k < pairs.size(); ++k) {
      const ProofPair* pair = pairs[k];
      AigLit cond = aig_true;
      for (NodeId t : pair->t_set) {
        if (!std::binary_search(tn.begin(), tn.end(), t))
          throw Error("trace pair refers to node " + std::to_string(index(t)) + " outside the scope's interface");
        auto it = cond_of.find(t);
        if (it == cond_of.end()) {
          AigLit c = builder.combine(solved.formula()[t].kind, outer_children(solved, influence, t, s), negate);
          it = cond_of.emplace(t, c).first;
        }
        cond = cert.aig.make_and(cond, it->second);
      }
      AigLit select = cert.aig.make_and(cond, none_before);
      if (k + 1 < pairs.size()) none_before = cert.aig.make_and(none_before, cond ^ 1);
      for (Var x : pair->x_set) {
        if (!members.count(x)) throw Error("trace pair assigns variable " + std::to_string(x) + " outside its scope");
        f[x] = cert.aig.make_or(f[x], select);
      }
    }
    for (Var x : scope.vars) {
      lit_of[x] = f[x];
      defined[x] = true;
    }
  }

  for (const auto& scope : original.prefix()) {
    if (scope.quantifier != func_q) continue;
    for (Var v : scope.vars) cert.outputs.emplace_back(original.name(v), defined[v] ? lit_of[v] : aig_false);
  }
  return cert;
}

std::string write_aiger(const Certificate& cert) {
  const Aig& aig = cert.aig;
  std::ostringstream os;
  os << "aag " << aig.max_var() << ' ' << aig.num_inputs() << " 0 " << cert.outputs.size() << ' ' << aig.num_ands()
     << '\n';
  for (std::size_t i = 1; i <= aig.num_inputs(); ++i) os << 2 * i << '\n';
  for (const auto& o : cert.outputs) os << o.second << '\n';
  for (std::uint32_t v = static_cast<std::uint32_t>(aig.num_inputs()) + 1; v <= aig.max_var(); ++v) {
    const auto& [a, b] = aig.fanins(v);
    os << 2 * v << ' ' << std::max(a, b) << ' ' << std::min(a, b) << '\n';
  }
  for (std::size_t i = 0; i < cert.inputs.size(); ++i) os << 'i' << i << ' ' << cert.inputs[i] << '\n';
  for (std::size_t i = 0; i < cert.outputs.size(); ++i) os << 'o' << i << ' ' << cert.outputs[i].first << '\n';
  if (cert.kind) os << "c\n" << to_string(*cert.kind) << '\n';
  return os.str();
}

namespace {

std::vector<std::string> tokens(std::string_view line) {
  std::vector<std::string> out;
  std::istringstream in{std::string(line)};
  for (std::string t; in >> t;) out.push_back(t);
  return out;
}

std::uint64_t number(const std::string& tok, std::size_t line) {
  if (tok.empty() || !std::all_of(tok.begin(), tok.end(), [](char c) { return c >= '0' && c <= '9'; }) ||
      tok.size() > 18)
    throw ParseError(line, "expected a number, got '" + tok + "'");
  return std::stoull(tok);
}

}  // namespace

Certificate read_aiger(std::string_view text) {
  std::vector<std::string_view> lines;
  for (std::size_t pos = 0; pos < text.size();) {
    std::size_t eol = text.find('\n', pos);
    if (eol == std::string_view::npos) eol = text.size();
    lines.push_back(text.substr(pos, eol - pos));
    pos = eol + 1;
  }
  if (lines.empty()) throw ParseError(1, "empty AIGER file");
  auto head = tokens(lines[0]);
  if (head.size() != 6 || head[0] != "aag") throw ParseError(1, "expected 'aag M I L O A' header");
  const std::uint64_t M = number(head[1], 1), I = number(head[2], 1), L = number(head[3], 1), O = number(head[4], 1),
                      A = number(head[5], 1);
  if (L != 0) throw ParseError(1, "latches are not supported");
  if (I + A > M) throw ParseError(1, "header counts exceed the maximum variable index");
  if (lines.size() < 1 + I + O + A) throw ParseError(lines.size(), "file ends before all definitions");

  auto check_lit = [&](std::uint64_t l, std::size_t line) {
    if (l > 2 * M + 1) throw ParseError(line, "literal " + std::to_string(l) + " exceeds the maximum index");
    return l;
  };
  std::map<std::uint64_t, std::size_t> input_pos;
  std::map<std::uint64_t, std::pair<std::uint64_t, std::uint64_t>> gates;
  std::map<std::uint64_t, std::size_t> gate_line;
  std::vector<std::uint64_t> outs;
  std::size_t ln = 1;
  for (std::uint64_t i = 0; i < I; ++i, ++ln) {
    auto t = tokens(lines[ln]);
    if (t.size() != 1) throw ParseError(ln + 1, "expected one input literal");
    std::uint64_t l = check_lit(number(t[0], ln + 1), ln + 1);
    if (l < 2 || (l & 1)) throw ParseError(ln + 1, "input literal must be a positive variable");
    if (!input_pos.emplace(l >> 1, i).second) throw ParseError(ln + 1, "input defined twice");
  }
  for (std::uint64_t i = 0; i < O; ++i, ++ln) {
    auto t = tokens(lines[ln]);
    if (t.size() != 1) throw ParseError(ln + 1, "expected one output literal");
    outs.push_back(check_lit(number(t[0], ln + 1), ln + 1));
  }
  for (std::uint64_t i = 0; i < A; ++i, ++ln) {
    auto t = tokens(lines[ln]);
    if (t.size() != 3) throw ParseError(ln + 1, "expected 'lhs rhs0 rhs1'");
    std::uint64_t lhs = check_lit(number(t[0], ln + 1), ln + 1);
    if (lhs < 2 || (lhs & 1)) throw ParseError(ln + 1, "gate output must be a positive variable");
    if (input_pos.count(lhs >> 1) || gates.count(lhs >> 1)) throw ParseError(ln + 1, "variable defined twice");
    gates[lhs >> 1] = {check_lit(number(t[1], ln + 1), ln + 1), check_lit(number(t[2], ln + 1), ln + 1)};
    gate_line[lhs >> 1] = ln + 1;
  }

  Certificate cert;
  cert.inputs.resize(I);
  std::vector<std::string> out_names(O);
  for (; ln < lines.size(); ++ln) {
    std::string_view line = lines[ln];
    if (line.empty()) continue;
    if (line == "c") {
      for (++ln; ln < lines.size(); ++ln) {
        auto t = tokens(lines[ln]);
        if (t.size() == 1 && t[0] == "skolem") cert.kind = CertificateKind::Skolem;
        if (t.size() == 1 && t[0] == "herbrand") cert.kind = CertificateKind::Herbrand;
      }
      break;
    }
    std::size_t sp = line.find(' ');
    if ((line[0] != 'i' && line[0] != 'o' && line[0] != 'l') || sp == std::string_view::npos)
      throw ParseError(ln + 1, "malformed symbol line");
    std::uint64_t pos = number(std::string(line.substr(1, sp - 1)), ln + 1);
    std::string name(line.substr(sp + 1));
    if (line[0] == 'i') {
      if (pos >= I) throw ParseError(ln + 1, "symbol for a missing input");
      cert.inputs[pos] = name;
    } else if (line[0] == 'o') {
      if (pos >= O) throw ParseError(ln + 1, "symbol for a missing output");
      out_names[pos] = name;
    } else {
      throw ParseError(ln + 1, "symbol for a missing latch");
    }
  }

  for (std::uint64_t i = 0; i < I; ++i) cert.aig.add_input();
  // Gates may appear in any order in the ASCII format; rebuild children first.
  std::map<std::uint64_t, AigLit> mapped;
  std::set<std::uint64_t> active;
  std::function<AigLit(std::uint64_t, std::size_t)> resolve = [&](std::uint64_t lit, std::size_t line) -> AigLit {
    const std::uint64_t v = lit >> 1;
    const AigLit neg = static_cast<AigLit>(lit & 1);
    if (v == 0) return neg;
    if (auto it = input_pos.find(v); it != input_pos.end()) return static_cast<AigLit>(2 * (it->second + 1)) ^ neg;
    if (auto it = mapped.find(v); it != mapped.end()) return it->second ^ neg;
    auto g = gates.find(v);
    if (g == gates.end()) throw ParseError(line, "undefined literal " + std::to_string(lit));
    if (!active.insert(v).second) throw ParseError(gate_line[v], "combinational cycle");
    AigLit a = resolve(g->second.first, gate_line[v]);
    AigLit b = resolve(g->second.second, gate_line[v]);
    active.erase(v);
    AigLit r = cert.aig.add_raw_and(a, b);
    mapped[v] = r;
    return r ^ neg;
  };
  for (const auto& [v, fanin] : gates) resolve(2 * v, gate_line[v]);
  for (std::uint64_t i = 0; i < O; ++i) cert.outputs.emplace_back(out_names[i], resolve(outs[i], 2 + I + i));
  return cert;
}

const char* to_string(Verdict::Status s) {
  switch (s) {
    case Verdict::Status::Valid: return "Valid";
    case Verdict::Status::Invalid: return "Invalid";
    case Verdict::Status::IllFormed: return "IllFormed";
  }
  return "?";
}

namespace {

Quantifier function_quantifier(const QbfProblem& problem, const Certificate& cert) {
  if (cert.kind) return *cert.kind == CertificateKind::Skolem ? Quantifier::Exists : Quantifier::Forall;
  if (!cert.outputs.empty())
    if (auto v = problem.find_var(cert.outputs.front().first)) return problem.quantifier_of(*v);
  return Quantifier::Exists;
}

}  // namespace

std::string check_well_formed(const QbfProblem& problem, const Certificate& cert) {
  const Quantifier fq = function_quantifier(problem, cert);
  std::vector<Var> input_var;
  std::set<std::string> seen;
  if (cert.inputs.size() != cert.aig.num_inputs()) return "input symbol count differs from the circuit";
  for (const auto& name : cert.inputs) {
    auto v = problem.find_var(name);
    if (!v || problem.scope_of(*v) == 0) return "input '" + name + "' is not a variable of the problem";
    if (problem.quantifier_of(*v) == fq) return "input '" + name + "' is a function variable";
    if (!seen.insert(name).second) return "input '" + name + "' listed twice";
    input_var.push_back(*v);
  }
  seen.clear();
  for (const auto& [name, lit] : cert.outputs) {
    auto v = problem.find_var(name);
    if (!v || problem.scope_of(*v) == 0) return "output '" + name + "' is not a variable of the problem";
    if (problem.quantifier_of(*v) != fq) return "output '" + name + "' is not a " + to_string(fq) + " variable";
    if (!seen.insert(name).second) return "output '" + name + "' listed twice";
    if ((lit >> 1) > cert.aig.max_var()) return "output '" + name + "' refers to a missing gate";
    std::vector<Var> dep = dependencies(problem, *v);
    for (std::size_t i : cert.aig.support(lit)) {
      if (std::find(dep.begin(), dep.end(), input_var[i]) == dep.end())
        return "output '" + name + "' depends on '" + cert.inputs[i] + "', which is not among its dependencies";
    }
  }
  for (const auto& scope : problem.prefix()) {
    if (scope.quantifier != fq) continue;
    for (Var v : scope.vars)
      if (!seen.count(problem.name(v))) return "no function for variable '" + problem.name(v) + "'";
  }
  return {};
}

Verdict verify(const QbfProblem& problem, const Certificate& cert) {
  Verdict verdict;
  verdict.reason = check_well_formed(problem, cert);
  if (!verdict.reason.empty()) {
    verdict.status = Verdict::Status::IllFormed;
    return verdict;
  }
  const Quantifier fq = function_quantifier(problem, cert);

  SatSolver sat;
  for (std::size_t v = 1; v <= problem.num_vars(); ++v) sat.new_var();
  const Aig& aig = cert.aig;
  std::vector<SatLit> node(aig.max_var() + 1);
  node[0] = SatLit::pos(sat.new_var());
  sat.add_clause({~node[0]});
  for (std::size_t i = 0; i < aig.num_inputs(); ++i)
    node[i + 1] = SatLit::pos(static_cast<SatVar>(*problem.find_var(cert.inputs[i]) - 1));
  auto lit = [&](AigLit l) { return node[l >> 1] ^ ((l & 1) != 0); };
  for (std::uint32_t v = static_cast<std::uint32_t>(aig.num_inputs()) + 1; v <= aig.max_var(); ++v) {
    node[v] = SatLit::pos(sat.new_var());
    const auto& [a, b] = aig.fanins(v);
    sat.add_clause({~node[v], lit(a)});
    sat.add_clause({~node[v], lit(b)});
    sat.add_clause({node[v], ~lit(a), ~lit(b)});
  }
  for (const auto& [name, out] : cert.outputs) {
    SatLit x = SatLit::pos(static_cast<SatVar>(*problem.find_var(name) - 1));
    sat.add_clause({~x, lit(out)});
    sat.add_clause({x, ~lit(out)});
  }
  auto map = [](Literal l) { return SatLit(l.var() - 1, l.negated()); };
  // A Skolem certificate must leave no way to falsify the matrix; a Herbrand one no
  // way to satisfy it.
  SatLit root = encode_nnf(sat, problem.formula(), problem.matrix(), map, fq == Quantifier::Exists);
  sat.add_clause({root});
  SolveResult r = sat.solve({});
  if (r.sat()) {
    verdict.status = Verdict::Status::Invalid;
    for (const auto& scope : problem.prefix()) {
      if (scope.quantifier == fq) continue;
      for (Var v : scope.vars) verdict.counterexample.emplace_back(problem.name(v), r.model[v - 1]);
    }
  }
  return verdict;
}

void write_trace(std::ostream& os, const QbfProblem& solved, const ProofTrace& trace, const FixedVars& fixed) {
  const auto gates = qcir_gate_ids(solved);
  os << "c qcegar trace\n";
  for (std::size_t i = 0; i < gates.size(); ++i)
    if (gates[i] != 0) os << "g " << i << ' ' << gates[i] << '\n';
  for (const auto& [v, value] : fixed) os << "f " << v << ' ' << (value ? 1 : 0) << '\n';
  for (const auto& pair : trace) {
    os << "p " << pair.scope << " t";
    for (NodeId t : pair.t_set) os << ' ' << index(t);
    os << " x";
    for (Var v : pair.x_set) os << ' ' << v;
    os << '\n';
  }
}

TraceFile read_trace(std::string_view text) {
  TraceFile tf;
  std::istringstream in{std::string(text)};
  std::size_t ln = 0;
  for (std::string line; std::getline(in, line);) {
    ++ln;
    auto t = tokens(line);
    if (t.empty() || t[0] == "c") continue;
    if (t[0] == "g") {
      if (t.size() != 3) throw ParseError(ln, "expected 'g <node> <gate>'");
      tf.gates.emplace_back(number(t[1], ln), number(t[2], ln));
    } else if (t[0] == "f") {
      if (t.size() != 3 || (t[2] != "0" && t[2] != "1")) throw ParseError(ln, "expected 'f <var> <0|1>'");
      tf.fixed[static_cast<Var>(number(t[1], ln))] = t[2] == "1";
    } else if (t[0] == "p") {
      if (t.size() < 4 || t[2] != "t") throw ParseError(ln, "expected 'p <scope> t ... x ...'");
      ProofPair pair;
      pair.scope = number(t[1], ln);
      std::size_t i = 3;
      for (; i < t.size() && t[i] != "x"; ++i) pair.t_set.push_back(node_id(number(t[i], ln)));
      if (i == t.size()) throw ParseError(ln, "missing 'x' section");
      for (++i; i < t.size(); ++i) pair.x_set.push_back(static_cast<Var>(number(t[i], ln)));
      tf.trace.push_back(std::move(pair));
    } else {
      throw ParseError(ln, "unknown trace line '" + t[0] + "'");
    }
  }
  return tf;
}

}  // namespace qcegar
