#include "qcegar/generators.hpp"

#include <algorithm>
#include <atomic>
#include <iomanip>
#include <ostream>
#include <random>
#include <thread>

namespace qcegar {

const char* to_string(Family f) {
  switch (f) {
    case Family::QParity: return "qparity";
    case Family::ExpansionHard: return "expansion";
    case Family::Random: return "random";
  }
  return "?";
}

Family parse_family(const std::string& name) {
  if (name == "qparity") return Family::QParity;
  if (name == "expansion" || name == "expansion-hard") return Family::ExpansionHard;
  if (name == "random") return Family::Random;
  throw Error("unknown family '" + name + "'");
}

namespace {

struct Parity {
  NodeId pos;
  NodeId neg;
};

Parity xor_of(Formula& f, Parity a, Parity b) {
  NodeId p = f.make_or({f.make_and({a.pos, b.neg}), f.make_and({a.neg, b.pos})});
  NodeId n = f.make_or({f.make_and({a.pos, b.pos}), f.make_and({a.neg, b.neg})});
  return {p, n};
}

Parity balanced(Formula& f, Var lo, Var hi) {
  if (lo == hi) return {f.literal(Literal::positive(lo)), f.literal(Literal::negative(lo))};
  Var mid = lo + (hi - lo) / 2;
  return xor_of(f, balanced(f, lo, mid), balanced(f, mid + 1, hi));
}

}  // namespace

QbfProblem gen_qparity(std::size_t n, bool chain) {
  if (n < 2) throw Error("QParity needs n >= 2");
  Formula f;
  std::vector<std::string> names{""};
  Scope xs{Quantifier::Exists, {}};
  for (Var v = 1; v <= n; ++v) {
    xs.vars.push_back(v);
    names.push_back("x" + std::to_string(v));
  }
  const auto z = static_cast<Var>(n + 1);
  names.push_back("z");
  Parity p{};
  if (chain) {
    p = {f.literal(Literal::positive(1)), f.literal(Literal::negative(1))};
    for (Var v = 2; v <= n; ++v) p = xor_of(f, p, {f.literal(Literal::positive(v)), f.literal(Literal::negative(v))});
  } else {
    p = balanced(f, 1, static_cast<Var>(n));
  }
  NodeId matrix = f.make_and({f.make_or({f.literal(Literal::positive(z)), p.pos}),
                              f.make_or({f.literal(Literal::negative(z)), p.neg})});
  return QbfProblem({xs, Scope{Quantifier::Forall, {z}}}, f, matrix, names);
}

QbfProblem gen_expansion_hard(std::size_t n) {
  if (n < 1) throw Error("expansion family needs n >= 1");
  Formula f;
  std::vector<std::string> names{""};
  std::vector<Scope> prefix;
  std::vector<NodeId> conj;
  std::vector<NodeId> clause_c;
  Var next = 1;
  for (std::size_t i = 1; i <= n; ++i) {
    Var e = next++;
    Var u = next++;
    Var c1 = next++;
    Var c2 = next++;
    names.push_back("e" + std::to_string(i));
    names.push_back("u" + std::to_string(i));
    names.push_back("c" + std::to_string(2 * i - 1));
    names.push_back("c" + std::to_string(2 * i));
    prefix.push_back({Quantifier::Exists, {e}});
    prefix.push_back({Quantifier::Forall, {u}});
    prefix.push_back({Quantifier::Exists, {c1, c2}});
    auto lit = [&](Var v, bool neg) { return f.literal(Literal(v, neg)); };
    NodeId e1 = f.make_and({lit(e, true), lit(u, true)});
    NodeId e2 = f.make_and({lit(e, false), lit(u, false)});
    conj.push_back(f.make_or({e1, lit(c1, false)}));
    conj.push_back(f.make_or({e2, lit(c2, false)}));
    clause_c.push_back(lit(c1, true));
    clause_c.push_back(lit(c2, true));
  }
  conj.push_back(f.make_or(clause_c));
  NodeId matrix = f.make_and(conj);
  return QbfProblem(std::move(prefix), f, matrix, names);
}

namespace {

// Portable bounded draw; std distributions differ between standard libraries.
class Draw {
 public:
  explicit Draw(std::uint64_t seed) : rng_(seed) {}
  std::size_t below(std::size_t n) { return n == 0 ? 0 : static_cast<std::size_t>(rng_() % n); }
  bool coin() { return (rng_() & 1) != 0; }

 private:
  std::mt19937_64 rng_;
};

NodeId random_tree(Formula& f, Draw& d, std::size_t budget, std::size_t nvars, std::size_t depth) {
  if (budget < 3 || (depth > 0 && d.below(4) == 0)) {
    auto v = static_cast<Var>(1 + d.below(nvars));
    return f.literal(Literal(v, d.coin()));
  }
  std::size_t arity = 2 + d.below(3);
  std::size_t rest = budget - 1;
  arity = std::min(arity, rest);
  std::vector<NodeId> kids;
  for (std::size_t k = 0; k < arity; ++k) {
    std::size_t share = rest / (arity - k);
    if (k + 1 < arity) share = 1 + d.below(share);
    else share = rest;
    rest -= share;
    kids.push_back(random_tree(f, d, share, nvars, depth + 1));
  }
  return d.coin() ? f.make_and(kids) : f.make_or(kids);
}

}  // namespace

QbfProblem gen_random(std::uint64_t seed, const RandomShape& shape) {
  Draw d(seed);
  const std::size_t nvars = 1 + d.below(std::max<std::size_t>(shape.max_vars, 1));
  const std::size_t nblocks = 1 + d.below(std::min(std::max<std::size_t>(shape.max_blocks, 1), nvars));
  Quantifier q = d.coin() ? Quantifier::Exists : Quantifier::Forall;

  // Split 1..nvars into nblocks non-empty consecutive blocks.
  std::vector<std::size_t> cuts;
  while (cuts.size() + 1 < nblocks) {
    std::size_t c = 1 + d.below(nvars - 1);
    if (std::find(cuts.begin(), cuts.end(), c) == cuts.end()) cuts.push_back(c);
  }
  std::sort(cuts.begin(), cuts.end());
  cuts.push_back(nvars);
  std::vector<Scope> prefix;
  Var v = 1;
  for (std::size_t c : cuts) {
    Scope s{q, {}};
    for (; v <= c; ++v) s.vars.push_back(v);
    prefix.push_back(std::move(s));
    q = flip(q);
  }

  Formula f;
  NodeId matrix = random_tree(f, d, std::max<std::size_t>(shape.max_nodes, 1), nvars, 0);
  return QbfProblem(std::move(prefix), f, matrix);
}

QbfProblem generate(const GenSpec& spec) {
  switch (spec.family) {
    case Family::QParity: return gen_qparity(spec.n);
    case Family::ExpansionHard: return gen_expansion_hard(spec.n);
    case Family::Random: return gen_random(spec.seed + spec.n, spec.shape);
  }
  throw Error("unknown family");
}

std::vector<ExperimentRow> run_experiment(const ExperimentSpec& spec) {
  if (spec.n_from > spec.n_to) throw Error("empty size range");
  struct Task {
    std::size_t n;
    Algorithm algorithm;
  };
  std::vector<Task> tasks;
  for (std::size_t n = spec.n_from; n <= spec.n_to; ++n)
    for (Algorithm a : spec.algorithms) tasks.push_back({n, a});

  std::vector<ExperimentRow> rows(tasks.size());
  std::atomic<std::size_t> next{0};
  auto work = [&] {
    for (std::size_t i = next++; i < tasks.size(); i = next++) {
      GenSpec g{spec.family, tasks[i].n, spec.seed, spec.shape};
      QbfProblem p = generate(g);
      SolverConfig cfg;
      cfg.algorithm = tasks[i].algorithm;
      cfg.seed = spec.seed;
      cfg.record_trace = false;
      SolveOutcome out = solve(p, cfg, spec.preprocess);
      ExperimentRow& r = rows[i];
      r.family = spec.family;
      r.n = tasks[i].n;
      r.algorithm = tasks[i].algorithm;
      r.truth = out.truth;
      for (const auto& s : out.stats.scopes) {
        r.scope_refinements.push_back(s.refinements);
        r.scope_quantifiers.push_back(s.quantifier);
      }
      r.total_iterations = out.stats.total_iterations;
      r.wall_ms = out.stats.wall_ms;
    }
  };
  const std::size_t jobs = std::max<std::size_t>(1, std::min(spec.jobs, tasks.size()));
  if (jobs == 1) {
    work();
  } else {
    std::vector<std::thread> pool;
    for (std::size_t j = 0; j < jobs; ++j) pool.emplace_back(work);
    for (auto& t : pool) t.join();
  }
  return rows;
}

void write_csv(std::ostream& os, const std::vector<ExperimentRow>& rows) {
  os << "family,n,algorithm,truth,scope_refinements,total_iterations,wall_ms\n";
  for (const auto& r : rows) {
    os << to_string(r.family) << ',' << r.n << ',' << to_string(r.algorithm) << ',' << to_string(r.truth) << ',';
    for (std::size_t i = 0; i < r.scope_refinements.size(); ++i) os << (i ? ";" : "") << r.scope_refinements[i];
    os << ',' << r.total_iterations << ',' << std::fixed << std::setprecision(3) << r.wall_ms << '\n';
    os.unsetf(std::ios::fixed);
  }
}

}  // namespace qcegar
