#include "qcegar/sat.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <ostream>
#include <random>

namespace qcegar {

namespace {

constexpr std::uint32_t kNoReason = std::numeric_limits<std::uint32_t>::max();

// lbool encoding: 0 false, 1 true, 2 undefined.
constexpr std::uint8_t kFalse = 0;
constexpr std::uint8_t kTrue = 1;
constexpr std::uint8_t kUndef = 2;

double luby(double y, int x) {
  int size = 1;
  int seq = 0;
  while (size < x + 1) {
    seq++;
    size = 2 * size + 1;
  }
  while (size - 1 != x) {
    size = (size - 1) >> 1;
    seq--;
    x = x % size;
  }
  return std::pow(y, seq);
}

}  // namespace

struct SatSolver::Impl {
  struct StoredClause {
    std::vector<SatLit> lits;
    bool learnt = false;
  };
  struct Watcher {
    std::uint32_t cref;
    SatLit blocker;
  };

  SatOptions options;
  bool ok = true;

  std::vector<StoredClause> db;
  std::vector<Clause> log;
  std::vector<std::vector<Watcher>> watches;

  std::vector<std::uint8_t> assigns;
  std::vector<int> level;
  std::vector<std::uint32_t> reason;
  std::vector<bool> polarity;
  std::vector<std::uint8_t> seen;
  std::vector<SatLit> trail;
  std::vector<std::size_t> trail_lim;
  std::size_t qhead = 0;

  std::vector<double> activity;
  double var_inc = 1.0;
  static constexpr double kVarDecay = 0.95;

  // Binary max-heap over unassigned decision candidates.
  std::vector<SatVar> heap;
  std::vector<int> heap_pos;

  std::uint64_t solves = 0;
  std::uint64_t conflicts = 0;
  std::mt19937_64 rng;

  explicit Impl(SatOptions o) : options(o), rng(o.seed) {}

  std::uint8_t value(SatLit l) const {
    std::uint8_t a = assigns[l.var()];
    return a == kUndef ? kUndef : static_cast<std::uint8_t>(a ^ (l.negated() ? 1 : 0));
  }
  int decision_level() const { return static_cast<int>(trail_lim.size()); }

  // --- heap ---
  bool before(SatVar a, SatVar b) const {
    if (activity[a] != activity[b]) return activity[a] > activity[b];
    return a < b;
  }
  void heap_up(std::size_t i) {
    SatVar v = heap[i];
    while (i > 0) {
      std::size_t p = (i - 1) / 2;
      if (!before(v, heap[p])) break;
      heap[i] = heap[p];
      heap_pos[heap[i]] = static_cast<int>(i);
      i = p;
    }
    heap[i] = v;
    heap_pos[v] = static_cast<int>(i);
  }
  void heap_down(std::size_t i) {
    SatVar v = heap[i];
    for (;;) {
      std::size_t c = 2 * i + 1;
      if (c >= heap.size()) break;
      if (c + 1 < heap.size() && before(heap[c + 1], heap[c])) c++;
      if (!before(heap[c], v)) break;
      heap[i] = heap[c];
      heap_pos[heap[i]] = static_cast<int>(i);
      i = c;
    }
    heap[i] = v;
    heap_pos[v] = static_cast<int>(i);
  }
  void heap_insert(SatVar v) {
    if (heap_pos[v] >= 0) return;
    heap.push_back(v);
    heap_up(heap.size() - 1);
  }
  SatVar heap_pop() {
    SatVar top = heap.front();
    heap_pos[top] = -1;
    SatVar last = heap.back();
    heap.pop_back();
    if (!heap.empty()) {
      heap[0] = last;
      heap_pos[last] = 0;
      heap_down(0);
    }
    return top;
  }

  void bump(SatVar v) {
    activity[v] += var_inc;
    if (activity[v] > 1e100) {
      for (double& a : activity) a *= 1e-100;
      var_inc *= 1e-100;
    }
    if (heap_pos[v] >= 0) heap_up(static_cast<std::size_t>(heap_pos[v]));
  }

  SatVar new_var() {
    auto v = static_cast<SatVar>(assigns.size());
    assigns.push_back(kUndef);
    level.push_back(0);
    reason.push_back(kNoReason);
    polarity.push_back(false);
    seen.push_back(0);
    double init = 0.0;
    if (options.seed != 0) init = std::uniform_real_distribution<double>(0.0, 1e-5)(rng);
    activity.push_back(init);
    heap_pos.push_back(-1);
    watches.emplace_back();
    watches.emplace_back();
    heap_insert(v);
    return v;
  }

  void check_lit(SatLit l) const {
    if (l.var() >= assigns.size()) throw Error("literal over unallocated solver variable " + std::to_string(l.var()));
  }

  void enqueue(SatLit l, std::uint32_t from) {
    assigns[l.var()] = l.negated() ? kFalse : kTrue;
    level[l.var()] = decision_level();
    reason[l.var()] = from;
    trail.push_back(l);
  }

  void attach(std::uint32_t cref) {
    const auto& c = db[cref].lits;
    watches[(~c[0]).code()].push_back({cref, c[1]});
    watches[(~c[1]).code()].push_back({cref, c[0]});
  }

  void cancel_until(int lvl) {
    if (decision_level() <= lvl) return;
    for (std::size_t i = trail.size(); i-- > trail_lim[static_cast<std::size_t>(lvl)];) {
      SatVar v = trail[i].var();
      polarity[v] = assigns[v] == kTrue;
      assigns[v] = kUndef;
      reason[v] = kNoReason;
      heap_insert(v);
    }
    trail.resize(trail_lim[static_cast<std::size_t>(lvl)]);
    trail_lim.resize(static_cast<std::size_t>(lvl));
    qhead = trail.size();
  }

  std::uint32_t propagate() {
    std::uint32_t confl = kNoReason;
    while (qhead < trail.size()) {
      SatLit p = trail[qhead++];
      SatLit false_lit = ~p;
      auto& ws = watches[p.code()];
      std::size_t i = 0;
      std::size_t j = 0;
      while (i < ws.size()) {
        Watcher w = ws[i];
        if (value(w.blocker) == kTrue) {
          ws[j++] = ws[i++];
          continue;
        }
        auto& c = db[w.cref].lits;
        if (c[0] == false_lit) std::swap(c[0], c[1]);
        i++;
        SatLit first = c[0];
        Watcher nw{w.cref, first};
        if (first != w.blocker && value(first) == kTrue) {
          ws[j++] = nw;
          continue;
        }
        bool moved = false;
        for (std::size_t k = 2; k < c.size(); ++k) {
          if (value(c[k]) != kFalse) {
            std::swap(c[1], c[k]);
            watches[(~c[1]).code()].push_back(nw);
            moved = true;
            break;
          }
        }
        if (moved) continue;
        ws[j++] = nw;
        if (value(first) == kFalse) {
          confl = w.cref;
          qhead = trail.size();
          while (i < ws.size()) ws[j++] = ws[i++];
        } else {
          enqueue(first, w.cref);
        }
      }
      ws.resize(j);
      if (confl != kNoReason) break;
    }
    return confl;
  }

  // Local minimization: drop a literal whose reason is subsumed by the clause.
  bool redundant(SatLit l) const {
    std::uint32_t r = reason[l.var()];
    if (r == kNoReason) return false;
    const auto& c = db[r].lits;
    for (std::size_t k = 1; k < c.size(); ++k) {
      if (!seen[c[k].var()] && level[c[k].var()] > 0) return false;
    }
    return true;
  }

  void analyze(std::uint32_t confl, std::vector<SatLit>& out, int& bt_level) {
    int path = 0;
    SatLit p;
    bool have_p = false;
    out.clear();
    out.emplace_back();
    std::size_t index = trail.size();
    do {
      const auto& c = db[confl].lits;
      for (std::size_t k = have_p ? 1 : 0; k < c.size(); ++k) {
        SatLit q = c[k];
        if (!seen[q.var()] && level[q.var()] > 0) {
          bump(q.var());
          seen[q.var()] = 1;
          if (level[q.var()] >= decision_level()) {
            path++;
          } else {
            out.push_back(q);
          }
        }
      }
      while (!seen[trail[--index].var()]) {
      }
      p = trail[index];
      have_p = true;
      confl = reason[p.var()];
      seen[p.var()] = 0;
      path--;
    } while (path > 0);
    out[0] = ~p;

    std::vector<SatLit> all(out.begin() + 1, out.end());
    std::size_t keep = 1;
    for (std::size_t k = 1; k < out.size(); ++k) {
      if (!redundant(out[k])) out[keep++] = out[k];
    }
    out.resize(keep);
    for (SatLit l : all) seen[l.var()] = 0;

    bt_level = 0;
    if (out.size() > 1) {
      std::size_t max_i = 1;
      for (std::size_t k = 2; k < out.size(); ++k) {
        if (level[out[k].var()] > level[out[max_i].var()]) max_i = k;
      }
      std::swap(out[1], out[max_i]);
      bt_level = level[out[1].var()];
    }
  }

  // Assumptions responsible for `p` being false; p itself is an assumption.
  std::vector<SatLit> analyze_final(SatLit p) {
    std::vector<SatLit> core{p};
    if (decision_level() == 0) return core;
    seen[p.var()] = 1;
    for (std::size_t i = trail.size(); i-- > trail_lim[0];) {
      SatVar x = trail[i].var();
      if (!seen[x]) continue;
      if (reason[x] == kNoReason) {
        if (x != p.var()) core.push_back(trail[i]);
      } else {
        const auto& c = db[reason[x]].lits;
        for (std::size_t k = 1; k < c.size(); ++k) {
          if (level[c[k].var()] > 0) seen[c[k].var()] = 1;
        }
      }
      seen[x] = 0;
    }
    seen[p.var()] = 0;
    return core;
  }

  std::optional<SatLit> pick_branch() {
    while (!heap.empty()) {
      SatVar v = heap_pop();
      if (assigns[v] == kUndef) return SatLit(v, !polarity[v]);
    }
    return std::nullopt;
  }

  // Returns kTrue / kFalse, or kUndef on restart.
  std::uint8_t search(std::span<const SatLit> assumptions, std::uint64_t budget, SolveResult& result) {
    std::uint64_t local = 0;
    std::vector<SatLit> learnt;
    for (;;) {
      std::uint32_t confl = propagate();
      if (confl != kNoReason) {
        conflicts++;
        local++;
        if (decision_level() == 0) {
          ok = false;
          return kFalse;
        }
        int bt = 0;
        analyze(confl, learnt, bt);
        cancel_until(bt);
        if (learnt.size() == 1) {
          enqueue(learnt[0], kNoReason);
        } else {
          auto cref = static_cast<std::uint32_t>(db.size());
          db.push_back({learnt, true});
          attach(cref);
          enqueue(learnt[0], cref);
        }
        var_inc /= kVarDecay;
        continue;
      }
      if (local >= budget) {
        cancel_until(0);
        return kUndef;
      }
      std::optional<SatLit> next;
      while (decision_level() < static_cast<int>(assumptions.size())) {
        SatLit a = assumptions[static_cast<std::size_t>(decision_level())];
        std::uint8_t v = value(a);
        if (v == kTrue) {
          trail_lim.push_back(trail.size());
        } else if (v == kFalse) {
          result.failed = analyze_final(a);
          return kFalse;
        } else {
          next = a;
          break;
        }
      }
      if (!next) {
        next = pick_branch();
        if (!next) {
          result.model.assign(assigns.size(), false);
          for (std::size_t v = 0; v < assigns.size(); ++v) result.model[v] = assigns[v] == kTrue;
          return kTrue;
        }
      }
      trail_lim.push_back(trail.size());
      enqueue(*next, kNoReason);
    }
  }

  SolveResult solve_once(std::span<const SatLit> assumptions) {
    solves++;
    SolveResult result;
    result.status = SatStatus::Unsat;
    if (!ok) return result;
    for (std::size_t i = 0; i < assumptions.size(); ++i) {
      check_lit(assumptions[i]);
      for (std::size_t j = 0; j < i; ++j) {
        if (assumptions[j] == ~assumptions[i]) {
          result.failed = {assumptions[j], assumptions[i]};
          return result;
        }
      }
    }
    for (int restart = 0;; ++restart) {
      auto budget = static_cast<std::uint64_t>(luby(2.0, restart) * 100.0);
      std::uint8_t st = search(assumptions, budget, result);
      if (st == kUndef) continue;
      cancel_until(0);
      if (st == kTrue) {
        result.status = SatStatus::Sat;
        if (options.self_check) self_check(result);
      } else {
        result.model.clear();
      }
      return result;
    }
  }

  void self_check(const SolveResult& r) const {
    for (const auto& c : log) {
      bool sat = std::any_of(c.begin(), c.end(), [&](SatLit l) { return r.value(l); });
      if (!sat) throw Error("SAT self-check: model violates a clause");
    }
  }
};

SatSolver::SatSolver(SatOptions options) : impl_(std::make_unique<Impl>(options)) {}
SatSolver::~SatSolver() = default;
SatSolver::SatSolver(SatSolver&&) noexcept = default;
SatSolver& SatSolver::operator=(SatSolver&&) noexcept = default;

SatVar SatSolver::new_var() { return impl_->new_var(); }
std::size_t SatSolver::num_vars() const { return impl_->assigns.size(); }
const std::vector<Clause>& SatSolver::clauses() const { return impl_->log; }
std::uint64_t SatSolver::num_solves() const { return impl_->solves; }
std::uint64_t SatSolver::num_conflicts() const { return impl_->conflicts; }

void SatSolver::add_clause(std::span<const SatLit> clause) {
  Impl& s = *impl_;
  Clause c;
  c.reserve(clause.size());
  for (SatLit l : clause) {
    s.check_lit(l);
    if (std::find(c.begin(), c.end(), ~l) != c.end()) return;
    if (std::find(c.begin(), c.end(), l) == c.end()) c.push_back(l);
  }
  s.log.push_back(c);
  if (!s.ok) return;
  s.cancel_until(0);

  // Simplify against root-level assignments.
  std::vector<SatLit> live;
  for (SatLit l : c) {
    std::uint8_t v = s.value(l);
    if (v == kTrue && s.level[l.var()] == 0) return;
    if (v == kFalse && s.level[l.var()] == 0) continue;
    live.push_back(l);
  }
  if (live.empty()) {
    s.ok = false;
  } else if (live.size() == 1) {
    s.enqueue(live[0], kNoReason);
    if (s.propagate() != kNoReason) s.ok = false;
  } else {
    auto cref = static_cast<std::uint32_t>(s.db.size());
    s.db.push_back({std::move(live), false});
    s.attach(cref);
  }
}

SolveResult SatSolver::solve(std::span<const SatLit> assumptions) {
  SolveResult result = impl_->solve_once(assumptions);
  if (!impl_->options.shrink_cores || result.sat() || result.failed.size() <= 1) return result;
  std::vector<SatLit> core = result.failed;
  for (std::size_t i = 0; i < core.size();) {
    std::vector<SatLit> trial;
    for (std::size_t j = 0; j < core.size(); ++j) {
      if (j != i) trial.push_back(core[j]);
    }
    SolveResult r = impl_->solve_once(trial);
    if (!r.sat()) {
      // Keep the order of the surviving literals; the new core is a subset of trial.
      std::vector<SatLit> next;
      for (SatLit l : core) {
        if (std::find(r.failed.begin(), r.failed.end(), l) != r.failed.end()) next.push_back(l);
      }
      core = std::move(next);
      i = std::min(i, core.size());
    } else {
      ++i;
    }
  }
  result.failed = std::move(core);
  return result;
}

void SatSolver::write_dimacs(std::ostream& os) const {
  os << "p cnf " << num_vars() << ' ' << impl_->log.size() << '\n';
  for (const auto& c : impl_->log) {
    for (SatLit l : c) os << l.dimacs() << ' ';
    os << "0\n";
  }
}

SatLit encode_nnf(SatSolver& solver, const Formula& formula, NodeId node,
                  const std::function<SatLit(Literal)>& map, bool negated) {
  const Node& n = formula[node];
  switch (n.kind) {
    case NodeKind::Lit:
      return map(n.lit ^ negated);
    case NodeKind::True:
    case NodeKind::False: {
      SatVar v = solver.new_var();
      bool value = (n.kind == NodeKind::True) != negated;
      solver.add_clause({SatLit(v, !value)});
      return SatLit::pos(v);
    }
    case NodeKind::And:
    case NodeKind::Or: {
      std::vector<SatLit> kids;
      kids.reserve(n.children.size());
      for (NodeId c : n.children) kids.push_back(encode_nnf(solver, formula, c, map, negated));
      SatLit out = SatLit::pos(solver.new_var());
      bool conj = (n.kind == NodeKind::And) != negated;
      if (conj) {
        for (SatLit k : kids) solver.add_clause({~out, k});
      } else {
        std::vector<SatLit> c{~out};
        c.insert(c.end(), kids.begin(), kids.end());
        solver.add_clause(c);
      }
      return out;
    }
  }
  return SatLit{};
}

}  // namespace qcegar
