// Acceptance checks: one PASS/FAIL line per criterion, exit status 1 if any fails.

#include <algorithm>
#include <chrono>
#include <cstdio>
#include <filesystem>
#include <functional>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "fixtures.hpp"
#include "qcegar/abstraction.hpp"
#include "qcegar/certify.hpp"
#include "qcegar/generators.hpp"
#include "qcegar/parser.hpp"
#include "qcegar/preprocess.hpp"
#include "qcegar/sat.hpp"
#include "qcegar/solver.hpp"

using namespace qcegar;
using Clock = std::chrono::steady_clock;

namespace {

double seconds_since(Clock::time_point t) { return std::chrono::duration<double>(Clock::now() - t).count(); }

struct Line {
  bool pass = true;
  std::string detail;

  void require(bool ok, const std::string& what) {
    if (!ok && pass) detail = what;
    pass = pass && ok;
  }
};

// Every solve with tracing from criteria 1-4, for the certification criterion.
struct CertRun {
  std::string label;
  QbfProblem problem;
  SolveOutcome outcome;
};

std::vector<CertRun> g_runs;

SolveOutcome traced(const std::string& label, const QbfProblem& p, bool pre) {
  SolverConfig cfg;
  cfg.self_check = false;
  SolveOutcome out = solve(p, cfg, pre);
  g_runs.push_back({label, p, out});
  return out;
}

std::vector<std::vector<std::string>> canonical(std::vector<std::vector<std::string>> r) {
  for (auto& c : r) std::sort(c.begin(), c.end());
  std::sort(r.begin(), r.end());
  return r;
}

bool check_example(std::string& why) {
  QbfProblem p = testing::phi_ex();
  InfluenceInfo inf(p);
  ScopeAbstraction ax(p, 1, inf);
  ScopeAbstraction ay(p, 2, inf);
  if (canonical(ax.render(false)) != canonical({{"b:0"}, {"-b:0", "-x:x"}, {"-b:2", "x:x"}})) {
    why = "theta of the universal scope differs";
    return false;
  }
  if (canonical(ay.render(false)) != canonical({{"t:0", "b:2"}, {"-b:2", "t:2"}, {"-b:2", "x:y"}})) {
    why = "theta of the existential scope differs";
    return false;
  }
  if (canonical(ay.render(true)) !=
      canonical({{"b:0"}, {"-b:0", "t:0"}, {"-b:0", "b:2"}, {"-b:2", "t:2", "-x:y"}})) {
    why = "dual of the existential scope differs";
    return false;
  }
  SolveOutcome out = traced("example", p, false);
  if (out.truth != TruthValue::True) {
    why = "solver result is not TRUE";
    return false;
  }
  if (out.trace != ProofTrace{ProofPair{2, {node_id(2)}, {2}}}) {
    why = "trace differs from <{t_psi2},{y}>";
    return false;
  }
  Certificate c = extract_functions(out, p);
  if (c.inputs != std::vector<std::string>{"x"} || c.outputs.size() != 1 || c.outputs[0].first != "y" ||
      c.evaluate({false}) != std::vector<bool>{true} || c.evaluate({true}) != std::vector<bool>{false}) {
    why = "Skolem function is not f_y(x) = -x";
    return false;
  }
  return true;
}

std::uint64_t exist_refinements(const SolveOutcome& o) { return o.stats.refinements(Quantifier::Exists); }

bool criterion1() {
  auto t0 = Clock::now();
  Line l;
  std::string why;
  l.require(check_example(why), why);
  double secs = seconds_since(t0);
  l.require(secs < 1.0, "runtime over 1 s");
  std::printf("[%s] 1 worked example: clause sets, TRUE, trace <{t_psi2},{y}>, f_y = -x (%.3f s < 1 s)%s%s\n",
              l.pass ? "PASS" : "FAIL", secs, l.pass ? "" : ": ", l.detail.c_str());
  return l.pass;
}

bool criterion2() {
  auto t0 = Clock::now();
  Line l;
  std::uint64_t worst = 0;
  for (std::size_t n = 2; n <= 10; ++n) {
    SolveOutcome o = traced("qparity " + std::to_string(n), gen_qparity(n), true);
    worst = std::max(worst, exist_refinements(o));
    l.require(o.truth == TruthValue::False, "abstraction: QParity_" + std::to_string(n) + " not FALSE");
    l.require(exist_refinements(o) <= 4, "abstraction: QParity_" + std::to_string(n) + " needs > 4 refinements");
  }
  std::string counts;
  for (std::size_t n = 2; n <= 5; ++n) {
    SolverConfig cfg;
    cfg.algorithm = Algorithm::Assignment;
    SolveOutcome o = solve(gen_qparity(n), cfg, true);
    counts += (counts.empty() ? "" : ",") + std::to_string(exist_refinements(o));
    l.require(o.truth == TruthValue::False, "assignment: QParity_" + std::to_string(n) + " not FALSE");
    l.require(exist_refinements(o) == (1u << n), "assignment: QParity_" + std::to_string(n) + " refinements != 2^n");
  }
  double secs = seconds_since(t0);
  l.require(secs < 30.0, "runtime over 30 s");
  std::printf("[%s] 2 separation: abstraction max %llu <= 4 (n=2..10), assignment %s = 2^n (n=2..5) (%.3f s < 30 s)%s%s\n",
              l.pass ? "PASS" : "FAIL", static_cast<unsigned long long>(worst), counts.c_str(), secs,
              l.pass ? "" : ": ", l.detail.c_str());
  return l.pass;
}

bool criterion3() {
  auto t0 = Clock::now();
  Line l;
  std::string iters;
  for (std::size_t n = 1; n <= 8; ++n) {
    QbfProblem p = gen_expansion_hard(n);
    SolveOutcome o = traced("expansion " + std::to_string(n), p, true);
    iters += (iters.empty() ? "" : ",") + std::to_string(o.stats.total_iterations);
    l.require(o.truth == TruthValue::False, "n=" + std::to_string(n) + " not FALSE");
    l.require(verify(p, extract_functions(o, p)).valid(), "n=" + std::to_string(n) + " certificate not Valid");
  }
  double secs = seconds_since(t0);
  l.require(secs < 60.0, "runtime over 60 s");
  std::printf("[%s] 3 expansion family: FALSE and Valid for n=1..8, iterations %s (%.3f s < 60 s)%s%s\n",
              l.pass ? "PASS" : "FAIL", iters.c_str(), secs, l.pass ? "" : ": ", l.detail.c_str());
  return l.pass;
}

bool criterion4() {
  auto t0 = Clock::now();
  Line l;
  std::size_t agree = 0, total = 0;
  for (std::uint64_t seed = 0; seed < 500; ++seed) {
    QbfProblem p = gen_random(seed);
    TruthValue expect = brute_force_eval(p);
    for (Algorithm alg : {Algorithm::Abstraction, Algorithm::Assignment}) {
      SolveOutcome o;
      if (alg == Algorithm::Abstraction) {
        o = traced("random " + std::to_string(seed), p, true);
      } else {
        SolverConfig cfg;
        cfg.algorithm = alg;
        o = solve(p, cfg, true);
      }
      ++total;
      if (o.truth == expect) ++agree;
      l.require(o.truth == expect, "seed " + std::to_string(seed) + " " + to_string(alg) + " disagrees");
    }
  }
  double secs = seconds_since(t0);
  l.require(secs < 120.0, "runtime over 2 min");
  std::printf("[%s] 4 oracle equivalence: %zu/%zu solver runs match brute force on 500 problems (%.3f s < 120 s)%s%s\n",
              l.pass ? "PASS" : "FAIL", agree, total, secs, l.pass ? "" : ": ", l.detail.c_str());
  return l.pass;
}

bool criterion5() {
  Line l;
  double solve_ms = 0, extract_ms = 0, verify_ms = 0;
  std::size_t valid = 0;
  for (const auto& run : g_runs) {
    solve_ms += run.outcome.stats.wall_ms;
    auto t0 = Clock::now();
    Certificate c = extract_functions(run.outcome, run.problem);
    extract_ms += seconds_since(t0) * 1000.0;
    auto t1 = Clock::now();
    std::string wf = check_well_formed(run.problem, c);
    Verdict v = verify(run.problem, c);
    verify_ms += seconds_since(t1) * 1000.0;
    l.require(wf.empty(), run.label + ": " + wf);
    l.require(v.valid(), run.label + ": " + to_string(v.status));
    if (v.valid() && wf.empty()) ++valid;
  }
  l.require(extract_ms <= 2.0 * solve_ms, "extraction takes more than twice the solve time");
  std::printf("[%s] 5 certification: %zu/%zu Valid and well-formed; extraction %.1f ms <= 2 x solve %.1f ms "
              "(verification %.1f ms)%s%s\n",
              l.pass ? "PASS" : "FAIL", valid, g_runs.size(), extract_ms, solve_ms, verify_ms, l.pass ? "" : ": ",
              l.detail.c_str());
  return l.pass;
}

bool brute_sat(std::size_t nv, const std::vector<Clause>& cls, const std::vector<SatLit>& assume) {
  for (std::uint32_t m = 0; m < (1u << nv); ++m) {
    auto val = [&](SatLit l) { return (((m >> l.var()) & 1) != 0) != l.negated(); };
    if (!std::all_of(assume.begin(), assume.end(), val)) continue;
    if (std::all_of(cls.begin(), cls.end(), [&](const Clause& c) { return std::any_of(c.begin(), c.end(), val); }))
      return true;
  }
  return false;
}

bool criterion6() {
  auto t0 = Clock::now();
  Line l;
  std::mt19937_64 rng(2024);
  std::size_t cores = 0;
  for (int round = 0; round < 1000; ++round) {
    const std::size_t nv = 4 + rng() % 17;
    const std::size_t nc = 1 + rng() % (5 * nv);
    std::vector<Clause> cls;
    for (std::size_t i = 0; i < nc; ++i) {
      Clause c;
      for (int k = 0; k < 3; ++k) c.push_back(SatLit(static_cast<SatVar>(rng() % nv), rng() & 1));
      cls.push_back(c);
    }
    std::vector<SatLit> assume;
    const std::size_t na = rng() % 4;
    for (std::size_t i = 0; i < na; ++i) assume.push_back(SatLit(static_cast<SatVar>(rng() % nv), rng() & 1));

    SatOptions opts;
    opts.shrink_cores = round % 2 == 1;
    SatSolver s(opts);
    for (std::size_t v = 0; v < nv; ++v) s.new_var();
    for (const auto& c : cls) s.add_clause(c);
    SolveResult r = s.solve(assume);
    const bool expect = brute_sat(nv, cls, assume);
    l.require(r.sat() == expect, "round " + std::to_string(round) + " disagrees with the truth table");
    if (r.sat()) {
      bool ok = std::all_of(cls.begin(), cls.end(), [&](const Clause& c) {
        return std::any_of(c.begin(), c.end(), [&](SatLit x) { return r.model[x.var()] != x.negated(); });
      });
      l.require(ok, "round " + std::to_string(round) + " model violates a clause");
    } else {
      ++cores;
      for (SatLit f : r.failed)
        l.require(std::find(assume.begin(), assume.end(), f) != assume.end(), "core literal is not an assumption");
      l.require(!s.solve(r.failed).sat(), "round " + std::to_string(round) + " core re-solves to Sat");
      l.require(!brute_sat(nv, cls, r.failed), "round " + std::to_string(round) + " core is satisfiable");
    }
  }
  double secs = seconds_since(t0);
  l.require(secs < 60.0, "runtime over 1 min");
  std::printf("[%s] 6 SAT oracle: 1000 random CNF match the truth table, %zu cores re-solve Unsat (%.3f s < 60 s)%s%s\n",
              l.pass ? "PASS" : "FAIL", cores, secs, l.pass ? "" : ": ", l.detail.c_str());
  return l.pass;
}

bool criterion7(const std::string& data_dir) {
  Line l;
  std::vector<std::pair<std::string, QbfProblem>> problems;
  std::size_t fixtures = 0;
  for (const auto& entry : std::filesystem::directory_iterator(data_dir)) {
    const auto ext = entry.path().extension();
    if (ext != ".qcir" && ext != ".qdimacs") continue;
    problems.emplace_back(entry.path().filename().string(), read_problem_file(entry.path().string()));
    ++fixtures;
  }
  for (std::size_t n = 2; n <= 10; ++n) problems.emplace_back("qparity", gen_qparity(n));
  for (std::size_t n = 1; n <= 8; ++n) problems.emplace_back("expansion", gen_expansion_hard(n));
  for (std::uint64_t s = 0; s < 500; ++s) problems.emplace_back("random " + std::to_string(s), gen_random(s));
  for (const auto& [label, p] : problems)
    l.require(parse_qcir(write_qcir(p)).structurally_equal(p), "QCIR round trip fails for " + label);

  std::size_t certs = 0;
  for (const auto& run : g_runs) {
    Certificate c = extract_functions(run.outcome, run.problem);
    if (c.inputs.size() > 10) continue;
    Certificate r = read_aiger(write_aiger(c));
    ++certs;
    l.require(r.inputs == c.inputs && r.outputs.size() == c.outputs.size(), run.label + ": AIGER symbols differ");
    for (std::size_t k = 0; k < c.outputs.size(); ++k)
      l.require(r.outputs[k].first == c.outputs[k].first, run.label + ": AIGER output names differ");
    const std::size_t n = c.inputs.size();
    for (std::uint32_t bits = 0; bits < (1u << n) && l.pass; ++bits) {
      std::vector<bool> in(n);
      for (std::size_t i = 0; i < n; ++i) in[i] = (bits >> i) & 1;
      l.require(r.evaluate(in) == c.evaluate(in), run.label + ": AIGER round trip changes a function");
    }
  }
  l.require(fixtures > 0, "no fixtures found in " + data_dir);
  std::printf("[%s] 7 formats: QCIR round trip on %zu problems (%zu fixtures), AIGER exhaustive round trip on %zu "
              "certificates%s%s\n",
              l.pass ? "PASS" : "FAIL", problems.size(), fixtures, certs, l.pass ? "" : ": ", l.detail.c_str());
  return l.pass;
}

bool criterion8() {
  Line l;
  for (std::uint64_t seed = 0; seed < 500; ++seed) {
    QbfProblem p = gen_random(seed);
    Preprocessed once = preprocess(p);
    l.require(brute_force_eval(once.problem) == brute_force_eval(p), "seed " + std::to_string(seed) + " changes truth");
    Preprocessed twice = preprocess(once.problem);
    l.require(twice.problem.structurally_equal(once.problem) && twice.fixed.empty(),
              "seed " + std::to_string(seed) + " not idempotent");
  }
  std::printf("[%s] 8 preprocessing: truth preserved and idempotent on 500 problems%s%s\n", l.pass ? "PASS" : "FAIL",
              l.pass ? "" : ": ", l.detail.c_str());
  return l.pass;
}

}  // namespace

int main(int argc, char** argv) {
  const std::string data_dir = argc > 1 ? argv[1] : QCEGAR_TEST_DATA;
  bool ok = true;
  std::vector<std::function<bool()>> checks{
      criterion1, criterion2, criterion3, criterion4, criterion5, criterion6, [&] { return criterion7(data_dir); },
      criterion8};
  for (std::size_t i = 0; i < checks.size(); ++i) {
    try {
      ok = checks[i]() && ok;
    } catch (const std::exception& e) {
      std::printf("[FAIL] %zu: exception: %s\n", i + 1, e.what());
      ok = false;
    }
  }
  std::fflush(stdout);
  return ok ? 0 : 1;
}
