#include <CLI11.hpp>

#include <cstdlib>
#include <fstream>
#include <iostream>
#include <sstream>

#include "qcegar/certify.hpp"
#include "qcegar/generators.hpp"
#include "qcegar/parser.hpp"
#include "qcegar/solver.hpp"

using namespace qcegar;

namespace {

enum Exit : int {
  kOk = 0,
  kUsage = 1,
  kVerifyFailed = 2,
  kInternal = 3,
  kTrue = 10,
  kFalse = 20,
};

struct Options {
  std::string file;
  std::string second;
  std::string output;
  std::string trace;
  std::string stats;
  std::string algorithm = "abstraction";
  std::string family = "qparity";
  std::string range = "2..5";
  std::string csv;
  bool no_preprocess = false;
  bool preprocess = false;
  bool verbose = false;
  std::uint64_t seed = 0;
  std::size_t jobs = 1;
};

std::uint64_t default_seed() {
  const char* env = std::getenv("QCEGAR_SEED");
  if (env == nullptr || *env == '\0') return 0;
  char* end = nullptr;
  std::uint64_t v = std::strtoull(env, &end, 10);
  if (*end != '\0') throw Error(std::string("QCEGAR_SEED is not a number: ") + env);
  return v;
}

Algorithm parse_algorithm(const std::string& s) {
  if (s == "abstraction") return Algorithm::Abstraction;
  if (s == "assignment") return Algorithm::Assignment;
  throw Error("unknown algorithm '" + s + "'");
}

void write_file(const std::string& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot write '" + path + "'");
  out << text;
  if (!out) throw Error("error writing '" + path + "'");
}

int result_code(TruthValue t) {
  std::cout << "r " << (t == TruthValue::True ? "TRUE" : "FALSE") << std::endl;
  return t == TruthValue::True ? kTrue : kFalse;
}

void report(const SolveOutcome& out) {
  std::cerr << "c iterations " << out.stats.total_iterations << " time " << out.stats.wall_ms << " ms\n";
  for (const auto& s : out.stats.scopes)
    std::cerr << "c scope " << s.scope << ' ' << to_string(s.quantifier) << " queries " << s.sat_queries
              << " refinements " << s.refinements << " dual " << s.dual_refinements << '\n';
}

SolverConfig config_of(const Options& o) {
  SolverConfig cfg;
  cfg.algorithm = parse_algorithm(o.algorithm);
  cfg.seed = o.seed;
  return cfg;
}

int cmd_solve(const Options& o) {
  QbfProblem p = read_problem_file(o.file);
  SolverConfig cfg = config_of(o);
  cfg.record_trace = false;
  SolveOutcome out = solve(p, cfg, !o.no_preprocess);
  if (o.verbose) report(out);
  if (!o.stats.empty()) {
    std::ostringstream os;
    os << "scope,quantifier,sat_queries,refinements,dual_refinements\n";
    for (const auto& s : out.stats.scopes)
      os << s.scope << ',' << to_string(s.quantifier) << ',' << s.sat_queries << ',' << s.refinements << ','
         << s.dual_refinements << '\n';
    write_file(o.stats, os.str());
  }
  return result_code(out.truth);
}

int cmd_certify(const Options& o) {
  QbfProblem p = read_problem_file(o.file);
  SolverConfig cfg = config_of(o);
  if (cfg.algorithm != Algorithm::Abstraction) throw Error("certification needs the abstraction algorithm");
  SolveOutcome out = solve(p, cfg, o.preprocess);
  if (o.verbose) report(out);
  Certificate cert = extract_functions(out, p);
  write_file(o.output, write_aiger(cert));
  if (!o.trace.empty()) {
    std::ostringstream os;
    write_trace(os, out.solved, out.trace, out.fixed);
    write_file(o.trace, os.str());
  }
  if (o.verbose)
    std::cerr << "c " << to_string(*cert.kind) << " certificate, " << cert.gate_count() << " gates, "
              << out.trace.size() << " pairs\n";
  return result_code(out.truth);
}

int cmd_verify(const Options& o) {
  QbfProblem p = read_problem_file(o.file);
  Certificate cert = read_aiger(read_text_file(o.second));
  Verdict v = verify(p, cert);
  std::cout << to_string(v.status);
  if (v.status == Verdict::Status::IllFormed) std::cout << ": " << v.reason;
  std::cout << '\n';
  if (v.status == Verdict::Status::Invalid) {
    std::cout << "counterexample:";
    for (const auto& [name, value] : v.counterexample) std::cout << ' ' << name << '=' << (value ? 1 : 0);
    std::cout << '\n';
  }
  return v.valid() ? kOk : kVerifyFailed;
}

std::pair<std::size_t, std::size_t> parse_range(const std::string& s) {
  auto num = [&](const std::string& t) -> std::size_t {
    if (t.empty() || t.find_first_not_of("0123456789") != std::string::npos || t.size() > 9)
      throw Error("bad range '" + s + "'");
    return std::stoul(t);
  };
  std::size_t dots = s.find("..");
  if (dots == std::string::npos) {
    std::size_t n = num(s);
    return {n, n};
  }
  std::size_t a = num(s.substr(0, dots)), b = num(s.substr(dots + 2));
  if (a > b) throw Error("bad range '" + s + "': empty");
  return {a, b};
}

int cmd_bench(const Options& o) {
  ExperimentSpec spec;
  spec.family = parse_family(o.family);
  std::tie(spec.n_from, spec.n_to) = parse_range(o.range);
  if (spec.family == Family::QParity && spec.n_from < 2) throw Error("bad range: qparity needs n >= 2");
  if (spec.family == Family::ExpansionHard && spec.n_from < 1) throw Error("bad range: expansion needs n >= 1");
  if (o.algorithm == "both") spec.algorithms = {Algorithm::Abstraction, Algorithm::Assignment};
  else spec.algorithms = {parse_algorithm(o.algorithm)};
  spec.seed = o.seed;
  spec.preprocess = !o.no_preprocess;
  spec.jobs = o.jobs;
  std::ostringstream os;
  write_csv(os, run_experiment(spec));
  if (o.csv.empty()) std::cout << os.str();
  else write_file(o.csv, os.str());
  return kOk;
}

int cmd_convert(const Options& o) {
  QbfProblem p = read_problem_file(o.file);
  std::string text = write_qcir(p);
  if (o.output.empty() || o.output == "-") std::cout << text;
  else write_file(o.output, text);
  return kOk;
}

}  // namespace

int main(int argc, char** argv) {
  Options o;
  CLI::App app{"qcegar: QBF solving by abstraction refinement, with certificates", "qcegar"};
  app.require_subcommand(1);

  auto seed_opt = [&](CLI::App* c) {
    c->add_option("--seed", o.seed, "Solver seed (default: $QCEGAR_SEED or 0)");
  };

  auto* solve_cmd = app.add_subcommand("solve", "Decide a QCIR or QDIMACS file (exit 10 true, 20 false)");
  solve_cmd->add_option("file", o.file, "Input problem")->required();
  solve_cmd->add_option("-a,--algorithm", o.algorithm, "abstraction or assignment")
      ->check(CLI::IsMember({"abstraction", "assignment"}))
      ->capture_default_str();
  solve_cmd->add_flag("--no-preprocess", o.no_preprocess, "Skip simplification and pure literals");
  solve_cmd->add_option("--stats", o.stats, "Write per-scope statistics CSV");
  solve_cmd->add_flag("-v,--verbose", o.verbose, "Print statistics to stderr");
  seed_opt(solve_cmd);

  auto* cert_cmd = app.add_subcommand("certify", "Solve and write a Skolem or Herbrand certificate");
  cert_cmd->add_option("file", o.file, "Input problem")->required();
  cert_cmd->add_option("-o,--output", o.output, "AIGER (aag) certificate path")->required();
  cert_cmd->add_option("--trace", o.trace, "Also write the proof trace");
  cert_cmd->add_flag("--preprocess", o.preprocess,
                     "Simplify first; eliminated variables get constant functions");
  cert_cmd->add_flag("-v,--verbose", o.verbose, "Print statistics to stderr");
  seed_opt(cert_cmd);

  auto* verify_cmd = app.add_subcommand("verify", "Check a certificate against a problem (exit 0 valid, 2 not)");
  verify_cmd->add_option("file", o.file, "Input problem")->required();
  verify_cmd->add_option("certificate", o.second, "AIGER (aag) certificate")->required();

  auto* bench_cmd = app.add_subcommand("bench", "Run a generator family and write a CSV of iteration counts");
  bench_cmd->add_option("--family", o.family, "qparity, expansion or random")
      ->check(CLI::IsMember({"qparity", "expansion", "random"}))
      ->capture_default_str();
  bench_cmd->add_option("--n", o.range, "Size range A..B (or a single size)")->capture_default_str();
  bench_cmd->add_option("-a,--algorithm", o.algorithm, "abstraction, assignment or both")
      ->check(CLI::IsMember({"abstraction", "assignment", "both"}))
      ->capture_default_str();
  bench_cmd->add_option("--csv", o.csv, "Output CSV (default: stdout)");
  bench_cmd->add_option("-j,--jobs", o.jobs, "Worker threads")->capture_default_str();
  bench_cmd->add_flag("--no-preprocess", o.no_preprocess, "Skip simplification and pure literals");
  seed_opt(bench_cmd);

  auto* convert_cmd = app.add_subcommand("convert", "Re-emit a QCIR or QDIMACS file as QCIR");
  convert_cmd->add_option("file", o.file, "Input problem")->required();
  convert_cmd->add_option("-o,--output", o.output, "Output path (default: stdout)");

  try {
    o.seed = default_seed();
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kUsage;
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kUsage;
  }

  try {
    if (*solve_cmd) return cmd_solve(o);
    if (*cert_cmd) return cmd_certify(o);
    if (*verify_cmd) return cmd_verify(o);
    if (*bench_cmd) return cmd_bench(o);
    if (*convert_cmd) return cmd_convert(o);
  } catch (const InvariantViolation& e) {
    std::cerr << "internal error: " << e.what() << '\n';
    return kInternal;
  } catch (const ParseError& e) {
    std::cerr << "parse error: " << e.what() << '\n';
    return kUsage;
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kUsage;
  } catch (const std::exception& e) {
    std::cerr << "internal error: " << e.what() << '\n';
    return kInternal;
  }
  return kUsage;
}
