#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <string_view>
#include <unordered_map>
#include <utility>
#include <vector>

#include "qcegar/formula.hpp"
#include "qcegar/preprocess.hpp"
#include "qcegar/solver.hpp"

namespace qcegar {

/// And-inverter graph literal: 2*var + complemented. Var 0 is constant false,
/// inputs come first, then and gates.
using AigLit = std::uint32_t;

constexpr AigLit aig_false = 0;
constexpr AigLit aig_true = 1;

class Aig {
 public:
  /// Inputs must be created before any gate.
  AigLit add_input();
  /// Structurally hashed, with constant and trivial folding.
  AigLit make_and(AigLit a, AigLit b);
  AigLit make_or(AigLit a, AigLit b) { return make_and(a ^ 1, b ^ 1) ^ 1; }

  std::size_t num_inputs() const { return inputs_; }
  std::size_t num_ands() const { return ands_.size(); }
  std::uint32_t max_var() const { return static_cast<std::uint32_t>(inputs_ + ands_.size()); }
  /// Fanins of gate variable v (v > num_inputs()).
  const std::pair<AigLit, AigLit>& fanins(std::uint32_t v) const { return ands_.at(v - inputs_ - 1); }

  /// Appends a gate without hashing (used by the reader to preserve structure).
  AigLit add_raw_and(AigLit a, AigLit b);

  /// Values of all variables under an input vector.
  std::vector<bool> simulate(const std::vector<bool>& inputs) const;
  static bool value(const std::vector<bool>& sim, AigLit l) { return sim[l >> 1] != ((l & 1) != 0); }

  /// Input indices reachable from l.
  std::vector<std::size_t> support(AigLit l) const;

 private:
  std::size_t inputs_ = 0;
  std::vector<std::pair<AigLit, AigLit>> ands_;
  std::unordered_map<std::uint64_t, AigLit> strash_;
};

enum class CertificateKind { Skolem, Herbrand };

const char* to_string(CertificateKind k);

/// Witness functions as one circuit. Inputs and outputs are named by the problem's
/// variable names; inputs are listed in prefix order.
struct Certificate {
  std::optional<CertificateKind> kind;
  Aig aig;
  std::vector<std::string> inputs;
  std::vector<std::pair<std::string, AigLit>> outputs;

  std::size_t gate_count() const { return aig.num_ands(); }
  /// Output values in output order.
  std::vector<bool> evaluate(const std::vector<bool>& input_values) const;
};

/// Outer-bound portion of interface node t at the given scope: t's connective over
/// its direct literal children bound outside the scope and its children whose
/// variables are all bound outside it. Written in the polarity of the matrix.
/// Returns the node in `out`.
NodeId condition_formula(const QbfProblem& problem, NodeId t, std::size_t scope, Formula& out);

/// Builds the witness functions of the winning player from a trace.
///
/// `solved` is the problem the trace was recorded on; `original` is the problem the
/// certificate is for (same variable ids and names). Variables in `fixed` get constant
/// functions; scopes without pairs get constant false (the opponent could not move
/// there, so any function is a witness). Throws Error on pairs that do not fit the
/// problem.
Certificate extract_functions(const QbfProblem& solved, const ProofTrace& trace, TruthValue truth,
                              const FixedVars& fixed, const QbfProblem& original);

inline Certificate extract_functions(const SolveOutcome& outcome, const QbfProblem& original) {
  return extract_functions(outcome.solved, outcome.trace, outcome.truth, outcome.fixed, original);
}

/// ASCII AIGER ("aag") with a symbol table and a comment naming the kind.
std::string write_aiger(const Certificate& cert);
/// Throws ParseError on malformed text. Latches are rejected.
Certificate read_aiger(std::string_view text);

struct Verdict {
  enum class Status { Valid, Invalid, IllFormed };
  Status status = Status::Valid;
  /// Invalid: values of the opponent's variables falsifying the certified claim.
  std::vector<std::pair<std::string, bool>> counterexample;
  /// IllFormed: what is wrong.
  std::string reason;

  bool valid() const { return status == Status::Valid; }
};

const char* to_string(Verdict::Status s);

/// Syntactic check (names, arity, outputs reach only dependencies), then the
/// functional check: the negated claim with every function variable replaced by
/// its circuit must be unsatisfiable.
Verdict verify(const QbfProblem& problem, const Certificate& cert);

/// Only the syntactic part of verify; empty string when well-formed.
std::string check_well_formed(const QbfProblem& problem, const Certificate& cert);

/// Trace file: "g <node> <gate>" lines bind solved-problem nodes to QCIR gate ids,
/// "f <var> <0|1>" lines list constant witnesses, then one
/// "p <scope> t <nodes...> x <vars...>" line per pair.
struct TraceFile {
  std::vector<std::pair<std::size_t, std::size_t>> gates;
  FixedVars fixed;
  ProofTrace trace;
};

void write_trace(std::ostream& os, const QbfProblem& solved, const ProofTrace& trace, const FixedVars& fixed);
TraceFile read_trace(std::string_view text);

}  // namespace qcegar
