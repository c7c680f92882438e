#include <doctest.h>

#include <sstream>

#include "fixtures.hpp"
#include "qcegar/certify.hpp"
#include "qcegar/generators.hpp"
#include "qcegar/parser.hpp"

using namespace qcegar;

namespace {

// Truth table of output k over all input vectors, inputs as bits of the index.
std::vector<bool> table(const Certificate& c, std::size_t k) {
  std::vector<bool> out;
  const std::size_t n = c.inputs.size();
  for (unsigned bits = 0; bits < (1u << n); ++bits) {
    std::vector<bool> in(n);
    for (std::size_t i = 0; i < n; ++i) in[i] = (bits >> i) & 1;
    out.push_back(c.evaluate(in)[k]);
  }
  return out;
}

Certificate certify(const QbfProblem& p, bool pre = false) {
  return extract_functions(solve(p, {}, pre), p);
}

}  // namespace

TEST_CASE("certify: condition formulas of the worked example") {
  QbfProblem p = testing::phi_ex();
  Formula f;
  NodeId c1 = condition_formula(p, node_id(0), 2, f);
  CHECK(f[c1].kind == NodeKind::Lit);
  CHECK(f[c1].lit == Literal::positive(1));
  NodeId c2 = condition_formula(p, node_id(2), 2, f);
  CHECK(f[c2].lit == Literal::negative(1));
  CHECK_THROWS_AS(condition_formula(p, node_id(1), 2, f), Error);
  CHECK_THROWS_AS(condition_formula(p, node_id(0), 1, f), Error);
}

TEST_CASE("certify: collapsed subtrees enter the condition whole") {
  QbfProblem p = parse_qcir(
      "#QCIR-G14\nexists(a, b)\nforall(u)\noutput(g)\ng = and(h, u, a)\nh = or(a, b)\n");
  Formula f;
  NodeId c = condition_formula(p, p.matrix(), 2, f);
  Formula g;
  NodeId expect = g.make_and({g.make_or({g.literal(Literal::positive(1)), g.literal(Literal::positive(2))}),
                              g.literal(Literal::positive(1))});
  CHECK(f.equal(c, g, expect));
}

TEST_CASE("certify: worked example Skolem function") {
  QbfProblem p = testing::phi_ex();
  Certificate c = certify(p);
  REQUIRE(c.kind == CertificateKind::Skolem);
  REQUIRE(c.inputs == std::vector<std::string>{"x"});
  REQUIRE(c.outputs.size() == 1);
  CHECK(c.outputs[0].first == "y");
  CHECK(table(c, 0) == std::vector<bool>{true, false});
  CHECK(verify(p, c).valid());
  std::string aag = write_aiger(c);
  CHECK(aag.rfind("aag 1 1 0 1 0\n2\n3\n", 0) == 0);
  CHECK(check_well_formed(p, c).empty());
}

TEST_CASE("certify: wrong and ill-formed certificates are rejected") {
  QbfProblem p = testing::phi_ex();
  Certificate wrong;
  wrong.kind = CertificateKind::Skolem;
  AigLit x = wrong.aig.add_input();
  wrong.inputs = {"x"};
  wrong.outputs = {{"y", x}};
  Verdict v = verify(p, wrong);
  CHECK(v.status == Verdict::Status::Invalid);
  REQUIRE(v.counterexample.size() == 1);
  CHECK(v.counterexample[0] == std::pair<std::string, bool>{"x", false});

  QbfProblem q = parse_qcir("#QCIR-G14\nexists(e)\nforall(u)\nexists(f)\noutput(g)\ng = or(e, u, f)\n");
  Certificate peek;
  peek.kind = CertificateKind::Skolem;
  AigLit u = peek.aig.add_input();
  peek.inputs = {"u"};
  peek.outputs = {{"e", u}, {"f", aig_true}};
  CHECK(verify(q, peek).status == Verdict::Status::IllFormed);

  Certificate missing;
  missing.kind = CertificateKind::Skolem;
  missing.aig.add_input();
  missing.inputs = {"x"};
  CHECK(verify(p, missing).status == Verdict::Status::IllFormed);

  Certificate arity;
  arity.kind = CertificateKind::Skolem;
  arity.aig.add_input();
  arity.aig.add_input();
  arity.inputs = {"x", "y"};
  arity.outputs = {{"y", aig_true}};
  CHECK(verify(p, arity).status == Verdict::Status::IllFormed);
}

TEST_CASE("certify: QParity Herbrand function is parity") {
  for (std::size_t n = 2; n <= 4; ++n) {
    QbfProblem p = gen_qparity(n);
    Certificate c = certify(p);
    REQUIRE(c.kind == CertificateKind::Herbrand);
    REQUIRE(c.outputs.size() == 1);
    CHECK(c.outputs[0].first == "z");
    CHECK(c.inputs.size() == n);
    std::vector<bool> t = table(c, 0);
    for (unsigned bits = 0; bits < t.size(); ++bits) CHECK(t[bits] == (__builtin_popcount(bits) % 2 == 1));
    CHECK(verify(p, c).valid());

    // The same function certifies the Skolem side of the negation.
    Formula f = p.formula();
    NodeId neg = f.negate(p.matrix());
    std::vector<Scope> prefix = p.prefix();
    for (auto& s : prefix) s.quantifier = flip(s.quantifier);
    QbfProblem dual(prefix, f, neg, p.names());
    Certificate d = certify(dual);
    REQUIRE(d.kind == CertificateKind::Skolem);
    CHECK(table(d, 0) == t);
  }
}

TEST_CASE("certify: AIGER round trip") {
  Certificate c;
  c.kind = CertificateKind::Herbrand;
  AigLit a = c.aig.add_input();
  AigLit b = c.aig.add_input();
  c.inputs = {"a", "b"};
  c.outputs = {{"o", c.aig.make_or(c.aig.make_and(a, b ^ 1), c.aig.make_and(a ^ 1, b))}, {"t", aig_true}};
  std::string text = write_aiger(c);
  Certificate r = read_aiger(text);
  CHECK(r.kind == c.kind);
  CHECK(r.inputs == c.inputs);
  CHECK(r.outputs.size() == 2);
  CHECK(r.outputs[1].second == aig_true);
  for (std::size_t k = 0; k < 2; ++k) CHECK(table(r, k) == table(c, k));
  CHECK(write_aiger(r) == text);

  // Gates listed out of order are accepted.
  Certificate o = read_aiger("aag 4 2 0 1 2\n2\n4\n8\n8 6 2\n6 2 5\n");
  CHECK(table(o, 0) == std::vector<bool>{false, true, false, false});
  CHECK(!o.kind.has_value());

  CHECK_THROWS_AS(read_aiger(""), ParseError);
  CHECK_THROWS_AS(read_aiger("aig 1 1 0 1 0\n2\n2\n"), ParseError);
  CHECK_THROWS_AS(read_aiger("aag 1 1 1 1 0\n2\n2 3\n2\n"), ParseError);
  CHECK_THROWS_AS(read_aiger("aag 2 1 0 1 1\n2\n4\n4 4 2\n"), ParseError);
  CHECK_THROWS_AS(read_aiger("aag 1 1 0 1 0\n2\n"), ParseError);
  CHECK_THROWS_AS(read_aiger("aag 3 1 0 1 1\n2\n6\n4 2 3\n"), ParseError);
}

TEST_CASE("certify: extraction is sound and sized on random problems") {
  std::size_t max_ratio_num = 0;
  for (std::uint64_t seed = 0; seed < 500; ++seed) {
    QbfProblem p = gen_random(seed);
    for (bool pre : {false, true}) {
      SolveOutcome out = solve(p, {}, pre);
      Certificate c = extract_functions(out, p);
      INFO("seed " << seed << " pre " << pre);
      CHECK(check_well_formed(p, c).empty());
      CHECK(verify(p, c).valid());
      CHECK(write_aiger(extract_functions(out, p)) == write_aiger(c));
      const std::size_t bound = std::max<std::size_t>(1, out.trace.size()) * out.solved.formula().size();
      CHECK(c.gate_count() <= 4 * bound);
      max_ratio_num = std::max(max_ratio_num, c.gate_count());
    }
  }
  CHECK(max_ratio_num > 0);
}

TEST_CASE("certify: trace files replay to the same certificate") {
  for (std::uint64_t seed = 0; seed < 100; ++seed) {
    QbfProblem p = gen_random(seed);
    SolveOutcome out = solve(p, {}, true);
    std::ostringstream os;
    write_trace(os, out.solved, out.trace, out.fixed);
    TraceFile tf = read_trace(os.str());
    CHECK(tf.trace == out.trace);
    CHECK(tf.fixed == out.fixed);
    Certificate again = extract_functions(out.solved, tf.trace, out.truth, tf.fixed, p);
    CHECK(write_aiger(again) == write_aiger(extract_functions(out, p)));
  }
  QbfProblem ex = testing::phi_ex();
  std::ostringstream os;
  SolveOutcome out = solve(ex, {}, false);
  write_trace(os, out.solved, out.trace, out.fixed);
  CHECK(os.str() == "c qcegar trace\ng 0 4\ng 2 3\np 2 t 2 x 2\n");
  CHECK_THROWS_AS(read_trace("p 1 x\n"), ParseError);
  CHECK_THROWS_AS(read_trace("q\n"), ParseError);
}
