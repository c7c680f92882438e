#include <doctest.h>

#include <algorithm>

#include "fixtures.hpp"
#include "qcegar/abstraction.hpp"
#include "qcegar/generators.hpp"
#include "qcegar/preprocess.hpp"

using namespace qcegar;

namespace {

using Rendered = std::vector<std::vector<std::string>>;

Rendered canonical(Rendered r) {
  for (auto& c : r) std::sort(c.begin(), c.end());
  std::sort(r.begin(), r.end());
  return r;
}

// Node indices of the worked example in preorder: 0 = x | (-x & y), 1 = x,
// 2 = -x & y, 3 = -x, 4 = y.
constexpr NodeId kPsi1 = node_id(0);
constexpr NodeId kPsi2 = node_id(2);

}  // namespace

TEST_CASE("abstraction: influence sets") {
  QbfProblem p = testing::phi_ex();
  InfluenceInfo inf = compute_influence(p);
  CHECK(inf.scopes(kPsi2) == std::vector<std::uint32_t>{1, 2});
  CHECK(inf.scopes(node_id(1)) == std::vector<std::uint32_t>{1});
  CHECK(inf.scopes(kPsi1) == std::vector<std::uint32_t>{1, 2});
  CHECK(inf.max_scope(node_id(4)) == 2);
}

TEST_CASE("abstraction: worked example clause sets") {
  QbfProblem p = testing::phi_ex();
  InfluenceInfo inf(p);
  ScopeAbstraction ax(p, 1, inf);
  ScopeAbstraction ay(p, 2, inf);
  // b:0 is b_psi1, b:2 is b_psi2, t:0 is t_psi1, t:2 is t_psi2.
  CHECK(canonical(ax.render(false)) == canonical({{"b:0"}, {"-b:0", "-x:x"}, {"-b:2", "x:x"}}));
  CHECK(canonical(ay.render(false)) == canonical({{"t:0", "b:2"}, {"-b:2", "t:2"}, {"-b:2", "x:y"}}));
  CHECK(canonical(ay.render(true)) ==
        canonical({{"b:0"}, {"-b:0", "t:0"}, {"-b:0", "b:2"}, {"-b:2", "t:2", "-x:y"}}));
  CHECK(ax.b_nodes() == std::vector<NodeId>{kPsi1, kPsi2});
  CHECK(ay.t_nodes() == ax.b_nodes());
  CHECK(ax.t_nodes().empty());
  CHECK(ay.b_nodes().empty());
}

TEST_CASE("abstraction: refinement clauses") {
  QbfProblem p = testing::phi_ex();
  InfluenceInfo inf(p);
  ScopeAbstraction ax(p, 1, inf);
  std::vector<NodeId> psi2{kPsi2};
  ax.refine(psi2);
  CHECK(ax.refinement_count() == 1);
  const auto& cl = ax.theta().clauses();
  CHECK(std::find(cl.begin(), cl.end(), Clause{SatLit::pos(*ax.b_of(kPsi2))}) != cl.end());
  CHECK_THROWS_AS(ax.refine(std::vector<NodeId>{node_id(1)}), Error);

  ScopeAbstraction ay(p, 2, inf);
  CHECK_THROWS_AS(ay.refine_dual(psi2), Error);  // the innermost scope has no B nodes

  ScopeAbstraction e(p, 1, inf);
  e.refine({});
  CHECK_FALSE(e.theta().solve({}).sat());
  CHECK(e.theta().solve({}).failed.empty());
  e.refine_dual({});
  CHECK_FALSE(e.dual().solve({}).sat());
  CHECK_THROWS_AS(ScopeAbstraction(p, 3, inf), Error);
}

TEST_CASE("abstraction: adjusting raises a certified b") {
  QbfProblem p = testing::phi_ex();
  InfluenceInfo inf(p);
  ScopeAbstraction ay(p, 2, inf);
  const SatVar y = ay.x_of(2);
  const SatVar t0 = *ay.t_of(kPsi1);
  const SatVar t2 = *ay.t_of(kPsi2);
  const SatVar b2 = *ay.b_of(kPsi2);
  std::vector<bool> model(ay.theta().num_vars(), false);
  model[y] = true;
  model[t2] = true;
  model[t0] = true;
  std::vector<bool> adjusted = ay.adjust_b(model);
  CHECK(adjusted[b2]);
  for (const auto& c : ay.theta().clauses())
    CHECK(std::any_of(c.begin(), c.end(), [&](SatLit l) { return adjusted[l.var()] != l.negated(); }));
}

TEST_CASE("abstraction: interfaces match and conjunctions chain on random problems") {
  for (std::uint64_t seed = 0; seed < 300; ++seed) {
    QbfProblem p = merge_scopes(gen_random(seed, {9, 4, 50}));
    if (!p.formula()[p.matrix()].is_gate()) continue;
    InfluenceInfo inf(p);
    std::vector<std::unique_ptr<ScopeAbstraction>> abs;
    for (std::size_t s = 1; s <= p.num_scopes(); ++s) abs.push_back(std::make_unique<ScopeAbstraction>(p, s, inf));
    for (std::size_t s = 0; s + 1 < abs.size(); ++s) CHECK(abs[s]->b_nodes() == abs[s + 1]->t_nodes());
    CHECK(abs.back()->b_nodes().empty());
    for (auto& a : abs) {
      const bool negated = a->quantifier() == Quantifier::Forall;
      const auto& enc = a->encoding(false);
      for (NodeId t : a->t_nodes()) {
        auto bv = a->b_of(t);
        if (!bv) continue;
        const bool conj = (p.formula()[t].kind == NodeKind::And) != negated;
        bool b_used = std::any_of(enc.begin(), enc.end(), [&](const Clause& c) {
          return std::find(c.begin(), c.end(), SatLit::neg(*bv)) != c.end();
        });
        if (!conj || !b_used) continue;
        Clause chain{SatLit::neg(*bv), SatLit::pos(*a->t_of(t))};
        CHECK(std::find(enc.begin(), enc.end(), chain) != enc.end());
      }
    }
  }
}
