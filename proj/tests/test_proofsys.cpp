#include "doctest.h"

#include "corpus.hpp"
#include "mucalc/denotational.hpp"
#include "mucalc/game.hpp"
#include "mucalc/proofsys.hpp"

#include <chrono>
#include <random>

using namespace mucalc;

namespace {

struct Goal {
  WellNamedSentence s;
  ClosureIndex c;
  explicit Goal(const char* text) : s(analyze(parse(text))), c(s) {}
  int id(const char* text) const {
    int i = c.id(parse(text));
    REQUIRE(i >= 0);
    return i;
  }
};

// Infinite traces along the single cycle of g (companion 0 .. bud) are the
// infinite paths of the graph over (node, sided formula); one progresses iff
// some cycle there has an even, positive maximal priority.
bool oracle_progress(const ProofGraph& g) {
  struct Edge {
    std::pair<int, SidedFormula> from, to;
    int prio;
  };
  std::vector<Edge> edges;
  for (std::size_t i = 0; i < g.nodes.size(); ++i) {
    const auto& n = g.nodes[i];
    for (std::size_t k = 0; k < n.premises.size(); ++k)
      for (const auto& l : n.traces[k]) edges.push_back({{int(i), l.from}, {n.premises[k], l.to}, l.priority});
  }
  auto reaches = [&](auto from, auto to, int cap) {
    std::set<std::pair<int, SidedFormula>> seen{from};
    std::vector<std::pair<int, SidedFormula>> stack{from};
    while (!stack.empty()) {
      auto x = stack.back();
      stack.pop_back();
      if (x == to) return true;
      for (const auto& e : edges)
        if (e.from == x && e.prio <= cap && seen.insert(e.to).second) stack.push_back(e.to);
    }
    return false;
  };
  for (const auto& e : edges)
    if (e.prio > 0 && e.prio % 2 == 0 && reaches(e.to, e.from, e.prio)) return true;
  return false;
}

std::size_t eigen_count(Rule r) {
  switch (r) {
    case Rule::BoxR: return 2;
    case Rule::ImpR:
    case Rule::DiaL:
    case Rule::DiaR:
    case Rule::Fwd:
    case Rule::Bwd: return 1;
    default: return 0;
  }
}

bool has_clause(const std::vector<SaturationWitness>& ws, int clause) {
  for (const auto& w : ws)
    if (w.clause == clause) return true;
  return false;
}

}  // namespace

TEST_CASE("rule application examples") {
  Goal g("p -> false -> p");
  const int bot = g.id("false"), p = g.id("p");
  Sequent s;
  s.left = {{0, bot}};
  s.right = {{0, p}};
  auto ax = RuleInstance{Rule::BotL, SidedFormula{Side::Left, 0, bot}, {}, {}, {}};
  CHECK(apply_rule(g.c, s, ax).empty());

  Goal h("p -> q");
  Sequent t;
  t.right = {{0, h.c.root()}};
  auto prem = apply_rule(h.c, t, {Rule::ImpR, SidedFormula{Side::Right, 0, h.c.root()}, {}, {1}, {}});
  REQUIRE(prem.size() == 1);
  CHECK(prem[0].has(RelAtom::pre(0, 1)));
  CHECK(prem[0].left.count({1, h.id("p")}));
  CHECK(prem[0].right.count({1, h.id("q")}));
  CHECK(prem[0].right.count({0, h.c.root()}));

  Goal b("[]p");
  Sequent u;
  u.left = {{0, b.c.root()}};
  u.rel = {RelAtom::rel(0, 1), RelAtom::rel(0, 2)};
  prem = apply_rule(b.c, u, {Rule::BoxL, SidedFormula{Side::Left, 0, b.c.root()}, {}, {}, {}});
  REQUIRE(prem.size() == 1);
  CHECK(prem[0].left.count({1, b.id("p")}));
  CHECK(prem[0].left.count({2, b.id("p")}));
}

TEST_CASE("rule errors") {
  Goal h("p -> q");
  Sequent t;
  t.right = {{0, h.c.root()}};
  auto code = [&](const RuleInstance& r, LogicVariant v) {
    try {
      apply_rule(h.c, t, r, v);
    } catch (const RuleError& e) {
      return e.code();
    }
    FAIL("rule applied");
    return RuleError::Code::Malformed;
  };
  CHECK(code({Rule::ImpR, SidedFormula{Side::Left, 0, h.c.root()}, {}, {1}, {}}, LogicVariant::CK) ==
        RuleError::Code::PrincipalMissing);
  CHECK(code({Rule::ImpR, SidedFormula{Side::Right, 0, h.c.root()}, {}, {0}, {}}, LogicVariant::CK) ==
        RuleError::Code::FreshnessViolation);
  CHECK(code({Rule::Lin, std::nullopt, {RelAtom::pre(0, 0), RelAtom::pre(0, 0)}, {}, {}}, LogicVariant::IK) ==
        RuleError::Code::RuleNotInVariant);
}

TEST_CASE("non-axiom rules are cumulative") {
  std::mt19937_64 rng(11);
  for (const char* text : {"[](p -> q) -> ([]p -> []q)", "nu X.(p & [](q | <>X))", "(p -> q) | (q -> p)"}) {
    Goal g(text);
    Sequent s;
    s.right = {{0, g.c.root()}};
    for (int step = 0; step < 40; ++step) {
      auto ws = is_saturated(g.c, s, LogicVariant::GK);
      if (ws.empty() || find_axiom(g.c, s, LogicVariant::GK)) break;
      auto fix = ws[rng() % ws.size()].fix;
      Label next = *s.labels().rbegin() + 1;
      for (std::size_t k = eigen_count(fix.rule); k > 0; --k) fix.eigen.push_back(next++);
      auto prem = apply_rule(g.c, s, fix, LogicVariant::GK);
      REQUIRE_FALSE(prem.empty());
      for (const auto& q : prem) CHECK(q.includes(s));
      s = prem[rng() % prem.size()];
    }
  }
}

TEST_CASE("saturation witnesses") {
  Goal g("p & q");
  Sequent s;
  s.left = {{0, g.c.root()}};
  auto ws = is_saturated(g.c, s);
  CHECK(has_clause(ws, 4));

  Sequent t;
  t.rel = {RelAtom::pre(0, 0), RelAtom::pre(1, 1), RelAtom::pre(2, 2), RelAtom::pre(0, 1), RelAtom::pre(1, 2)};
  ws = is_saturated(g.c, t);
  CHECK(has_clause(ws, 1));

  CHECK(is_saturated(g.c, Sequent{}).empty());
}

TEST_CASE("prove examples") {
  auto v = prove(analyze(parse("false -> p")));
  REQUIRE(v.kind == Verdict::Kind::Proved);
  bool has_botl = false, has_impr = false;
  for (const auto& n : v.proof->nodes) {
    has_botl |= n.rule.rule == Rule::BotL;
    has_impr |= n.rule.rule == Rule::ImpR;
  }
  CHECK(has_botl);
  CHECK(has_impr);

  auto em = prove(analyze(parse("p | ~p")));
  REQUIRE(em.kind == Verdict::Kind::Refuted);
  const auto& cm = *em.countermodel;
  CHECK(cm.model.size() == 2);
  CHECK_FALSE(eval(cm.model, parse("p | ~p")).contains(cm.model.index(cm.world)));

  auto nu = prove(analyze(parse("nu X.[]X")));
  REQUIRE(nu.kind == Verdict::Kind::Proved);
  CHECK(nu.report.back_edges >= 1);
  bool regen = false;
  for (const auto& n : nu.proof->nodes) regen |= n.rule.rule == Rule::RegenR;
  CHECK(regen);
}

TEST_CASE("variant-sensitive goals") {
  auto dist = analyze(parse("<>(p | q) -> (<>p | <>q)"));
  CHECK(prove(dist, LogicVariant::CK).kind == Verdict::Kind::Refuted);
  CHECK(prove(dist, LogicVariant::IK).kind == Verdict::Kind::Proved);
  auto lin = analyze(parse("(p -> q) | (q -> p)"));
  CHECK(prove(lin, LogicVariant::GK).kind == Verdict::Kind::Proved);
  auto r = prove(lin, LogicVariant::IK);
  REQUIRE(r.kind == Verdict::Kind::Refuted);
  CHECK(validate(r.countermodel->model, LogicVariant::IK).empty());
}

TEST_CASE("refuted verdicts come with II's moves") {
  auto v = prove(analyze(parse("[]p -> p")));
  REQUIRE(v.kind == Verdict::Kind::Refuted);
  CHECK_FALSE(v.refuter_moves.empty());
}

TEST_CASE("progress checker examples") {
  auto t0 = std::chrono::steady_clock::now();
  auto good = check_progress(corpus::box_cycle(true));
  auto bad = check_progress(corpus::box_cycle(false));
  auto dt = std::chrono::steady_clock::now() - t0;
  CHECK(good.accepted);
  CHECK_FALSE(bad.accepted);
  CHECK_FALSE(bad.loop.empty());
  CHECK(bad.stem.front() == 0);
  CHECK(dt < std::chrono::seconds(1));
  CHECK_NOTHROW(check_proof(corpus::box_cycle(true)));
  CHECK_THROWS_AS(check_proof(corpus::box_cycle(false)), MalformedProof);

  auto acyclic = prove(analyze(parse("[](p -> q) -> ([]p -> []q)")));
  REQUIRE(acyclic.kind == Verdict::Kind::Proved);
  CHECK(check_progress(*acyclic.proof).accepted);
}

TEST_CASE("regeneration priorities") {
  Goal g("nu X.mu Y.(<>X | []Y)");
  const int x = g.id("X"), y = g.id("Y");
  CHECK(regeneration_priority(g.c, x, Side::Right) == 4);
  CHECK(regeneration_priority(g.c, x, Side::Left) == 3);
  CHECK(regeneration_priority(g.c, y, Side::Left) == 2);
  CHECK(regeneration_priority(g.c, y, Side::Right) == 1);
}

TEST_CASE("progress agrees with a brute-force trace search on perturbed cycles") {
  std::mt19937_64 rng(2024);
  std::size_t accepted = 0, rejected = 0;
  for (int round = 0; round < 400; ++round) {
    auto g = corpus::box_cycle(round % 2 == 0);
    for (std::size_t i = 0; i < g.nodes.size(); ++i) {
      auto& links = g.nodes[i].traces[0];
      for (auto& l : links) l.priority = static_cast<int>(rng() % 5);
      const auto& from = g.nodes[i].sequent;
      const auto& to = g.nodes[static_cast<std::size_t>(g.nodes[i].premises[0])].sequent;
      std::vector<SidedFormula> fs, ts;
      for (Side s : {Side::Left, Side::Right}) {
        for (const auto& f : from.side(s)) fs.push_back({s, f.label, f.formula});
        for (const auto& f : to.side(s)) ts.push_back({s, f.label, f.formula});
      }
      for (int extra = static_cast<int>(rng() % 3); extra > 0; --extra)
        links.push_back({fs[rng() % fs.size()], ts[rng() % ts.size()], static_cast<int>(rng() % 5)});
    }
    const bool expect = oracle_progress(g);
    CAPTURE(round);
    CHECK(check_progress(g).accepted == expect);
    (expect ? accepted : rejected)++;
  }
  CHECK(accepted > 0);
  CHECK(rejected > 0);
}

TEST_CASE("malformed trace maps") {
  auto g = corpus::box_cycle(true);
  g.nodes[1].traces.clear();
  CHECK_THROWS_AS(check_progress(g), MalformedTraceMap);
  auto h = corpus::box_cycle(true);
  h.nodes[0].traces[0].push_back({{Side::Left, 7, 0}, {Side::Left, 7, 0}, 0});
  CHECK_THROWS_AS(check_progress(h), MalformedTraceMap);
}

TEST_CASE("proof text round trip") {
  for (const auto& t : corpus::kTheorems) {
    CAPTURE(t.formula);
    auto v = prove(analyze(parse(t.formula)), t.variant);
    REQUIRE(v.kind == Verdict::Kind::Proved);
    const auto text = proof_to_text(*v.proof);
    auto back = proof_from_text(text);
    CHECK(proof_to_text(back) == text);
    CHECK_NOTHROW(check_proof(back));
  }
  CHECK_THROWS(proof_from_text("goal: p\nnode 0: nonsense"));
}

TEST_CASE("countermodel extraction") {
  Goal g("p");
  Sequent s;
  s.right = {{0, g.c.root()}};
  auto cm = extract_countermodel(g.c, s, 0, LogicVariant::CK);
  CHECK(cm.model.size() == 1);
  CHECK_FALSE(eval(cm.model, parse("p")).contains(0));

  Goal h("p & q");
  Sequent t;
  t.right = {{0, h.c.root()}};
  t.left = {{0, h.c.root()}};
  CHECK_THROWS_AS(extract_countermodel(h.c, t, 0, LogicVariant::CK), SequentNotSaturated);
}

TEST_CASE("IK and GK refutations yield models of the variant") {
  for (const char* text : {"<>p -> []p", "(p -> q) | (q -> p)", "mu X.[]X", "p | ~p", "[](p | q) -> []p | []q"}) {
    for (auto variant : {LogicVariant::IK, LogicVariant::GK}) {
      auto v = prove(analyze(parse(text)), variant);
      if (v.kind != Verdict::Kind::Refuted) continue;
      CAPTURE(text);
      CHECK(validate(v.countermodel->model, variant).empty());
      const auto& m = v.countermodel->model;
      CHECK_FALSE(eval(m, parse(text)).contains(m.index(v.countermodel->world)));
    }
  }
}
