#include "doctest.h"

#include "mucalc/denotational.hpp"
#include "mucalc/game.hpp"

#include <algorithm>
#include <sstream>

using namespace mucalc;

namespace {

Model refl(std::vector<std::string> names) {
  Model m = make_model(std::move(names));
  for (std::size_t i = 0; i < m.size(); ++i) m.pre.insert(i, i);
  return m;
}

}  // namespace

TEST_CASE("one-position arena for a true proposition") {
  Model m = refl({"w"});
  m.val["p"] = WorldSet::full(1);
  auto a = build_arena(m, analyze(parse("p")), 0);
  REQUIRE(a.size() == 1);
  CHECK(a.owner[0] == Role::R);
  CHECK(a.moves[0].empty());
  CHECK(solve(a).winner[a.initial] == Player::I);
}

TEST_CASE("diamond unfolds through the local diamond") {
  Model m = refl({"w", "u"});
  m.rel.insert(0, 1);
  auto s = analyze(parse("<>p"));
  auto a = build_arena(m, s, 0);
  const auto& c = *a.closure;
  const int dia = c.root(), ldia = c.companion(dia), p = c.id(Formula::prop("p"));
  const int x = a.find(0, dia, Role::V), y = a.find(0, ldia, Role::V), z = a.find(1, p, Role::V);
  REQUIRE(x >= 0);
  REQUIRE(y >= 0);
  REQUIRE(z >= 0);
  CHECK(std::count(a.moves[x].begin(), a.moves[x].end(), y) == 1);
  CHECK(std::count(a.moves[y].begin(), a.moves[y].end(), z) == 1);
}

TEST_CASE("implication swaps roles at the query position") {
  Model m = refl({"w"});
  auto s = analyze(parse("p -> p"));
  auto a = build_arena(m, s, 0);
  const auto& c = *a.closure;
  const int q = c.companion(c.root()), p = c.id(Formula::prop("p"));
  const int qp = a.find(0, q, Role::V);
  REQUIRE(qp >= 0);
  const int swapped = a.find(0, p, Role::R);
  REQUIRE(swapped >= 0);
  CHECK(std::count(a.moves[qp].begin(), a.moves[qp].end(), swapped) == 1);
}

TEST_CASE("solve examples") {
  Model loop = refl({"a"});
  loop.rel.insert(0, 0);
  auto a = build_arena(loop, analyze(parse("nu X.[]X")), 0);
  CHECK(solve(a).winner[a.initial] == Player::I);
  auto b = build_arena(loop, analyze(parse("mu X.[]X")), 0);
  CHECK(solve(b).winner[b.initial] == Player::II);

  Model h = refl({"w", "v"});
  h.pre.insert(0, 1);
  h.val["p"] = WorldSet(2);
  h.val["p"].insert(1);
  auto em = build_arena(h, analyze(parse("p | ~p")), 0);
  CHECK(solve(em).winner[em.initial] == Player::II);
}

TEST_CASE("priorities: only regeneration positions carry one") {
  Model m = refl({"a"});
  m.rel.insert(0, 0);
  auto a = build_arena(m, analyze(parse("nu X.mu Y.(<>X | []Y)")), 0);
  for (std::size_t i = 0; i < a.size(); ++i) {
    if (a.closure->kind(a.positions[i].formula) != Kind::Var) CHECK(a.priority[i] == 0);
    else CHECK(a.priority[i] > 0);
  }
}

TEST_CASE("verify_strategy") {
  Model m = refl({"w", "u", "v"});
  m.rel.insert(0, 1);
  m.rel.insert(0, 2);
  m.val["p"] = WorldSet(3);
  m.val["p"].insert(1);
  auto a = build_arena(m, analyze(parse("<>p")), 0);
  auto sol = solve(a);
  REQUIRE(sol.winner[a.initial] == Player::I);
  CHECK(verify_strategy(a, Player::I, sol.strategy_I, sol.region(Player::I)));
  CHECK(verify_strategy(a, Player::II, sol.strategy_II, sol.region(Player::II)));

  // Redirect the choice of successor to the p-less world.
  const auto& c = *a.closure;
  const int ldia = a.find(0, c.companion(c.root()), Role::V);
  const int bad = a.find(2, c.id(Formula::prop("p")), Role::V);
  REQUIRE(ldia >= 0);
  REQUIRE(bad >= 0);
  Strategy wrong = sol.strategy_I;
  wrong[ldia] = bad;
  CHECK_FALSE(verify_strategy(a, Player::I, wrong, {a.initial}));

  Model one = refl({"w"});
  one.val["p"] = WorldSet::full(1);
  auto t = build_arena(one, analyze(parse("p")), 0);
  CHECK(verify_strategy(t, Player::I, {}, {t.initial}));
  CHECK_THROWS_AS(verify_strategy(a, Player::I, {}, {a.initial}), IncompleteStrategy);
}

TEST_CASE("equivalence with eval at fallible and infallible worlds") {
  Model f = refl({"w"});
  f.fallible.insert(0);
  CHECK(eval(f, parse("false")).contains(0));
  CHECK(check_equivalence(f, analyze(parse("false")), 0));
  Model g = refl({"w"});
  CHECK_FALSE(eval(g, parse("false")).contains(0));
  CHECK(check_equivalence(g, analyze(parse("false")), 0));
}

TEST_CASE("equivalence on all two-world models") {
  std::vector<WellNamedSentence> ss;
  for (const char* s : {"p | ~p", "<>p -> []p", "[](p -> <>p)", "mu X.(p | <>X)", "nu X.(p & <>X)",
                        "nu X.mu Y.((p & <>X) | <>Y)", "(nu X.<>X) -> mu Y.[]Y", "~~p -> p"})
    ss.push_back(analyze(parse(s)));
  for (const auto& m : enumerate_models(2, {"p"}, LogicVariant::CK))
    for (const auto& s : ss)
      for (std::size_t w = 0; w < m.size(); ++w)
        if (!check_equivalence(m, s, w)) FAIL(print(s.formula) << " at " << w << " on " << model_to_json(m));
}

TEST_CASE("dump has one line per position") {
  RandomModelParams p;
  auto m = random_model(5, p);
  auto a = build_arena(m, analyze(parse("nu X.(p & [](q -> <>X))")), 0);
  std::istringstream in(dump_arena(a));
  std::size_t lines = 0;
  for (std::string l; std::getline(in, l);) ++lines;
  CHECK(lines == a.size());
}
