#include "doctest.h"

#include "mucalc/denotational.hpp"

using namespace mucalc;

namespace {

Model refl(std::vector<std::string> names) {
  Model m = make_model(std::move(names));
  for (std::size_t i = 0; i < m.size(); ++i) m.pre.insert(i, i);
  return m;
}

WorldSet subset(std::size_t n, unsigned bits) {
  WorldSet s(n);
  for (std::size_t i = 0; i < n; ++i)
    if (bits >> i & 1) s.insert(i);
  return s;
}

// Clause-by-clause semantics with fixpoints taken as the meet of all
// prefixed points (μ) or the join of all postfixed points (ν).
WorldSet oracle(const Model& m, const Formula& f, Env env) {
  const std::size_t n = m.size();
  auto all = WorldSet::full(n);
  switch (f.kind()) {
    case Kind::Prop: return m.valuation(f.name());
    case Kind::Var: return env.at(f.name());
    case Kind::Bottom: return m.fallible;
    case Kind::And: return oracle(m, f.left(), env) & oracle(m, f.right(), env);
    case Kind::Or: return oracle(m, f.left(), env) | oracle(m, f.right(), env);
    case Kind::Implies: {
      auto a = oracle(m, f.left(), env), b = oracle(m, f.right(), env);
      WorldSet out(n);
      for (std::size_t w = 0; w < n; ++w) {
        bool ok = true;
        for (std::size_t v = 0; v < n; ++v)
          if (m.pre.contains(w, v) && a.contains(v) && !b.contains(v)) ok = false;
        if (ok) out.insert(w);
      }
      return out;
    }
    case Kind::Box: {
      auto a = oracle(m, f.left(), env);
      WorldSet out(n);
      for (std::size_t w = 0; w < n; ++w) {
        bool ok = true;
        for (std::size_t v = 0; v < n; ++v)
          for (std::size_t u = 0; u < n; ++u)
            if (m.pre.contains(w, v) && m.rel.contains(v, u) && !a.contains(u)) ok = false;
        if (ok) out.insert(w);
      }
      return out;
    }
    case Kind::Dia: {
      auto a = oracle(m, f.left(), env);
      WorldSet out(n);
      for (std::size_t w = 0; w < n; ++w) {
        bool ok = true;
        for (std::size_t v = 0; v < n; ++v) {
          if (!m.pre.contains(w, v)) continue;
          bool some = false;
          for (std::size_t u = 0; u < n; ++u) some |= m.rel.contains(v, u) && a.contains(u);
          ok &= some;
        }
        if (ok) out.insert(w);
      }
      return out;
    }
    case Kind::LocalDia: {
      auto a = oracle(m, f.left(), env);
      WorldSet out(n);
      for (std::size_t w = 0; w < n; ++w) {
        bool some = false;
        for (std::size_t u = 0; u < n; ++u) some |= m.rel.contains(w, u) && a.contains(u);
        if (some) out.insert(w);
      }
      return out;
    }
    case Kind::Mu:
    case Kind::Nu: {
      const bool mu = f.kind() == Kind::Mu;
      WorldSet acc = mu ? all : WorldSet(n);
      for (unsigned bits = 0; bits < (1u << n); ++bits) {
        auto a = subset(n, bits);
        env[f.name()] = a;
        auto g = oracle(m, f.body(), env);
        if (mu && g.subset_of(a)) acc &= a;
        if (!mu && a.subset_of(g)) acc |= a;
      }
      return acc;
    }
    default: throw NotEvaluable("oracle");
  }
}

}  // namespace

TEST_CASE("eval examples") {
  Model m = refl({"w", "v", "u"});
  m.pre.insert(0, 1);
  m.rel.insert(1, 2);
  m.val["p"] = subset(3, 0b100);
  CHECK(eval(m, parse("[]p")) == WorldSet::full(3));
  CHECK(eval(m, parse("nu X.[]X")) == WorldSet::full(3));

  Model a = refl({"a"});
  a.rel.insert(0, 0);
  CHECK(eval(a, parse("mu X.[]X")).empty());
}

TEST_CASE("eval errors") {
  Model m = refl({"w"});
  CHECK_THROWS_AS(eval(m, Formula::var("X")), UnboundVariable);
  CHECK_THROWS_AS(eval(m, Formula::query(Formula::prop("p"), Formula::prop("p"))), NotEvaluable);
  Env env{{"X", WorldSet::full(1)}};
  CHECK(eval(m, Formula::var("X"), env) == WorldSet::full(1));
}

TEST_CASE("excluded middle fails on the two-world heredity model") {
  Model m = refl({"w", "v"});
  m.pre.insert(0, 1);
  m.val["p"] = subset(2, 0b10);
  auto s = eval(m, parse("p | ~p"));
  CHECK_FALSE(s.contains(0));
  CHECK(s.contains(1));
}

TEST_CASE("approximants") {
  Model m = refl({"a", "b"});
  m.rel.insert(0, 1);
  auto mu = parse("mu X.[]X"), nu = parse("nu X.[]X");
  CHECK(approximant(m, mu, 0).empty());
  CHECK(approximant(m, nu, 0) == WorldSet::full(2));
  CHECK(approximant(m, mu, 1) == subset(2, 0b10));
  CHECK(approximant(m, mu, 2) == subset(2, 0b11));
  auto chain = parse("nu X.(p & <>X)");
  Model c = refl({"a", "b", "c"});
  c.rel.insert(0, 1);
  c.rel.insert(1, 2);
  c.val["p"] = subset(3, 0b111);
  for (std::size_t k = 0; k < 4; ++k) CHECK(approximant(c, chain, k + 1).subset_of(approximant(c, chain, k)));
}

TEST_CASE("operator gamma") {
  Model m = refl({"a", "b"});
  m.rel.insert(0, 1);
  auto g = operator_gamma(m, parse("nu X.[]X"));
  CHECK(g(WorldSet::full(2)) == WorldSet::full(2));
  Model loop = refl({"a"});
  loop.rel.insert(0, 0);
  CHECK(operator_gamma(loop, parse("mu X.[]X"))(WorldSet(1)).empty());
}

TEST_CASE("eval agrees with the Knaster-Tarski oracle on all two-world models") {
  const std::vector<std::string> corpus = {"p | ~p", "<>p -> []p", "[](p -> <>p)", "mu X.(p | <>X)",
                                           "nu X.(p & []X)", "nu X.mu Y.((p & <>X) | <>Y)",
                                           "mu X.nu Y.((p -> []X) & []Y)", "(nu X.<>X) -> mu Y.[]Y",
                                           "~~p -> p", "<>false -> false"};
  std::vector<Formula> fs;
  for (const auto& s : corpus) fs.push_back(parse(s));
  fs.push_back(Formula::local_dia(Formula::prop("p")));
  std::size_t checked = 0;
  for (const auto& m : enumerate_models(2, {"p"}, LogicVariant::CK))
    for (const auto& f : fs) {
      if (eval(m, f) != oracle(m, f, {})) FAIL(print(f) << " on " << model_to_json(m));
      ++checked;
    }
  CHECK(checked > 0);
}

TEST_CASE("persistence holds for sentences without the local diamond") {
  std::vector<Formula> fs;
  for (const char* s : {"p | ~p", "<>p -> []p", "[](p -> <>p)", "mu X.(p | <>X)", "nu X.(p & <>X)", "~~p -> p"})
    fs.push_back(parse(s));
  for (const auto& m : enumerate_models(3, {"p"}, LogicVariant::CK))
    for (const auto& f : fs) {
      auto s = eval(m, f);
      for (auto [w, v] : m.pre.pairs())
        if (s.contains(w) && !s.contains(v)) FAIL(print(f) << " not persistent on " << model_to_json(m));
    }
}

TEST_CASE("mutated diamond differs from the real one somewhere") {
  auto f = parse("<>p");
  bool differs = false;
  for (const auto& m : enumerate_models(2, {"p"}, LogicVariant::CK)) {
    differs = eval(m, f) != eval(m, f, {}, EvalOptions{true});
    if (differs) break;
  }
  CHECK(differs);
}
