#include "doctest.h"

#include "mucalc/model.hpp"

#include <algorithm>

using namespace mucalc;

namespace {

Model refl(std::vector<std::string> names) {
  Model m = make_model(std::move(names));
  for (std::size_t i = 0; i < m.size(); ++i) m.pre.insert(i, i);
  return m;
}

bool has_condition(const std::vector<Violation>& vs, const std::string& cond) {
  return std::any_of(vs.begin(), vs.end(), [&](const Violation& v) { return v.condition == cond; });
}

// Frame conditions written out from scratch, for the enumeration count.
bool oracle_valid(const Model& m, LogicVariant v) {
  const std::size_t n = m.size();
  for (std::size_t a = 0; a < n; ++a) {
    if (!m.pre.contains(a, a)) return false;
    for (std::size_t b = 0; b < n; ++b)
      for (std::size_t c = 0; c < n; ++c)
        if (m.pre.contains(a, b) && m.pre.contains(b, c) && !m.pre.contains(a, c)) return false;
  }
  for (std::size_t a = 0; a < n; ++a)
    for (std::size_t b = 0; b < n; ++b)
      if (m.fallible.contains(a) && (m.pre.contains(a, b) || m.rel.contains(a, b)) && !m.fallible.contains(b))
        return false;
  if (v == LogicVariant::CK) return true;
  if (!m.fallible.empty()) return false;
  for (std::size_t w = 0; w < n; ++w)
    for (std::size_t x = 0; x < n; ++x)
      for (std::size_t u = 0; u < n; ++u) {
        if (m.pre.contains(w, x) && m.rel.contains(w, u)) {
          bool ok = false;
          for (std::size_t y = 0; y < n; ++y) ok |= m.rel.contains(x, y) && m.pre.contains(u, y);
          if (!ok) return false;
        }
        if (m.rel.contains(w, x) && m.pre.contains(x, u)) {
          bool ok = false;
          for (std::size_t y = 0; y < n; ++y) ok |= m.pre.contains(w, y) && m.rel.contains(y, u);
          if (!ok) return false;
        }
      }
  if (v == LogicVariant::IK) return true;
  for (std::size_t w = 0; w < n; ++w)
    for (std::size_t a = 0; a < n; ++a)
      for (std::size_t b = 0; b < n; ++b)
        if (m.pre.contains(w, a) && m.pre.contains(w, b) && !m.pre.contains(a, b) && !m.pre.contains(b, a))
          return false;
  return true;
}

std::size_t oracle_count(std::size_t n, LogicVariant v) {
  std::size_t count = 0;
  const std::size_t edges = n * n;
  for (std::size_t pre = 0; pre < (1u << edges); ++pre)
    for (std::size_t rel = 0; rel < (1u << edges); ++rel)
      for (std::size_t fal = 0; fal < (1u << n); ++fal) {
        Model m = make_model(std::vector<std::string>(n, "w"));
        for (std::size_t e = 0; e < edges; ++e) {
          if (pre >> e & 1) m.pre.insert(e / n, e % n);
          if (rel >> e & 1) m.rel.insert(e / n, e % n);
        }
        for (std::size_t w = 0; w < n; ++w)
          if (fal >> w & 1) m.fallible.insert(w);
        count += oracle_valid(m, v);
      }
  return count;
}

}  // namespace

TEST_CASE("validate") {
  Model one = refl({"w"});
  for (auto v : {LogicVariant::CK, LogicVariant::IK, LogicVariant::GK}) CHECK(validate(one, v).empty());

  Model bad = make_model({"w"});
  auto vs = validate(bad);
  REQUIRE_FALSE(vs.empty());
  CHECK(vs[0].worlds == std::vector<std::string>{"w"});

  Model fal = refl({"w"});
  fal.fallible.insert(0);
  CHECK(validate(fal, LogicVariant::CK).empty());
  CHECK_FALSE(validate(fal, LogicVariant::IK).empty());
}

TEST_CASE("validate reports heredity and confluence") {
  Model m = refl({"w", "v"});
  m.pre.insert(0, 1);
  m.val["p"] = WorldSet(2);
  m.val["p"].insert(0);
  CHECK(has_condition(validate(m), "heredity"));

  Model f = refl({"w", "v", "u"});
  f.pre.insert(0, 1);
  f.rel.insert(0, 2);
  CHECK(validate(f, LogicVariant::CK).empty());
  CHECK(has_condition(validate(f, LogicVariant::IK), "forward-confluence"));
}

TEST_CASE("close") {
  Model m = make_model({"w", "v"});
  m.pre.insert(0, 1);
  Model c = close(m, {true, false, false});
  CHECK(c.pre.contains(0, 0));
  CHECK(c.pre.contains(1, 1));

  m.val["p"] = WorldSet(2);
  m.val["p"].insert(0);
  c = close(m, CloseOptions::all());
  CHECK(c.val["p"].contains(1));

  Model r = refl({"w", "u"});
  r.fallible.insert(0);
  r.rel.insert(0, 1);
  c = close(r, CloseOptions::all());
  CHECK(c.fallible.contains(1));

  CHECK_THROWS_AS(close(make_model({"w"}), {}), ValidationFailed);
}

TEST_CASE("compose_pre_rel") {
  Model m = make_model({"w", "v", "u"});
  m.pre.insert(0, 1);
  m.rel.insert(1, 2);
  CHECK(compose_pre_rel(m).contains(0, 2));
  CHECK(compose_pre_rel(refl({"w", "v"})).empty());
  Model r = refl({"w", "u"});
  r.rel.insert(0, 1);
  CHECK(compose_pre_rel(r).contains(0, 1));
}

TEST_CASE("enumeration") {
  CHECK(enumerate_models(1, {}, LogicVariant::CK).size() == 4);
  CHECK(enumerate_models(0, {}, LogicVariant::CK).empty());
  CHECK(enumerate_models(1, {}, LogicVariant::IK).size() == 2);
  for (const auto& m : enumerate_models(2, {"p"}, LogicVariant::GK)) CHECK(validate(m, LogicVariant::GK).empty());
}

TEST_CASE("enumeration matches a brute-force count over raw relations") {
  for (auto v : {LogicVariant::CK, LogicVariant::IK, LogicVariant::GK}) {
    CAPTURE(variant_name(v));
    const auto one = enumerate_models(1, {}, v).size();
    const auto two = enumerate_models(2, {}, v).size();
    CHECK(one == oracle_count(1, v));
    CHECK(two - one == oracle_count(2, v));
  }
}

TEST_CASE("random models") {
  RandomModelParams p;
  p.worlds = 4;
  CHECK(random_model(7, p) == random_model(7, p));
  p.variant = LogicVariant::GK;
  for (std::uint64_t s = 0; s < 20; ++s) CHECK(validate(random_model(s, p), LogicVariant::GK).empty());
  p.variant = LogicVariant::CK;
  p.pre_density = p.rel_density = p.fallible_density = 0;
  Model m = random_model(3, p);
  CHECK(m.rel.empty());
  CHECK(m.pre.count() == m.size());
}

TEST_CASE("json round trip and errors") {
  RandomModelParams p;
  for (std::uint64_t s = 0; s < 10; ++s) {
    Model m = random_model(s, p);
    CHECK(model_from_json(model_to_json(m)) == m);
  }
  CHECK_THROWS_AS(model_from_json("{"), ModelFormatError);
  CHECK_THROWS_AS(model_from_json(R"({"worlds":["a"],"pre":[["a","b"]]})"), ModelFormatError);
  CHECK_THROWS_AS(model_from_json(R"({"pre":[]})"), ModelFormatError);
}
