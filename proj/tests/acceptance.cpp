// One line per acceptance criterion; exit status 1 if any fails.

#include "corpus.hpp"
#include "mucalc/cli.hpp"
#include "mucalc/denotational.hpp"
#include "mucalc/game.hpp"
#include "mucalc/proofsys.hpp"

#include <chrono>
#include <cstdio>
#include <iostream>
#include <numeric>
#include <random>
#include <sstream>

using namespace mucalc;
using Clock = std::chrono::steady_clock;

namespace {

constexpr std::size_t kMaxWorlds = 3;
constexpr double kCriterion1Seconds = 300.0;
constexpr double kCriterion8Seconds = 1.0;
constexpr std::size_t kMonotonicityTriples = 10000;
constexpr std::size_t kFuzzCases = 10000;

int failures = 0;

void report(int n, bool ok, const std::string& detail) {
  std::cout << "criterion " << n << ": " << (ok ? "PASS" : "FAIL") << "  " << detail << std::endl;
  if (!ok) ++failures;
}

double seconds_since(Clock::time_point t) { return std::chrono::duration<double>(Clock::now() - t).count(); }

struct Analyzed {
  WellNamedSentence s;
  std::shared_ptr<const ClosureIndex> c;
};

std::vector<Analyzed> corpus_sentences() {
  std::vector<Analyzed> out;
  for (const auto& f : corpus::kFormulas) {
    auto s = analyze(parse(f));
    out.push_back({s, std::make_shared<const ClosureIndex>(s)});
  }
  return out;
}

// Criteria 1, 2 and 4 share the enumeration.
void semantics(const std::vector<Analyzed>& fs) {
  std::size_t models = 0, checks = 0, mismatches = 0;
  std::size_t arenas = 0, undetermined = 0, rejected_strategies = 0;
  std::size_t fixpoints = 0, unstable = 0;
  std::string first_mismatch, first_strategy, first_unstable;
  std::vector<std::size_t> roots;
  const auto t0 = Clock::now();
  double game_seconds = 0;

  for_each_model(kMaxWorlds, {"p"}, LogicVariant::CK, [&](const Model& m) {
    ++models;
    roots.resize(m.size());
    std::iota(roots.begin(), roots.end(), 0);
    for (const auto& a : fs) {
      const auto tg = Clock::now();
      WorldSet ext = eval(m, a.s.formula);
      auto arena = build_arena(m, a.c, roots);
      auto sol = solve(arena);
      for (std::size_t w = 0; w < m.size(); ++w) {
        const int pos = arena.find(w, a.c->root(), Role::V);
        ++checks;
        if (pos < 0 || ext.contains(w) != (sol.winner[static_cast<std::size_t>(pos)] == Player::I)) {
          if (!mismatches++) first_mismatch = print(a.s.formula) + " at " + m.worlds[w] + " on " + model_to_json(m);
        }
      }
      game_seconds += seconds_since(tg);

      ++arenas;
      auto r1 = sol.region(Player::I), r2 = sol.region(Player::II);
      if (r1.size() + r2.size() != arena.size() || sol.winner.size() != arena.size()) ++undetermined;
      bool ok = false;
      try {
        ok = verify_strategy(arena, Player::I, sol.strategy_I, r1) &&
             verify_strategy(arena, Player::II, sol.strategy_II, r2);
      } catch (const IncompleteStrategy&) {
        ok = false;
      }
      if (!ok && !rejected_strategies++) first_strategy = print(a.s.formula) + " on " + model_to_json(m);

      // Each binder in context: its free variables are bound to the values
      // of the enclosing fixpoints, outermost first.
      Env env;
      for (const auto& b : a.s.subsumption_order) {
        ++fixpoints;
        const std::size_t n = m.size();
        WorldSet fix = eval(m, b, env);
        if (approximant(m, b, n, env) != fix || approximant(m, b, n + 1, env) != fix) {
          if (!unstable++) first_unstable = print(b) + " on " + model_to_json(m);
        }
        env[b.name()] = fix;
      }
    }
    return true;
  });
  const double total = seconds_since(t0);

  std::ostringstream d1;
  d1 << models << " CK models x " << fs.size() << " formulas, " << checks << " world checks, " << mismatches
     << " mismatches, eval+game " << static_cast<int>(game_seconds) << "s (limit " << kCriterion1Seconds << "s)";
  if (mismatches) d1 << "; first: " << first_mismatch;
  report(1, mismatches == 0 && models > 0 && game_seconds < kCriterion1Seconds, d1.str());

  std::ostringstream d2;
  d2 << arenas << " arenas, " << undetermined << " with positions lacking a unique winner, " << rejected_strategies
     << " with a rejected strategy";
  if (rejected_strategies) d2 << "; first: " << first_strategy;
  report(2, undetermined == 0 && rejected_strategies == 0 && arenas > 0, d2.str());

  std::ostringstream d4;
  d4 << fixpoints << " (model, fixpoint) pairs, " << unstable << " not stable at |W|; " << static_cast<int>(total)
     << "s for criteria 1, 2, 4";
  if (unstable) d4 << "; first: " << first_unstable;
  report(4, unstable == 0 && fixpoints > 0, d4.str());
}

// Random body with Z only at positive positions (sign = true).
Formula positive_body(std::mt19937_64& rng, int depth, bool sign) {
  static const std::vector<Formula> closed = {parse("mu Y.(p | <>Y)"), parse("nu Y.(q & []Y)")};
  auto leaf = [&]() {
    switch (rng() % 5) {
      case 0: return sign ? Formula::var("Z") : Formula::prop("p");
      case 1: return Formula::prop("p");
      case 2: return Formula::prop("q");
      case 3: return Formula::bottom();
      default: return closed[rng() % closed.size()];
    }
  };
  if (depth == 0) return leaf();
  switch (rng() % 7) {
    case 0: return Formula::conj(positive_body(rng, depth - 1, sign), positive_body(rng, depth - 1, sign));
    case 1: return Formula::disj(positive_body(rng, depth - 1, sign), positive_body(rng, depth - 1, sign));
    case 2: return Formula::implies(positive_body(rng, depth - 1, !sign), positive_body(rng, depth - 1, sign));
    case 3: return Formula::box(positive_body(rng, depth - 1, sign));
    case 4: return Formula::dia(positive_body(rng, depth - 1, sign));
    case 5: return sign ? Formula::var("Z") : leaf();
    default: return leaf();
  }
}

void monotonicity() {
  std::mt19937_64 rng(31337);
  std::size_t failures3 = 0, non_positive = 0;
  std::string first;
  for (std::size_t i = 0; i < kMonotonicityTriples; ++i) {
    RandomModelParams params;
    params.worlds = 1 + rng() % 4;
    params.variant = LogicVariant::CK;
    Model m = random_model(rng(), params);
    Formula body = positive_body(rng, 1 + static_cast<int>(rng() % 4), true);
    if (!positive_enough(polarity(body, "Z"))) {
      ++non_positive;
      continue;
    }
    auto gamma = operator_gamma(m, Formula::mu("Z", body));
    WorldSet a(m.size()), b(m.size());
    for (std::size_t w = 0; w < m.size(); ++w) {
      const auto r = rng() % 3;
      if (r >= 1) b.insert(w);
      if (r == 2) a.insert(w);
    }
    if (!gamma(a).subset_of(gamma(b)) && !failures3++) first = print(body) + " on " + model_to_json(m);
  }
  std::ostringstream d;
  d << kMonotonicityTriples << " triples, " << failures3 << " failures, " << non_positive
    << " generator bodies not positive";
  if (failures3) d << "; first: " << first;
  report(3, failures3 == 0 && non_positive == 0, d.str());
}

std::vector<std::string> props_of(const Formula& f) {
  auto ps = propositions(f);
  return {ps.begin(), ps.end()};
}

void soundness() {
  std::size_t proved = 0, checked = 0, countermodels = 0;
  std::string problems;
  for (const auto& g : corpus::kTheorems) {
    auto s = analyze(parse(g.formula));
    auto v = prove(s, g.variant);
    const std::string tag = std::string(g.formula) + " [" + variant_name(g.variant) + "]";
    if (v.kind != Verdict::Kind::Proved) {
      problems += " " + tag + " not proved (" + verdict_name(v.kind) + ");";
      continue;
    }
    ++proved;
    try {
      auto back = proof_from_text(proof_to_text(*v.proof));
      check_proof(back);
      if (!check_progress(back).accepted) problems += " " + tag + " fails progress;";
    } catch (const std::exception& e) {
      problems += " " + tag + " proof rejected: " + e.what() + ";";
    }
    const auto ps = props_of(s.formula);
    bool found = false;
    for_each_model(kMaxWorlds, ps, g.variant, [&](const Model& m) {
      ++checked;
      if (eval(m, s.formula) != WorldSet::full(m.size())) {
        found = true;
        problems += " " + tag + " falsified on " + model_to_json(m) + ";";
        return false;
      }
      return true;
    });
    countermodels += found;
  }
  std::ostringstream d;
  d << proved << "/" << corpus::kTheorems.size() << " theorems proved, " << checked << " model checks, "
    << countermodels << " countermodels";
  if (!problems.empty()) d << ";" << problems;
  report(5, proved == corpus::kTheorems.size() && problems.empty(), d.str());
}

void refutation() {
  std::size_t refuted = 0;
  std::string problems;
  for (const auto& g : corpus::kNonTheorems) {
    auto s = analyze(parse(g.formula));
    auto v = prove(s, g.variant);
    const std::string tag = std::string(g.formula) + " [" + variant_name(g.variant) + "]";
    if (v.kind != Verdict::Kind::Refuted || !v.countermodel) {
      problems += " " + tag + " not refuted (" + verdict_name(v.kind) + ");";
      continue;
    }
    const auto& cm = *v.countermodel;
    const std::size_t w = cm.model.index(cm.world);
    bool ok = validate(cm.model, g.variant).empty();
    ok = ok && !eval(cm.model, s.formula).contains(w);
    auto arena = build_arena(cm.model, s, w);
    ok = ok && solve(arena).winner[static_cast<std::size_t>(arena.initial)] == Player::II;
    if (ok) ++refuted;
    else problems += " " + tag + " countermodel not confirmed;";
  }
  std::ostringstream d;
  d << refuted << "/" << corpus::kNonTheorems.size() << " non-theorems refuted with confirmed countermodels";
  if (!problems.empty()) d << ";" << problems;
  report(6, refuted == corpus::kNonTheorems.size(), d.str());
}

void non_persistence() {
  const Formula ldia = Formula::local_dia(Formula::prop("p"));
  std::string witness;
  for_each_model(kMaxWorlds, {"p"}, LogicVariant::CK, [&](const Model& m) {
    WorldSet s = eval(m, ldia);
    for (auto [w, v] : m.pre.pairs())
      if (s.contains(w) && !s.contains(v)) {
        witness = m.worlds[w] + " <= " + m.worlds[v] + " on " + model_to_json(m);
        return false;
      }
    return true;
  });
  report(7, !witness.empty(), witness.empty() ? "no witness among models with <= 3 worlds" : "witness " + witness);
}

void progress() {
  const auto t0 = Clock::now();
  auto good = check_progress(corpus::box_cycle(true));
  const double tg = seconds_since(t0);
  const auto t1 = Clock::now();
  auto bad = check_progress(corpus::box_cycle(false));
  const double tb = seconds_since(t1);
  std::ostringstream d;
  d << "nu cycle " << (good.accepted ? "accepted" : "rejected") << " in " << tg * 1000 << "ms, mu cycle "
    << (bad.accepted ? "accepted" : "rejected") << " in " << tb * 1000 << "ms, lasso stem " << bad.stem.size()
    << " loop " << bad.loop.size();
  const bool ok = good.accepted && !bad.accepted && !bad.loop.empty() && !bad.stem.empty() &&
                  tg < kCriterion8Seconds && tb < kCriterion8Seconds;
  report(8, ok, d.str());
}

void fuzzing() {
  std::ostringstream d;
  bool ok = true;
  for (auto v : {LogicVariant::CK, LogicVariant::IK, LogicVariant::GK}) {
    cli::FuzzConfig cfg;
    cfg.seed = 42;
    cfg.cases = kFuzzCases;
    cfg.variant = v;
    const auto t0 = Clock::now();
    auto r = cli::fuzz(cfg);
    ok = ok && r.clean() && r.cases == kFuzzCases;
    d << variant_name(v) << " " << r.cases << " cases: " << r.eval_game_mismatches << " mismatches, "
      << r.prover_inconsistencies << " prover inconsistencies, " << r.invalid_models << " invalid models ("
      << r.proved << " proved, " << r.refuted << " refuted, " << r.unknown << " unknown, "
      << static_cast<int>(seconds_since(t0)) << "s); ";
    if (!r.discrepancies.empty()) d << "first: " << r.discrepancies.front() << "; ";
  }
  cli::FuzzConfig mut;
  mut.seed = 42;
  mut.cases = 1000;
  mut.mutate_diamond = true;
  mut.prove = false;
  auto r = cli::fuzz(mut);
  const bool detected = r.eval_game_mismatches > 0;
  d << "mutated diamond " << (detected ? "detected" : "missed") << " (" << r.eval_game_mismatches
    << " mismatches in " << mut.cases << " cases)";
  report(9, ok && detected, d.str());
}

}  // namespace

int main() {
  auto fs = corpus_sentences();
  semantics(fs);
  monotonicity();
  soundness();
  refutation();
  non_persistence();
  progress();
  fuzzing();
  std::cout << (failures ? "FAILED: " : "all criteria passed") << (failures ? std::to_string(failures) : "") << std::endl;
  return failures ? 1 : 0;
}
