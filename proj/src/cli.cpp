#include "mucalc/cli.hpp"

#include "mucalc/denotational.hpp"
#include "mucalc/game.hpp"

#include "CLI11.hpp"
#include "json.hpp"

#include <algorithm>
#include <atomic>
#include <fstream>
#include <iostream>
#include <mutex>
#include <numeric>
#include <sstream>
#include <thread>

namespace mucalc::cli {

namespace {

class BadInput : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

std::string read_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw BadInput("cannot read " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_file(const std::string& path, const std::string& text) {
  std::ofstream out(path);
  if (!out) throw BadInput("cannot write " + path);
  out << text;
}

Model load_model(const std::string& path, LogicVariant variant) {
  Model m = model_from_json(read_file(path));
  auto v = validate(m, variant);
  if (!v.empty()) throw ValidationFailed(v);
  return m;
}

WellNamedSentence load_formula(const std::string& text) { return analyze(parse(text)); }

std::size_t world_index(const Model& m, const std::string& world) {
  auto w = m.find(world);
  if (!w) throw BadInput("unknown world '" + world + "'");
  return *w;
}

std::string world_list(const Model& m, const WorldSet& s) {
  std::vector<std::string> names;
  for (auto w : s.members()) names.push_back(m.worlds[w]);
  std::sort(names.begin(), names.end());
  std::string out = "{";
  for (std::size_t i = 0; i < names.size(); ++i) out += (i ? ", " : "") + names[i];
  return out + "}";
}

std::string violations_text(const std::vector<Violation>& vs) {
  std::string out;
  for (const auto& v : vs) out += v.condition + ": " + v.message + "\n";
  return out;
}

std::string countermodel_json(const Countermodel& cm) {
  auto doc = nlohmann::json::parse(model_to_json(cm.model));
  doc["designated"] = cm.world;
  return doc.dump(2) + "\n";
}

// -- subcommands --------------------------------------------------------------

int cmd_check_model(const std::string& file, LogicVariant variant, std::ostream& out) {
  Model m = model_from_json(read_file(file));
  auto v = validate(m, variant);
  if (v.empty()) {
    out << "valid " << variant_name(variant) << " model, " << m.size() << " worlds\n";
    return Positive;
  }
  out << violations_text(v);
  return Negative;
}

int cmd_eval(const std::string& file, const std::string& formula, const std::string& world, LogicVariant variant,
             std::ostream& out) {
  Model m = load_model(file, variant);
  auto s = load_formula(formula);
  WorldSet ext = eval(m, s.formula);
  out << world_list(m, ext) << "\n";
  if (world.empty()) return Positive;
  return ext.contains(world_index(m, world)) ? Positive : Negative;
}

int cmd_game(const std::string& file, const std::string& formula, const std::string& world,
             const std::string& dump, LogicVariant variant, std::ostream& out) {
  Model m = load_model(file, variant);
  auto s = load_formula(formula);
  auto arena = build_arena(m, s, world_index(m, world));
  auto sol = solve(arena);
  if (!dump.empty()) write_file(dump, dump_arena(arena));
  Player w = sol.winner[static_cast<std::size_t>(arena.initial)];
  out << "winner: " << player_name(w) << "\n";
  out << "positions: " << arena.size() << "\n";
  return w == Player::I ? Positive : Negative;
}

int cmd_diff(const std::string& file, const std::string& formula, const std::string& world, LogicVariant variant,
             std::ostream& out) {
  Model m = load_model(file, variant);
  auto s = load_formula(formula);
  const std::size_t w = world_index(m, world);
  WorldSet ext = eval(m, s.formula);
  auto arena = build_arena(m, s, w);
  auto sol = solve(arena);
  const bool by_eval = ext.contains(w);
  const bool by_game = sol.winner[static_cast<std::size_t>(arena.initial)] == Player::I;
  out << "eval: " << (by_eval ? "true" : "false") << "\n";
  out << "game: " << (by_game ? "I" : "II") << "\n";
  if (by_eval != by_game) {
    out << "mismatch\n";
    return Negative;
  }
  out << "agree\n";
  return Positive;
}

int cmd_prove(const std::string& formula, LogicVariant variant, const Budget& budget, const std::string& emit_proof,
              const std::string& emit_countermodel, std::ostream& out, std::ostream& err) {
  auto s = load_formula(formula);
  Verdict v = prove(s, variant, budget);
  out << "verdict: " << verdict_name(v.kind) << "\n";
  out << "nodes: " << v.report.nodes << "\n";
  switch (v.kind) {
    case Verdict::Kind::Proved: {
      const auto& g = *v.proof;
      out << "proof nodes: " << g.nodes.size() << "\n";
      if (!emit_proof.empty()) {
        std::string text = proof_to_text(g);
        try {
          check_proof(proof_from_text(text));
        } catch (const MalformedProof& e) {
          err << "internal error: emitted proof does not re-check: " << e.what() << "\n";
          return InputError;
        }
        write_file(emit_proof, text);
      }
      return Positive;
    }
    case Verdict::Kind::Refuted: {
      const auto& cm = *v.countermodel;
      out << "countermodel: " << cm.model.size() << " worlds, designated " << cm.world << " (from "
          << v.report.countermodel_source << ")\n";
      for (const auto& m : v.refuter_moves) out << "  " << m << "\n";
      if (!emit_countermodel.empty()) write_file(emit_countermodel, countermodel_json(cm));
      return Negative;
    }
    case Verdict::Kind::Unknown:
      out << "reason: " << v.report.note << "\n";
      return Exhausted;
  }
  return Exhausted;
}

int cmd_fuzz(const FuzzConfig& cfg, std::ostream& out) {
  FuzzReport r = fuzz(cfg);
  out << "cases: " << r.cases << "\n";
  out << "eval/game mismatches: " << r.eval_game_mismatches << "\n";
  out << "prover inconsistencies: " << r.prover_inconsistencies << "\n";
  out << "invalid models: " << r.invalid_models << "\n";
  out << "verdicts: " << r.proved << " proved, " << r.refuted << " refuted, " << r.unknown << " unknown\n";
  for (const auto& d : r.discrepancies) out << d << "\n";
  return r.clean() ? Positive : Negative;
}

}  // namespace

int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"constructive modal mu-calculus workbench"};
  app.require_subcommand(1);

  std::string file, formula, world, dump, emit_proof, emit_cm, logic = "ck";
  std::size_t budget_nodes = Budget{}.max_nodes, budget_labels = Budget{}.max_labels;
  FuzzConfig fz;
  std::string fuzz_logic = "ck";

  auto* check = app.add_subcommand("check-model", "validate a model file");
  check->add_option("file", file)->required();
  check->add_option("--logic", logic);

  auto* ev = app.add_subcommand("eval", "denotation of a formula");
  ev->add_option("file", file)->required();
  ev->add_option("--formula", formula)->required();
  ev->add_option("--world", world);
  ev->add_option("--logic", logic);

  auto* gm = app.add_subcommand("game", "solve the evaluation game");
  gm->add_option("file", file)->required();
  gm->add_option("--formula", formula)->required();
  gm->add_option("--world", world)->required();
  gm->add_option("--dump-arena", dump);
  gm->add_option("--logic", logic);

  auto* pv = app.add_subcommand("prove", "proof search");
  pv->add_option("--formula", formula)->required();
  pv->add_option("--logic", logic);
  pv->add_option("--budget-nodes", budget_nodes)->check(CLI::PositiveNumber);
  pv->add_option("--budget-labels", budget_labels)->check(CLI::PositiveNumber);
  pv->add_option("--emit-proof", emit_proof);
  pv->add_option("--emit-countermodel", emit_cm);

  auto* df = app.add_subcommand("diff", "compare evaluation and game at a world");
  df->add_option("file", file)->required();
  df->add_option("--formula", formula)->required();
  df->add_option("--world", world)->required();
  df->add_option("--logic", logic);

  auto* fzc = app.add_subcommand("fuzz", "differential testing of all engines");
  fzc->add_option("--seed", fz.seed)->required();
  fzc->add_option("--cases", fz.cases)->required()->check(CLI::PositiveNumber);
  fzc->add_option("--logic", fuzz_logic);
  fzc->add_option("--workers", fz.workers);
  fzc->add_flag("--no-prove", [&](std::int64_t) { fz.prove = false; });
  fzc->add_flag("--mutate-diamond", fz.mutate_diamond)->group("");  // harness self-check only

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    out << app.help();
    return Positive;
  } catch (const CLI::ParseError& e) {
    err << e.what() << "\n";
    return InputError;
  }

  try {
    const LogicVariant variant = parse_variant(logic);
    if (*check) return cmd_check_model(file, variant, out);
    if (*ev) return cmd_eval(file, formula, world, variant, out);
    if (*gm) return cmd_game(file, formula, world, dump, variant, out);
    if (*df) return cmd_diff(file, formula, world, variant, out);
    if (*pv) {
      Budget b;
      b.max_nodes = budget_nodes;
      b.max_labels = budget_labels;
      return cmd_prove(formula, variant, b, emit_proof, emit_cm, out, err);
    }
    if (*fzc) {
      fz.variant = parse_variant(fuzz_logic);
      return cmd_fuzz(fz, out);
    }
  } catch (const ValidationFailed& e) {
    err << "invalid model:\n" << violations_text(e.report());
    return InputError;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return InputError;
  }
  return InputError;
}

// -- fuzzing --------------------------------------------------------------------

namespace {

struct Scope {
  std::string var;
  bool guarded;
  bool positive;
  bool used;
};

class SentenceGen {
 public:
  SentenceGen(std::mt19937_64& rng, const FormulaParams& p) : rng_(rng), p_(p) {}

  Formula gen(std::size_t depth) {
    std::vector<Scope*> usable;
    for (auto& s : scope_)
      if (s.guarded && s.positive && !s.used) usable.push_back(&s);
    if (depth == 0) {
      if (!usable.empty() && coin(0.5)) return use(*usable[pick(usable.size())]);
      return leaf();
    }
    const double r = unit();
    if (r < p_.fixpoint_weight) {
      std::string x = "X" + std::to_string(counter_++);
      scope_.push_back({x, false, true, false});
      const bool nu = coin(0.5);
      // Guard the body by construction.
      Formula body = modal(depth - 1);
      scope_.pop_back();
      return nu ? Formula::nu(x, body) : Formula::mu(x, body);
    }
    switch (pick(7)) {
      case 0: return Formula::conj(gen(depth - 1), gen(depth - 1));
      case 1: return Formula::disj(gen(depth - 1), gen(depth - 1));
      case 2: {
        for (auto& s : scope_) s.positive = !s.positive;
        Formula a = gen(depth - 1);
        for (auto& s : scope_) s.positive = !s.positive;
        return Formula::implies(a, gen(depth - 1));
      }
      case 3:
      case 4: return modal(depth);
      case 5:
        if (!usable.empty()) return use(*usable[pick(usable.size())]);
        return leaf();
      default: return leaf();
    }
  }

 private:
  Formula modal(std::size_t depth) {
    std::vector<bool> saved;
    for (auto& s : scope_) {
      saved.push_back(s.guarded);
      s.guarded = true;
    }
    Formula inner = gen(depth == 0 ? 0 : depth - 1);
    for (std::size_t i = 0; i < scope_.size(); ++i) scope_[i].guarded = saved[i];
    return coin(0.5) ? Formula::box(inner) : Formula::dia(inner);
  }

  Formula use(Scope& s) {
    s.used = true;
    return Formula::var(s.var);
  }

  Formula leaf() {
    std::size_t k = pick(p_.props.size() + 2);
    if (k < p_.props.size()) return Formula::prop(p_.props[k]);
    return k == p_.props.size() ? Formula::bottom() : Formula::top();
  }

  double unit() { return std::uniform_real_distribution<double>(0, 1)(rng_); }
  bool coin(double p) { return unit() < p; }
  std::size_t pick(std::size_t n) { return std::uniform_int_distribution<std::size_t>(0, n - 1)(rng_); }

  std::mt19937_64& rng_;
  const FormulaParams& p_;
  std::vector<Scope> scope_;
  int counter_ = 0;
};

/// Worlds where eval and the game disagree.
std::vector<std::size_t> mismatches(const Model& m, const WellNamedSentence& s, bool mutate) {
  WorldSet ext = eval(m, s.formula, {}, EvalOptions{mutate});
  auto closure = std::make_shared<const ClosureIndex>(s);
  std::vector<std::size_t> roots(m.size());
  std::iota(roots.begin(), roots.end(), std::size_t{0});
  auto arena = build_arena(m, closure, roots);
  auto sol = solve(arena);
  std::vector<std::size_t> out;
  for (std::size_t w = 0; w < m.size(); ++w) {
    int p = arena.find(w, closure->root(), Role::V);
    if (ext.contains(w) != (sol.winner[static_cast<std::size_t>(p)] == Player::I)) out.push_back(w);
  }
  return out;
}

std::optional<WellNamedSentence> try_analyze(const Formula& f) {
  try {
    return analyze(f);
  } catch (const AnalysisError&) {
    return std::nullopt;
  }
}

/// Greedy shrinking: smaller sentences among the subformulas, then fewer worlds.
std::pair<Model, WellNamedSentence> shrink(Model m, WellNamedSentence s, LogicVariant variant, bool mutate) {
  bool progress = true;
  while (progress) {
    progress = false;
    for (const auto& sub : subformulas(s.formula)) {
      if (sub.size() >= s.formula.size() || !free_vars(sub).empty()) continue;
      auto cand = try_analyze(sub);
      if (cand && !mismatches(m, *cand, mutate).empty()) {
        s = *cand;
        progress = true;
        break;
      }
    }
    for (std::size_t drop = 0; !progress && drop < m.size() && m.size() > 1; ++drop) {
      std::vector<std::size_t> keep;
      for (std::size_t w = 0; w < m.size(); ++w)
        if (w != drop) keep.push_back(w);
      auto smaller = restrict_model(m, keep, variant);
      if (smaller && !mismatches(*smaller, s, mutate).empty()) {
        m = *smaller;
        progress = true;
      }
    }
  }
  return {m, s};
}

}  // namespace

Formula random_sentence(std::mt19937_64& rng, const FormulaParams& params) {
  SentenceGen g(rng, params);
  return g.gen(params.depth);
}

std::optional<Model> restrict_model(const Model& m, const std::vector<std::size_t>& keep, LogicVariant variant) {
  std::vector<std::string> names;
  for (auto w : keep) names.push_back(m.worlds[w]);
  Model out = make_model(names);
  for (std::size_t i = 0; i < keep.size(); ++i) {
    if (m.fallible.contains(keep[i])) out.fallible.insert(i);
    for (std::size_t j = 0; j < keep.size(); ++j) {
      if (m.pre.contains(keep[i], keep[j])) out.pre.insert(i, j);
      if (m.rel.contains(keep[i], keep[j])) out.rel.insert(i, j);
    }
  }
  for (const auto& [p, ws] : m.val) {
    WorldSet s(keep.size());
    for (std::size_t i = 0; i < keep.size(); ++i)
      if (ws.contains(keep[i])) s.insert(i);
    out.val[p] = s;
  }
  if (!validate(out, variant).empty()) return std::nullopt;
  return out;
}

FuzzReport fuzz(const FuzzConfig& cfg) {
  FuzzReport report;
  report.cases = cfg.cases;
  std::mutex mu;
  std::atomic<std::size_t> next{0};
  std::vector<std::pair<std::size_t, std::string>> found;

  auto one = [&](std::size_t i) {
    std::mt19937_64 rng(cfg.seed * 1000003u + i);
    RandomModelParams mp;
    mp.worlds = 1 + rng() % 4;
    mp.variant = cfg.variant;
    Model m = random_model(rng(), mp);
    FormulaParams fp;
    fp.depth = 2 + rng() % 4;
    std::optional<WellNamedSentence> s;
    while (!s) s = try_analyze(random_sentence(rng, fp));

    std::vector<std::string> local;
    std::size_t mism = 0, incons = 0, invalid = 0, proved = 0, refuted = 0, unknown = 0;
    if (!validate(m, cfg.variant).empty()) {
      ++invalid;
      local.push_back("case " + std::to_string(i) + ": generated model fails " + variant_name(cfg.variant));
    }
    auto bad = mismatches(m, *s, cfg.mutate_diamond);
    if (!bad.empty()) {
      ++mism;
      auto [sm, ss] = shrink(m, *s, cfg.variant, cfg.mutate_diamond);
      auto w = mismatches(sm, ss, cfg.mutate_diamond);
      local.push_back("case " + std::to_string(i) + ": eval/game mismatch at " + sm.worlds[w.front()] +
                      " formula=" + print(ss.formula) + " model=" + nlohmann::json::parse(model_to_json(sm)).dump());
    }
    if (cfg.prove) {
      Verdict v = prove(*s, cfg.variant, cfg.budget);
      auto complain = [&](const std::string& what) {
        ++incons;
        local.push_back("case " + std::to_string(i) + ": " + what + " formula=" + print(s->formula));
      };
      if (v.kind == Verdict::Kind::Proved) {
        ++proved;
        if (eval(m, s->formula) != WorldSet::full(m.size()))
          complain("proved but falsified by the sampled model " + nlohmann::json::parse(model_to_json(m)).dump());
        try {
          check_proof(*v.proof);
        } catch (const MalformedProof& e) {
          complain(std::string("proof does not re-check: ") + e.what());
        }
      } else if (v.kind == Verdict::Kind::Refuted) {
        ++refuted;
        const auto& cm = *v.countermodel;
        const std::size_t w = cm.model.index(cm.world);
        if (!validate(cm.model, cfg.variant).empty()) complain("countermodel is not a model of the variant");
        if (eval(cm.model, s->formula).contains(w)) complain("countermodel satisfies the goal");
        auto arena = build_arena(cm.model, *s, w);
        if (solve(arena).winner[static_cast<std::size_t>(arena.initial)] != Player::II)
          complain("game solver disagrees with the countermodel");
      } else {
        ++unknown;
      }
    }
    std::lock_guard<std::mutex> lock(mu);
    report.eval_game_mismatches += mism;
    report.prover_inconsistencies += incons;
    report.invalid_models += invalid;
    report.proved += proved;
    report.refuted += refuted;
    report.unknown += unknown;
    for (auto& l : local) found.push_back({i, std::move(l)});
  };

  std::size_t workers = cfg.workers ? cfg.workers : std::max(1u, std::thread::hardware_concurrency());
  workers = std::min(workers, cfg.cases);
  std::vector<std::thread> pool;
  for (std::size_t t = 0; t < workers; ++t)
    pool.emplace_back([&] {
      for (std::size_t i = next++; i < cfg.cases; i = next++) one(i);
    });
  for (auto& t : pool) t.join();
  std::sort(found.begin(), found.end());
  for (auto& [i, line] : found) report.discrepancies.push_back(std::move(line));
  return report;
}

}  // namespace mucalc::cli
