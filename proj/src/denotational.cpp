#include "mucalc/denotational.hpp"

#include <optional>

namespace mucalc {

namespace {

class Evaluator {
 public:
  Evaluator(const Model& m, const EvalOptions& opts)
      : m_(m), opts_(opts), n_(m.size()), pre_rel_(compose_pre_rel(m)) {}

  WorldSet run(const Formula& f, Env& env) {
    switch (f.kind()) {
      case Kind::Prop: return m_.valuation(f.name());
      case Kind::Var: {
        auto it = env.find(f.name());
        if (it == env.end()) throw UnboundVariable(f.name());
        return it->second;
      }
      case Kind::Bottom: return m_.fallible;
      case Kind::And: return run(f.left(), env) & run(f.right(), env);
      case Kind::Or: return run(f.left(), env) | run(f.right(), env);
      case Kind::Implies: {
        WorldSet a = run(f.left(), env);
        WorldSet b = run(f.right(), env);
        WorldSet out(n_);
        for (std::size_t w = 0; w < n_; ++w) {
          bool ok = true;
          for (auto v : m_.pre.successors(w).members())
            if (a.contains(v) && !b.contains(v)) {
              ok = false;
              break;
            }
          if (ok) out.insert(w);
        }
        return out;
      }
      case Kind::Box: {
        WorldSet a = run(f.left(), env);
        WorldSet out(n_);
        for (std::size_t w = 0; w < n_; ++w)
          if (pre_rel_.successors(w).subset_of(a)) out.insert(w);
        return out;
      }
      case Kind::Dia: {
        WorldSet local = local_dia(run(f.left(), env));
        if (opts_.mutate_diamond) return local;
        WorldSet out(n_);
        for (std::size_t w = 0; w < n_; ++w)
          if (m_.pre.successors(w).subset_of(local)) out.insert(w);
        return out;
      }
      case Kind::LocalDia: return local_dia(run(f.left(), env));
      case Kind::Mu:
      case Kind::Nu: {
        const bool least = f.kind() == Kind::Mu;
        WorldSet cur = least ? WorldSet(n_) : WorldSet::full(n_);
        while (true) {
          WorldSet next = apply(f, cur, env);
          if (next == cur) return cur;
          cur = std::move(next);
        }
      }
      case Kind::Query: throw NotEvaluable("query formulas have no denotational clause: " + print(f));
    }
    throw std::logic_error("unreachable");
  }

  /// Γ for binder ηX.ψ at argument A.
  WorldSet apply(const Formula& binder, const WorldSet& a, Env& env) {
    const std::string& x = binder.name();
    auto saved = env.find(x);
    std::optional<WorldSet> old;
    if (saved != env.end()) old = saved->second;
    env[x] = a;
    WorldSet out = run(binder.body(), env);
    if (old)
      env[x] = *old;
    else
      env.erase(x);
    return out;
  }

 private:
  WorldSet local_dia(const WorldSet& a) const {
    WorldSet out(n_);
    for (std::size_t w = 0; w < n_; ++w)
      if (m_.rel.successors(w).intersects(a)) out.insert(w);
    return out;
  }

  const Model& m_;
  EvalOptions opts_;
  std::size_t n_;
  Relation pre_rel_;
};

void require_fixpoint(const Formula& binder) {
  if (!binder.is_fixpoint()) throw std::invalid_argument("not a fixpoint formula: " + print(binder));
}

}  // namespace

WorldSet eval(const Model& m, const Formula& f, const Env& env, const EvalOptions& opts) {
  Env local = env;
  return Evaluator(m, opts).run(f, local);
}

std::function<WorldSet(const WorldSet&)> operator_gamma(const Model& m, const Formula& binder, const Env& env) {
  require_fixpoint(binder);
  return [m, binder, env](const WorldSet& a) {
    Env local = env;
    return Evaluator(m, {}).apply(binder, a, local);
  };
}

WorldSet approximant(const Model& m, const Formula& binder, std::size_t alpha, const Env& env) {
  require_fixpoint(binder);
  Env local = env;
  Evaluator ev(m, {});
  WorldSet cur = binder.kind() == Kind::Mu ? WorldSet(m.size()) : WorldSet::full(m.size());
  for (std::size_t i = 0; i < alpha; ++i) cur = ev.apply(binder, cur, local);
  return cur;
}

}  // namespace mucalc
