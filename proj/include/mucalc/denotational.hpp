#pragma once

#include "mucalc/model.hpp"
#include "mucalc/syntax.hpp"

#include <functional>
#include <map>
#include <stdexcept>
#include <string>

namespace mucalc {

/// Augmented valuation for free variables: M[X ↦ A].
using Env = std::map<std::string, WorldSet>;

class UnboundVariable : public std::runtime_error {
 public:
  explicit UnboundVariable(const std::string& var) : std::runtime_error("unbound variable " + var), var_(var) {}
  const std::string& variable() const { return var_; }

 private:
  std::string var_;
};

class NotEvaluable : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Fault injection for harness sensitivity checks. Never set outside tests
/// and the fuzzer's self-check.
struct EvalOptions {
  bool mutate_diamond = false;  // evaluate ◇ as the local diamond
};

/// ‖f‖ under env. Fixpoints are computed by iterating from ∅ (μ) or W (ν)
/// until stable. Query formulas have no clause and are rejected.
WorldSet eval(const Model& m, const Formula& f, const Env& env = {}, const EvalOptions& opts = {});

inline bool satisfies(const Model& m, const Formula& f, std::size_t world, const Env& env = {}) {
  return eval(m, f, env).contains(world);
}

/// Γ_{ψ(X)}(A) = ‖ψ‖ under env[X ↦ A], for binder = ηX.ψ.
std::function<WorldSet(const WorldSet&)> operator_gamma(const Model& m, const Formula& binder, const Env& env = {});

/// α-th approximant of binder: Γ applied α times to ∅ (μ) or W (ν).
WorldSet approximant(const Model& m, const Formula& binder, std::size_t alpha, const Env& env = {});

}  // namespace mucalc
