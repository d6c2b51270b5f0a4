#pragma once

#include "mucalc/model.hpp"
#include "mucalc/proofsys.hpp"
#include "mucalc/syntax.hpp"

#include <cstdint>
#include <iosfwd>
#include <random>
#include <string>
#include <vector>

namespace mucalc::cli {

/// Exit status contract of every subcommand.
enum Exit : int { Positive = 0, Negative = 1, InputError = 2, Exhausted = 3 };

/// Runs one command line (argv[0] is the program name).
int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

struct FormulaParams {
  std::size_t depth = 3;
  std::vector<std::string> props = {"p", "q"};
  double fixpoint_weight = 0.25;
};

/// A random guarded, well-named sentence; deterministic in the generator.
Formula random_sentence(std::mt19937_64& rng, const FormulaParams& params = {});

struct FuzzConfig {
  std::uint64_t seed = 42;
  std::size_t cases = 500;
  LogicVariant variant = LogicVariant::CK;
  std::size_t workers = 0;  // 0: hardware concurrency
  bool prove = true;
  Budget budget{400, 12, 300, 2};
  bool mutate_diamond = false;  // evaluate ◇ with the faulty clause
};

struct FuzzReport {
  std::size_t cases = 0;
  std::size_t eval_game_mismatches = 0;
  std::size_t prover_inconsistencies = 0;
  std::size_t invalid_models = 0;
  std::size_t proved = 0;
  std::size_t refuted = 0;
  std::size_t unknown = 0;
  std::vector<std::string> discrepancies;  // shrunk, in case order
  bool clean() const { return eval_game_mismatches == 0 && prover_inconsistencies == 0 && invalid_models == 0; }
};

FuzzReport fuzz(const FuzzConfig& cfg);

/// Submodel on the kept worlds; nullopt if it is not a model of the variant.
std::optional<Model> restrict_model(const Model& m, const std::vector<std::size_t>& keep, LogicVariant variant);

}  // namespace mucalc::cli
