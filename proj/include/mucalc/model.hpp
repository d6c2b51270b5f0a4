#pragma once

#include <boost/dynamic_bitset.hpp>

#include <cstdint>
#include <functional>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace mucalc {

/// Subset of the worlds of one model, indexed by world position.
class WorldSet {
 public:
  WorldSet() = default;
  explicit WorldSet(std::size_t universe) : bits_(universe) {}
  static WorldSet full(std::size_t universe) {
    WorldSet s(universe);
    s.bits_.set();
    return s;
  }

  std::size_t universe() const { return bits_.size(); }
  bool contains(std::size_t w) const { return bits_.test(w); }
  void insert(std::size_t w) { bits_.set(w); }
  void erase(std::size_t w) { bits_.reset(w); }
  std::size_t count() const { return bits_.count(); }
  bool empty() const { return bits_.none(); }
  bool subset_of(const WorldSet& o) const { return bits_.is_subset_of(o.bits_); }
  std::vector<std::size_t> members() const;

  WorldSet& operator&=(const WorldSet& o) { bits_ &= o.bits_; return *this; }
  WorldSet& operator|=(const WorldSet& o) { bits_ |= o.bits_; return *this; }
  friend WorldSet operator&(WorldSet a, const WorldSet& b) { return a &= b; }
  friend WorldSet operator|(WorldSet a, const WorldSet& b) { return a |= b; }
  bool intersects(const WorldSet& o) const { return bits_.intersects(o.bits_); }
  friend bool operator==(const WorldSet& a, const WorldSet& b) { return a.bits_ == b.bits_; }
  friend bool operator!=(const WorldSet& a, const WorldSet& b) { return !(a == b); }
  friend bool operator<(const WorldSet& a, const WorldSet& b) { return a.bits_ < b.bits_; }

 private:
  boost::dynamic_bitset<std::uint64_t> bits_;
};

/// Binary relation over world indices, stored as successor rows.
class Relation {
 public:
  Relation() = default;
  explicit Relation(std::size_t n) : rows_(n, WorldSet(n)) {}

  std::size_t universe() const { return rows_.size(); }
  bool contains(std::size_t a, std::size_t b) const { return rows_[a].contains(b); }
  void insert(std::size_t a, std::size_t b) { rows_[a].insert(b); }
  const WorldSet& successors(std::size_t a) const { return rows_[a]; }
  std::vector<std::pair<std::size_t, std::size_t>> pairs() const;
  std::size_t count() const;
  bool empty() const { return count() == 0; }
  friend bool operator==(const Relation& a, const Relation& b) { return a.rows_ == b.rows_; }

  /// {(a, c) | a this b, b other c}
  Relation compose(const Relation& other) const;
  void make_reflexive();
  void make_transitive();

 private:
  std::vector<WorldSet> rows_;
};

enum class LogicVariant { CK, IK, GK };

const char* variant_name(LogicVariant v);
LogicVariant parse_variant(const std::string& s);  // "ck" | "ik" | "gk", any case

/// Finite birelational model ⟨W, W⊥, ⪯, R, V⟩.
struct Model {
  std::vector<std::string> worlds;
  WorldSet fallible;
  Relation pre;  // ⪯
  Relation rel;  // R
  std::map<std::string, WorldSet> val;

  std::size_t size() const { return worlds.size(); }
  /// Throws std::out_of_range for an unknown world name.
  std::size_t index(const std::string& world) const;
  std::optional<std::size_t> find(const std::string& world) const;
  /// V(p), or the empty set for a proposition the model does not mention.
  WorldSet valuation(const std::string& prop) const;

  friend bool operator==(const Model& a, const Model& b);
};

/// Empty model over the given world names.
Model make_model(std::vector<std::string> worlds);

struct Violation {
  std::string condition;  // e.g. "pre-reflexive", "heredity", "forward-confluence"
  std::vector<std::string> worlds;
  std::string message;
};

std::vector<Violation> validate(const Model& m, LogicVariant variant = LogicVariant::CK);

class ModelFormatError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class ValidationFailed : public std::runtime_error {
 public:
  explicit ValidationFailed(std::vector<Violation> report);
  const std::vector<Violation>& report() const { return report_; }

 private:
  std::vector<Violation> report_;
};

class GenerationBudgetExceeded : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct CloseOptions {
  bool pre = false;       // reflexive-transitive closure of ⪯
  bool heredity = false;  // V(P) upward closed along ⪯
  bool fallible = false;  // W⊥ closed under ⪯ and R, and W⊥ ⊆ V(P)
  static CloseOptions all() { return {true, true, true}; }
};

/// Applies the enabled closures, then validates against the variant.
/// Throws ValidationFailed when violations remain (confluence and linearity
/// are never repaired).
Model close(Model m, const CloseOptions& options, LogicVariant variant = LogicVariant::CK);

/// ⪯;R = {(w, u) | ∃v. w ⪯ v and v R u}
Relation compose_pre_rel(const Model& m);

/// Visits every valid model with 1..max_worlds worlds (named w0, w1, ...) in
/// a fixed order; stop early by returning false from the visitor.
void for_each_model(std::size_t max_worlds, const std::vector<std::string>& props, LogicVariant variant,
                    const std::function<bool(const Model&)>& visit);
std::vector<Model> enumerate_models(std::size_t max_worlds, const std::vector<std::string>& props,
                                    LogicVariant variant);

struct RandomModelParams {
  std::size_t worlds = 3;
  double pre_density = 0.3;
  double rel_density = 0.3;
  double fallible_density = 0.1;
  double val_density = 0.3;
  std::vector<std::string> props = {"p", "q"};
  LogicVariant variant = LogicVariant::CK;
  std::size_t max_attempts = 20000;
};

/// Samples, closes and (for IK/GK) rejects until the frame conditions hold.
/// Deterministic in the seed.
Model random_model(std::uint64_t seed, const RandomModelParams& params);

// JSON document: {"worlds":[..],"fallible":[..],"pre":[[a,b],..],"rel":[[a,b],..],"val":{"p":[..]}}
Model model_from_json(const std::string& text);
std::string model_to_json(const Model& m);

}  // namespace mucalc
