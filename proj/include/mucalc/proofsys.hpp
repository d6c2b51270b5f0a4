#pragma once

#include "mucalc/model.hpp"
#include "mucalc/syntax.hpp"

#include <compare>
#include <map>
#include <memory>
#include <optional>
#include <set>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace mucalc {

/// World variable of a labeled sequent; printed as x<n>.
using Label = int;
std::string label_name(Label l);

enum class Side { Left, Right };

struct LabeledFormula {
  Label label;
  int formula;  // closure id
  auto operator<=>(const LabeledFormula&) const = default;
};

struct SidedFormula {
  Side side;
  Label label;
  int formula;
  auto operator<=>(const SidedFormula&) const = default;
};

/// x ⪯ y or x R y.
struct RelAtom {
  enum class Type { Pre, Rel };
  Type type;
  Label from;
  Label to;
  auto operator<=>(const RelAtom&) const = default;
  static RelAtom pre(Label a, Label b) { return {Type::Pre, a, b}; }
  static RelAtom rel(Label a, Label b) { return {Type::Rel, a, b}; }
};

/// 𝐑, Γ ⊢ Δ
struct Sequent {
  std::set<RelAtom> rel;
  std::set<LabeledFormula> left;
  std::set<LabeledFormula> right;

  std::set<LabeledFormula>& side(Side s) { return s == Side::Left ? left : right; }
  const std::set<LabeledFormula>& side(Side s) const { return s == Side::Left ? left : right; }
  bool contains(const SidedFormula& f) const { return side(f.side).count({f.label, f.formula}) > 0; }
  bool has(RelAtom a) const { return rel.count(a) > 0; }
  /// ℓ(S)
  std::set<Label> labels() const;
  /// other ⊆ this, componentwise.
  bool includes(const Sequent& other) const;
  std::size_t size() const { return rel.size() + left.size() + right.size(); }
  friend bool operator==(const Sequent&, const Sequent&) = default;
};

enum class Rule {
  BotL,         // ⊥l (axiom)
  Id,           // id (axiom)
  IdDiaN,       // id_◇N (axiom, IK/GK)
  PrePres,      // ⪯-pres
  PreTrans,     // ⪯-trans
  AndL,
  AndR,
  OrL,
  OrR,
  ImpL,
  ImpR,
  BoxL,
  BoxR,
  DiaL,
  DiaR,
  LocalDiaR,
  FixL,         // ηl
  FixR,         // ηr
  RegenL,
  RegenR,
  BotRel,       // fallibility along R
  Fwd,          // IK/GK
  Bwd,          // IK/GK
  Lin,          // GK
  Weaken,       // wk, used to focus on a sub-sequent before a cycle
  Cycle,        // bud: back-edge to a companion
};

const char* rule_name(Rule r);
std::optional<Rule> rule_from_name(std::string_view name);
bool rule_in_variant(Rule r, LogicVariant v);
bool is_axiom_rule(Rule r);

struct RuleInstance {
  Rule rule = Rule::Id;
  std::optional<SidedFormula> principal;
  std::vector<RelAtom> relational;  // relational premises of structural rules
  std::vector<Label> eigen;         // fresh variables, in rule order
  std::optional<Sequent> weakened;  // premise of Weaken
};

class RuleError : public std::runtime_error {
 public:
  enum class Code { PrincipalMissing, FreshnessViolation, RuleNotInVariant, Malformed };
  RuleError(Code code, const std::string& msg) : std::runtime_error(msg), code_(code) {}
  Code code() const { return code_; }

 private:
  Code code_;
};

/// Premises of r applied to s, exactly as in the rule table (principal
/// formulas are kept). Axioms return no premises.
std::vector<Sequent> apply_rule(const ClosureIndex& c, const Sequent& s, const RuleInstance& r,
                                LogicVariant variant = LogicVariant::CK);

/// The axiom closing s, if any.
std::optional<RuleInstance> find_axiom(const ClosureIndex& c, const Sequent& s, LogicVariant variant);

struct SaturationWitness {
  int clause;               // 1..18 as in the saturation definition; 19+ for the extra rules
  std::string description;  // e.g. "clause 4: x0:p & q in Γ"
  RuleInstance fix;         // a rule application that discharges it
};

/// Empty iff s is saturated. Clause 2 (R-transitivity) has no rule and is not
/// checked; clause 13 uses x ⪯ y. Clauses 19-22 cover bot-rel, fwd, bwd, lin.
std::vector<SaturationWitness> is_saturated(const ClosureIndex& c, const Sequent& s,
                                            LogicVariant variant = LogicVariant::CK);

// ---------------------------------------------------------------------------
// Proof graphs

struct TraceLink {
  SidedFormula from;  // in the conclusion
  SidedFormula to;    // in the premise (or the companion, across a back-edge)
  int priority;       // 0, or the regeneration priority
};

struct ProofNode {
  Sequent sequent;
  RuleInstance rule;
  std::vector<int> premises;                   // for Cycle: the single companion
  std::vector<std::vector<TraceLink>> traces;  // one map per premise edge
  std::map<Label, Label> renaming;             // Cycle: companion label -> bud label
  bool is_bud() const { return rule.rule == Rule::Cycle; }
};

struct ProofGraph {
  std::shared_ptr<const ClosureIndex> closure;
  LogicVariant variant = LogicVariant::CK;
  int root = 0;
  std::vector<ProofNode> nodes;
};

class MalformedTraceMap : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class MalformedProof : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Priority of a trace step: regenerating the i-th binder of the
/// subsumption order (n binders) scores 2(n-i) on its progressing side
/// (ν right, μ left) and 2(n-i)-1 otherwise.
int regeneration_priority(const ClosureIndex& c, int var_formula, Side side);

/// Trace links from the conclusion of r to premise number k.
std::vector<TraceLink> trace_links(const ClosureIndex& c, const Sequent& conclusion, const RuleInstance& r,
                                   const Sequent& premise);
/// Links across a back-edge from the bud to its companion.
std::vector<TraceLink> back_edge_links(const Sequent& companion, const Sequent& bud,
                                       const std::map<Label, Label>& renaming);

struct ProgressResult {
  bool accepted = true;
  /// Reject witness: a path from the root into the bad cycle, then the cycle.
  std::vector<int> stem;
  std::vector<int> loop;
  std::string reason;
};

/// Accepts iff every infinite path has a progressing trace. Decided on the
/// closure of path summaries between companions: every idempotent loop must
/// carry a trace whose best recurring priority is even and positive.
ProgressResult check_progress(const ProofGraph& g);

/// Rule applications match the premises, axioms are axioms, back-edges embed
/// the companion, then check_progress. Throws MalformedProof.
void check_proof(const ProofGraph& g);

std::string proof_to_text(const ProofGraph& g);
ProofGraph proof_from_text(const std::string& text);

// ---------------------------------------------------------------------------
// Countermodels and search

class SequentNotSaturated : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class ExtractionUnsound : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct Countermodel {
  Model model;
  std::string world;  // the root label
};

/// W := ℓ(S), W⊥ := {x | x:⊥ ∈ Γ}, ⪯ and R from 𝐑, V(P) := {x | x:P ∈ Γ};
/// then closed and checked: the model must validate for the variant and
/// falsify the goal at the root label. With require_saturated, a
/// non-saturated or axiomatic sequent is refused.
Countermodel extract_countermodel(const ClosureIndex& c, const Sequent& s, Label root, LogicVariant variant,
                                  bool require_saturated = true);

struct Budget {
  std::size_t max_nodes = 20000;
  std::size_t max_labels = 64;   // per sequent
  std::size_t max_depth = 2000;  // per branch
  /// When the search runs out, models with up to this many worlds are
  /// enumerated for a countermodel (0 disables).
  std::size_t fallback_worlds = 3;
};

struct SearchReport {
  std::size_t nodes = 0;
  std::size_t max_labels_seen = 0;
  std::size_t back_edges = 0;
  std::size_t focus_attempts = 0;
  /// "saturated leaf", "cycle quotient", "open leaf" or "enumeration".
  std::string countermodel_source;
  std::string note;
};

struct Verdict {
  enum class Kind { Proved, Refuted, Unknown };
  Kind kind = Kind::Unknown;
  std::optional<ProofGraph> proof;
  std::optional<Countermodel> countermodel;
  /// II's positional moves in the evaluation game on the countermodel.
  std::vector<std::string> refuter_moves;
  SearchReport report;
};

const char* verdict_name(Verdict::Kind k);

/// Fair, cumulative proof search from ⊢ x0:φ with back-edges and
/// countermodel extraction. Never throws for analyzed goals.
Verdict prove(const WellNamedSentence& goal, LogicVariant variant = LogicVariant::CK, const Budget& budget = {});

std::string sequent_to_text(const ClosureIndex& c, const Sequent& s);

}  // namespace mucalc
