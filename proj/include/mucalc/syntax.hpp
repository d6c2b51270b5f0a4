#pragma once

#include <cstddef>
#include <functional>
#include <map>
#include <memory>
#include <optional>
#include <set>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace mucalc {

enum class Kind {
  Prop,
  Var,
  Bottom,
  And,
  Or,
  Implies,
  Box,
  Dia,
  Mu,
  Nu,
  // Internal connectives. Never produced by the parser.
  LocalDia,  // some R-successor satisfies the operand
  Query,     // choice point after an implication move: antecedent or consequent
};

const char* kind_name(Kind k);

/// Immutable, structurally compared μ-formula. Copies share the underlying
/// nodes, so passing by value is cheap.
class Formula {
 public:
  Formula();  // Bottom

  static Formula prop(std::string name);
  static Formula var(std::string name);
  static Formula bottom();
  static Formula top();  // ⊥ → ⊥
  static Formula conj(Formula l, Formula r);
  static Formula disj(Formula l, Formula r);
  static Formula implies(Formula l, Formula r);
  static Formula neg(Formula f);  // f → ⊥
  static Formula box(Formula f);
  static Formula dia(Formula f);
  static Formula mu(std::string var, Formula body);
  static Formula nu(std::string var, Formula body);
  static Formula local_dia(Formula f);
  static Formula query(Formula l, Formula r);

  Kind kind() const { return node_->kind; }
  /// Proposition or variable name, or the bound variable of a fixpoint.
  const std::string& name() const { return node_->name; }
  /// Left operand of a binary connective, the operand of a unary one, or the
  /// body of a fixpoint.
  const Formula& left() const;
  const Formula& right() const;
  const Formula& body() const { return left(); }

  bool is_binary() const;
  bool is_unary() const;
  bool is_fixpoint() const { return kind() == Kind::Mu || kind() == Kind::Nu; }
  bool is_modal() const { return kind() == Kind::Box || kind() == Kind::Dia; }

  /// Number of AST nodes.
  std::size_t size() const { return node_->size; }
  std::size_t hash() const { return node_->hash; }

  friend bool operator==(const Formula& a, const Formula& b);
  friend bool operator!=(const Formula& a, const Formula& b) { return !(a == b); }
  friend bool operator<(const Formula& a, const Formula& b);

 private:
  struct Node {
    Kind kind;
    std::string name;
    std::vector<Formula> kids;
    std::size_t size;
    std::size_t hash;
  };
  explicit Formula(std::shared_ptr<const Node> n) : node_(std::move(n)) {}
  static Formula make(Kind k, std::string name, std::vector<Formula> kids);

  std::shared_ptr<const Node> node_;
};

struct FormulaHash {
  std::size_t operator()(const Formula& f) const { return f.hash(); }
};

// ---------------------------------------------------------------------------
// Concrete syntax

class SyntaxError : public std::runtime_error {
 public:
  SyntaxError(const std::string& msg, std::size_t pos);
  std::size_t position() const { return pos_; }

 private:
  std::size_t pos_;
};

/// Unknown character or malformed token.
class LexicalError : public SyntaxError {
 public:
  using SyntaxError::SyntaxError;
};

/// Grammar (lowest precedence first):
///   formula := or ("->" formula)?
///   or      := and ("|" and)*
///   and     := unary ("&" unary)*
///   unary   := "[]" unary | "<>" unary | "~" unary | atom
///   atom    := "false" | "true" | lowerident | UpperIdent | "(" formula ")"
///            | ("mu" | "nu") UpperIdent "." formula
Formula parse(std::string_view text);

/// Prints in the concrete syntax; parse(print(f)) == f for parser ASTs.
/// Internal connectives print as "<.>f" and "(f ? g)".
std::string print(const Formula& f);

// ---------------------------------------------------------------------------
// Static analysis

/// Result of the positivity clauses. Both: positive and negative (e.g. no
/// occurrence at all). Mixed: neither positive nor negative, as X in X → X.
enum class Polarity { Positive, Negative, Both, Mixed };

const char* polarity_name(Polarity p);
Polarity polarity(const Formula& f, const std::string& var);
/// X may be bound by a fixpoint over f.
inline bool positive_enough(Polarity p) { return p == Polarity::Positive || p == Polarity::Both; }

std::set<std::string> free_vars(const Formula& f);
bool occurs_free(const Formula& f, const std::string& var);
std::set<std::string> propositions(const Formula& f);
/// Sub(f): all subformula occurrences, deduplicated structurally.
std::set<Formula> subformulas(const Formula& f);

class AnalysisError : public std::runtime_error {
 public:
  enum class Code { NotASentence, UnguardedVariable, NonPositiveVariable, MultipleOccurrences, InternalConnective };
  AnalysisError(Code code, std::string var, const std::string& msg);
  Code code() const { return code_; }
  const std::string& variable() const { return var_; }

 private:
  Code code_;
  std::string var_;
};

struct BinderInfo {
  Formula binder;       // ηX.ψ_X
  std::size_t index;    // position in subsumption_order (0 = outermost)
  bool role_verifier;   // I holds the Verifier role at every position with this binder
  /// I owns the fixpoint: ν under role V, or μ under role R.
  bool owned_by_I() const {
    return (binder.kind() == Kind::Nu) == role_verifier;
  }
};

struct WellNamedSentence {
  Formula formula;
  std::map<std::string, BinderInfo> binders;
  /// Fixpoint subformulas in non-increasing size: if i < j then the i-th is
  /// not a subformula of the j-th.
  std::vector<Formula> subsumption_order;

  const BinderInfo& binder(const std::string& var) const;
};

/// Renames binders apart, then checks positivity, guardedness and single
/// occurrence of every bound variable.
WellNamedSentence analyze(const Formula& f);

/// Sub(φ) plus ◇̂ψ for each ◇ψ and ψ?θ for each ψ→θ.
std::set<Formula> closure(const WellNamedSentence& s);

/// Dense integer view of closure(s), used by the game and the prover.
class ClosureIndex {
 public:
  static constexpr int npos = -1;

  explicit ClosureIndex(const WellNamedSentence& s);

  const WellNamedSentence& sentence() const { return *sentence_; }
  int size() const { return static_cast<int>(formulas_.size()); }
  const Formula& formula(int id) const { return formulas_[static_cast<std::size_t>(id)]; }
  Kind kind(int id) const { return formula(id).kind(); }
  int id(const Formula& f) const;  // npos when f is not in the closure
  int root() const { return root_; }
  int left(int id) const { return left_[static_cast<std::size_t>(id)]; }
  int right(int id) const { return right_[static_cast<std::size_t>(id)]; }
  /// For a variable: the id of its binder. For a fixpoint: the body id.
  int binder_of(int id) const { return binder_[static_cast<std::size_t>(id)]; }
  /// ◇̂ψ for a ◇ψ, ψ?θ for a ψ→θ.
  int companion(int id) const { return companion_[static_cast<std::size_t>(id)]; }
  /// Position of a fixpoint (or of the binder of a variable) in subsumption_order.
  int fixpoint_rank(int id) const;
  int fixpoint_count() const { return static_cast<int>(sentence_->subsumption_order.size()); }
  const std::string& label(int id) const { return text_[static_cast<std::size_t>(id)]; }

 private:
  std::shared_ptr<const WellNamedSentence> sentence_;
  std::vector<Formula> formulas_;
  std::vector<std::string> text_;
  std::vector<int> left_, right_, binder_, companion_, rank_;
  std::map<Formula, int> ids_;
  int root_ = npos;
};

}  // namespace mucalc
