#include "mucalc/syntax.hpp"

#include <algorithm>
#include <cctype>
#include <sstream>

namespace mucalc {

const char* kind_name(Kind k) {
  switch (k) {
    case Kind::Prop: return "Prop";
    case Kind::Var: return "Var";
    case Kind::Bottom: return "Bottom";
    case Kind::And: return "And";
    case Kind::Or: return "Or";
    case Kind::Implies: return "Implies";
    case Kind::Box: return "Box";
    case Kind::Dia: return "Dia";
    case Kind::Mu: return "Mu";
    case Kind::Nu: return "Nu";
    case Kind::LocalDia: return "LocalDia";
    case Kind::Query: return "Query";
  }
  return "?";
}

namespace {

std::size_t mix(std::size_t h, std::size_t v) {
  return h ^ (v + 0x9e3779b97f4a7c15ULL + (h << 6) + (h >> 2));
}

}  // namespace

Formula Formula::make(Kind k, std::string name, std::vector<Formula> kids) {
  std::size_t size = 1;
  std::size_t h = mix(static_cast<std::size_t>(k), std::hash<std::string>{}(name));
  for (const auto& c : kids) {
    size += c.size();
    h = mix(h, c.hash());
  }
  return Formula(std::make_shared<const Node>(Node{k, std::move(name), std::move(kids), size, h}));
}

Formula::Formula() : Formula(bottom()) {}

Formula Formula::prop(std::string name) { return make(Kind::Prop, std::move(name), {}); }
Formula Formula::var(std::string name) { return make(Kind::Var, std::move(name), {}); }
Formula Formula::bottom() {
  static const Formula b = make(Kind::Bottom, "", {});
  return b;
}
Formula Formula::top() { return implies(bottom(), bottom()); }
Formula Formula::conj(Formula l, Formula r) { return make(Kind::And, "", {std::move(l), std::move(r)}); }
Formula Formula::disj(Formula l, Formula r) { return make(Kind::Or, "", {std::move(l), std::move(r)}); }
Formula Formula::implies(Formula l, Formula r) {
  return make(Kind::Implies, "", {std::move(l), std::move(r)});
}
Formula Formula::neg(Formula f) { return implies(std::move(f), bottom()); }
Formula Formula::box(Formula f) { return make(Kind::Box, "", {std::move(f)}); }
Formula Formula::dia(Formula f) { return make(Kind::Dia, "", {std::move(f)}); }
Formula Formula::mu(std::string var, Formula body) { return make(Kind::Mu, std::move(var), {std::move(body)}); }
Formula Formula::nu(std::string var, Formula body) { return make(Kind::Nu, std::move(var), {std::move(body)}); }
Formula Formula::local_dia(Formula f) { return make(Kind::LocalDia, "", {std::move(f)}); }
Formula Formula::query(Formula l, Formula r) { return make(Kind::Query, "", {std::move(l), std::move(r)}); }

const Formula& Formula::left() const {
  if (node_->kids.empty()) throw std::logic_error(std::string("formula has no operand: ") + kind_name(kind()));
  return node_->kids[0];
}

const Formula& Formula::right() const {
  if (node_->kids.size() < 2) throw std::logic_error(std::string("formula is not binary: ") + kind_name(kind()));
  return node_->kids[1];
}

bool Formula::is_binary() const { return node_->kids.size() == 2; }
bool Formula::is_unary() const {
  return kind() == Kind::Box || kind() == Kind::Dia || kind() == Kind::LocalDia;
}

bool operator==(const Formula& a, const Formula& b) {
  if (a.node_ == b.node_) return true;
  if (a.hash() != b.hash() || a.size() != b.size() || a.kind() != b.kind() || a.name() != b.name()) return false;
  const auto& ka = a.node_->kids;
  const auto& kb = b.node_->kids;
  for (std::size_t i = 0; i < ka.size(); ++i)
    if (!(ka[i] == kb[i])) return false;
  return true;
}

bool operator<(const Formula& a, const Formula& b) {
  if (a.node_ == b.node_) return false;
  if (a.size() != b.size()) return a.size() < b.size();
  if (a.kind() != b.kind()) return a.kind() < b.kind();
  if (a.name() != b.name()) return a.name() < b.name();
  const auto& ka = a.node_->kids;
  const auto& kb = b.node_->kids;
  for (std::size_t i = 0; i < ka.size(); ++i) {
    if (ka[i] < kb[i]) return true;
    if (kb[i] < ka[i]) return false;
  }
  return false;
}

// ---------------------------------------------------------------------------
// Lexer and parser

SyntaxError::SyntaxError(const std::string& msg, std::size_t pos)
    : std::runtime_error("at offset " + std::to_string(pos) + ": " + msg), pos_(pos) {}

namespace {

enum class Tok { Box, Dia, Not, And, Or, Arrow, LParen, RParen, Dot, False, True, Mu, Nu, Lower, Upper, End };

struct Token {
  Tok tok;
  std::string text;
  std::size_t pos;
};

std::vector<Token> lex(std::string_view s) {
  std::vector<Token> out;
  std::size_t i = 0;
  auto ident_char = [](char c) { return std::isalnum(static_cast<unsigned char>(c)) || c == '_'; };
  while (i < s.size()) {
    char c = s[i];
    if (std::isspace(static_cast<unsigned char>(c))) {
      ++i;
      continue;
    }
    std::size_t start = i;
    auto two = [&](char a, char b) { return c == a && i + 1 < s.size() && s[i + 1] == b; };
    if (two('[', ']')) {
      out.push_back({Tok::Box, "[]", start});
      i += 2;
    } else if (two('<', '>')) {
      out.push_back({Tok::Dia, "<>", start});
      i += 2;
    } else if (two('-', '>')) {
      out.push_back({Tok::Arrow, "->", start});
      i += 2;
    } else if (c == '~') {
      out.push_back({Tok::Not, "~", start});
      ++i;
    } else if (c == '&') {
      out.push_back({Tok::And, "&", start});
      ++i;
    } else if (c == '|') {
      out.push_back({Tok::Or, "|", start});
      ++i;
    } else if (c == '(') {
      out.push_back({Tok::LParen, "(", start});
      ++i;
    } else if (c == ')') {
      out.push_back({Tok::RParen, ")", start});
      ++i;
    } else if (c == '.') {
      out.push_back({Tok::Dot, ".", start});
      ++i;
    } else if (std::isalpha(static_cast<unsigned char>(c))) {
      while (i < s.size() && ident_char(s[i])) ++i;
      std::string word(s.substr(start, i - start));
      Tok t;
      if (word == "false")
        t = Tok::False;
      else if (word == "true")
        t = Tok::True;
      else if (word == "mu")
        t = Tok::Mu;
      else if (word == "nu")
        t = Tok::Nu;
      else if (std::islower(static_cast<unsigned char>(word[0])))
        t = Tok::Lower;
      else
        t = Tok::Upper;
      out.push_back({t, std::move(word), start});
    } else {
      throw LexicalError(std::string("unexpected character '") + c + "'", start);
    }
  }
  out.push_back({Tok::End, "", s.size()});
  return out;
}

class Parser {
 public:
  explicit Parser(std::vector<Token> toks) : toks_(std::move(toks)) {}

  Formula parse_all() {
    Formula f = formula();
    if (peek().tok != Tok::End) fail("unexpected '" + peek().text + "'");
    return f;
  }

 private:
  const Token& peek() const { return toks_[pos_]; }
  Token next() { return toks_[pos_++]; }
  [[noreturn]] void fail(const std::string& msg) const { throw SyntaxError(msg, peek().pos); }
  bool accept(Tok t) {
    if (peek().tok != t) return false;
    ++pos_;
    return true;
  }

  Formula formula() {
    Formula lhs = disjunction();
    if (accept(Tok::Arrow)) return Formula::implies(std::move(lhs), formula());
    return lhs;
  }

  Formula disjunction() {
    Formula f = conjunction();
    while (accept(Tok::Or)) f = Formula::disj(std::move(f), conjunction());
    return f;
  }

  Formula conjunction() {
    Formula f = unary();
    while (accept(Tok::And)) f = Formula::conj(std::move(f), unary());
    return f;
  }

  Formula unary() {
    if (accept(Tok::Box)) return Formula::box(unary());
    if (accept(Tok::Dia)) return Formula::dia(unary());
    if (accept(Tok::Not)) return Formula::neg(unary());
    return atom();
  }

  Formula atom() {
    const Token& t = peek();
    switch (t.tok) {
      case Tok::False:
        next();
        return Formula::bottom();
      case Tok::True:
        next();
        return Formula::top();
      case Tok::Lower:
        return Formula::prop(next().text);
      case Tok::Upper:
        return Formula::var(next().text);
      case Tok::LParen: {
        next();
        Formula f = formula();
        if (!accept(Tok::RParen)) fail("expected ')'");
        return f;
      }
      case Tok::Mu:
      case Tok::Nu: {
        bool is_mu = next().tok == Tok::Mu;
        if (peek().tok != Tok::Upper) fail("expected an uppercase variable after binder");
        std::string v = next().text;
        if (!accept(Tok::Dot)) fail("expected '.' after bound variable");
        Formula body = formula();
        return is_mu ? Formula::mu(v, std::move(body)) : Formula::nu(v, std::move(body));
      }
      case Tok::End:
        fail("unexpected end of input");
      default:
        fail("unexpected '" + t.text + "'");
    }
  }

  std::vector<Token> toks_;
  std::size_t pos_ = 0;
};

// Precedence levels for printing; higher binds tighter.
constexpr int kImp = 0, kOr = 1, kAnd = 2, kUnary = 3;

void print_to(std::ostream& os, const Formula& f, int ctx) {
  auto open = [&](int level) {
    if (level < ctx) os << '(';
  };
  auto close = [&](int level) {
    if (level < ctx) os << ')';
  };
  switch (f.kind()) {
    case Kind::Prop:
    case Kind::Var:
      os << f.name();
      return;
    case Kind::Bottom:
      os << "false";
      return;
    case Kind::And:
      open(kAnd);
      print_to(os, f.left(), kAnd);
      os << " & ";
      print_to(os, f.right(), kUnary);
      close(kAnd);
      return;
    case Kind::Or:
      open(kOr);
      print_to(os, f.left(), kOr);
      os << " | ";
      print_to(os, f.right(), kAnd);
      close(kOr);
      return;
    case Kind::Implies:
      if (f.left().kind() == Kind::Bottom && f.right().kind() == Kind::Bottom) {
        os << "true";
        return;
      }
      if (f.right().kind() == Kind::Bottom) {
        os << '~';
        print_to(os, f.left(), kUnary);
        return;
      }
      open(kImp);
      print_to(os, f.left(), kOr);
      os << " -> ";
      print_to(os, f.right(), kImp);
      close(kImp);
      return;
    case Kind::Box:
      os << "[]";
      print_to(os, f.left(), kUnary);
      return;
    case Kind::Dia:
      os << "<>";
      print_to(os, f.left(), kUnary);
      return;
    case Kind::LocalDia:
      os << "<.>";
      print_to(os, f.left(), kUnary);
      return;
    case Kind::Query:
      os << '(';
      print_to(os, f.left(), kOr);
      os << " ? ";
      print_to(os, f.right(), kOr);
      os << ')';
      return;
    case Kind::Mu:
    case Kind::Nu:
      // A binder extends as far right as possible; it only goes bare where
      // nothing can follow it.
      if (ctx > kImp) os << '(';
      os << (f.kind() == Kind::Mu ? "mu " : "nu ") << f.name() << ". ";
      print_to(os, f.body(), -1);
      if (ctx > kImp) os << ')';
      return;
  }
}

}  // namespace

Formula parse(std::string_view text) { return Parser(lex(text)).parse_all(); }

std::string print(const Formula& f) {
  std::ostringstream os;
  print_to(os, f, -1);
  return os.str();
}

// ---------------------------------------------------------------------------
// Polarity and variables

const char* polarity_name(Polarity p) {
  switch (p) {
    case Polarity::Positive: return "Positive";
    case Polarity::Negative: return "Negative";
    case Polarity::Both: return "Both";
    case Polarity::Mixed: return "Mixed";
  }
  return "?";
}

namespace {

struct PolPair {
  bool pos;
  bool neg;
};

PolPair polarity_pair(const Formula& f, const std::string& x) {
  switch (f.kind()) {
    case Kind::Prop:
    case Kind::Bottom:
      return {true, true};
    case Kind::Var:
      if (f.name() == x) return {true, false};
      return {true, true};
    case Kind::And:
    case Kind::Or: {
      auto a = polarity_pair(f.left(), x);
      auto b = polarity_pair(f.right(), x);
      return {a.pos && b.pos, a.neg && b.neg};
    }
    case Kind::Box:
    case Kind::Dia:
    case Kind::LocalDia:
      return polarity_pair(f.left(), x);
    case Kind::Implies:
    case Kind::Query: {
      auto a = polarity_pair(f.left(), x);
      auto b = polarity_pair(f.right(), x);
      return {a.neg && b.pos, a.pos && b.neg};
    }
    case Kind::Mu:
    case Kind::Nu:
      if (f.name() == x) return {true, true};
      return polarity_pair(f.body(), x);
  }
  return {true, true};
}

void collect_free(const Formula& f, std::set<std::string>& bound, std::set<std::string>& out) {
  switch (f.kind()) {
    case Kind::Var:
      if (!bound.count(f.name())) out.insert(f.name());
      return;
    case Kind::Mu:
    case Kind::Nu: {
      bool fresh = bound.insert(f.name()).second;
      collect_free(f.body(), bound, out);
      if (fresh) bound.erase(f.name());
      return;
    }
    case Kind::Prop:
    case Kind::Bottom:
      return;
    default:
      collect_free(f.left(), bound, out);
      if (f.is_binary()) collect_free(f.right(), bound, out);
  }
}

void collect_subformulas(const Formula& f, std::set<Formula>& out) {
  if (!out.insert(f).second) return;
  switch (f.kind()) {
    case Kind::Prop:
    case Kind::Var:
    case Kind::Bottom:
      return;
    default:
      collect_subformulas(f.left(), out);
      if (f.is_binary()) collect_subformulas(f.right(), out);
  }
}

}  // namespace

Polarity polarity(const Formula& f, const std::string& var) {
  auto p = polarity_pair(f, var);
  if (p.pos && p.neg) return Polarity::Both;
  if (p.pos) return Polarity::Positive;
  if (p.neg) return Polarity::Negative;
  return Polarity::Mixed;
}

std::set<std::string> free_vars(const Formula& f) {
  std::set<std::string> bound, out;
  collect_free(f, bound, out);
  return out;
}

bool occurs_free(const Formula& f, const std::string& var) { return free_vars(f).count(var) > 0; }

std::set<std::string> propositions(const Formula& f) {
  std::set<std::string> out;
  for (const auto& g : subformulas(f))
    if (g.kind() == Kind::Prop) out.insert(g.name());
  return out;
}

std::set<Formula> subformulas(const Formula& f) {
  std::set<Formula> out;
  collect_subformulas(f, out);
  return out;
}

// ---------------------------------------------------------------------------
// Well-naming

AnalysisError::AnalysisError(Code code, std::string var, const std::string& msg)
    : std::runtime_error(msg), code_(code), var_(std::move(var)) {}

const BinderInfo& WellNamedSentence::binder(const std::string& var) const {
  auto it = binders.find(var);
  if (it == binders.end()) throw std::out_of_range("no binder for variable " + var);
  return it->second;
}

namespace {

class Renamer {
 public:
  explicit Renamer(const Formula& f) {
    for (const auto& g : subformulas(f))
      if (g.kind() == Kind::Var || g.is_fixpoint()) used_.insert(g.name());
  }

  Formula run(const Formula& f) { return go(f); }

 private:
  std::string fresh(const std::string& base) {
    if (taken_.insert(base).second) return base;
    for (int i = 1;; ++i) {
      std::string cand = base + std::to_string(i);
      if (used_.count(cand) || taken_.count(cand)) continue;
      taken_.insert(cand);
      return cand;
    }
  }

  Formula go(const Formula& f) {
    switch (f.kind()) {
      case Kind::Prop:
      case Kind::Bottom:
        return f;
      case Kind::Var: {
        auto it = scope_.find(f.name());
        if (it == scope_.end() || it->second.empty()) return f;
        return Formula::var(it->second.back());
      }
      case Kind::Mu:
      case Kind::Nu: {
        std::string name = fresh(f.name());
        scope_[f.name()].push_back(name);
        Formula body = go(f.body());
        scope_[f.name()].pop_back();
        return f.kind() == Kind::Mu ? Formula::mu(name, body) : Formula::nu(name, body);
      }
      case Kind::And: return Formula::conj(go(f.left()), go(f.right()));
      case Kind::Or: return Formula::disj(go(f.left()), go(f.right()));
      case Kind::Implies: return Formula::implies(go(f.left()), go(f.right()));
      case Kind::Query: return Formula::query(go(f.left()), go(f.right()));
      case Kind::Box: return Formula::box(go(f.left()));
      case Kind::Dia: return Formula::dia(go(f.left()));
      case Kind::LocalDia: return Formula::local_dia(go(f.left()));
    }
    return f;
  }

  std::set<std::string> used_;
  std::set<std::string> taken_;
  std::map<std::string, std::vector<std::string>> scope_;
};

int count_occurrences(const Formula& f, const std::string& x) {
  switch (f.kind()) {
    case Kind::Var: return f.name() == x ? 1 : 0;
    case Kind::Prop:
    case Kind::Bottom: return 0;
    default: {
      int n = count_occurrences(f.left(), x);
      if (f.is_binary()) n += count_occurrences(f.right(), x);
      return n;
    }
  }
}

bool all_guarded(const Formula& f, const std::string& x, bool under_modality) {
  switch (f.kind()) {
    case Kind::Var: return f.name() != x || under_modality;
    case Kind::Prop:
    case Kind::Bottom: return true;
    case Kind::Box:
    case Kind::Dia:
    case Kind::LocalDia: return all_guarded(f.left(), x, true);
    default:
      return all_guarded(f.left(), x, under_modality) &&
             (!f.is_binary() || all_guarded(f.right(), x, under_modality));
  }
}

void collect_binders(const Formula& f, bool role_v, std::map<std::string, BinderInfo>& out,
                     std::vector<Formula>& order) {
  switch (f.kind()) {
    case Kind::Prop:
    case Kind::Var:
    case Kind::Bottom: return;
    case Kind::Mu:
    case Kind::Nu:
      out.emplace(f.name(), BinderInfo{f, 0, role_v});
      order.push_back(f);
      collect_binders(f.body(), role_v, out, order);
      return;
    case Kind::Implies:
    case Kind::Query:
      collect_binders(f.left(), !role_v, out, order);
      collect_binders(f.right(), role_v, out, order);
      return;
    default:
      collect_binders(f.left(), role_v, out, order);
      if (f.is_binary()) collect_binders(f.right(), role_v, out, order);
  }
}

void check_binders(const Formula& f) {
  switch (f.kind()) {
    case Kind::Prop:
    case Kind::Var:
    case Kind::Bottom: return;
    case Kind::LocalDia:
    case Kind::Query:
      throw AnalysisError(AnalysisError::Code::InternalConnective, "",
                          std::string("internal connective in input: ") + kind_name(f.kind()));
    case Kind::Mu:
    case Kind::Nu: {
      const std::string& x = f.name();
      if (!positive_enough(polarity(f.body(), x)))
        throw AnalysisError(AnalysisError::Code::NonPositiveVariable, x, "variable " + x + " is not positive");
      if (!all_guarded(f.body(), x, false))
        throw AnalysisError(AnalysisError::Code::UnguardedVariable, x, "variable " + x + " is not guarded");
      if (count_occurrences(f.body(), x) > 1)
        throw AnalysisError(AnalysisError::Code::MultipleOccurrences, x,
                            "variable " + x + " occurs more than once");
      check_binders(f.body());
      return;
    }
    default:
      check_binders(f.left());
      if (f.is_binary()) check_binders(f.right());
  }
}

}  // namespace

WellNamedSentence analyze(const Formula& f) {
  auto fv = free_vars(f);
  if (!fv.empty())
    throw AnalysisError(AnalysisError::Code::NotASentence, *fv.begin(),
                        "formula has free variable " + *fv.begin());
  Formula renamed = Renamer(f).run(f);
  check_binders(renamed);

  WellNamedSentence s;
  s.formula = renamed;
  collect_binders(renamed, true, s.binders, s.subsumption_order);
  // Pre-order already lists a binder before its sub-binders; a stable sort by
  // size keeps that and orders incomparable binders deterministically.
  std::stable_sort(s.subsumption_order.begin(), s.subsumption_order.end(),
                   [](const Formula& a, const Formula& b) { return a.size() > b.size(); });
  for (std::size_t i = 0; i < s.subsumption_order.size(); ++i)
    s.binders.at(s.subsumption_order[i].name()).index = i;
  return s;
}

std::set<Formula> closure(const WellNamedSentence& s) {
  std::set<Formula> out = subformulas(s.formula);
  std::vector<Formula> extra;
  for (const auto& g : out) {
    if (g.kind() == Kind::Dia) extra.push_back(Formula::local_dia(g.left()));
    if (g.kind() == Kind::Implies) extra.push_back(Formula::query(g.left(), g.right()));
  }
  out.insert(extra.begin(), extra.end());
  return out;
}

// ---------------------------------------------------------------------------

ClosureIndex::ClosureIndex(const WellNamedSentence& s)
    : sentence_(std::make_shared<const WellNamedSentence>(s)) {
  auto members = closure(*sentence_);
  formulas_.assign(members.begin(), members.end());
  for (std::size_t i = 0; i < formulas_.size(); ++i) ids_.emplace(formulas_[i], static_cast<int>(i));
  const std::size_t n = formulas_.size();
  left_.assign(n, npos);
  right_.assign(n, npos);
  binder_.assign(n, npos);
  companion_.assign(n, npos);
  rank_.assign(n, npos);
  text_.resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    const Formula& f = formulas_[i];
    text_[i] = print(f);
    switch (f.kind()) {
      case Kind::Prop:
      case Kind::Bottom: break;
      case Kind::Var: {
        const auto& info = sentence_->binder(f.name());
        binder_[i] = id(info.binder);
        rank_[i] = static_cast<int>(info.index);
        break;
      }
      case Kind::Mu:
      case Kind::Nu:
        left_[i] = id(f.body());
        binder_[i] = left_[i];
        rank_[i] = static_cast<int>(sentence_->binder(f.name()).index);
        break;
      default:
        left_[i] = id(f.left());
        if (f.is_binary()) right_[i] = id(f.right());
    }
    if (f.kind() == Kind::Dia) companion_[i] = id(Formula::local_dia(f.left()));
    if (f.kind() == Kind::Implies) companion_[i] = id(Formula::query(f.left(), f.right()));
  }
  root_ = id(sentence_->formula);
}

int ClosureIndex::id(const Formula& f) const {
  auto it = ids_.find(f);
  return it == ids_.end() ? npos : it->second;
}

int ClosureIndex::fixpoint_rank(int id) const { return rank_[static_cast<std::size_t>(id)]; }

}  // namespace mucalc
