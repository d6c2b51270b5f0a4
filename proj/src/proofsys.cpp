#include "mucalc/proofsys.hpp"

#include "mucalc/denotational.hpp"

#include <algorithm>
#include <array>
#include <functional>
#include <sstream>
#include <unordered_map>
#include <unordered_set>

namespace mucalc {

std::string label_name(Label l) { return "x" + std::to_string(l); }

std::set<Label> Sequent::labels() const {
  std::set<Label> out;
  for (const auto& a : rel) {
    out.insert(a.from);
    out.insert(a.to);
  }
  for (const auto& f : left) out.insert(f.label);
  for (const auto& f : right) out.insert(f.label);
  return out;
}

bool Sequent::includes(const Sequent& o) const {
  return std::includes(rel.begin(), rel.end(), o.rel.begin(), o.rel.end()) &&
         std::includes(left.begin(), left.end(), o.left.begin(), o.left.end()) &&
         std::includes(right.begin(), right.end(), o.right.begin(), o.right.end());
}

namespace {

struct RuleEntry {
  Rule rule;
  const char* name;
};

constexpr std::array<RuleEntry, 26> kRules{{
    {Rule::BotL, "botl"},        {Rule::Id, "id"},           {Rule::IdDiaN, "id-dia-n"},
    {Rule::PrePres, "pre-pres"}, {Rule::PreTrans, "pre-trans"}, {Rule::AndL, "and-l"},
    {Rule::AndR, "and-r"},       {Rule::OrL, "or-l"},        {Rule::OrR, "or-r"},
    {Rule::ImpL, "imp-l"},       {Rule::ImpR, "imp-r"},      {Rule::BoxL, "box-l"},
    {Rule::BoxR, "box-r"},       {Rule::DiaL, "dia-l"},      {Rule::DiaR, "dia-r"},
    {Rule::LocalDiaR, "ldia-r"}, {Rule::FixL, "eta-l"},      {Rule::FixR, "eta-r"},
    {Rule::RegenL, "regen-l"},   {Rule::RegenR, "regen-r"},  {Rule::BotRel, "bot-rel"},
    {Rule::Fwd, "fwd"},          {Rule::Bwd, "bwd"},         {Rule::Lin, "lin"},
    {Rule::Weaken, "wk"},        {Rule::Cycle, "cycle"},
}};

const char* side_tag(Side s) { return s == Side::Left ? "L" : "R"; }

}  // namespace

const char* rule_name(Rule r) {
  for (const auto& e : kRules)
    if (e.rule == r) return e.name;
  return "?";
}

std::optional<Rule> rule_from_name(std::string_view name) {
  for (const auto& e : kRules)
    if (name == e.name) return e.rule;
  return std::nullopt;
}

bool rule_in_variant(Rule r, LogicVariant v) {
  switch (r) {
    case Rule::IdDiaN:
    case Rule::Fwd:
    case Rule::Bwd: return v != LogicVariant::CK;
    case Rule::Lin: return v == LogicVariant::GK;
    default: return true;
  }
}

bool is_axiom_rule(Rule r) { return r == Rule::BotL || r == Rule::Id || r == Rule::IdDiaN; }

// ---------------------------------------------------------------------------
// Rules

namespace {

std::string describe(const ClosureIndex& c, const SidedFormula& f) {
  return label_name(f.label) + ":" + c.label(f.formula) + " in " + (f.side == Side::Left ? "Γ" : "Δ");
}

std::string describe(RelAtom a) {
  return label_name(a.from) + (a.type == RelAtom::Type::Pre ? "<=" : "R") + label_name(a.to);
}

class RuleApplier {
 public:
  RuleApplier(const ClosureIndex& c, const Sequent& s, const RuleInstance& r) : c_(c), s_(s), r_(r) {}

  std::vector<Sequent> run() {
    switch (r_.rule) {
      case Rule::Id: {
        auto p = principal(Side::Left, {Kind::Prop});
        if (!s_.right.count(p)) missing("id needs " + label_name(p.label) + ":" + c_.label(p.formula) + " in Δ");
        return {};
      }
      case Rule::BotL: {
        auto p = principal(Side::Left, {Kind::Bottom});
        for (const auto& f : s_.right)
          if (f.label == p.label && (c_.kind(f.formula) == Kind::Prop || c_.kind(f.formula) == Kind::Bottom))
            return {};
        missing("botl needs an atom at " + label_name(p.label) + " in Δ");
      }
      case Rule::IdDiaN: principal(Side::Left, {Kind::Bottom}); return {};
      case Rule::PrePres: {
        auto p = principal(Side::Left, {});
        auto a = atom(0, RelAtom::Type::Pre);
        if (a.from != p.label) malformed("pre-pres: relational premise does not start at the principal label");
        return {with_left(s_, {a.to, p.formula})};
      }
      case Rule::PreTrans: {
        auto a = atom(0, RelAtom::Type::Pre);
        auto b = atom(1, RelAtom::Type::Pre);
        if (a.to != b.from) malformed("pre-trans: atoms do not compose");
        Sequent out = s_;
        out.rel.insert(RelAtom::pre(a.from, b.to));
        return {out};
      }
      case Rule::AndL: {
        auto p = principal(Side::Left, {Kind::And});
        Sequent out = s_;
        out.left.insert({p.label, c_.left(p.formula)});
        out.left.insert({p.label, c_.right(p.formula)});
        return {out};
      }
      case Rule::AndR: {
        auto p = principal(Side::Right, {Kind::And});
        return {with_right(s_, {p.label, c_.left(p.formula)}), with_right(s_, {p.label, c_.right(p.formula)})};
      }
      case Rule::OrL: {
        auto p = principal(Side::Left, {Kind::Or});
        return {with_left(s_, {p.label, c_.left(p.formula)}), with_left(s_, {p.label, c_.right(p.formula)})};
      }
      case Rule::OrR: {
        auto p = principal(Side::Right, {Kind::Or});
        Sequent out = s_;
        out.right.insert({p.label, c_.left(p.formula)});
        out.right.insert({p.label, c_.right(p.formula)});
        return {out};
      }
      case Rule::ImpL: {
        auto p = principal(Side::Left, {Kind::Implies});
        return {with_right(s_, {p.label, c_.left(p.formula)}), with_left(s_, {p.label, c_.right(p.formula)})};
      }
      case Rule::ImpR: {
        auto p = principal(Side::Right, {Kind::Implies});
        Label y = fresh(1)[0];
        Sequent out = s_;
        out.rel.insert(RelAtom::pre(p.label, y));
        out.left.insert({y, c_.left(p.formula)});
        out.right.insert({y, c_.right(p.formula)});
        return {out};
      }
      case Rule::BoxL: {
        auto p = principal(Side::Left, {Kind::Box});
        Sequent out = s_;
        for (const auto& a : s_.rel)
          if (a.type == RelAtom::Type::Rel && a.from == p.label) out.left.insert({a.to, c_.left(p.formula)});
        return {out};
      }
      case Rule::BoxR: {
        auto p = principal(Side::Right, {Kind::Box});
        auto yz = fresh(2);
        Sequent out = s_;
        out.rel.insert(RelAtom::pre(p.label, yz[0]));
        out.rel.insert(RelAtom::rel(yz[0], yz[1]));
        out.right.insert({yz[1], c_.left(p.formula)});
        return {out};
      }
      case Rule::DiaL: {
        auto p = principal(Side::Left, {Kind::Dia});
        Label y = fresh(1)[0];
        Sequent out = s_;
        out.rel.insert(RelAtom::rel(p.label, y));
        out.left.insert({y, c_.left(p.formula)});
        return {out};
      }
      case Rule::DiaR: {
        auto p = principal(Side::Right, {Kind::Dia});
        Label y = fresh(1)[0];
        Sequent out = s_;
        out.rel.insert(RelAtom::pre(p.label, y));
        out.right.insert({y, c_.companion(p.formula)});
        return {out};
      }
      case Rule::LocalDiaR: {
        auto p = principal(Side::Right, {Kind::LocalDia});
        Sequent out = s_;
        for (const auto& a : s_.rel)
          if (a.type == RelAtom::Type::Rel && a.from == p.label) out.right.insert({a.to, c_.left(p.formula)});
        return {out};
      }
      case Rule::FixL:
      case Rule::FixR: {
        Side side = r_.rule == Rule::FixL ? Side::Left : Side::Right;
        auto p = principal(side, {Kind::Mu, Kind::Nu});
        Sequent out = s_;
        out.side(side).insert({p.label, c_.binder_of(p.formula)});
        return {out};
      }
      case Rule::RegenL:
      case Rule::RegenR: {
        Side side = r_.rule == Rule::RegenL ? Side::Left : Side::Right;
        auto p = principal(side, {Kind::Var});
        Sequent out = s_;
        out.side(side).insert({p.label, c_.binder_of(p.formula)});
        return {out};
      }
      case Rule::BotRel: {
        auto p = principal(Side::Left, {Kind::Bottom});
        auto a = atom(0, RelAtom::Type::Rel);
        if (a.from != p.label) malformed("bot-rel: relational premise does not start at the principal label");
        return {with_left(s_, {a.to, p.formula})};
      }
      case Rule::Fwd: {
        auto a = atom(0, RelAtom::Type::Pre);  // x ⪯ x'
        auto b = atom(1, RelAtom::Type::Rel);  // x R y
        if (a.from != b.from) malformed("fwd: atoms must share their source");
        Label y2 = fresh(1)[0];
        Sequent out = s_;
        out.rel.insert(RelAtom::rel(a.to, y2));
        out.rel.insert(RelAtom::pre(b.to, y2));
        return {out};
      }
      case Rule::Bwd: {
        auto a = atom(0, RelAtom::Type::Rel);  // x R y
        auto b = atom(1, RelAtom::Type::Pre);  // y ⪯ y'
        if (a.to != b.from) malformed("bwd: atoms do not compose");
        Label x2 = fresh(1)[0];
        Sequent out = s_;
        out.rel.insert(RelAtom::pre(a.from, x2));
        out.rel.insert(RelAtom::rel(x2, b.to));
        return {out};
      }
      case Rule::Lin: {
        auto a = atom(0, RelAtom::Type::Pre);
        auto b = atom(1, RelAtom::Type::Pre);
        if (a.from != b.from) malformed("lin: atoms must share their source");
        Sequent one = s_, two = s_;
        one.rel.insert(RelAtom::pre(a.to, b.to));
        two.rel.insert(RelAtom::pre(b.to, a.to));
        return {one, two};
      }
      case Rule::Weaken:
        if (!r_.weakened || !s_.includes(*r_.weakened)) malformed("wk: premise is not a sub-sequent");
        return {*r_.weakened};
      case Rule::Cycle: malformed("cycle is not an inference rule");
    }
    malformed("unknown rule");
  }

 private:
  [[noreturn]] void missing(const std::string& msg) const {
    throw RuleError(RuleError::Code::PrincipalMissing, msg);
  }
  [[noreturn]] void malformed(const std::string& msg) const { throw RuleError(RuleError::Code::Malformed, msg); }

  LabeledFormula principal(Side side, std::initializer_list<Kind> kinds) const {
    if (!r_.principal) missing(std::string(rule_name(r_.rule)) + ": no principal formula");
    const auto& p = *r_.principal;
    if (p.side != side) missing(std::string(rule_name(r_.rule)) + ": principal on the wrong side");
    if (p.formula < 0 || p.formula >= c_.size()) malformed("principal formula outside the closure");
    if (kinds.size() && std::find(kinds.begin(), kinds.end(), c_.kind(p.formula)) == kinds.end())
      missing(std::string(rule_name(r_.rule)) + ": principal has the wrong shape: " + c_.label(p.formula));
    if (!s_.contains(p)) missing(std::string(rule_name(r_.rule)) + ": principal not in sequent: " + describe(c_, p));
    return {p.label, p.formula};
  }

  RelAtom atom(std::size_t i, RelAtom::Type type) const {
    if (r_.relational.size() <= i) malformed(std::string(rule_name(r_.rule)) + ": missing relational premise");
    const RelAtom& a = r_.relational[i];
    if (a.type != type) malformed(std::string(rule_name(r_.rule)) + ": relational premise of the wrong kind");
    if (!s_.has(a)) missing(std::string(rule_name(r_.rule)) + ": relational premise not in sequent: " + describe(a));
    return a;
  }

  std::vector<Label> fresh(std::size_t k) const {
    if (r_.eigen.size() != k) malformed(std::string(rule_name(r_.rule)) + ": wrong number of eigenvariables");
    auto used = s_.labels();
    std::set<Label> seen;
    for (Label l : r_.eigen)
      if (used.count(l) || !seen.insert(l).second)
        throw RuleError(RuleError::Code::FreshnessViolation,
                        std::string(rule_name(r_.rule)) + ": eigenvariable " + label_name(l) + " is not fresh");
    return r_.eigen;
  }

  static Sequent with_left(Sequent s, LabeledFormula f) {
    s.left.insert(f);
    return s;
  }
  static Sequent with_right(Sequent s, LabeledFormula f) {
    s.right.insert(f);
    return s;
  }

  const ClosureIndex& c_;
  const Sequent& s_;
  const RuleInstance& r_;
};

}  // namespace

std::vector<Sequent> apply_rule(const ClosureIndex& c, const Sequent& s, const RuleInstance& r,
                                LogicVariant variant) {
  if (!rule_in_variant(r.rule, variant))
    throw RuleError(RuleError::Code::RuleNotInVariant,
                    std::string(rule_name(r.rule)) + " is not a rule of " + variant_name(variant));
  return RuleApplier(c, s, r).run();
}

std::optional<RuleInstance> find_axiom(const ClosureIndex& c, const Sequent& s, LogicVariant variant) {
  for (const auto& f : s.left) {
    Kind k = c.kind(f.formula);
    if (k == Kind::Prop && s.right.count(f))
      return RuleInstance{Rule::Id, SidedFormula{Side::Left, f.label, f.formula}, {}, {}, {}};
    if (k != Kind::Bottom) continue;
    if (variant != LogicVariant::CK)
      return RuleInstance{Rule::IdDiaN, SidedFormula{Side::Left, f.label, f.formula}, {}, {}, {}};
    auto it = s.right.lower_bound({f.label, -1});
    for (; it != s.right.end() && it->label == f.label; ++it) {
      Kind rk = c.kind(it->formula);
      if (rk == Kind::Prop || rk == Kind::Bottom)
        return RuleInstance{Rule::BotL, SidedFormula{Side::Left, f.label, f.formula}, {}, {}, {}};
    }
  }
  return std::nullopt;
}

// ---------------------------------------------------------------------------
// Saturation

namespace {

struct Adjacency {
  std::map<Label, std::vector<Label>> pre_out, rel_out, rel_in;
  explicit Adjacency(const Sequent& s) {
    for (const auto& a : s.rel) {
      if (a.type == RelAtom::Type::Pre) {
        pre_out[a.from].push_back(a.to);
      } else {
        rel_out[a.from].push_back(a.to);
        rel_in[a.to].push_back(a.from);
      }
    }
  }
  static const std::vector<Label>& get(const std::map<Label, std::vector<Label>>& m, Label l) {
    static const std::vector<Label> none;
    auto it = m.find(l);
    return it == m.end() ? none : it->second;
  }
  const std::vector<Label>& pre(Label l) const { return get(pre_out, l); }
  const std::vector<Label>& rel(Label l) const { return get(rel_out, l); }
  const std::vector<Label>& rel_from(Label l) const { return get(rel_in, l); }
};

RuleInstance instance(Rule r, Side side, LabeledFormula f) {
  RuleInstance out;
  out.rule = r;
  out.principal = SidedFormula{side, f.label, f.formula};
  return out;
}

}  // namespace

std::vector<SaturationWitness> is_saturated(const ClosureIndex& c, const Sequent& s, LogicVariant variant) {
  std::vector<SaturationWitness> out;
  Adjacency adj(s);
  auto in_left = [&](Label l, int f) { return s.left.count({l, f}) > 0; };
  auto in_right = [&](Label l, int f) { return s.right.count({l, f}) > 0; };
  auto pre_or_same = [&](Label x, Label y) { return x == y || s.has(RelAtom::pre(x, y)); };
  auto add = [&](int clause, std::string what, RuleInstance fix) {
    out.push_back({clause, "clause " + std::to_string(clause) + ": " + std::move(what), std::move(fix)});
  };

  // 1: ⪯-transitivity; 19-22: the extra structural rules.
  for (const auto& a : s.rel) {
    if (a.type == RelAtom::Type::Pre) {
      for (Label z : adj.pre(a.to))
        if (!s.has(RelAtom::pre(a.from, z)) && a.from != a.to && a.to != z) {
          RuleInstance r;
          r.rule = Rule::PreTrans;
          r.relational = {a, RelAtom::pre(a.to, z)};
          add(1, describe(a) + ", " + describe(RelAtom::pre(a.to, z)), r);
        }
    }
  }
  // 3: ⪯-pres
  for (const auto& f : s.left)
    for (Label y : adj.pre(f.label))
      if (!in_left(y, f.formula)) {
        RuleInstance r = instance(Rule::PrePres, Side::Left, f);
        r.relational = {RelAtom::pre(f.label, y)};
        add(3, describe(c, {Side::Left, f.label, f.formula}) + " with " + describe(r.relational[0]), r);
      }
  for (const auto& f : s.left) {
    const int phi = f.formula;
    const Label x = f.label;
    const SidedFormula sf{Side::Left, x, phi};
    switch (c.kind(phi)) {
      case Kind::And:
        if (!in_left(x, c.left(phi)) || !in_left(x, c.right(phi)))
          add(4, describe(c, sf), instance(Rule::AndL, Side::Left, f));
        break;
      case Kind::Or:
        if (!in_left(x, c.left(phi)) && !in_left(x, c.right(phi)))
          add(6, describe(c, sf), instance(Rule::OrL, Side::Left, f));
        break;
      case Kind::Implies:
        if (!in_right(x, c.left(phi)) && !in_left(x, c.right(phi)))
          add(8, describe(c, sf), instance(Rule::ImpL, Side::Left, f));
        break;
      case Kind::Box:
        for (Label y : adj.rel(x))
          if (!in_left(y, c.left(phi))) {
            add(10, describe(c, sf) + " with " + describe(RelAtom::rel(x, y)), instance(Rule::BoxL, Side::Left, f));
            break;
          }
        break;
      case Kind::Dia: {
        bool ok = false;
        for (Label y : adj.rel(x)) ok = ok || in_left(y, c.left(phi));
        if (!ok) add(12, describe(c, sf), instance(Rule::DiaL, Side::Left, f));
        break;
      }
      case Kind::Mu:
      case Kind::Nu:
        if (!in_left(x, c.binder_of(phi))) add(15, describe(c, sf), instance(Rule::FixL, Side::Left, f));
        break;
      case Kind::Var:
        if (!in_left(x, c.binder_of(phi))) add(17, describe(c, sf), instance(Rule::RegenL, Side::Left, f));
        break;
      case Kind::Bottom:
        for (Label y : adj.rel(x))
          if (!in_left(y, phi)) {
            RuleInstance r = instance(Rule::BotRel, Side::Left, f);
            r.relational = {RelAtom::rel(x, y)};
            add(19, describe(c, sf) + " with " + describe(r.relational[0]), r);
          }
        break;
      default: break;
    }
  }
  for (const auto& f : s.right) {
    const int phi = f.formula;
    const Label x = f.label;
    const SidedFormula sf{Side::Right, x, phi};
    switch (c.kind(phi)) {
      case Kind::And:
        if (!in_right(x, c.left(phi)) && !in_right(x, c.right(phi)))
          add(5, describe(c, sf), instance(Rule::AndR, Side::Right, f));
        break;
      case Kind::Or:
        if (!in_right(x, c.left(phi)) || !in_right(x, c.right(phi)))
          add(7, describe(c, sf), instance(Rule::OrR, Side::Right, f));
        break;
      case Kind::Implies: {
        bool ok = in_left(x, c.left(phi)) && in_right(x, c.right(phi));
        for (Label y : adj.pre(x)) ok = ok || (in_left(y, c.left(phi)) && in_right(y, c.right(phi)));
        if (!ok) add(9, describe(c, sf), instance(Rule::ImpR, Side::Right, f));
        break;
      }
      case Kind::Box: {
        bool ok = false;
        std::vector<Label> ys = adj.pre(x);
        ys.push_back(x);
        for (Label y : ys)
          for (Label z : adj.rel(y)) ok = ok || in_right(z, c.left(phi));
        if (!ok) add(11, describe(c, sf), instance(Rule::BoxR, Side::Right, f));
        break;
      }
      case Kind::Dia: {
        bool ok = in_right(x, c.companion(phi));
        for (Label y : adj.pre(x)) ok = ok || in_right(y, c.companion(phi));
        if (!ok) add(13, describe(c, sf), instance(Rule::DiaR, Side::Right, f));
        break;
      }
      case Kind::LocalDia:
        for (Label y : adj.rel(x))
          if (!in_right(y, c.left(phi))) {
            add(14, describe(c, sf) + " with " + describe(RelAtom::rel(x, y)),
                instance(Rule::LocalDiaR, Side::Right, f));
            break;
          }
        break;
      case Kind::Mu:
      case Kind::Nu:
        if (!in_right(x, c.binder_of(phi))) add(16, describe(c, sf), instance(Rule::FixR, Side::Right, f));
        break;
      case Kind::Var:
        if (!in_right(x, c.binder_of(phi))) add(18, describe(c, sf), instance(Rule::RegenR, Side::Right, f));
        break;
      default: break;
    }
  }
  if (variant == LogicVariant::CK) return out;

  for (const auto& a : s.rel) {
    if (a.type != RelAtom::Type::Pre || a.from == a.to) continue;
    const Label x = a.from, x2 = a.to;
    // 20: x ⪯ x', xRy needs x'Ry' with y ⪯ y'.
    for (Label y : adj.rel(x)) {
      bool ok = false;
      for (Label y2 : adj.rel(x2)) ok = ok || pre_or_same(y, y2);
      if (!ok) {
        RuleInstance r;
        r.rule = Rule::Fwd;
        r.relational = {a, RelAtom::rel(x, y)};
        add(20, describe(a) + ", " + describe(RelAtom::rel(x, y)), r);
      }
    }
    // 21: yRx, x ⪯ x' needs y ⪯ y' with y'Rx'.
    for (Label y : adj.rel_from(x)) {
      bool ok = false;
      for (Label y2 : adj.rel_from(x2)) ok = ok || pre_or_same(y, y2);
      if (!ok) {
        RuleInstance r;
        r.rule = Rule::Bwd;
        r.relational = {RelAtom::rel(y, x), a};
        add(21, describe(RelAtom::rel(y, x)) + ", " + describe(a), r);
      }
    }
    // 22: x ⪯ y, x ⪯ z needs y ⪯ z or z ⪯ y.
    if (variant == LogicVariant::GK)
      for (Label z : adj.pre(x))
        if (z != x && z > x2 && !s.has(RelAtom::pre(x2, z)) && !s.has(RelAtom::pre(z, x2))) {
          RuleInstance r;
          r.rule = Rule::Lin;
          r.relational = {a, RelAtom::pre(x, z)};
          add(22, describe(a) + ", " + describe(RelAtom::pre(x, z)), r);
        }
  }
  return out;
}

// ---------------------------------------------------------------------------
// Traces

int regeneration_priority(const ClosureIndex& c, int var_formula, Side side) {
  const int n = c.fixpoint_count();
  const int i = c.fixpoint_rank(var_formula);
  const bool nu = c.kind(c.binder_of(var_formula)) == Kind::Nu;
  const bool good = nu == (side == Side::Right);
  return good ? 2 * (n - i) : 2 * (n - i) - 1;
}

std::vector<TraceLink> trace_links(const ClosureIndex& c, const Sequent& conclusion, const RuleInstance& r,
                                   const Sequent& premise) {
  std::vector<TraceLink> out;
  for (Side side : {Side::Left, Side::Right})
    for (const auto& f : conclusion.side(side)) {
      SidedFormula sf{side, f.label, f.formula};
      if (!premise.contains(sf)) {
        if (r.rule == Rule::Weaken) continue;
        throw MalformedTraceMap("premise drops " + describe(c, sf));
      }
      out.push_back({sf, sf, 0});
    }
  if (!r.principal || is_axiom_rule(r.rule) || r.rule == Rule::Weaken || r.rule == Rule::Cycle) return out;
  const SidedFormula p = *r.principal;
  auto link = [&](SidedFormula to, int prio = 0) {
    if (premise.contains(to) && !(to == p)) out.push_back({p, to, prio});
  };
  const int phi = p.formula;
  switch (r.rule) {
    case Rule::PrePres:
    case Rule::BotRel:
      for (const auto& a : r.relational) link({Side::Left, a.to, phi});
      break;
    case Rule::AndL:
    case Rule::AndR:
    case Rule::OrL:
    case Rule::OrR:
      link({p.side, p.label, c.left(phi)});
      link({p.side, p.label, c.right(phi)});
      break;
    case Rule::ImpL:
      link({Side::Right, p.label, c.left(phi)});
      link({Side::Left, p.label, c.right(phi)});
      break;
    case Rule::ImpR:
      for (Label y : r.eigen) {
        link({Side::Left, y, c.left(phi)});
        link({Side::Right, y, c.right(phi)});
      }
      break;
    case Rule::BoxL:
    case Rule::LocalDiaR:
      for (const auto& a : premise.rel)
        if (a.type == RelAtom::Type::Rel && a.from == p.label) link({p.side, a.to, c.left(phi)});
      break;
    case Rule::BoxR:
    case Rule::DiaL:
      if (!r.eigen.empty()) link({p.side, r.eigen.back(), c.left(phi)});
      break;
    case Rule::DiaR:
      if (!r.eigen.empty()) link({Side::Right, r.eigen.back(), c.companion(phi)});
      break;
    case Rule::FixL:
    case Rule::FixR: link({p.side, p.label, c.binder_of(phi)}); break;
    case Rule::RegenL:
    case Rule::RegenR:
      link({p.side, p.label, c.binder_of(phi)}, regeneration_priority(c, phi, p.side));
      break;
    default: break;
  }
  return out;
}

std::vector<TraceLink> back_edge_links(const Sequent& companion, const Sequent& bud,
                                       const std::map<Label, Label>& renaming) {
  std::vector<TraceLink> out;
  for (Side side : {Side::Left, Side::Right})
    for (const auto& f : companion.side(side)) {
      auto it = renaming.find(f.label);
      if (it == renaming.end()) throw MalformedTraceMap("renaming misses " + label_name(f.label));
      SidedFormula from{side, it->second, f.formula};
      if (!bud.contains(from))
        throw MalformedTraceMap("bud lacks the image of " + label_name(f.label) + " on side " + side_tag(side));
      out.push_back({from, {side, f.label, f.formula}, 0});
    }
  return out;
}

// ---------------------------------------------------------------------------
// Progress

namespace {

// Parity reward order: larger even is better, smaller odd is better, and
// every even beats every odd. Max-composition is monotone in it.
int reward(int p) { return p % 2 == 0 ? p : -p; }
int better(int a, int b) { return reward(a) >= reward(b) ? a : b; }

using StateId = int;

struct Summary {
  int from;                                     // companion node
  int to;                                       // companion node
  std::vector<std::tuple<StateId, StateId, int>> entries;  // sorted
  std::vector<int> path;                        // graph nodes, from..to inclusive
  bool operator==(const Summary& o) const { return from == o.from && to == o.to && entries == o.entries; }
};

struct SummaryHash {
  std::size_t operator()(const Summary& s) const {
    std::size_t h = std::hash<int>()(s.from) * 31 + std::hash<int>()(s.to);
    for (const auto& [a, b, p] : s.entries) h = h * 1000003u ^ (std::size_t(a) * 92821u + std::size_t(b) * 31u + p);
    return h;
  }
};

class ProgressChecker {
 public:
  explicit ProgressChecker(const ProofGraph& g) : g_(g) {}

  ProgressResult run() {
    const std::size_t n = g_.nodes.size();
    for (std::size_t i = 0; i < n; ++i) {
      const auto& node = g_.nodes[i];
      if (node.traces.size() != node.premises.size())
        throw MalformedTraceMap("node " + std::to_string(i) + ": one trace map per premise edge required");
      for (int p : node.premises)
        if (p < 0 || static_cast<std::size_t>(p) >= n)
          throw MalformedTraceMap("node " + std::to_string(i) + ": premise out of range");
    }
    if (g_.root < 0 || static_cast<std::size_t>(g_.root) >= n) throw MalformedTraceMap("root out of range");
    // Only the part reachable from the root matters.
    std::vector<bool> reach(n, false);
    std::vector<int> stack{g_.root};
    reach[static_cast<std::size_t>(g_.root)] = true;
    while (!stack.empty()) {
      const auto& node = g_.nodes[static_cast<std::size_t>(stack.back())];
      stack.pop_back();
      if (node.is_bud()) {
        if (node.premises.size() != 1) throw MalformedTraceMap("bud must have exactly one companion");
        companions_.insert(node.premises[0]);
      }
      for (int p : node.premises)
        if (!reach[static_cast<std::size_t>(p)]) {
          reach[static_cast<std::size_t>(p)] = true;
          stack.push_back(p);
        }
    }
    check_acyclic_without_back_edges();
    std::vector<Summary> base;
    for (int c : companions_) segments(c, base);

    std::unordered_set<Summary, SummaryHash> seen;
    std::vector<Summary> all;
    std::vector<std::size_t> work;
    auto push = [&](Summary s) {
      if (seen.count(s)) return;
      seen.insert(s);
      all.push_back(std::move(s));
      work.push_back(all.size() - 1);
    };
    for (auto& s : base) push(s);
    const std::size_t base_count = all.size();
    std::size_t processed = 0;
    while (processed < all.size()) {
      if (all.size() > kLimit) {
        ProgressResult r;
        r.accepted = false;
        r.reason = "summary closure exceeded " + std::to_string(kLimit) + " graphs";
        return r;
      }
      const std::size_t i = processed++;
      if (auto bad = bad_loop(all[i])) return *bad;
      // Compose with every base summary on both sides; the closure of
      // generators under right-multiplication reaches every product.
      for (std::size_t j = 0; j < base_count; ++j)
        if (all[i].to == all[j].from) push(compose(all[i], all[j]));
    }
    return {};
  }

 private:
  static constexpr std::size_t kLimit = 200000;

  StateId state(const SidedFormula& f) {
    auto [it, inserted] = ids_.emplace(f, static_cast<StateId>(ids_.size()));
    if (inserted) states_.push_back(f);
    return it->second;
  }

  void check_acyclic_without_back_edges() {
    const std::size_t n = g_.nodes.size();
    std::vector<int> color(n, 0);
    {
      const auto s = static_cast<std::size_t>(g_.root);
      std::vector<std::pair<int, std::size_t>> stack{{g_.root, 0}};
      color[s] = 1;
      while (!stack.empty()) {
        auto& [v, k] = stack.back();
        const auto& node = g_.nodes[static_cast<std::size_t>(v)];
        if (node.is_bud() || k >= node.premises.size()) {
          color[static_cast<std::size_t>(v)] = 2;
          stack.pop_back();
          continue;
        }
        int w = node.premises[k++];
        if (color[static_cast<std::size_t>(w)] == 1) throw MalformedTraceMap("cycle that does not pass a back-edge");
        if (color[static_cast<std::size_t>(w)] == 0) {
          color[static_cast<std::size_t>(w)] = 1;
          stack.push_back({w, 0});
        }
      }
    }
  }

  using Matrix = std::map<std::pair<StateId, StateId>, int>;

  static void merge(Matrix& m, std::pair<StateId, StateId> key, int p) {
    auto [it, inserted] = m.emplace(key, p);
    if (!inserted) it->second = better(it->second, p);
  }

  /// Summaries of every path from companion c to the next companion.
  void segments(int c, std::vector<Summary>& out) {
    Matrix id;
    const auto& start = g_.nodes[static_cast<std::size_t>(c)].sequent;
    for (Side side : {Side::Left, Side::Right})
      for (const auto& f : start.side(side)) {
        StateId s = state({side, f.label, f.formula});
        id[{s, s}] = 0;
      }
    std::vector<int> path{c};
    walk(c, c, id, path, out);
  }

  void walk(int c, int v, const Matrix& m, std::vector<int>& path, std::vector<Summary>& out) {
    const auto& node = g_.nodes[static_cast<std::size_t>(v)];
    for (std::size_t k = 0; k < node.premises.size(); ++k) {
      const int w = node.premises[k];
      std::map<StateId, std::vector<std::pair<StateId, int>>> step;
      for (const auto& l : node.traces[k]) {
        if (!node.sequent.contains(l.from))
          throw MalformedTraceMap("node " + std::to_string(v) + ": link source not in sequent");
        if (!g_.nodes[static_cast<std::size_t>(w)].sequent.contains(l.to))
          throw MalformedTraceMap("node " + std::to_string(v) + ": link target not in premise " + std::to_string(w));
        step[state(l.from)].push_back({state(l.to), l.priority});
      }
      Matrix next;
      for (const auto& [key, p] : m) {
        auto it = step.find(key.second);
        if (it == step.end()) continue;
        for (const auto& [t, q] : it->second) merge(next, {key.first, t}, std::max(p, q));
      }
      path.push_back(w);
      if (node.is_bud() || companions_.count(w)) {
        Summary s{c, w, {}, path};
        for (const auto& [key, p] : next) s.entries.emplace_back(key.first, key.second, p);
        out.push_back(std::move(s));
      } else {
        walk(c, w, next, path, out);
      }
      path.pop_back();
    }
  }

  static Summary compose(const Summary& a, const Summary& b) {
    std::map<StateId, std::vector<std::pair<StateId, int>>> rows;
    for (const auto& [x, y, p] : b.entries) rows[x].push_back({y, p});
    Matrix m;
    for (const auto& [x, y, p] : a.entries) {
      auto it = rows.find(y);
      if (it == rows.end()) continue;
      for (const auto& [z, q] : it->second) merge(m, {x, z}, std::max(p, q));
    }
    Summary s{a.from, b.to, {}, a.path};
    s.path.insert(s.path.end(), b.path.begin() + 1, b.path.end());
    for (const auto& [key, p] : m) s.entries.emplace_back(key.first, key.second, p);
    return s;
  }

  std::optional<ProgressResult> bad_loop(const Summary& s) {
    if (s.from != s.to) return std::nullopt;
    if (!(compose(s, s) == s)) return std::nullopt;
    for (const auto& [x, y, p] : s.entries)
      if (x == y && p > 0 && p % 2 == 0) return std::nullopt;
    ProgressResult r;
    r.accepted = false;
    r.loop = s.path;
    r.stem = stem_to(s.from);
    r.reason = "cycle through node " + std::to_string(s.from) + " has no progressing trace";
    return r;
  }

  std::vector<int> stem_to(int target) const {
    std::vector<int> parent(g_.nodes.size(), -2);
    std::vector<int> queue{g_.root};
    parent[static_cast<std::size_t>(g_.root)] = -1;
    for (std::size_t i = 0; i < queue.size(); ++i) {
      int v = queue[i];
      if (v == target) break;
      const auto& node = g_.nodes[static_cast<std::size_t>(v)];
      if (node.is_bud()) continue;
      for (int w : node.premises)
        if (parent[static_cast<std::size_t>(w)] == -2) {
          parent[static_cast<std::size_t>(w)] = v;
          queue.push_back(w);
        }
    }
    std::vector<int> out;
    if (parent[static_cast<std::size_t>(target)] == -2) return out;
    for (int v = target; v != -1; v = parent[static_cast<std::size_t>(v)]) out.push_back(v);
    std::reverse(out.begin(), out.end());
    return out;
  }

  const ProofGraph& g_;
  std::set<int> companions_;
  std::map<SidedFormula, StateId> ids_;
  std::vector<SidedFormula> states_;
};

}  // namespace

ProgressResult check_progress(const ProofGraph& g) { return ProgressChecker(g).run(); }

// ---------------------------------------------------------------------------
// Structural check

void check_proof(const ProofGraph& g) {
  if (!g.closure) throw MalformedProof("proof has no closure index");
  const auto& c = *g.closure;
  const std::size_t n = g.nodes.size();
  if (g.root < 0 || static_cast<std::size_t>(g.root) >= n) throw MalformedProof("root out of range");
  const auto& root = g.nodes[static_cast<std::size_t>(g.root)].sequent;
  if (!root.rel.empty() || !root.left.empty() || root.right.size() != 1 || root.right.begin()->formula != c.root())
    throw MalformedProof("root is not ⊢ x:φ for the goal φ");

  // Parents along forward edges, for the ancestor condition on back-edges.
  std::vector<std::vector<int>> parents(n);
  for (std::size_t i = 0; i < n; ++i) {
    const auto& node = g.nodes[i];
    if (node.is_bud()) continue;
    for (int p : node.premises) {
      if (p < 0 || static_cast<std::size_t>(p) >= n) throw MalformedProof("premise out of range at node " + std::to_string(i));
      parents[static_cast<std::size_t>(p)].push_back(static_cast<int>(i));
    }
  }
  auto is_ancestor = [&](int a, int v) {
    std::vector<int> stack{v};
    std::set<int> seen;
    while (!stack.empty()) {
      int x = stack.back();
      stack.pop_back();
      if (x == a) return true;
      if (!seen.insert(x).second) continue;
      for (int p : parents[static_cast<std::size_t>(x)]) stack.push_back(p);
    }
    return false;
  };

  for (std::size_t i = 0; i < n; ++i) {
    const auto& node = g.nodes[i];
    const std::string at = "node " + std::to_string(i) + ": ";
    if (node.is_bud()) {
      if (node.premises.size() != 1) throw MalformedProof(at + "bud needs exactly one companion");
      const int comp = node.premises[0];
      if (comp < 0 || static_cast<std::size_t>(comp) >= n) throw MalformedProof(at + "companion out of range");
      if (!is_ancestor(comp, static_cast<int>(i))) throw MalformedProof(at + "companion is not an ancestor");
      const auto& cs = g.nodes[static_cast<std::size_t>(comp)].sequent;
      Sequent image;
      auto map = [&](Label l) {
        auto it = node.renaming.find(l);
        if (it == node.renaming.end()) throw MalformedProof(at + "renaming misses " + label_name(l));
        return it->second;
      };
      for (const auto& a : cs.rel) image.rel.insert({a.type, map(a.from), map(a.to)});
      for (const auto& f : cs.left) image.left.insert({map(f.label), f.formula});
      for (const auto& f : cs.right) image.right.insert({map(f.label), f.formula});
      if (!node.sequent.includes(image)) throw MalformedProof(at + "bud does not contain the renamed companion");
      continue;
    }
    std::vector<Sequent> premises;
    try {
      premises = apply_rule(c, node.sequent, node.rule, g.variant);
    } catch (const RuleError& e) {
      throw MalformedProof(at + e.what());
    }
    if (premises.size() != node.premises.size())
      throw MalformedProof(at + "rule yields " + std::to_string(premises.size()) + " premises, graph has " +
                           std::to_string(node.premises.size()));
    for (std::size_t k = 0; k < premises.size(); ++k)
      if (!(premises[k] == g.nodes[static_cast<std::size_t>(node.premises[k])].sequent))
        throw MalformedProof(at + "premise " + std::to_string(k) + " does not match the rule");
  }
  ProgressResult r;
  try {
    r = check_progress(g);
  } catch (const MalformedTraceMap& e) {
    throw MalformedProof(e.what());
  }
  if (!r.accepted) throw MalformedProof("not progressing: " + r.reason);
}

// ---------------------------------------------------------------------------
// Text format

namespace {

std::string join_labels(const std::vector<Label>& ls) {
  std::string out;
  for (std::size_t i = 0; i < ls.size(); ++i) out += (i ? "," : "") + label_name(ls[i]);
  return out;
}

std::string atom_text(RelAtom a) {
  return label_name(a.from) + (a.type == RelAtom::Type::Pre ? " <= " : " R ") + label_name(a.to);
}

}  // namespace

std::string sequent_to_text(const ClosureIndex& c, const Sequent& s) {
  std::string out;
  bool first = true;
  for (const auto& a : s.rel) {
    out += (first ? "" : "; ") + atom_text(a);
    first = false;
  }
  out += " | ";
  first = true;
  for (const auto& f : s.left) {
    out += (first ? "" : "; ") + label_name(f.label) + ":" + c.label(f.formula);
    first = false;
  }
  out += " ⊢ ";
  first = true;
  for (const auto& f : s.right) {
    out += (first ? "" : "; ") + label_name(f.label) + ":" + c.label(f.formula);
    first = false;
  }
  return out;
}

std::string proof_to_text(const ProofGraph& g) {
  const auto& c = *g.closure;
  std::ostringstream os;
  os << "goal: " << print(c.sentence().formula) << "\n";
  os << "logic: " << variant_name(g.variant) << "\n";
  os << "root: " << g.root << "\n";
  for (std::size_t i = 0; i < g.nodes.size(); ++i) {
    const auto& node = g.nodes[i];
    os << "node " << i << ": " << rule_name(node.rule.rule) << " principal=";
    if (node.rule.principal)
      os << label_name(node.rule.principal->label) << ":" << c.label(node.rule.principal->formula) << " side="
         << side_tag(node.rule.principal->side);
    else
      os << "-";
    if (!node.rule.relational.empty()) {
      os << " rel=";
      for (std::size_t k = 0; k < node.rule.relational.size(); ++k)
        os << (k ? "," : "") << describe(node.rule.relational[k]);
    }
    if (!node.rule.eigen.empty()) os << " fresh=" << join_labels(node.rule.eigen);
    if (node.is_bud()) {
      os << " map=";
      bool first = true;
      for (const auto& [a, b] : node.renaming) {
        os << (first ? "" : ",") << label_name(a) << "->" << label_name(b);
        first = false;
      }
    }
    os << " premises=[";
    for (std::size_t k = 0; k < node.premises.size(); ++k)
      os << (k ? "," : "") << (node.is_bud() ? "^" : "") << node.premises[k];
    os << "] seq=\"" << sequent_to_text(c, node.sequent) << "\"\n";
  }
  return os.str();
}

namespace {

std::vector<std::string> split(std::string_view s, std::string_view sep) {
  std::vector<std::string> out;
  std::size_t pos = 0;
  while (true) {
    auto next = s.find(sep, pos);
    out.emplace_back(s.substr(pos, next == std::string_view::npos ? std::string_view::npos : next - pos));
    if (next == std::string_view::npos) break;
    pos = next + sep.size();
  }
  return out;
}

std::string trim(std::string_view s) {
  auto b = s.find_first_not_of(' ');
  if (b == std::string_view::npos) return "";
  auto e = s.find_last_not_of(' ');
  return std::string(s.substr(b, e - b + 1));
}

Label parse_label(std::string_view t) {
  std::string s = trim(t);
  if (s.size() < 2 || s[0] != 'x' || s.find_first_not_of("0123456789", 1) != std::string::npos)
    throw MalformedProof("bad label '" + s + "'");
  return std::stoi(s.substr(1));
}

class ProofReader {
 public:
  ProofGraph read(const std::string& text) {
    std::istringstream is(text);
    std::string line;
    ProofGraph g;
    std::map<int, ProofNode> nodes;
    bool have_goal = false;
    while (std::getline(is, line)) {
      if (line.empty()) continue;
      if (line.rfind("goal: ", 0) == 0) {
        try {
          g.closure = std::make_shared<ClosureIndex>(analyze(parse(line.substr(6))));
        } catch (const std::exception& e) {
          throw MalformedProof(std::string("goal: ") + e.what());
        }
        for (int i = 0; i < g.closure->size(); ++i) ids_[g.closure->label(i)] = i;
        have_goal = true;
      } else if (line.rfind("logic: ", 0) == 0) {
        try {
          g.variant = parse_variant(line.substr(7));
        } catch (const std::exception& e) {
          throw MalformedProof(e.what());
        }
      } else if (line.rfind("root: ", 0) == 0) {
        g.root = std::stoi(line.substr(6));
      } else if (line.rfind("node ", 0) == 0) {
        if (!have_goal) throw MalformedProof("node before goal line");
        auto [id, node] = read_node(line);
        if (!nodes.emplace(id, std::move(node)).second) throw MalformedProof("duplicate node " + std::to_string(id));
      } else {
        throw MalformedProof("unrecognised line: " + line);
      }
    }
    if (!have_goal) throw MalformedProof("missing goal line");
    int expect = 0;
    for (auto& [id, node] : nodes) {
      if (id != expect++) throw MalformedProof("node ids must be 0..n-1");
      g.nodes.push_back(std::move(node));
    }
    // Trace maps are recomputed from the rules.
    for (std::size_t i = 0; i < g.nodes.size(); ++i) {
      auto& node = g.nodes[i];
      for (int p : node.premises)
        if (p < 0 || static_cast<std::size_t>(p) >= g.nodes.size())
          throw MalformedProof("node " + std::to_string(i) + ": premise out of range");
      try {
        for (int p : node.premises) {
          const auto& prem = g.nodes[static_cast<std::size_t>(p)].sequent;
          node.traces.push_back(node.is_bud() ? back_edge_links(prem, node.sequent, node.renaming)
                                              : trace_links(*g.closure, node.sequent, node.rule, prem));
        }
      } catch (const MalformedTraceMap& e) {
        throw MalformedProof("node " + std::to_string(i) + ": " + e.what());
      }
    }
    return g;
  }

 private:
  int formula_id(const std::string& text) const {
    auto it = ids_.find(text);
    if (it == ids_.end()) throw MalformedProof("formula not in the goal's closure: " + text);
    return it->second;
  }

  LabeledFormula labeled(std::string_view t) const {
    std::string s = trim(t);
    auto colon = s.find(':');
    if (colon == std::string::npos) throw MalformedProof("bad labeled formula '" + s + "'");
    return {parse_label(s.substr(0, colon)), formula_id(s.substr(colon + 1))};
  }

  static RelAtom atom(std::string_view t) {
    std::string s = trim(t);
    for (auto [sep, type] : {std::pair{std::string(" <= "), RelAtom::Type::Pre}, {" R ", RelAtom::Type::Rel},
                             {"<=", RelAtom::Type::Pre}, {"R", RelAtom::Type::Rel}}) {
      auto pos = s.find(sep, 1);
      if (pos != std::string::npos) return {type, parse_label(s.substr(0, pos)), parse_label(s.substr(pos + sep.size()))};
    }
    throw MalformedProof("bad relational atom '" + s + "'");
  }

  Sequent sequent(const std::string& text) const {
    auto turn = text.find("⊢");
    if (turn == std::string::npos) throw MalformedProof("sequent without ⊢");
    std::string lhs = text.substr(0, turn);
    std::string rhs = text.substr(turn + std::string("⊢").size());
    auto bar = lhs.find(" | ");
    if (bar == std::string::npos) throw MalformedProof("sequent without relational part");
    Sequent s;
    for (const auto& item : split(lhs.substr(0, bar), "; "))
      if (!trim(item).empty()) s.rel.insert(atom(item));
    for (const auto& item : split(lhs.substr(bar + 3), "; "))
      if (!trim(item).empty()) s.left.insert(labeled(item));
    for (const auto& item : split(rhs, "; "))
      if (!trim(item).empty()) s.right.insert(labeled(item));
    return s;
  }

  std::pair<int, ProofNode> read_node(const std::string& line) const {
    // node <id>: <rule> principal=... [side=..] [rel=..] [fresh=..] [map=..] premises=[..] seq="..."
    auto colon = line.find(':');
    auto seq_pos = line.find(" seq=\"");
    if (colon == std::string::npos || seq_pos == std::string::npos || line.back() != '"')
      throw MalformedProof("bad node line: " + line);
    ProofNode node;
    const int id = std::stoi(line.substr(5, colon - 5));
    node.sequent = sequent(line.substr(seq_pos + 6, line.size() - seq_pos - 7));
    std::string head = line.substr(colon + 2, seq_pos - colon - 2);
    auto prem_pos = head.find(" premises=[");
    if (prem_pos == std::string::npos) throw MalformedProof("node " + std::to_string(id) + ": missing premises");
    std::string prem = head.substr(prem_pos + 11);
    if (prem.empty() || prem.back() != ']') throw MalformedProof("node " + std::to_string(id) + ": bad premises");
    prem.pop_back();
    head = head.substr(0, prem_pos);

    auto rule_end = head.find(' ');
    auto rule = rule_from_name(head.substr(0, rule_end));
    if (!rule) throw MalformedProof("node " + std::to_string(id) + ": unknown rule " + head.substr(0, rule_end));
    node.rule.rule = *rule;

    // Field values never contain " side=", " rel=", " fresh=" or " map=";
    // the principal formula may contain spaces, so cut at the next key.
    std::map<std::string, std::string> fields;
    std::string rest = rule_end == std::string::npos ? "" : head.substr(rule_end + 1);
    const std::array<std::string, 5> keys{"principal=", "side=", "rel=", "fresh=", "map="};
    while (!rest.empty()) {
      std::string key;
      for (const auto& k : keys)
        if (rest.rfind(k, 0) == 0) key = k;
      if (key.empty()) throw MalformedProof("node " + std::to_string(id) + ": unexpected '" + rest + "'");
      std::size_t end = std::string::npos;
      for (const auto& k : keys) {
        auto pos = rest.find(" " + k, key.size());
        if (pos != std::string::npos) end = std::min(end, pos);
      }
      fields[key] = rest.substr(key.size(), end == std::string::npos ? std::string::npos : end - key.size());
      rest = end == std::string::npos ? "" : rest.substr(end + 1);
    }
    if (fields.count("principal=") && fields["principal="] != "-") {
      auto lf = labeled(fields["principal="]);
      Side side = fields["side="] == "L" ? Side::Left : Side::Right;
      if (fields["side="] != "L" && fields["side="] != "R")
        throw MalformedProof("node " + std::to_string(id) + ": principal needs side=L or side=R");
      node.rule.principal = SidedFormula{side, lf.label, lf.formula};
    }
    if (fields.count("rel="))
      for (const auto& a : split(fields["rel="], ",")) node.rule.relational.push_back(atom(a));
    if (fields.count("fresh="))
      for (const auto& l : split(fields["fresh="], ",")) node.rule.eigen.push_back(parse_label(l));
    if (fields.count("map="))
      for (const auto& pair : split(fields["map="], ",")) {
        auto arrow = pair.find("->");
        if (arrow == std::string::npos) throw MalformedProof("bad map entry " + pair);
        node.renaming[parse_label(pair.substr(0, arrow))] = parse_label(pair.substr(arrow + 2));
      }
    for (const auto& p : split(prem, ",")) {
      std::string t = trim(p);
      if (t.empty()) continue;
      if (t[0] == '^') {
        if (node.rule.rule != Rule::Cycle) throw MalformedProof("back-edge on a non-cycle node");
        t = t.substr(1);
      }
      node.premises.push_back(std::stoi(t));
    }
    if (node.rule.rule == Rule::Weaken) {
      if (node.premises.size() != 1) throw MalformedProof("wk needs one premise");
      weakened_.push_back({id, node.premises[0]});
    }
    return {id, std::move(node)};
  }

  std::map<std::string, int> ids_;
  mutable std::vector<std::pair<int, int>> weakened_;  // (wk node, premise)

 public:
  const std::vector<std::pair<int, int>>& weakened() const { return weakened_; }
};

}  // namespace

ProofGraph proof_from_text(const std::string& text) {
  ProofReader reader;
  ProofGraph g;
  try {
    g = reader.read(text);
  } catch (const MalformedProof&) {
    throw;
  } catch (const std::exception& e) {
    throw MalformedProof(e.what());
  }
  // wk premises are stored as the premise node's sequent.
  for (auto [id, premise] : reader.weakened())
    g.nodes[static_cast<std::size_t>(id)].rule.weakened = g.nodes[static_cast<std::size_t>(premise)].sequent;
  return g;
}

// ---------------------------------------------------------------------------
// Countermodels

Countermodel extract_countermodel(const ClosureIndex& c, const Sequent& s, Label root, LogicVariant variant,
                                  bool require_saturated) {
  if (require_saturated) {
    if (find_axiom(c, s, variant)) throw SequentNotSaturated("sequent is an axiom");
    auto w = is_saturated(c, s, variant);
    if (!w.empty()) throw SequentNotSaturated(w.front().description);
  }
  auto labels = s.labels();
  labels.insert(root);
  std::vector<std::string> names;
  std::map<Label, std::size_t> index;
  for (Label l : labels) {
    index[l] = names.size();
    names.push_back(label_name(l));
  }
  Model m = make_model(names);
  for (const auto& p : propositions(c.sentence().formula)) m.val[p] = WorldSet(m.size());
  for (const auto& a : s.rel) {
    auto& r = a.type == RelAtom::Type::Pre ? m.pre : m.rel;
    r.insert(index[a.from], index[a.to]);
  }
  for (const auto& f : s.left) {
    if (c.kind(f.formula) == Kind::Bottom) m.fallible.insert(index[f.label]);
    if (c.kind(f.formula) == Kind::Prop) m.val[c.formula(f.formula).name()].insert(index[f.label]);
  }
  try {
    m = close(m, CloseOptions::all(), variant);
  } catch (const ValidationFailed& e) {
    throw ExtractionUnsound(std::string("extracted structure is not a model: ") + e.what());
  }
  if (eval(m, c.sentence().formula).contains(index[root]))
    throw ExtractionUnsound("extracted model satisfies the goal at " + label_name(root));
  return {std::move(m), label_name(root)};
}

const char* verdict_name(Verdict::Kind k) {
  switch (k) {
    case Verdict::Kind::Proved: return "proved";
    case Verdict::Kind::Refuted: return "refuted";
    case Verdict::Kind::Unknown: return "unknown";
  }
  return "?";
}

}  // namespace mucalc
