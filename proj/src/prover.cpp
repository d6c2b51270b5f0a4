#include "mucalc/denotational.hpp"
#include "mucalc/game.hpp"
#include "mucalc/proofsys.hpp"

#include <algorithm>
#include <numeric>

namespace mucalc {

namespace {

int tier(Rule r) {
  switch (r) {
    case Rule::AndR:
    case Rule::OrL:
    case Rule::ImpL:
    case Rule::Lin: return 1;
    case Rule::ImpR:
    case Rule::BoxR:
    case Rule::DiaL:
    case Rule::DiaR:
    case Rule::Fwd:
    case Rule::Bwd: return 2;
    default: return 0;
  }
}

std::size_t eigen_count(Rule r) {
  switch (r) {
    case Rule::BoxR: return 2;
    case Rule::ImpR:
    case Rule::DiaL:
    case Rule::DiaR:
    case Rule::Fwd:
    case Rule::Bwd: return 1;
    default: return 0;
  }
}

using Content = std::set<std::pair<int, int>>;  // (side, formula)

std::map<Label, Content> contents(const Sequent& s) {
  std::map<Label, Content> out;
  for (const auto& f : s.left) out[f.label].insert({0, f.formula});
  for (const auto& f : s.right) out[f.label].insert({1, f.formula});
  return out;
}

Sequent rename(const Sequent& s, const std::function<Label(Label)>& f) {
  Sequent out;
  for (const auto& a : s.rel) out.rel.insert({a.type, f(a.from), f(a.to)});
  for (const auto& x : s.left) out.left.insert({f(x.label), x.formula});
  for (const auto& x : s.right) out.right.insert({f(x.label), x.formula});
  return out;
}

/// Maps f with f(u) = z and f(A) ⊆ S, by backtracking over labels of A.
class Embedder {
 public:
  Embedder(const Sequent& a, const Sequent& s, std::size_t limit) : a_(a), s_(s), limit_(limit) {
    ca_ = contents(a);
    cs_ = contents(s);
    for (Label l : s.labels()) s_labels_.push_back(l);
  }

  std::vector<std::map<Label, Label>> run(Label u, Label z) {
    // Labels of A in BFS order from u over atoms in either direction.
    auto all = a_.labels();
    std::vector<Label> order{u};
    std::set<Label> seen{u};
    for (std::size_t i = 0; i < order.size(); ++i)
      for (const auto& at : a_.rel) {
        Label next = at.from == order[i] ? at.to : at.to == order[i] ? at.from : order[i];
        if (next != order[i] && seen.insert(next).second) order.push_back(next);
      }
    for (Label l : all)
      if (seen.insert(l).second) order.push_back(l);
    order_ = order;
    if (!fits(u, z)) return {};
    f_[u] = z;
    search(1);
    return out_;
  }

 private:
  bool fits(Label l, Label c) const {
    auto it = ca_.find(l);
    if (it == ca_.end()) return true;
    auto jt = cs_.find(c);
    if (jt == cs_.end()) return it->second.empty();
    return std::includes(jt->second.begin(), jt->second.end(), it->second.begin(), it->second.end());
  }

  bool consistent(Label l, Label c) const {
    for (const auto& at : a_.rel) {
      Label from = at.from == l ? c : -1, to = at.to == l ? c : -1;
      if (from < 0 && to < 0) continue;
      if (from < 0) {
        auto it = f_.find(at.from);
        if (it == f_.end()) continue;
        from = it->second;
      }
      if (to < 0) {
        auto it = f_.find(at.to);
        if (it == f_.end()) continue;
        to = it->second;
      }
      if (!s_.has({at.type, from, to})) return false;
    }
    return true;
  }

  void search(std::size_t i) {
    if (out_.size() >= limit_) return;
    if (i == order_.size()) {
      out_.push_back(f_);
      return;
    }
    const Label l = order_[i];
    std::vector<Label> cands;
    if (std::binary_search(s_labels_.begin(), s_labels_.end(), l)) cands.push_back(l);
    for (Label c : s_labels_)
      if (c != l) cands.push_back(c);
    for (Label c : cands) {
      if (!fits(l, c) || !consistent(l, c)) continue;
      f_[l] = c;
      search(i + 1);
      f_.erase(l);
      if (out_.size() >= limit_) return;
    }
  }

  const Sequent& a_;
  const Sequent& s_;
  std::size_t limit_;
  std::map<Label, Content> ca_, cs_;
  std::vector<Label> s_labels_, order_;
  std::map<Label, Label> f_;
  std::vector<std::map<Label, Label>> out_;
};

class Search {
 public:
  Search(std::shared_ptr<const ClosureIndex> c, LogicVariant v, Budget b)
      : c_(std::move(c)), variant_(v), budget_(b) {
    graph_.closure = c_;
    graph_.variant = v;
  }

  Verdict run() {
    Sequent root;
    root.right.insert({0, c_->root()});
    next_label_ = 1;
    graph_.root = add_node(root);
    birth_[{Side::Right, 0, c_->root()}] = 0;
    node_cap_ = budget_.max_nodes;
    ancestors_.push_back(graph_.root);
    Outcome o = expand(graph_.root, 0);

    Verdict v;
    v.report = report_;
    v.report.nodes = graph_.nodes.size();
    if (o == Outcome::Refuted) {
      v.kind = Verdict::Kind::Refuted;
      v.countermodel = countermodel_;
      v.refuter_moves = refuter_moves(*countermodel_);
      return v;
    }
    if (o == Outcome::Closed) {
      ProofGraph g = compact();
      auto r = check_progress(g);
      if (r.accepted) {
        v.kind = Verdict::Kind::Proved;
        v.proof = std::move(g);
        return v;
      }
      v.report.note = "assembled graph failed the progress check: " + r.reason;
      return v;
    }
    if (v.report.note.empty()) v.report.note = "budget exhausted";
    if (auto cm = enumerate_countermodel()) {
      v.kind = Verdict::Kind::Refuted;
      v.report.countermodel_source = "enumeration";
      v.countermodel = std::move(cm);
      v.refuter_moves = refuter_moves(*v.countermodel);
    }
    return v;
  }

 private:
  enum class Outcome { Closed, Refuted, Open };

  int add_node(Sequent s) {
    ProofNode n;
    n.sequent = std::move(s);
    graph_.nodes.push_back(std::move(n));
    return static_cast<int>(graph_.nodes.size()) - 1;
  }

  ProofNode& node(int i) { return graph_.nodes[static_cast<std::size_t>(i)]; }

  int birth_of(const SaturationWitness& w) const {
    if (w.fix.principal) {
      auto it = birth_.find(*w.fix.principal);
      return it == birth_.end() ? 0 : it->second;
    }
    int b = 0;
    for (const auto& a : w.fix.relational) {
      auto it = atom_birth_.find(a);
      if (it != atom_birth_.end()) b = std::max(b, it->second);
    }
    return b;
  }

  Outcome open(const std::string& why) {
    if (report_.note.empty()) report_.note = why;
    return Outcome::Open;
  }

  std::optional<Countermodel> enumerate_countermodel() const {
    if (budget_.fallback_worlds == 0) return std::nullopt;
    const auto props = propositions(c_->sentence().formula);
    std::optional<Countermodel> out;
    for_each_model(budget_.fallback_worlds, {props.begin(), props.end()}, variant_, [&](const Model& m) {
      WorldSet ext = eval(m, c_->sentence().formula);
      if (ext == WorldSet::full(m.size())) return true;
      for (std::size_t w = 0; w < m.size(); ++w)
        if (!ext.contains(w)) {
          out = Countermodel{m, m.worlds[w]};
          break;
        }
      return false;
    });
    return out;
  }

  bool try_countermodel(const Sequent& s, bool saturated) {
    try {
      countermodel_ = extract_countermodel(*c_, s, 0, variant_, saturated);
      report_.countermodel_source = saturated ? "saturated leaf" : "open leaf";
      return true;
    } catch (const ExtractionUnsound& e) {
      if (saturated && report_.note.empty()) report_.note = std::string("extraction: ") + e.what();
      return false;
    } catch (const SequentNotSaturated&) {
      return false;
    }
  }

  Outcome expand(int v, std::size_t depth) {
    if (graph_.nodes.size() >= node_cap_) return open("node budget exhausted");
    const Sequent s = node(v).sequent;
    const auto labels = s.labels();
    report_.max_labels_seen = std::max(report_.max_labels_seen, labels.size());

    if (auto ax = find_axiom(*c_, s, variant_)) {
      node(v).rule = *ax;
      return Outcome::Closed;
    }
    auto witnesses = is_saturated(*c_, s, variant_);
    if (witnesses.empty()) {
      if (try_countermodel(s, true)) return Outcome::Refuted;
      return open("saturated leaf without a verified countermodel");
    }

    int best_tier = 3;
    for (const auto& w : witnesses) best_tier = std::min(best_tier, tier(w.fix.rule));
    const int since = checkpoint_;
    const std::size_t ancestor_count = ancestors_.size();
    struct Restore {
      Search& self;
      int since;
      std::size_t count;
      ~Restore() {
        self.checkpoint_ = since;
        self.ancestors_.resize(count);
      }
    } restore{*this, since, ancestor_count};
    if (best_tier > 0) {
      // Tier-0 saturated: look for a cycle, then try to focus.
      checkpoint_ = static_cast<int>(depth);
      if (auto r = at_checkpoint(v, s, since, depth)) return *r;
      ancestors_.push_back(v);
    }
    if (labels.size() > budget_.max_labels || depth > budget_.max_depth) {
      if (try_countermodel(s, false)) return Outcome::Refuted;
      return open(labels.size() > budget_.max_labels ? "label budget exhausted" : "depth budget exhausted");
    }

    const SaturationWitness* pick = nullptr;
    int pick_birth = 0;
    for (const auto& w : witnesses) {
      if (tier(w.fix.rule) != best_tier) continue;
      int b = birth_of(w);
      if (!pick || b < pick_birth) {
        pick = &w;
        pick_birth = b;
      }
    }
    RuleInstance r = pick->fix;
    for (std::size_t i = 0; i < eigen_count(r.rule); ++i) r.eigen.push_back(next_label_++);
    return apply(v, s, r, depth);
  }

  Outcome apply(int v, const Sequent& s, const RuleInstance& r, std::size_t depth) {
    auto premises = apply_rule(*c_, s, r, variant_);
    node(v).rule = r;
    node(v).premises.clear();
    node(v).traces.clear();
    std::vector<int> kids;
    for (auto& p : premises) {
      node(v).traces.push_back(trace_links(*c_, s, r, p));
      int k = add_node(std::move(p));
      node(v).premises.push_back(k);
      kids.push_back(k);
    }
    bool all_closed = true;
    for (int k : kids) {
      auto undo = record_births(s, node(k).sequent, static_cast<int>(depth) + 1);
      Outcome o = expand(k, depth + 1);
      unrecord(undo);
      if (o == Outcome::Refuted) return o;
      if (o == Outcome::Open) all_closed = false;
    }
    return all_closed ? Outcome::Closed : Outcome::Open;
  }

  struct Undo {
    std::vector<SidedFormula> formulas;
    std::vector<RelAtom> atoms;
    int node;
  };

  Undo record_births(const Sequent& before, const Sequent& after, int depth) {
    Undo u;
    for (Side side : {Side::Left, Side::Right})
      for (const auto& f : after.side(side))
        if (!before.side(side).count(f)) {
          SidedFormula sf{side, f.label, f.formula};
          if (birth_.emplace(sf, depth).second) u.formulas.push_back(sf);
        }
    for (const auto& a : after.rel)
      if (!before.rel.count(a) && atom_birth_.emplace(a, depth).second) u.atoms.push_back(a);
    return u;
  }

  void unrecord(const Undo& u) {
    for (const auto& f : u.formulas) birth_.erase(f);
    for (const auto& a : u.atoms) atom_birth_.erase(a);
  }

  // -- cycles ---------------------------------------------------------------

  /// Binder formulas born after the previous checkpoint which repeat, on the
  /// same side, a binder formula at another label.
  std::vector<SidedFormula> fresh_repeats(const Sequent& s, int since) const {
    std::vector<SidedFormula> out;
    for (Side side : {Side::Left, Side::Right})
      for (const auto& f : s.side(side)) {
        if (!c_->formula(f.formula).is_fixpoint()) continue;
        SidedFormula sf{side, f.label, f.formula};
        auto it = birth_.find(sf);
        if (it == birth_.end() || it->second <= since) continue;
        for (const auto& g : s.side(side))
          if (g.formula == f.formula && g.label != f.label) {
            out.push_back(sf);
            break;
          }
      }
    return out;
  }

  std::optional<Outcome> at_checkpoint(int v, const Sequent& s, int since, std::size_t depth) {
    auto repeats = fresh_repeats(s, since);
    if (repeats.empty()) return std::nullopt;

    std::vector<std::pair<int, std::map<Label, Label>>> rejected;
    for (const auto& target : repeats) {
      std::size_t tried = 0;
      for (int a : ancestors_) {
        const Sequent& as = node(a).sequent;
        for (const auto& f : as.side(target.side)) {
          if (f.formula != target.formula || f.label == target.label) continue;
          for (auto& map : Embedder(as, s, 4).run(f.label, target.label)) {
            if (++tried > 12) break;
            if (try_back_edge(v, a, map)) {
              ++report_.back_edges;
              return Outcome::Closed;
            }
            rejected.push_back({a, std::move(map)});
          }
        }
      }
    }
    for (const auto& [a, map] : rejected) {
      if (rejected.size() > 8) break;
      if (try_quotient(s, map)) return Outcome::Refuted;
    }
    return focus(v, s, repeats, depth);
  }

  bool try_back_edge(int v, int a, const std::map<Label, Label>& map) {
    ProofNode saved = node(v);
    node(v).rule = RuleInstance{Rule::Cycle, std::nullopt, {}, {}, {}};
    node(v).premises = {a};
    node(v).renaming = map;
    node(v).traces = {back_edge_links(node(a).sequent, node(v).sequent, map)};
    if (check_progress(graph_).accepted) return true;
    node(v) = std::move(saved);
    return false;
  }

  bool try_quotient(const Sequent& s, const std::map<Label, Label>& map) {
    return try_quotient(s, map, false) || try_quotient(s, map, true);
  }

  /// Identifies each label with its image under the back-edge map, and
  /// with collapse_pre also the two ends of every ⪯ atom.
  bool try_quotient(const Sequent& s, const std::map<Label, Label>& map, bool collapse_pre) {
    auto labels = s.labels();
    std::map<Label, Label> parent;
    for (Label l : labels) parent[l] = l;
    std::function<Label(Label)> find = [&](Label l) {
      while (parent[l] != l) l = parent[l] = parent[parent[l]];
      return l;
    };
    for (const auto& [from, to] : map) {
      Label a = find(from), b = find(to);
      if (a != b) parent[std::max(a, b)] = std::min(a, b);
    }
    if (collapse_pre)
      for (const auto& at : s.rel)
        if (at.type == RelAtom::Type::Pre) {
          Label a = find(at.from), b = find(at.to);
          if (a != b) parent[std::max(a, b)] = std::min(a, b);
        }
    Sequent q = rename(s, find);
    try {
      countermodel_ = extract_countermodel(*c_, q, find(0), variant_, false);
      report_.countermodel_source = "cycle quotient";
      return true;
    } catch (const ExtractionUnsound&) {
      return false;
    }
  }

  /// Weakens to the formulas at one label and searches that sequent on its
  /// own; the repetition then usually closes against the focused root.
  std::optional<Outcome> focus(int v, const Sequent& s, const std::vector<SidedFormula>& repeats,
                               std::size_t depth) {
    if (focus_depth_ >= 2) return std::nullopt;
    std::set<Label> tried;
    for (const auto& target : repeats) {
      const Label z = target.label;
      if (!tried.insert(z).second) continue;
      Sequent f;
      for (const auto& x : s.left)
        if (x.label == z) f.left.insert(x);
      for (const auto& x : s.right)
        if (x.label == z) f.right.insert(x);
      if (f.size() == s.size()) continue;
      Content key;
      for (const auto& x : f.left) key.insert({0, x.formula});
      for (const auto& x : f.right) key.insert({1, x.formula});
      if (failed_focus_.count(key)) continue;
      ++report_.focus_attempts;

      const std::size_t remaining = budget_.max_nodes > graph_.nodes.size() ? budget_.max_nodes - graph_.nodes.size() : 0;
      const std::size_t saved_cap = node_cap_;
      const std::string saved_note = report_.note;
      node_cap_ = std::min(node_cap_, graph_.nodes.size() + std::max<std::size_t>(remaining / 4, 50));
      ++focus_depth_;
      RuleInstance wk{Rule::Weaken, std::nullopt, {}, {}, f};
      const int saved_checkpoint = checkpoint_;
      auto saved_births = birth_;
      auto saved_atoms = atom_birth_;
      for (const auto& x : f.left) birth_[{Side::Left, x.label, x.formula}] = static_cast<int>(depth) + 1;
      for (const auto& x : f.right) birth_[{Side::Right, x.label, x.formula}] = static_cast<int>(depth) + 1;
      checkpoint_ = static_cast<int>(depth) + 1;
      Outcome o = apply_focused(v, s, wk, depth);
      checkpoint_ = saved_checkpoint;
      birth_ = std::move(saved_births);
      atom_birth_ = std::move(saved_atoms);
      --focus_depth_;
      node_cap_ = saved_cap;
      if (o == Outcome::Closed || o == Outcome::Refuted) return o;
      report_.note = saved_note;
      failed_focus_.insert(key);
      node(v).rule = {};
      node(v).premises.clear();
      node(v).traces.clear();
    }
    return std::nullopt;
  }

  Outcome apply_focused(int v, const Sequent& s, const RuleInstance& wk, std::size_t depth) {
    node(v).rule = wk;
    node(v).traces = {trace_links(*c_, s, wk, *wk.weakened)};
    int k = add_node(*wk.weakened);
    node(v).premises = {k};
    // Only the focused root and its descendants serve as companions.
    auto saved = ancestors_;
    ancestors_.clear();
    ancestors_.push_back(k);
    Outcome o = expand(k, depth + 1);
    ancestors_ = std::move(saved);
    return o;
  }

  // -- result -----------------------------------------------------------------

  /// Nodes reachable from the root, renumbered in discovery order.
  ProofGraph compact() const {
    std::vector<int> order{graph_.root};
    std::map<int, int> id{{graph_.root, 0}};
    for (std::size_t i = 0; i < order.size(); ++i)
      for (int p : graph_.nodes[static_cast<std::size_t>(order[i])].premises)
        if (id.emplace(p, static_cast<int>(order.size())).second) order.push_back(p);
    ProofGraph g;
    g.closure = c_;
    g.variant = variant_;
    g.root = 0;
    for (int old : order) {
      ProofNode n = graph_.nodes[static_cast<std::size_t>(old)];
      for (int& p : n.premises) p = id.at(p);
      g.nodes.push_back(std::move(n));
    }
    return g;
  }

  std::vector<std::string> refuter_moves(const Countermodel& cm) const {
    std::vector<std::string> out;
    auto w = cm.model.find(cm.world);
    if (!w) return out;
    auto arena = build_arena(cm.model, c_, {*w});
    auto sol = solve(arena);
    for (const auto& [from, to] : sol.strategy_II) {
      const auto& p = arena.positions[static_cast<std::size_t>(from)];
      const auto& q = arena.positions[static_cast<std::size_t>(to)];
      out.push_back("<" + arena.world_names[p.world] + ", " + c_->label(p.formula) + ", " + role_name(p.role_of_I) +
                    "> -> <" + arena.world_names[q.world] + ", " + c_->label(q.formula) + ", " +
                    role_name(q.role_of_I) + ">");
    }
    return out;
  }

  std::shared_ptr<const ClosureIndex> c_;
  LogicVariant variant_;
  Budget budget_;
  ProofGraph graph_;
  Label next_label_ = 1;
  std::size_t node_cap_ = 0;
  int checkpoint_ = -1;
  int focus_depth_ = 0;
  std::vector<int> ancestors_;  // root and checkpoints on the current branch
  std::map<SidedFormula, int> birth_;
  std::map<RelAtom, int> atom_birth_;
  std::set<Content> failed_focus_;
  std::optional<Countermodel> countermodel_;
  SearchReport report_;
};

}  // namespace

Verdict prove(const WellNamedSentence& goal, LogicVariant variant, const Budget& budget) {
  auto closure = std::make_shared<const ClosureIndex>(goal);
  Search s(closure, variant, budget);
  return s.run();
}

}  // namespace mucalc
