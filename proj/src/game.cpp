#include "mucalc/game.hpp"

#include "mucalc/denotational.hpp"

#include <algorithm>
#include <deque>
#include <functional>
#include <sstream>

namespace mucalc {

const char* role_name(Role r) { return r == Role::V ? "V" : "R"; }
const char* player_name(Player p) { return p == Player::I ? "I" : "II"; }

int GameArena::find(std::size_t world, int formula, Role role) const {
  const auto f = static_cast<std::size_t>(closure->size());
  const std::size_t k = (world * f + static_cast<std::size_t>(formula)) * 2 + (role == Role::R ? 1 : 0);
  return k < slots.size() ? slots[k] : -1;
}

std::vector<int> GameSolution::region(Player p) const {
  std::vector<int> out;
  for (std::size_t i = 0; i < winner.size(); ++i)
    if (winner[i] == p) out.push_back(static_cast<int>(i));
  return out;
}

// ---------------------------------------------------------------------------
// Arena construction

namespace {

class ArenaBuilder {
 public:
  ArenaBuilder(const Model& m, std::shared_ptr<const ClosureIndex> closure)
      : m_(m), pre_rel_(compose_pre_rel(m)) {
    a_.closure = std::move(closure);
    a_.world_names = m.worlds;
    a_.slots.assign(m.size() * static_cast<std::size_t>(a_.closure->size()) * 2, -1);
    const auto& s = a_.closure->sentence();
    const int nfix = a_.closure->fixpoint_count();
    for (int id = 0; id < a_.closure->size(); ++id) {
      const Formula& f = a_.closure->formula(id);
      if (f.is_fixpoint()) static_role_[id] = s.binder(f.name()).role_verifier ? Role::V : Role::R;
      if (f.kind() == Kind::Var) {
        const auto& info = s.binder(f.name());
        const int i = static_cast<int>(info.index) + 1;  // 1-based, outermost first
        var_priority_[id] = info.owned_by_I() ? 2 * (nfix - i) + 2 : 2 * (nfix - i) + 1;
      }
    }
  }

  GameArena build(const std::vector<std::size_t>& roots) {
    for (auto w : roots) {
      if (w >= m_.size()) throw std::out_of_range("root world out of range");
      intern(w, a_.closure->root(), Role::V);
    }
    while (!queue_.empty()) {
      int p = queue_.front();
      queue_.pop_front();
      expand(p);
    }
    a_.initial = roots.empty() ? 0 : a_.find(roots.front(), a_.closure->root(), Role::V);
    return std::move(a_);
  }

 private:
  int intern(std::size_t w, int f, Role q) {
    const auto nf = static_cast<std::size_t>(a_.closure->size());
    const std::size_t k = (w * nf + static_cast<std::size_t>(f)) * 2 + (q == Role::R ? 1 : 0);
    if (a_.slots[k] >= 0) return a_.slots[k];
    auto sr = static_role_.find(f);
    if (sr != static_role_.end() && sr->second != q)
      throw RoleInconsistency("fixpoint " + a_.closure->label(f) + " reached with role " + role_name(q) +
                              ", expected " + role_name(sr->second));
    const int id = static_cast<int>(a_.positions.size());
    a_.slots[k] = id;
    a_.positions.push_back({w, f, q});
    a_.moves.emplace_back();
    a_.owner.push_back(Role::V);
    auto vp = var_priority_.find(f);
    a_.priority.push_back(vp == var_priority_.end() ? 0 : vp->second);
    queue_.push_back(id);
    return id;
  }

  void expand(int p) {
    const Position pos = a_.positions[static_cast<std::size_t>(p)];
    const ClosureIndex& c = *a_.closure;
    const Formula& f = c.formula(pos.formula);
    const std::size_t v = pos.world;
    const Role q = pos.role_of_I;
    std::vector<int> succ;
    Role owner = Role::V;
    switch (f.kind()) {
      case Kind::Prop:
        owner = m_.valuation(f.name()).contains(v) ? Role::R : Role::V;
        break;
      case Kind::Bottom:
        owner = m_.fallible.contains(v) ? Role::R : Role::V;
        break;
      case Kind::Var: {
        const int b = c.binder_of(pos.formula);
        owner = c.kind(b) == Kind::Mu ? Role::V : Role::R;
        succ.push_back(intern(v, b, q));
        break;
      }
      case Kind::Mu:
      case Kind::Nu:
        owner = f.kind() == Kind::Mu ? Role::V : Role::R;
        succ.push_back(intern(v, c.left(pos.formula), q));
        break;
      case Kind::Or:
      case Kind::And:
        owner = f.kind() == Kind::Or ? Role::V : Role::R;
        succ.push_back(intern(v, c.left(pos.formula), q));
        succ.push_back(intern(v, c.right(pos.formula), q));
        break;
      case Kind::Implies:
        owner = Role::R;
        for (auto u : m_.pre.successors(v).members()) succ.push_back(intern(u, c.companion(pos.formula), q));
        break;
      case Kind::Query:
        owner = Role::V;
        succ.push_back(intern(v, c.left(pos.formula), dual(q)));
        succ.push_back(intern(v, c.right(pos.formula), q));
        break;
      case Kind::Box:
        owner = Role::R;
        for (auto u : pre_rel_.successors(v).members()) succ.push_back(intern(u, c.left(pos.formula), q));
        break;
      case Kind::Dia:
        owner = Role::R;
        for (auto u : m_.pre.successors(v).members()) succ.push_back(intern(u, c.companion(pos.formula), q));
        break;
      case Kind::LocalDia:
        owner = Role::V;
        for (auto u : m_.rel.successors(v).members()) succ.push_back(intern(u, c.left(pos.formula), q));
        break;
    }
    a_.owner[static_cast<std::size_t>(p)] = owner;
    a_.moves[static_cast<std::size_t>(p)] = std::move(succ);
  }

  const Model& m_;
  Relation pre_rel_;
  GameArena a_;
  std::deque<int> queue_;
  std::map<int, Role> static_role_;
  std::map<int, int> var_priority_;
};

}  // namespace

GameArena build_arena(const Model& m, std::shared_ptr<const ClosureIndex> closure,
                      const std::vector<std::size_t>& roots) {
  return ArenaBuilder(m, std::move(closure)).build(roots);
}

GameArena build_arena(const Model& m, const WellNamedSentence& s, std::size_t world) {
  return build_arena(m, std::make_shared<const ClosureIndex>(s), {world});
}

// ---------------------------------------------------------------------------
// Zielonka's recursive algorithm

namespace {

class Zielonka {
 public:
  explicit Zielonka(const GameArena& a) : n_(a.size()), choice_(n_, -1) {
    owner_.resize(n_);
    prio_.resize(n_);
    succ_.resize(n_);
    pred_.resize(n_);
    for (std::size_t v = 0; v < n_; ++v) {
      owner_[v] = a.mover(static_cast<int>(v)) == Player::I ? 0 : 1;
      prio_[v] = a.priority[v];
      succ_[v] = a.moves[v];
      if (succ_[v].empty()) {
        // The stuck player loses: a self-loop with a priority of the
        // opponent's parity.
        succ_[v].push_back(static_cast<int>(v));
        prio_[v] = owner_[v] == 0 ? 1 : 0;
      }
      for (int u : succ_[v]) pred_[static_cast<std::size_t>(u)].push_back(static_cast<int>(v));
    }
  }

  GameSolution run(const GameArena& a) {
    std::vector<char> all(n_, 1);
    auto [w0, w1] = solve(all);
    GameSolution out;
    out.winner.resize(n_);
    for (std::size_t v = 0; v < n_; ++v) {
      out.winner[v] = w0[v] ? Player::I : Player::II;
      const int pl = w0[v] ? 0 : 1;
      if (owner_[v] == pl && !a.moves[v].empty()) {
        (pl == 0 ? out.strategy_I : out.strategy_II)[static_cast<int>(v)] = choice_[v];
      }
    }
    return out;
  }

 private:
  using Set = std::vector<char>;

  bool empty(const Set& s) const { return std::find(s.begin(), s.end(), 1) == s.end(); }

  /// Attractor of `target` for player pl inside subgame g; records choices.
  Set attractor(const Set& g, const Set& target, int pl) {
    Set attr = target;
    std::vector<int> remaining(n_, 0);
    std::deque<int> queue;
    for (std::size_t v = 0; v < n_; ++v) {
      if (!g[v]) continue;
      if (attr[v]) queue.push_back(static_cast<int>(v));
      for (int u : succ_[v])
        if (g[static_cast<std::size_t>(u)]) ++remaining[v];
    }
    while (!queue.empty()) {
      int u = queue.front();
      queue.pop_front();
      for (int v : pred_[static_cast<std::size_t>(u)]) {
        const auto vi = static_cast<std::size_t>(v);
        if (!g[vi] || attr[vi]) continue;
        if (owner_[vi] == pl) {
          attr[vi] = 1;
          choice_[vi] = u;
          queue.push_back(v);
        } else if (--remaining[vi] == 0) {
          attr[vi] = 1;
          queue.push_back(v);
        }
      }
    }
    return attr;
  }

  static Set minus(const Set& a, const Set& b) {
    Set out(a.size());
    for (std::size_t i = 0; i < a.size(); ++i) out[i] = a[i] && !b[i];
    return out;
  }

  std::pair<Set, Set> solve(const Set& g) {
    Set w0(n_, 0), w1(n_, 0);
    if (empty(g)) return {w0, w1};
    int d = -1;
    for (std::size_t v = 0; v < n_; ++v)
      if (g[v]) d = std::max(d, prio_[v]);
    const int pl = d % 2;
    Set top(n_, 0);
    for (std::size_t v = 0; v < n_; ++v)
      if (g[v] && prio_[v] == d) top[v] = 1;
    Set a = attractor(g, top, pl);
    auto [s0, s1] = solve(minus(g, a));
    Set& sub_opp = pl == 0 ? s1 : s0;
    if (empty(sub_opp)) {
      for (std::size_t v = 0; v < n_; ++v) {
        if (!g[v]) continue;
        if (top[v] && owner_[v] == pl) {
          for (int u : succ_[v])
            if (g[static_cast<std::size_t>(u)]) {
              choice_[v] = u;
              break;
            }
        }
      }
      (pl == 0 ? w0 : w1) = g;
      return {w0, w1};
    }
    Set b = attractor(g, sub_opp, 1 - pl);
    auto [t0, t1] = solve(minus(g, b));
    Set& win_pl = pl == 0 ? w0 : w1;
    Set& win_opp = pl == 0 ? w1 : w0;
    win_pl = pl == 0 ? t0 : t1;
    win_opp = pl == 0 ? t1 : t0;
    for (std::size_t v = 0; v < n_; ++v)
      if (b[v]) win_opp[v] = 1;
    return {w0, w1};
  }

  std::size_t n_;
  std::vector<int> owner_;  // 0 = I (even), 1 = II (odd)
  std::vector<int> prio_;
  std::vector<std::vector<int>> succ_, pred_;
  std::vector<int> choice_;
};

}  // namespace

GameSolution solve(const GameArena& a) { return Zielonka(a).run(a); }

// ---------------------------------------------------------------------------
// Strategy verification

namespace {

/// Tarjan SCC over the nodes with keep[v]; returns component ids (-1 outside).
std::vector<int> strongly_connected(const std::vector<std::vector<int>>& succ, const std::vector<char>& keep,
                                    std::vector<char>& nontrivial) {
  const std::size_t n = succ.size();
  std::vector<int> index(n, -1), low(n, 0), comp(n, -1);
  std::vector<char> on_stack(n, 0);
  std::vector<int> stack;
  int counter = 0, ncomp = 0;
  nontrivial.clear();
  // Iterative Tarjan to stay clear of deep recursion on long chains.
  for (std::size_t root = 0; root < n; ++root) {
    if (!keep[root] || index[root] >= 0) continue;
    std::vector<std::pair<int, std::size_t>> work{{static_cast<int>(root), 0}};
    while (!work.empty()) {
      auto& [v, it] = work.back();
      const auto vi = static_cast<std::size_t>(v);
      if (it == 0) {
        index[vi] = low[vi] = counter++;
        stack.push_back(v);
        on_stack[vi] = 1;
      }
      bool descended = false;
      while (it < succ[vi].size()) {
        int u = succ[vi][it++];
        const auto ui = static_cast<std::size_t>(u);
        if (!keep[ui]) continue;
        if (index[ui] < 0) {
          work.emplace_back(u, 0);
          descended = true;
          break;
        }
        if (on_stack[ui]) low[vi] = std::min(low[vi], index[ui]);
      }
      if (descended) continue;
      if (low[vi] == index[vi]) {
        std::size_t members = 0;
        bool self_loop = false;
        int u;
        do {
          u = stack.back();
          stack.pop_back();
          on_stack[static_cast<std::size_t>(u)] = 0;
          comp[static_cast<std::size_t>(u)] = ncomp;
          ++members;
        } while (u != v);
        for (int w : succ[vi])
          if (w == v) self_loop = true;
        nontrivial.push_back(members > 1 || self_loop);
        ++ncomp;
      }
      const int low_v = low[vi];
      work.pop_back();
      if (!work.empty()) {
        auto pi = static_cast<std::size_t>(work.back().first);
        low[pi] = std::min(low[pi], low_v);
      }
    }
  }
  return comp;
}

}  // namespace

bool verify_strategy(const GameArena& a, Player player, const Strategy& sigma, const std::vector<int>& region) {
  const std::size_t n = a.size();
  std::vector<char> reach(n, 0);
  std::vector<std::vector<int>> succ(n);
  std::vector<int> stack;
  for (int r : region) {
    if (r < 0 || static_cast<std::size_t>(r) >= n) throw std::out_of_range("region position out of range");
    if (!reach[static_cast<std::size_t>(r)]) {
      reach[static_cast<std::size_t>(r)] = 1;
      stack.push_back(r);
    }
  }
  while (!stack.empty()) {
    int v = stack.back();
    stack.pop_back();
    const auto vi = static_cast<std::size_t>(v);
    const auto& moves = a.moves[vi];
    if (moves.empty()) {
      if (a.mover(v) == player) return false;  // stuck and losing
      continue;
    }
    if (a.mover(v) == player) {
      auto it = sigma.find(v);
      if (it == sigma.end()) throw IncompleteStrategy("no choice at position " + std::to_string(v));
      if (std::find(moves.begin(), moves.end(), it->second) == moves.end())
        throw IncompleteStrategy("illegal choice at position " + std::to_string(v));
      succ[vi] = {it->second};
    } else {
      succ[vi] = moves;
    }
    for (int u : succ[vi])
      if (!reach[static_cast<std::size_t>(u)]) {
        reach[static_cast<std::size_t>(u)] = 1;
        stack.push_back(u);
      }
  }
  // A cycle is bad when its maximal priority has the opponent's parity.
  const int good_parity = player == Player::I ? 0 : 1;
  std::vector<int> bad;
  for (std::size_t v = 0; v < n; ++v)
    if (reach[v] && !a.moves[v].empty() && a.priority[v] % 2 != good_parity) bad.push_back(a.priority[v]);
  std::sort(bad.begin(), bad.end());
  bad.erase(std::unique(bad.begin(), bad.end()), bad.end());
  for (int d : bad) {
    std::vector<char> keep(n, 0);
    for (std::size_t v = 0; v < n; ++v) keep[v] = reach[v] && !a.moves[v].empty() && a.priority[v] <= d;
    std::vector<char> nontrivial;
    auto comp = strongly_connected(succ, keep, nontrivial);
    for (std::size_t v = 0; v < n; ++v)
      if (keep[v] && a.priority[v] == d && nontrivial[static_cast<std::size_t>(comp[v])]) return false;
  }
  return true;
}

bool check_equivalence(const Model& m, const WellNamedSentence& s, std::size_t world) {
  const bool semantic = eval(m, s.formula).contains(world);
  GameArena a = build_arena(m, s, world);
  GameSolution sol = solve(a);
  return semantic == (sol.winner[static_cast<std::size_t>(a.initial)] == Player::I);
}

std::string dump_arena(const GameArena& a) {
  std::ostringstream os;
  for (std::size_t i = 0; i < a.size(); ++i) {
    const Position& p = a.positions[i];
    os << i << " | " << a.world_names[p.world] << " | " << a.closure->label(p.formula) << " | "
       << role_name(p.role_of_I) << " | " << role_name(a.owner[i]) << " | " << a.priority[i] << " |";
    for (int s : a.moves[i]) os << ' ' << s;
    os << '\n';
  }
  return os.str();
}

}  // namespace mucalc
