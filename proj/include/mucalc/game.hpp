#pragma once

#include "mucalc/model.hpp"
#include "mucalc/syntax.hpp"

#include <map>
#include <memory>
#include <stdexcept>
#include <string>
#include <vector>

namespace mucalc {

enum class Role { V, R };
enum class Player { I, II };

inline Role dual(Role r) { return r == Role::V ? Role::R : Role::V; }
inline Player opponent(Player p) { return p == Player::I ? Player::II : Player::I; }
const char* role_name(Role r);
const char* player_name(Player p);

/// ⟨world, formula, role of I⟩. Auxiliary positions carry a LocalDia or
/// Query formula.
struct Position {
  std::size_t world;
  int formula;  // id in the arena's closure index
  Role role_of_I;
};

class RoleInconsistency : public std::logic_error {
 public:
  using std::logic_error::logic_error;
};

/// Evaluation game restricted to positions reachable from the roots.
struct GameArena {
  std::shared_ptr<const ClosureIndex> closure;
  std::vector<std::string> world_names;
  std::vector<Position> positions;
  std::vector<std::vector<int>> moves;
  std::vector<Role> owner;     // role that moves at each position
  std::vector<int> priority;   // I wins an infinite play iff the max recurring priority is even
  int initial = 0;

  std::size_t size() const { return positions.size(); }
  Player mover(int p) const {
    const auto i = static_cast<std::size_t>(p);
    return owner[i] == positions[i].role_of_I ? Player::I : Player::II;
  }
  /// -1 if the position was not reached.
  int find(std::size_t world, int formula, Role role) const;

  std::vector<int> slots;  // dense (world, formula, role) -> position id
};

/// 𝒢(M, w ⊨ φ), starting at ⟨w, φ, V⟩.
GameArena build_arena(const Model& m, const WellNamedSentence& s, std::size_t world);
/// One arena containing every position reachable from ⟨w, φ, V⟩ for each
/// root world; `initial` is the first root.
GameArena build_arena(const Model& m, std::shared_ptr<const ClosureIndex> closure,
                      const std::vector<std::size_t>& roots);

/// Positional strategy: position id -> chosen successor id.
using Strategy = std::map<int, int>;

struct GameSolution {
  std::vector<Player> winner;  // per position
  Strategy strategy_I;         // on I's winning region
  Strategy strategy_II;        // on II's winning region
  std::vector<int> region(Player p) const;
};

/// Recursive (Zielonka) parity solver. A player who must move from a position
/// without moves loses there.
GameSolution solve(const GameArena& a);

class IncompleteStrategy : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// True iff every play from `region` that follows sigma is won by `player`:
/// no reachable dead end belongs to the player, and every reachable cycle has
/// a maximal priority of the player's parity. Throws IncompleteStrategy when
/// sigma misses (or makes an illegal move at) a reachable owned position.
bool verify_strategy(const GameArena& a, Player player, const Strategy& sigma, const std::vector<int>& region);

/// (w ∈ ‖φ‖) == (I wins at ⟨w, φ, V⟩).
bool check_equivalence(const Model& m, const WellNamedSentence& s, std::size_t world);

/// One line per position: id | world | formula | role_of_I | owner_role | priority | successors...
std::string dump_arena(const GameArena& a);

}  // namespace mucalc
