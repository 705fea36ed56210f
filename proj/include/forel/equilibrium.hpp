#pragma once

#include <optional>
#include <string>
#include <vector>

#include "forel/game.hpp"

namespace forel {

enum class RowSense { kLe, kEq, kGe };

// Maximization LP: max <objective, x> subject to rows (sense) rhs and
// per-variable bounds. Use -kInf / kInf for unbounded sides.
struct LinearProgram {
  Vec objective;
  std::vector<Vec> rows;
  std::vector<RowSense> senses;
  Vec rhs;
  Vec lower;
  Vec upper;

  int num_vars() const { return static_cast<int>(objective.size()); }
  int num_rows() const { return static_cast<int>(rows.size()); }
};

inline constexpr double kInf = 1e300;

enum class LpStatus { kOptimal, kInfeasible, kUnbounded };

struct LpSolution {
  LpStatus status = LpStatus::kInfeasible;
  Vec x;
  double objective = 0.0;
};

// Two-phase primal simplex with Bland's anti-cycling rule. Dense
// tableau; intended for desk-scale rational-friendly inputs.
LpSolution LpSolve(const LinearProgram& lp);

struct ZeroSumSolution {
  double value = 0.0;   // game value for player 1
  Vec x1;               // maximizer optimal strategy
  Vec x2;               // minimizer optimal strategy
  double duality_gap = 0.0;
};

// Value and one equilibrium of the zero-sum game with payoff matrix `a`
// for the (maximizing) row player.
ZeroSumSolution ZeroSumSolve(const Mat& a);

struct EssentialSets {
  double value = 0.0;
  std::vector<std::vector<int>> essential;   // per player, sorted action ids
  // Witness optimal strategies: for each essential action of a player,
  // an optimal strategy of that player placing positive mass on it.
  std::vector<std::vector<Vec>> support_witnesses;
  // Punisher strategies: for each non-essential action of a player, an
  // opponent optimal strategy against which it earns strictly less than
  // the value. Indexed per player by the non-essential action id.
  std::vector<std::vector<std::pair<int, Vec>>> punishers;
};

// An action is essential iff max x_alpha over the player's optimal
// polytope exceeds 1e-9.
EssentialSets EssentialStrategies(const Mat& a);

struct EquilibriumReport {
  double value = 0.0;
  MixedProfile x_star;
  std::vector<std::vector<int>> essential;
  // Per player, per action: 0 for essential actions, the strict payoff
  // shortfall against x_star for non-essential ones.
  std::vector<Vec> margins;
  std::vector<std::vector<std::pair<int, Vec>>> punishers;
};

// Barycenter of the essentialness witnesses and punisher strategies:
// a maximal-support equilibrium whose support equals the essential sets
// and which punishes every non-essential action by a strict margin.
EquilibriumReport MaxSupportEquilibrium(const Mat& a);

struct NashCheck {
  Vec gaps;                // per player: max_alpha v (x) - u (x)
  double max_gap = 0.0;
  bool is_nash = false;
};

// Best-response gap per player; x is a Nash equilibrium iff
// max_i gap_i <= tol. Works for any game the library represents.
NashCheck VerifyNash(const Game& game, const MixedProfile& x, double tol);

struct InteriorSolveResult {
  std::optional<MixedProfile> profile;
  std::string message;
};

// Interior equilibrium of a polymatrix game via the per-player payoff
// equalization linear system. Fails (with a message) when the system is
// singular or the solution is not strictly positive.
InteriorSolveResult PolymatrixInteriorEquilibrium(const Game& game);

}  // namespace forel
