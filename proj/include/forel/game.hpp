#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace forel {

using Vec = std::vector<double>;

// Dense row-major matrix; desk-scale games, clarity over compression.
struct Mat {
  int rows = 0;
  int cols = 0;
  Vec data;

  Mat() = default;
  Mat(int r, int c, double fill = 0.0) : rows(r), cols(c), data(r * c, fill) {}
  static Mat FromRows(const std::vector<Vec>& rws);

  double& at(int r, int c) { return data[r * cols + c]; }
  double at(int r, int c) const { return data[r * cols + c]; }

  // M * v
  Vec Apply(const Vec& v) const;
  // M^T * v
  Vec ApplyTransposed(const Vec& v) const;
};

// One mixed strategy per player; entries are probabilities over that
// player's actions.
struct MixedProfile {
  std::vector<Vec> strategies;

  int num_players() const { return static_cast<int>(strategies.size()); }
  Vec& operator[](int i) { return strategies[i]; }
  const Vec& operator[](int i) const { return strategies[i]; }
};

// Sup-norm distance over all players' action coordinates.
double ProfileDistance(const MixedProfile& a, const MixedProfile& b);

// Throws std::domain_error if some strategy is negative or does not sum
// to 1 within `tol`.
void CheckProfile(const MixedProfile& x, const std::vector<int>& actions,
                  double tol = 1e-9);

struct AffineTransform {
  double scale = 1.0;   // must be > 0
  double offset = 0.0;
};

// Pairwise game on an undirected edge {i, j}. `payoff_i` has shape
// |A_i| x |A_j|, `payoff_j` has shape |A_j| x |A_i|.
struct Edge {
  int i = 0;
  int j = 0;
  Mat payoff_i;
  Mat payoff_j;
};

enum class GameForm { kPolymatrix, kNormalForm };

struct EdgeSumCheck {
  int edge_index = 0;
  bool constant_sum = false;
  double gamma = 0.0;          // the per-edge constant when constant_sum
  double max_violation = 0.0;
  int worst_row = 0;           // offending profile when not constant-sum
  int worst_col = 0;
};

struct ConstantSumReport {
  bool ok = false;
  std::vector<EdgeSumCheck> edges;
};

// A finite game: either an N-player normal-form payoff tensor per player
// or a polymatrix edge list, with optional per-player positive-affine
// payoff transforms applied on top of the stored ("base") payoffs.
//
// Immutable after construction; all evaluation is const and pure.
class Game {
 public:
  // An empty placeholder; valid games come from the factories below.
  Game() = default;

  // Polymatrix constructor. 2-player normal-form games are routed here
  // by MakeNormalForm so downstream code sees one representation.
  static Game MakePolymatrix(std::vector<int> actions, std::vector<Edge> edges,
                             std::vector<AffineTransform> affine = {},
                             bool declared_constant_sum = false);

  // N-player normal form. `tensors[i]` is a flat row-major array over
  // (a_1, ..., a_N) of length prod |A_j|.
  static Game MakeNormalForm(std::vector<int> actions, std::vector<Vec> tensors,
                             std::vector<AffineTransform> affine = {},
                             bool declared_constant_sum = false);

  // 2-player zero-sum helper: player 1 receives A, player 2 receives -A^T.
  static Game MakeZeroSum(const Mat& a);

  int num_players() const { return static_cast<int>(actions_.size()); }
  const std::vector<int>& actions() const { return actions_; }
  int num_actions(int player) const { return actions_[player]; }
  GameForm form() const { return form_; }
  const std::vector<Edge>& edges() const { return edges_; }
  const std::vector<AffineTransform>& affine() const { return affine_; }
  bool declared_constant_sum() const { return declared_constant_sum_; }

  // Expected payoff of `player` at profile x, affine transform included.
  double ExpectedPayoff(const MixedProfile& x, int player) const;

  // Payoff vector v_i(x): per-action payoffs of `player` against x_{-i},
  // transformed as scale * v + offset * 1. Never depends on x[player].
  Vec PayoffVector(const MixedProfile& x, int player) const;

  // Per-edge constant-sum validation of the stored base payoffs at
  // tolerance `tol` (inputs are exact user constants).
  ConstantSumReport ValidateConstantSum(double tol = 1e-12) const;

  // FNV-1a over the canonical byte representation; used to tag outputs.
  std::uint64_t Hash() const;

  // Single-edge 2-player games expose the base payoff matrix of player 1.
  const Mat& TwoPlayerBaseMatrix() const;

 private:
  std::vector<int> actions_;
  GameForm form_ = GameForm::kPolymatrix;
  std::vector<Edge> edges_;             // polymatrix representation
  std::vector<Vec> tensors_;            // normal-form representation (N != 2)
  std::vector<AffineTransform> affine_;
  bool declared_constant_sum_ = false;
};

// Lowest action index wins ties.
int Argmax(const Vec& v);

}  // namespace forel
