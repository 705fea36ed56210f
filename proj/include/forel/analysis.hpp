#pragma once

#include <optional>
#include <string>
#include <vector>

#include "forel/dynamics.hpp"
#include "forel/equilibrium.hpp"
#include "forel/game.hpp"
#include "forel/regularizer.hpp"

namespace forel {

// Reference point of the primal-dual coupling: an equilibrium profile
// plus per-player positive weights (used for affine-transformed games).
struct CouplingReference {
  MixedProfile x_star;
  Vec weights;
  bool interior = false;
};

CouplingReference MakeCouplingReference(MixedProfile x_star, Vec weights = {});

// Weights that make the coupling a constant of motion for a game whose
// stored payoffs are scaled per player: the inverse affine scales.
Vec ConservedWeights(const Game& game);

// G(y) = sum_i w_i [h_i*(y_i) - <y_i, x*_i>].
double FenchelCoupling(const RegularizerSet& regs, const CouplingReference& ref,
                       const ScoreState& y);

// dG/dt along the score dynamics: sum_i w_i <v_i(Q(y)), Q_i(y) - x*_i>.
double CouplingDrift(const Game& game, const RegularizerSet& regs,
                     const CouplingReference& ref, const ScoreState& y);

// max_k |G(y_k) - G(y_0)| over the trajectory samples.
double MaxCouplingDeviation(const RegularizerSet& regs,
                            const CouplingReference& ref,
                            const Trajectory& traj);

// Time-averaged regret of one player at the sample times:
// R_i(t_k) = (max_a cum_payoff_vec - cum_utility) / t_k. The t = 0 sample
// is skipped (NaN).
Vec RegretSeries(const Trajectory& traj, int player);

struct DivergenceCheck {
  double value = 0.0;
  bool skipped_at_kink = false;
};

// Central finite-difference estimate of the reduced field's divergence
// sum over (i, a) of dV_{i,a}/dz_{i,a}. With a Euclidean regularizer the
// estimate is refused (skipped_at_kink) unless the projection's active
// set is stable under +/- delta perturbations of every coordinate.
DivergenceCheck DivergenceEstimate(const Game& game, const RegularizerSet& regs,
                                   const ReducedState& z, double delta);

struct RecurrenceReport {
  double epsilon = 0.0;
  double t_min = 0.0;
  std::optional<double> first_return_time;
  double min_distance_after_burn_in = 0.0;
  int n_returns = 0;
};

// Scans samples after the burn-in for sup-norm returns of the profile to
// profiles[0]. Visits are counted disjointly: a new visit requires an
// excursion above 2 * epsilon since the previous one.
RecurrenceReport RecurrenceStats(const Trajectory& traj, double epsilon,
                                 double t_min);

enum class SupportVerdict {
  kInteriorRecurrent,
  kConvergingToFace,
  kConvergedToPure,
  kInconclusive,
};

std::string SupportVerdictName(SupportVerdict v);

struct SupportClassification {
  SupportVerdict verdict = SupportVerdict::kInconclusive;
  std::vector<std::vector<int>> support;  // the equilibrium essential sets
  double final_face_mass = 0.0;
  double tail_distance_to_x_star = 0.0;
  bool tail_monotone = false;
};

// Classifies the trajectory tail (last 10% of samples) against the
// maximal-support equilibrium of a 2-player zero-sum game. Face mass is
// the total probability on actions outside the equilibrium support.
SupportClassification ClassifySupport(const Trajectory& traj,
                                      const EquilibriumReport& eq, double tol);

// Mass placed outside the given supports.
double FaceMass(const MixedProfile& x,
                const std::vector<std::vector<int>>& support);

// sup over samples and players of |y_{i,a} - y_{i,benchmark}|.
double MaxScoreDifference(const Trajectory& traj,
                          const std::vector<int>& benchmark);

}  // namespace forel
