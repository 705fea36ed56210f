#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

#include "forel/game.hpp"
#include "forel/regularizer.hpp"

namespace forel {

// Cumulative score vectors y_i, one per player.
struct ScoreState {
  std::vector<Vec> scores;

  int num_players() const { return static_cast<int>(scores.size()); }
  Vec& operator[](int i) { return scores[i]; }
  const Vec& operator[](int i) const { return scores[i]; }
};

// Per-player score differences against a benchmark action; z_i drops the
// benchmark coordinate, so it has length |A_i| - 1.
struct ReducedState {
  std::vector<Vec> diffs;
  std::vector<int> benchmark;

  int num_players() const { return static_cast<int>(diffs.size()); }
};

using RegularizerSet = std::vector<Regularizer>;

RegularizerSet MakeRegularizers(const Game& game,
                                const std::vector<RegularizerKind>& kinds);

// x_i = Q_i(y_i) for every player.
MixedProfile ChoiceProfile(const RegularizerSet& regs, const ScoreState& y);

// The score-space field: d/dt y_i = v_i(Q(y)).
ScoreState ForelField(const Game& game, const RegularizerSet& regs,
                      const ScoreState& y);

// Benchmark per player defaults to the last action index.
std::vector<int> DefaultBenchmark(const Game& game);

ReducedState Reduce(const ScoreState& y, const std::vector<int>& benchmark);

// Right inverse of Reduce with the benchmark coordinate pinned to zero;
// any right inverse induces the same profile because the choice map is
// invariant under per-player constant shifts.
ScoreState Embed(const ReducedState& z);

// d/dt z_{i,a} = v_{i,a}(Q(embed(z))) - v_{i,benchmark}(Q(embed(z))).
ReducedState ReducedField(const Game& game, const RegularizerSet& regs,
                          const ReducedState& z);

enum class IntegrationMethod { kRk4, kEuler };

IntegrationMethod IntegrationMethodFromName(const std::string& name);
std::string IntegrationMethodName(IntegrationMethod m);

struct TrajectoryMeta {
  double step = 0.0;
  IntegrationMethod method = IntegrationMethod::kRk4;
  int sample_every = 1;
  std::uint64_t game_hash = 0;
};

// Sampled solution of the score dynamics plus the running payoff
// integrals needed by the regret diagnostic. cum_payoff_vec[k][i] is
// the integral of v_i over [0, t_k]; cum_utility[k][i] the integral of
// u_i. Both are accumulated with the integrator's own quadrature order.
struct Trajectory {
  Vec times;
  std::vector<ScoreState> states;
  std::vector<MixedProfile> profiles;
  std::vector<ScoreState> cum_payoff_vec;
  std::vector<Vec> cum_utility;
  TrajectoryMeta meta;

  int num_samples() const { return static_cast<int>(times.size()); }
  int num_players() const {
    return states.empty() ? 0 : states[0].num_players();
  }
};

// Raised when a score coordinate leaves the guard box (|y| > 1e9) or
// turns non-finite; carries the last time with a valid state.
class DivergedError : public std::runtime_error {
 public:
  explicit DivergedError(double last_valid_time)
      : std::runtime_error("integration diverged"),
        last_valid_time_(last_valid_time) {}
  double last_valid_time() const { return last_valid_time_; }

 private:
  double last_valid_time_;
};

struct IntegrateOptions {
  double horizon = 0.0;       // T > 0
  double step = 0.0;          // h in (0, T]
  IntegrationMethod method = IntegrationMethod::kRk4;
  int sample_every = 1;
  double guard = 1e9;
};

Trajectory Integrate(const Game& game, const RegularizerSet& regs,
                     const ScoreState& y0, const IntegrateOptions& opts);

// d/dt x_{i,a} = x_{i,a} (v_{i,a}(x) - <x_i, v_i(x)>); tangent to the
// simplex and leaves faces invariant.
std::vector<Vec> ReplicatorField(const Game& game, const MixedProfile& x);

// Mean-adjusted payoffs on the support, zero off it; the support is
// {a : x_{i,a} > support_tol}.
std::vector<Vec> ProjectionField(const Game& game, const MixedProfile& x,
                                 double support_tol);

// One discrete multiplicative-weights update with per-player rates.
MixedProfile MwuStep(const Game& game, const MixedProfile& x, const Vec& eta);

}  // namespace forel
