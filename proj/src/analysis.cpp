#include "forel/analysis.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace forel {

CouplingReference MakeCouplingReference(MixedProfile x_star, Vec weights) {
  CouplingReference ref;
  if (weights.empty()) weights.assign(x_star.num_players(), 1.0);
  if (static_cast<int>(weights.size()) != x_star.num_players()) {
    throw std::invalid_argument("coupling weight count != player count");
  }
  for (double w : weights) {
    if (!(w > 0.0)) throw std::invalid_argument("coupling weights must be > 0");
  }
  ref.interior = true;
  for (const Vec& s : x_star.strategies) {
    for (double p : s) ref.interior = ref.interior && p > 0.0;
  }
  ref.x_star = std::move(x_star);
  ref.weights = std::move(weights);
  return ref;
}

Vec ConservedWeights(const Game& game) {
  Vec w(game.num_players(), 1.0);
  for (int i = 0; i < game.num_players(); ++i) {
    w[i] = 1.0 / game.affine()[i].scale;
  }
  return w;
}

double FenchelCoupling(const RegularizerSet& regs, const CouplingReference& ref,
                       const ScoreState& y) {
  if (y.num_players() != static_cast<int>(regs.size()) ||
      ref.x_star.num_players() != y.num_players()) {
    throw std::invalid_argument("coupling dimension mismatch");
  }
  double g = 0.0;
  for (int i = 0; i < y.num_players(); ++i) {
    double inner = 0.0;
    for (size_t k = 0; k < y[i].size(); ++k) {
      inner += y[i][k] * ref.x_star[i][k];
    }
    g += ref.weights[i] * (regs[i].Conjugate(y[i]) - inner);
  }
  return g;
}

double CouplingDrift(const Game& game, const RegularizerSet& regs,
                     const CouplingReference& ref, const ScoreState& y) {
  MixedProfile x = ChoiceProfile(regs, y);
  double drift = 0.0;
  for (int i = 0; i < game.num_players(); ++i) {
    Vec v = game.PayoffVector(x, i);
    double s = 0.0;
    for (size_t k = 0; k < v.size(); ++k) {
      s += v[k] * (x[i][k] - ref.x_star[i][k]);
    }
    drift += ref.weights[i] * s;
  }
  return drift;
}

double MaxCouplingDeviation(const RegularizerSet& regs,
                            const CouplingReference& ref,
                            const Trajectory& traj) {
  if (traj.states.empty()) return 0.0;
  double g0 = FenchelCoupling(regs, ref, traj.states[0]);
  double dev = 0.0;
  for (const ScoreState& y : traj.states) {
    dev = std::max(dev, std::fabs(FenchelCoupling(regs, ref, y) - g0));
  }
  return dev;
}

Vec RegretSeries(const Trajectory& traj, int player) {
  Vec out(traj.num_samples(), std::numeric_limits<double>::quiet_NaN());
  for (int k = 0; k < traj.num_samples(); ++k) {
    double t = traj.times[k];
    if (!(t > 0.0)) continue;
    const Vec& cum_v = traj.cum_payoff_vec[k][player];
    double best = cum_v[Argmax(cum_v)];
    out[k] = (best - traj.cum_utility[k][player]) / t;
  }
  return out;
}

namespace {

std::vector<std::vector<int>> ActiveSets(const RegularizerSet& regs,
                                         const ScoreState& y) {
  std::vector<std::vector<int>> sets(regs.size());
  MixedProfile x = ChoiceProfile(regs, y);
  for (size_t i = 0; i < regs.size(); ++i) {
    for (size_t k = 0; k < x[i].size(); ++k) {
      if (x[i][k] > 0.0) sets[i].push_back(static_cast<int>(k));
    }
  }
  return sets;
}

}  // namespace

DivergenceCheck DivergenceEstimate(const Game& game, const RegularizerSet& regs,
                                   const ReducedState& z, double delta) {
  if (!(delta > 0.0)) throw std::invalid_argument("delta must be > 0");
  bool any_euclidean = false;
  for (const Regularizer& r : regs) {
    any_euclidean = any_euclidean || r.kind() == RegularizerKind::kEuclidean;
  }

  DivergenceCheck out;
  std::vector<std::vector<int>> base_active;
  if (any_euclidean) base_active = ActiveSets(regs, Embed(z));

  double total = 0.0;
  for (int i = 0; i < z.num_players(); ++i) {
    for (size_t k = 0; k < z.diffs[i].size(); ++k) {
      ReducedState zp = z;
      zp.diffs[i][k] += delta;
      ReducedState zm = z;
      zm.diffs[i][k] -= delta;
      if (any_euclidean) {
        if (ActiveSets(regs, Embed(zp)) != base_active ||
            ActiveSets(regs, Embed(zm)) != base_active) {
          out.skipped_at_kink = true;
          out.value = std::numeric_limits<double>::quiet_NaN();
          return out;
        }
      }
      double fp = ReducedField(game, regs, zp).diffs[i][k];
      double fm = ReducedField(game, regs, zm).diffs[i][k];
      total += (fp - fm) / (2.0 * delta);
    }
  }
  out.value = total;
  return out;
}

RecurrenceReport RecurrenceStats(const Trajectory& traj, double epsilon,
                                 double t_min) {
  if (traj.num_samples() < 2) {
    throw std::invalid_argument("trajectory too short for recurrence stats");
  }
  if (traj.times.back() <= t_min) {
    throw std::invalid_argument("trajectory does not extend past the burn-in");
  }
  RecurrenceReport rep;
  rep.epsilon = epsilon;
  rep.t_min = t_min;
  rep.min_distance_after_burn_in = std::numeric_limits<double>::infinity();

  const MixedProfile& start = traj.profiles[0];
  bool armed = true;
  for (int k = 0; k < traj.num_samples(); ++k) {
    if (traj.times[k] <= t_min) continue;
    double d = ProfileDistance(traj.profiles[k], start);
    rep.min_distance_after_burn_in =
        std::min(rep.min_distance_after_burn_in, d);
    if (d < epsilon && armed) {
      ++rep.n_returns;
      armed = false;
      if (!rep.first_return_time) rep.first_return_time = traj.times[k];
    } else if (d > 2.0 * epsilon) {
      armed = true;
    }
  }
  return rep;
}

std::string SupportVerdictName(SupportVerdict v) {
  switch (v) {
    case SupportVerdict::kInteriorRecurrent:
      return "interior_recurrent";
    case SupportVerdict::kConvergingToFace:
      return "converging_to_face";
    case SupportVerdict::kConvergedToPure:
      return "converged_to_pure";
    case SupportVerdict::kInconclusive:
      return "inconclusive";
  }
  throw std::logic_error("unreachable");
}

double FaceMass(const MixedProfile& x,
                const std::vector<std::vector<int>>& support) {
  double mass = 0.0;
  for (int i = 0; i < x.num_players(); ++i) {
    for (int a = 0; a < static_cast<int>(x[i].size()); ++a) {
      bool in_support = std::find(support[i].begin(), support[i].end(), a) !=
                        support[i].end();
      if (!in_support) mass += x[i][a];
    }
  }
  return mass;
}

SupportClassification ClassifySupport(const Trajectory& traj,
                                      const EquilibriumReport& eq, double tol) {
  SupportClassification out;
  out.support = eq.essential;

  bool full_support = true;
  bool all_pure = true;
  for (int i = 0; i < eq.x_star.num_players(); ++i) {
    full_support = full_support &&
                   eq.essential[i].size() == eq.x_star[i].size();
    all_pure = all_pure && eq.essential[i].size() == 1;
  }
  if (full_support) {
    out.verdict = SupportVerdict::kInteriorRecurrent;
    return out;
  }

  const int n = traj.num_samples();
  const int tail_start = std::max(0, n - std::max(2, n / 10));
  out.final_face_mass = FaceMass(traj.profiles.back(), eq.essential);
  out.tail_monotone = true;
  double prev = std::numeric_limits<double>::infinity();
  for (int k = tail_start; k < n; ++k) {
    double fm = FaceMass(traj.profiles[k], eq.essential);
    if (fm > prev + tol) out.tail_monotone = false;
    prev = fm;
    out.tail_distance_to_x_star = std::max(
        out.tail_distance_to_x_star,
        ProfileDistance(traj.profiles[k], eq.x_star));
  }

  if (all_pure && out.tail_distance_to_x_star <= tol) {
    out.verdict = SupportVerdict::kConvergedToPure;
  } else if (out.tail_monotone) {
    out.verdict = SupportVerdict::kConvergingToFace;
  } else {
    out.verdict = SupportVerdict::kInconclusive;
  }
  return out;
}

double MaxScoreDifference(const Trajectory& traj,
                          const std::vector<int>& benchmark) {
  double worst = 0.0;
  for (const ScoreState& y : traj.states) {
    ReducedState z = Reduce(y, benchmark);
    for (const Vec& d : z.diffs) {
      for (double v : d) worst = std::max(worst, std::fabs(v));
    }
  }
  return worst;
}

}  // namespace forel
