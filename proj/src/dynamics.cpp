#include "forel/dynamics.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace forel {

RegularizerSet MakeRegularizers(const Game& game,
                                const std::vector<RegularizerKind>& kinds) {
  if (static_cast<int>(kinds.size()) != game.num_players()) {
    throw std::invalid_argument("need one regularizer kind per player");
  }
  RegularizerSet regs;
  regs.reserve(kinds.size());
  for (int i = 0; i < game.num_players(); ++i) {
    regs.emplace_back(kinds[i], game.num_actions(i));
  }
  return regs;
}

MixedProfile ChoiceProfile(const RegularizerSet& regs, const ScoreState& y) {
  if (y.num_players() != static_cast<int>(regs.size())) {
    throw std::invalid_argument("score state / regularizer count mismatch");
  }
  MixedProfile x;
  x.strategies.resize(y.num_players());
  for (int i = 0; i < y.num_players(); ++i) {
    x[i] = regs[i].ChoiceMap(y[i]);
  }
  return x;
}

ScoreState ForelField(const Game& game, const RegularizerSet& regs,
                      const ScoreState& y) {
  MixedProfile x = ChoiceProfile(regs, y);
  ScoreState dy;
  dy.scores.resize(game.num_players());
  for (int i = 0; i < game.num_players(); ++i) {
    dy[i] = game.PayoffVector(x, i);
  }
  return dy;
}

std::vector<int> DefaultBenchmark(const Game& game) {
  std::vector<int> b(game.num_players());
  for (int i = 0; i < game.num_players(); ++i) b[i] = game.num_actions(i) - 1;
  return b;
}

ReducedState Reduce(const ScoreState& y, const std::vector<int>& benchmark) {
  if (y.num_players() != static_cast<int>(benchmark.size())) {
    throw std::invalid_argument("benchmark size mismatch");
  }
  ReducedState z;
  z.benchmark = benchmark;
  z.diffs.resize(y.num_players());
  for (int i = 0; i < y.num_players(); ++i) {
    const Vec& yi = y[i];
    int b = benchmark[i];
    if (b < 0 || b >= static_cast<int>(yi.size())) {
      throw std::invalid_argument("benchmark action out of range");
    }
    for (int a = 0; a < static_cast<int>(yi.size()); ++a) {
      if (a != b) z.diffs[i].push_back(yi[a] - yi[b]);
    }
  }
  return z;
}

ScoreState Embed(const ReducedState& z) {
  ScoreState y;
  y.scores.resize(z.num_players());
  for (int i = 0; i < z.num_players(); ++i) {
    const int n = static_cast<int>(z.diffs[i].size()) + 1;
    int b = z.benchmark[i];
    y[i].assign(n, 0.0);
    int k = 0;
    for (int a = 0; a < n; ++a) {
      if (a != b) y[i][a] = z.diffs[i][k++];
    }
  }
  return y;
}

ReducedState ReducedField(const Game& game, const RegularizerSet& regs,
                          const ReducedState& z) {
  ScoreState y = Embed(z);
  MixedProfile x = ChoiceProfile(regs, y);
  ReducedState dz;
  dz.benchmark = z.benchmark;
  dz.diffs.resize(z.num_players());
  for (int i = 0; i < game.num_players(); ++i) {
    Vec v = game.PayoffVector(x, i);
    int b = z.benchmark[i];
    for (int a = 0; a < static_cast<int>(v.size()); ++a) {
      if (a != b) dz.diffs[i].push_back(v[a] - v[b]);
    }
  }
  return dz;
}

IntegrationMethod IntegrationMethodFromName(const std::string& name) {
  if (name == "rk4") return IntegrationMethod::kRk4;
  if (name == "euler") return IntegrationMethod::kEuler;
  throw std::invalid_argument("unknown integration method: " + name);
}

std::string IntegrationMethodName(IntegrationMethod m) {
  return m == IntegrationMethod::kRk4 ? "rk4" : "euler";
}

namespace {

struct FieldEval {
  std::vector<Vec> v;  // payoff vectors (the y-derivative)
  Vec u;               // realized payoffs <v_i, x_i>
};

FieldEval EvalField(const Game& game, const RegularizerSet& regs,
                    const std::vector<Vec>& y) {
  MixedProfile x;
  x.strategies.resize(regs.size());
  for (size_t i = 0; i < regs.size(); ++i) x[i] = regs[i].ChoiceMap(y[i]);
  FieldEval out;
  out.v.resize(regs.size());
  out.u.assign(regs.size(), 0.0);
  for (int i = 0; i < static_cast<int>(regs.size()); ++i) {
    out.v[i] = game.PayoffVector(x, i);
    for (size_t k = 0; k < out.v[i].size(); ++k) {
      out.u[i] += out.v[i][k] * x[i][k];
    }
  }
  return out;
}

std::vector<Vec> Saxpy(const std::vector<Vec>& y, double a,
                       const std::vector<Vec>& d) {
  std::vector<Vec> out = y;
  for (size_t i = 0; i < out.size(); ++i) {
    for (size_t k = 0; k < out[i].size(); ++k) out[i][k] += a * d[i][k];
  }
  return out;
}

}  // namespace

Trajectory Integrate(const Game& game, const RegularizerSet& regs,
                     const ScoreState& y0, const IntegrateOptions& opts) {
  if (!(opts.horizon > 0.0)) throw std::invalid_argument("horizon must be > 0");
  if (!(opts.step > 0.0)) throw std::invalid_argument("step must be > 0");
  if (opts.step > opts.horizon * (1.0 + 1e-12)) {
    throw std::invalid_argument("step must not exceed the horizon");
  }
  if (opts.sample_every < 1) {
    throw std::invalid_argument("sample_every must be >= 1");
  }
  const int n_players = game.num_players();
  if (y0.num_players() != n_players) {
    throw std::invalid_argument("initial scores have wrong player count");
  }
  for (int i = 0; i < n_players; ++i) {
    if (static_cast<int>(y0[i].size()) != game.num_actions(i)) {
      throw std::invalid_argument("initial score length mismatch");
    }
    for (double v : y0[i]) {
      if (!std::isfinite(v)) throw std::invalid_argument("non-finite y0");
    }
  }

  const double h = opts.step;
  const long long n_steps =
      std::max(1ll, static_cast<long long>(std::llround(opts.horizon / h)));

  std::vector<Vec> y = y0.scores;
  std::vector<Vec> cum_v(n_players);
  for (int i = 0; i < n_players; ++i) cum_v[i].assign(y[i].size(), 0.0);
  Vec cum_u(n_players, 0.0);

  Trajectory traj;
  traj.meta.step = h;
  traj.meta.method = opts.method;
  traj.meta.sample_every = opts.sample_every;
  traj.meta.game_hash = game.Hash();

  auto push_sample = [&](double t) {
    traj.times.push_back(t);
    traj.states.push_back(ScoreState{y});
    traj.profiles.push_back(ChoiceProfile(regs, ScoreState{y}));
    traj.cum_payoff_vec.push_back(ScoreState{cum_v});
    traj.cum_utility.push_back(cum_u);
  };
  push_sample(0.0);

  for (long long step = 1; step <= n_steps; ++step) {
    if (opts.method == IntegrationMethod::kRk4) {
      FieldEval k1 = EvalField(game, regs, y);
      FieldEval k2 = EvalField(game, regs, Saxpy(y, 0.5 * h, k1.v));
      FieldEval k3 = EvalField(game, regs, Saxpy(y, 0.5 * h, k2.v));
      FieldEval k4 = EvalField(game, regs, Saxpy(y, h, k3.v));
      for (int i = 0; i < n_players; ++i) {
        for (size_t k = 0; k < y[i].size(); ++k) {
          double inc = h / 6.0 *
                       (k1.v[i][k] + 2.0 * k2.v[i][k] + 2.0 * k3.v[i][k] +
                        k4.v[i][k]);
          y[i][k] += inc;
          cum_v[i][k] += inc;
        }
        cum_u[i] += h / 6.0 *
                    (k1.u[i] + 2.0 * k2.u[i] + 2.0 * k3.u[i] + k4.u[i]);
      }
    } else {
      FieldEval k1 = EvalField(game, regs, y);
      for (int i = 0; i < n_players; ++i) {
        for (size_t k = 0; k < y[i].size(); ++k) {
          y[i][k] += h * k1.v[i][k];
          cum_v[i][k] += h * k1.v[i][k];
        }
        cum_u[i] += h * k1.u[i];
      }
    }

    for (int i = 0; i < n_players; ++i) {
      for (double v : y[i]) {
        if (!std::isfinite(v) || std::fabs(v) > opts.guard) {
          throw DivergedError(static_cast<double>(step - 1) * h);
        }
      }
    }

    if (step % opts.sample_every == 0 || step == n_steps) {
      push_sample(static_cast<double>(step) * h);
    }
  }
  return traj;
}

std::vector<Vec> ReplicatorField(const Game& game, const MixedProfile& x) {
  CheckProfile(x, game.actions());
  std::vector<Vec> dx(game.num_players());
  for (int i = 0; i < game.num_players(); ++i) {
    Vec v = game.PayoffVector(x, i);
    double mean = 0.0;
    for (size_t k = 0; k < v.size(); ++k) mean += x[i][k] * v[k];
    dx[i].resize(v.size());
    for (size_t k = 0; k < v.size(); ++k) {
      dx[i][k] = x[i][k] * (v[k] - mean);
    }
  }
  return dx;
}

std::vector<Vec> ProjectionField(const Game& game, const MixedProfile& x,
                                 double support_tol) {
  CheckProfile(x, game.actions());
  std::vector<Vec> dx(game.num_players());
  for (int i = 0; i < game.num_players(); ++i) {
    Vec v = game.PayoffVector(x, i);
    double support_sum = 0.0;
    int support_size = 0;
    for (size_t k = 0; k < v.size(); ++k) {
      if (x[i][k] > support_tol) {
        support_sum += v[k];
        ++support_size;
      }
    }
    double mean = support_sum / static_cast<double>(support_size);
    dx[i].assign(v.size(), 0.0);
    for (size_t k = 0; k < v.size(); ++k) {
      if (x[i][k] > support_tol) dx[i][k] = v[k] - mean;
    }
  }
  return dx;
}

MixedProfile MwuStep(const Game& game, const MixedProfile& x, const Vec& eta) {
  CheckProfile(x, game.actions());
  if (static_cast<int>(eta.size()) != game.num_players()) {
    throw std::invalid_argument("need one learning rate per player");
  }
  for (double e : eta) {
    if (!(e > 0.0)) throw std::invalid_argument("learning rates must be > 0");
  }
  MixedProfile next;
  next.strategies.resize(game.num_players());
  for (int i = 0; i < game.num_players(); ++i) {
    Vec v = game.PayoffVector(x, i);
    double m = v[Argmax(v)];
    Vec w(v.size());
    double total = 0.0;
    for (size_t k = 0; k < v.size(); ++k) {
      w[k] = x[i][k] * std::exp(eta[i] * (v[k] - m));  // zeros persist
      total += w[k];
    }
    for (double& p : w) p /= total;
    next[i] = std::move(w);
  }
  return next;
}

}  // namespace forel
