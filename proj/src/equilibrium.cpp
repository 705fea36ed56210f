#include "forel/equilibrium.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

namespace forel {

namespace {

constexpr double kPivotTol = 1e-9;
constexpr double kFeasTol = 1e-9;

// Dense tableau simplex core. Rows 0..m-1 hold [A | b] with b >= 0 and an
// identity start basis; the objective row holds negated costs so that a
// negative entry marks an improving column. Bland's rule throughout.
class Tableau {
 public:
  Tableau(int rows, int cols)
      : m_(rows), n_(cols), t_(rows + 1, Vec(cols + 1, 0.0)), basis_(rows, -1) {}

  double& at(int r, int c) { return t_[r][c]; }
  double& rhs(int r) { return t_[r][n_]; }
  double& obj(int c) { return t_[m_][c]; }
  double& obj_rhs() { return t_[m_][n_]; }
  int basis(int r) const { return basis_[r]; }
  void set_basis(int r, int v) { basis_[r] = v; }

  void Pivot(int row, int col) {
    double p = t_[row][col];
    for (int c = 0; c <= n_; ++c) t_[row][c] /= p;
    for (int r = 0; r <= m_; ++r) {
      if (r == row) continue;
      double f = t_[r][col];
      if (f == 0.0) continue;
      for (int c = 0; c <= n_; ++c) t_[r][c] -= f * t_[row][c];
    }
    basis_[row] = col;
  }

  // Returns false when unbounded. Columns at or beyond `enter_limit`
  // (the artificials, in phase 2) never enter the basis.
  bool Optimize(int enter_limit) {
    for (;;) {
      int enter = -1;
      for (int c = 0; c < enter_limit; ++c) {
        if (t_[m_][c] < -kPivotTol) {
          enter = c;  // Bland: lowest index
          break;
        }
      }
      if (enter < 0) return true;
      int leave = -1;
      double best_ratio = 0.0;
      for (int r = 0; r < m_; ++r) {
        if (t_[r][enter] > kPivotTol) {
          double ratio = t_[r][n_] / t_[r][enter];
          if (leave < 0 || ratio < best_ratio - kPivotTol ||
              (ratio < best_ratio + kPivotTol && basis_[r] < basis_[leave])) {
            leave = r;
            best_ratio = ratio;
          }
        }
      }
      if (leave < 0) return false;
      Pivot(leave, enter);
    }
  }

  int num_rows() const { return m_; }
  int num_cols() const { return n_; }

 private:
  int m_;
  int n_;
  std::vector<Vec> t_;
  std::vector<int> basis_;
};

struct Standardized {
  // x_original[k] = shift[k] + sum over (col, sign) of parts[k]
  struct VarMap {
    double shift = 0.0;
    int pos_col = -1;
    int neg_col = -1;  // only for free variables
  };
  std::vector<VarMap> vars;
  std::vector<Vec> rows;
  std::vector<RowSense> senses;
  Vec rhs;
  Vec cost;            // over standardized columns
  double cost_shift = 0.0;
  int num_cols = 0;
};

Standardized StandardizeBounds(const LinearProgram& lp) {
  const int n = lp.num_vars();
  if (static_cast<int>(lp.rows.size()) != lp.num_rows() ||
      static_cast<int>(lp.senses.size()) != lp.num_rows() ||
      static_cast<int>(lp.rhs.size()) != lp.num_rows()) {
    throw std::invalid_argument("inconsistent LP row data");
  }
  for (const Vec& row : lp.rows) {
    if (static_cast<int>(row.size()) != n) {
      throw std::invalid_argument("LP row width != variable count");
    }
  }
  Vec lower = lp.lower.empty() ? Vec(n, 0.0) : lp.lower;
  Vec upper = lp.upper.empty() ? Vec(n, kInf) : lp.upper;
  if (static_cast<int>(lower.size()) != n || static_cast<int>(upper.size()) != n) {
    throw std::invalid_argument("LP bound size != variable count");
  }

  Standardized s;
  s.vars.resize(n);
  int col = 0;
  for (int k = 0; k < n; ++k) {
    if (lower[k] > -kInf) {
      s.vars[k].shift = lower[k];
      s.vars[k].pos_col = col++;
    } else {
      s.vars[k].pos_col = col++;
      s.vars[k].neg_col = col++;
    }
  }
  s.num_cols = col;
  s.cost.assign(col, 0.0);
  for (int k = 0; k < n; ++k) {
    s.cost[s.vars[k].pos_col] += lp.objective[k];
    if (s.vars[k].neg_col >= 0) s.cost[s.vars[k].neg_col] -= lp.objective[k];
    s.cost_shift += lp.objective[k] * s.vars[k].shift;
  }

  auto add_row = [&s, &lp, n](const Vec& coeffs, RowSense sense, double b) {
    Vec row(s.num_cols, 0.0);
    double shift = 0.0;
    for (int k = 0; k < n; ++k) {
      row[s.vars[k].pos_col] += coeffs[k];
      if (s.vars[k].neg_col >= 0) row[s.vars[k].neg_col] -= coeffs[k];
      shift += coeffs[k] * s.vars[k].shift;
    }
    s.rows.push_back(std::move(row));
    s.senses.push_back(sense);
    s.rhs.push_back(b - shift);
  };

  for (int r = 0; r < lp.num_rows(); ++r) {
    add_row(lp.rows[r], lp.senses[r], lp.rhs[r]);
  }
  for (int k = 0; k < n; ++k) {
    if (upper[k] < kInf) {
      Vec unit(n, 0.0);
      unit[k] = 1.0;
      add_row(unit, RowSense::kLe, upper[k]);
    }
  }
  return s;
}

}  // namespace

LpSolution LpSolve(const LinearProgram& lp) {
  Standardized s = StandardizeBounds(lp);
  const int m = static_cast<int>(s.rows.size());
  const int n = s.num_cols;

  // Flip rows to nonnegative rhs.
  for (int r = 0; r < m; ++r) {
    if (s.rhs[r] < 0.0) {
      for (double& v : s.rows[r]) v = -v;
      s.rhs[r] = -s.rhs[r];
      if (s.senses[r] == RowSense::kLe) {
        s.senses[r] = RowSense::kGe;
      } else if (s.senses[r] == RowSense::kGe) {
        s.senses[r] = RowSense::kLe;
      }
    }
  }

  int n_slack = 0;
  int n_art = 0;
  for (RowSense sense : s.senses) {
    if (sense == RowSense::kLe) {
      ++n_slack;
    } else if (sense == RowSense::kGe) {
      ++n_slack;
      ++n_art;
    } else {
      ++n_art;
    }
  }

  const int total = n + n_slack + n_art;
  Tableau tab(m, total);
  int slack_col = n;
  int art_col = n + n_slack;
  std::vector<int> art_cols;
  for (int r = 0; r < m; ++r) {
    for (int c = 0; c < n; ++c) tab.at(r, c) = s.rows[r][c];
    tab.rhs(r) = s.rhs[r];
    switch (s.senses[r]) {
      case RowSense::kLe:
        tab.at(r, slack_col) = 1.0;
        tab.set_basis(r, slack_col++);
        break;
      case RowSense::kGe:
        tab.at(r, slack_col++) = -1.0;
        tab.at(r, art_col) = 1.0;
        art_cols.push_back(art_col);
        tab.set_basis(r, art_col++);
        break;
      case RowSense::kEq:
        tab.at(r, art_col) = 1.0;
        art_cols.push_back(art_col);
        tab.set_basis(r, art_col++);
        break;
    }
  }

  LpSolution out;

  if (n_art > 0) {
    // Phase 1: minimize the artificial sum; price the basic artificials
    // out of the objective row.
    for (int c : art_cols) tab.obj(c) = 1.0;
    for (int r = 0; r < m; ++r) {
      if (tab.basis(r) < n + n_slack) continue;
      for (int c = 0; c < total; ++c) tab.obj(c) -= tab.at(r, c);
      tab.obj_rhs() -= tab.rhs(r);
    }
    if (!tab.Optimize(total)) {
      throw std::logic_error("phase-1 simplex reported unbounded");
    }
    if (-tab.obj_rhs() > kFeasTol) {
      out.status = LpStatus::kInfeasible;
      return out;
    }
    // Drive any remaining artificial out of the basis.
    for (int r = 0; r < m; ++r) {
      if (tab.basis(r) < n + n_slack) continue;
      int pivot_col = -1;
      for (int c = 0; c < n + n_slack; ++c) {
        if (std::fabs(tab.at(r, c)) > kPivotTol) {
          pivot_col = c;
          break;
        }
      }
      if (pivot_col >= 0) tab.Pivot(r, pivot_col);
      // Otherwise the row is redundant; the artificial stays basic at 0.
    }
    // Reset objective row for phase 2.
    for (int c = 0; c < total; ++c) tab.obj(c) = 0.0;
    tab.obj_rhs() = 0.0;
  }

  // Phase 2 objective (maximize): load -c and price out the basis.
  for (int c = 0; c < n; ++c) tab.obj(c) = -s.cost[c];
  for (int r = 0; r < m; ++r) {
    int b = tab.basis(r);
    double f = tab.obj(b);
    if (f == 0.0) continue;
    for (int c = 0; c < total; ++c) tab.obj(c) -= f * tab.at(r, c);
    tab.obj_rhs() -= f * tab.rhs(r);
  }
  if (!tab.Optimize(n + n_slack)) {
    out.status = LpStatus::kUnbounded;
    return out;
  }

  Vec std_x(total, 0.0);
  for (int r = 0; r < m; ++r) std_x[tab.basis(r)] = tab.rhs(r);
  out.x.assign(lp.num_vars(), 0.0);
  for (int k = 0; k < lp.num_vars(); ++k) {
    const auto& vm = s.vars[k];
    out.x[k] = vm.shift + std_x[vm.pos_col];
    if (vm.neg_col >= 0) out.x[k] -= std_x[vm.neg_col];
  }
  out.objective = tab.obj_rhs() + s.cost_shift;
  out.status = LpStatus::kOptimal;
  return out;
}

namespace {

// min sum(u) s.t. A'^T u >= 1, u >= 0 for the maximizer (and the mirrored
// LP for the minimizer) with A' = A + shift > 0; value = 1 / sum(u).
LpSolution SolveScaledStrategyLp(const Mat& a_pos, bool maximizer) {
  const int own = maximizer ? a_pos.rows : a_pos.cols;
  const int opp = maximizer ? a_pos.cols : a_pos.rows;
  LinearProgram lp;
  // Maximizer: min sum(u) == max -sum(u); minimizer: max sum(w).
  lp.objective.assign(own, maximizer ? -1.0 : 1.0);
  for (int r = 0; r < opp; ++r) {
    Vec row(own, 0.0);
    for (int c = 0; c < own; ++c) {
      row[c] = maximizer ? a_pos.at(c, r) : a_pos.at(r, c);
    }
    lp.rows.push_back(std::move(row));
    lp.senses.push_back(maximizer ? RowSense::kGe : RowSense::kLe);
    lp.rhs.push_back(1.0);
  }
  LpSolution sol = LpSolve(lp);
  if (sol.status != LpStatus::kOptimal) {
    throw std::runtime_error("zero-sum strategy LP failed");
  }
  return sol;
}

}  // namespace

ZeroSumSolution ZeroSumSolve(const Mat& a) {
  if (a.rows < 1 || a.cols < 1) throw std::invalid_argument("empty matrix");
  for (double v : a.data) {
    if (!std::isfinite(v)) throw std::invalid_argument("non-finite payoff");
  }
  double lo = *std::min_element(a.data.begin(), a.data.end());
  double shift = 1.0 - lo;  // all entries >= 1 keeps the value positive
  Mat a_pos = a;
  for (double& v : a_pos.data) v += shift;

  LpSolution max_lp = SolveScaledStrategyLp(a_pos, true);
  LpSolution min_lp = SolveScaledStrategyLp(a_pos, false);
  double sum_u = -max_lp.objective;
  double sum_w = min_lp.objective;
  double v1 = 1.0 / sum_u;
  double v2 = 1.0 / sum_w;

  ZeroSumSolution out;
  out.duality_gap = std::fabs(v1 - v2);
  out.value = v1 - shift;
  out.x1.assign(a.rows, 0.0);
  for (int k = 0; k < a.rows; ++k) out.x1[k] = max_lp.x[k] * v1;
  out.x2.assign(a.cols, 0.0);
  for (int k = 0; k < a.cols; ++k) out.x2[k] = min_lp.x[k] * v2;
  return out;
}

namespace {

// Optimal-strategy polytope constraints for one side of the game:
// x >= 0, sum x = 1, (A^T x >= value) for the maximizer or
// (A y <= value) for the minimizer.
LinearProgram OptimalPolytopeLp(const Mat& a, double value, bool maximizer) {
  const int own = maximizer ? a.rows : a.cols;
  const int opp = maximizer ? a.cols : a.rows;
  LinearProgram lp;
  lp.objective.assign(own, 0.0);
  for (int r = 0; r < opp; ++r) {
    Vec row(own, 0.0);
    for (int c = 0; c < own; ++c) {
      row[c] = maximizer ? a.at(c, r) : a.at(r, c);
    }
    lp.rows.push_back(std::move(row));
    lp.senses.push_back(maximizer ? RowSense::kGe : RowSense::kLe);
    lp.rhs.push_back(value);
  }
  lp.rows.push_back(Vec(own, 1.0));
  lp.senses.push_back(RowSense::kEq);
  lp.rhs.push_back(1.0);
  return lp;
}

Vec SolveOverPolytope(const Mat& a, double value, bool maximizer,
                      const Vec& objective, double* optimum) {
  LinearProgram lp = OptimalPolytopeLp(a, value, maximizer);
  lp.objective = objective;
  LpSolution sol = LpSolve(lp);
  if (sol.status != LpStatus::kOptimal) {
    throw std::runtime_error("optimal-strategy polytope LP failed");
  }
  if (optimum != nullptr) *optimum = sol.objective;
  return sol.x;
}

}  // namespace

EssentialSets EssentialStrategies(const Mat& a) {
  constexpr double kEssentialTol = 1e-9;
  ZeroSumSolution base = ZeroSumSolve(a);

  EssentialSets out;
  out.value = base.value;
  out.essential.resize(2);
  out.support_witnesses.resize(2);
  out.punishers.resize(2);

  for (int player = 0; player < 2; ++player) {
    const bool maximizer = (player == 0);
    const int own = maximizer ? a.rows : a.cols;
    for (int action = 0; action < own; ++action) {
      Vec obj(own, 0.0);
      obj[action] = 1.0;
      double opt = 0.0;
      Vec witness = SolveOverPolytope(a, base.value, maximizer, obj, &opt);
      if (opt > kEssentialTol) {
        out.essential[player].push_back(action);
        out.support_witnesses[player].push_back(std::move(witness));
      }
    }
  }

  // Punisher for each non-essential action: the opponent optimal strategy
  // minimizing that action's payoff (maximizing it, for the minimizer's
  // non-essential columns).
  for (int player = 0; player < 2; ++player) {
    const bool maximizer = (player == 0);
    const int own = maximizer ? a.rows : a.cols;
    for (int action = 0; action < own; ++action) {
      if (std::find(out.essential[player].begin(), out.essential[player].end(),
                    action) != out.essential[player].end()) {
        continue;
      }
      const int opp_n = maximizer ? a.cols : a.rows;
      Vec obj(opp_n, 0.0);
      for (int k = 0; k < opp_n; ++k) {
        // Payoff of `action` against the opponent strategy; the punisher
        // makes the maximizer's row strictly below the value (so minimize
        // it) and the minimizer's column strictly above (so maximize -).
        obj[k] = maximizer ? -a.at(action, k) : a.at(k, action);
      }
      Vec punisher = SolveOverPolytope(a, base.value, !maximizer, obj, nullptr);
      out.punishers[player].emplace_back(action, std::move(punisher));
    }
  }
  return out;
}

EquilibriumReport MaxSupportEquilibrium(const Mat& a) {
  EssentialSets ess = EssentialStrategies(a);

  EquilibriumReport rep;
  rep.value = ess.value;
  rep.essential = ess.essential;
  rep.punishers = ess.punishers;
  rep.x_star.strategies.resize(2);

  for (int player = 0; player < 2; ++player) {
    const int own = (player == 0) ? a.rows : a.cols;
    std::vector<Vec> parts = ess.support_witnesses[player];
    // Punishers of the *opponent's* non-essential actions are strategies
    // of this player; fold them into the barycenter.
    for (const auto& [action, strat] : ess.punishers[1 - player]) {
      (void)action;
      parts.push_back(strat);
    }
    Vec mean(own, 0.0);
    for (const Vec& p : parts) {
      for (int k = 0; k < own; ++k) mean[k] += p[k];
    }
    for (double& v : mean) v /= static_cast<double>(parts.size());
    rep.x_star[player] = std::move(mean);
  }

  // Margins of non-essential actions against the barycenter.
  rep.margins.resize(2);
  rep.margins[0].assign(a.rows, 0.0);
  rep.margins[1].assign(a.cols, 0.0);
  for (int action = 0; action < a.rows; ++action) {
    bool essential =
        std::find(rep.essential[0].begin(), rep.essential[0].end(), action) !=
        rep.essential[0].end();
    if (essential) continue;
    double pay = 0.0;
    for (int c = 0; c < a.cols; ++c) pay += a.at(action, c) * rep.x_star[1][c];
    rep.margins[0][action] = rep.value - pay;
  }
  for (int action = 0; action < a.cols; ++action) {
    bool essential =
        std::find(rep.essential[1].begin(), rep.essential[1].end(), action) !=
        rep.essential[1].end();
    if (essential) continue;
    double pay = 0.0;
    for (int r = 0; r < a.rows; ++r) pay += a.at(r, action) * rep.x_star[0][r];
    // Minimizer deviating to `action` concedes pay > value.
    rep.margins[1][action] = pay - rep.value;
  }
  return rep;
}

NashCheck VerifyNash(const Game& game, const MixedProfile& x, double tol) {
  CheckProfile(x, game.actions());
  NashCheck out;
  out.gaps.resize(game.num_players());
  for (int i = 0; i < game.num_players(); ++i) {
    Vec v = game.PayoffVector(x, i);
    double u = 0.0;
    for (size_t k = 0; k < v.size(); ++k) u += v[k] * x[i][k];
    double best = v[Argmax(v)];
    out.gaps[i] = best - u;
    out.max_gap = std::max(out.max_gap, out.gaps[i]);
  }
  out.is_nash = out.max_gap <= tol;
  return out;
}

namespace {

// Minimum-norm solution of a (possibly rank-deficient but consistent)
// linear system via conjugate gradients on the normal equations
// A A^T w = b, x = A^T w. Returns false when the system is inconsistent
// at the tolerance. Games with a continuum of interior equilibria (the
// pennies cycle has a whole line of them) make the equalization system
// singular, so plain elimination is not enough here.
bool SolveMinNorm(const std::vector<Vec>& a, const Vec& b, Vec* out,
                  double tol = 1e-9) {
  const int m = static_cast<int>(a.size());
  const int n = m == 0 ? 0 : static_cast<int>(a[0].size());

  auto apply_normal = [&](const Vec& w) {
    Vec ax(n, 0.0);
    for (int r = 0; r < m; ++r) {
      for (int c = 0; c < n; ++c) ax[c] += a[r][c] * w[r];
    }
    Vec result(m, 0.0);
    for (int r = 0; r < m; ++r) {
      for (int c = 0; c < n; ++c) result[r] += a[r][c] * ax[c];
    }
    return result;
  };
  auto dot = [](const Vec& u, const Vec& v) {
    double s = 0.0;
    for (size_t k = 0; k < u.size(); ++k) s += u[k] * v[k];
    return s;
  };

  double scale = 1e-30;
  for (const Vec& row : a) {
    for (double v : row) scale = std::max(scale, std::fabs(v));
  }
  for (double v : b) scale = std::max(scale, std::fabs(v));

  Vec w(m, 0.0);
  Vec r = b;
  Vec p = r;
  double rs = dot(r, r);
  for (int it = 0; it < 8 * m && std::sqrt(rs) > 1e-14 * scale; ++it) {
    Vec mp = apply_normal(p);
    double denom = dot(p, mp);
    if (denom <= 0.0) break;
    double alpha = rs / denom;
    for (int k = 0; k < m; ++k) {
      w[k] += alpha * p[k];
      r[k] -= alpha * mp[k];
    }
    double rs_next = dot(r, r);
    double beta = rs_next / rs;
    rs = rs_next;
    for (int k = 0; k < m; ++k) p[k] = r[k] + beta * p[k];
  }

  out->assign(n, 0.0);
  for (int row = 0; row < m; ++row) {
    for (int c = 0; c < n; ++c) (*out)[c] += a[row][c] * w[row];
  }
  // Consistency of the original system at the candidate solution.
  for (int row = 0; row < m; ++row) {
    double resid = -b[row];
    for (int c = 0; c < n; ++c) resid += a[row][c] * (*out)[c];
    if (std::fabs(resid) > tol * std::max(1.0, scale)) return false;
  }
  return true;
}

}  // namespace

InteriorSolveResult PolymatrixInteriorEquilibrium(const Game& game) {
  if (game.form() != GameForm::kPolymatrix) {
    return {std::nullopt, "interior solve needs a polymatrix game"};
  }
  const int n_players = game.num_players();
  std::vector<int> offset(n_players, 0);
  int total = 0;
  for (int i = 0; i < n_players; ++i) {
    offset[i] = total;
    total += game.num_actions(i);
  }

  std::vector<Vec> m;
  Vec b;
  // Equalization rows: v_{i,alpha}(x) - v_{i,last}(x) = 0, linear in the
  // opponents' coordinates for polymatrix payoffs.
  for (int i = 0; i < n_players; ++i) {
    const int ni = game.num_actions(i);
    for (int alpha = 0; alpha + 1 < ni; ++alpha) {
      Vec row(total, 0.0);
      for (const Edge& e : game.edges()) {
        if (e.i == i) {
          for (int c = 0; c < e.payoff_i.cols; ++c) {
            row[offset[e.j] + c] +=
                e.payoff_i.at(alpha, c) - e.payoff_i.at(ni - 1, c);
          }
        } else if (e.j == i) {
          for (int c = 0; c < e.payoff_j.cols; ++c) {
            row[offset[e.i] + c] +=
                e.payoff_j.at(alpha, c) - e.payoff_j.at(ni - 1, c);
          }
        }
      }
      m.push_back(std::move(row));
      b.push_back(0.0);
    }
  }
  for (int i = 0; i < n_players; ++i) {
    Vec row(total, 0.0);
    for (int k = 0; k < game.num_actions(i); ++k) row[offset[i] + k] = 1.0;
    m.push_back(std::move(row));
    b.push_back(1.0);
  }

  // Solve for the deviation from the uniform profile; with a continuum
  // of equilibria the minimum-norm deviation picks the most mixed one.
  Vec uniform(total, 0.0);
  for (int i = 0; i < n_players; ++i) {
    for (int k = 0; k < game.num_actions(i); ++k) {
      uniform[offset[i] + k] = 1.0 / game.num_actions(i);
    }
  }
  Vec residual = b;
  for (size_t row = 0; row < m.size(); ++row) {
    for (int c = 0; c < total; ++c) residual[row] -= m[row][c] * uniform[c];
  }
  Vec delta;
  if (!SolveMinNorm(m, residual, &delta)) {
    return {std::nullopt, "equalization system has no solution"};
  }
  MixedProfile x;
  x.strategies.resize(n_players);
  for (int i = 0; i < n_players; ++i) {
    x[i].resize(game.num_actions(i));
    for (int k = 0; k < game.num_actions(i); ++k) {
      x[i][k] = uniform[offset[i] + k] + delta[offset[i] + k];
    }
    for (double p : x[i]) {
      if (!(p > 0.0)) {
        return {std::nullopt, "equalization solution is not interior"};
      }
    }
  }
  return {std::move(x), ""};
}

}  // namespace forel
