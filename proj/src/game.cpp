#include "forel/game.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace forel {

Mat Mat::FromRows(const std::vector<Vec>& rws) {
  Mat m(static_cast<int>(rws.size()),
        rws.empty() ? 0 : static_cast<int>(rws[0].size()));
  for (int r = 0; r < m.rows; ++r) {
    if (static_cast<int>(rws[r].size()) != m.cols) {
      throw std::invalid_argument("ragged matrix rows");
    }
    for (int c = 0; c < m.cols; ++c) m.at(r, c) = rws[r][c];
  }
  return m;
}

Vec Mat::Apply(const Vec& v) const {
  if (static_cast<int>(v.size()) != cols) {
    throw std::invalid_argument("matrix-vector shape mismatch");
  }
  Vec out(rows, 0.0);
  for (int r = 0; r < rows; ++r) {
    double s = 0.0;
    for (int c = 0; c < cols; ++c) s += at(r, c) * v[c];
    out[r] = s;
  }
  return out;
}

Vec Mat::ApplyTransposed(const Vec& v) const {
  if (static_cast<int>(v.size()) != rows) {
    throw std::invalid_argument("matrix-vector shape mismatch");
  }
  Vec out(cols, 0.0);
  for (int r = 0; r < rows; ++r) {
    for (int c = 0; c < cols; ++c) out[c] += at(r, c) * v[r];
  }
  return out;
}

double ProfileDistance(const MixedProfile& a, const MixedProfile& b) {
  if (a.num_players() != b.num_players()) {
    throw std::invalid_argument("profile player counts differ");
  }
  double d = 0.0;
  for (int i = 0; i < a.num_players(); ++i) {
    if (a[i].size() != b[i].size()) {
      throw std::invalid_argument("profile action counts differ");
    }
    for (size_t k = 0; k < a[i].size(); ++k) {
      d = std::max(d, std::fabs(a[i][k] - b[i][k]));
    }
  }
  return d;
}

void CheckProfile(const MixedProfile& x, const std::vector<int>& actions,
                  double tol) {
  if (x.num_players() != static_cast<int>(actions.size())) {
    throw std::invalid_argument("profile has wrong number of players");
  }
  for (int i = 0; i < x.num_players(); ++i) {
    if (static_cast<int>(x[i].size()) != actions[i]) {
      throw std::invalid_argument("strategy length does not match action set");
    }
    double sum = 0.0;
    for (double p : x[i]) {
      if (p < -tol || !std::isfinite(p)) {
        throw std::domain_error("strategy entry negative or non-finite");
      }
      sum += p;
    }
    if (std::fabs(sum - 1.0) > tol) {
      throw std::domain_error("strategy does not sum to 1");
    }
  }
}

int Argmax(const Vec& v) {
  int best = 0;
  for (int k = 1; k < static_cast<int>(v.size()); ++k) {
    if (v[k] > v[best]) best = k;
  }
  return best;
}

namespace {

std::vector<AffineTransform> NormalizeAffine(std::vector<AffineTransform> affine,
                                             int n_players) {
  if (affine.empty()) affine.assign(n_players, AffineTransform{});
  if (static_cast<int>(affine.size()) != n_players) {
    throw std::invalid_argument("affine transform count != player count");
  }
  for (const auto& t : affine) {
    if (!(t.scale > 0.0)) {
      throw std::invalid_argument("affine scale must be positive");
    }
  }
  return affine;
}

void CheckActions(const std::vector<int>& actions) {
  if (actions.empty()) throw std::invalid_argument("game needs players");
  for (int n : actions) {
    if (n < 2) throw std::invalid_argument("every player needs >= 2 actions");
  }
}

}  // namespace

Game Game::MakePolymatrix(std::vector<int> actions, std::vector<Edge> edges,
                          std::vector<AffineTransform> affine,
                          bool declared_constant_sum) {
  CheckActions(actions);
  const int n = static_cast<int>(actions.size());
  std::vector<std::vector<bool>> seen(n, std::vector<bool>(n, false));
  for (const Edge& e : edges) {
    if (e.i < 0 || e.i >= n || e.j < 0 || e.j >= n) {
      throw std::invalid_argument("edge endpoint out of range");
    }
    if (e.i == e.j) throw std::invalid_argument("edge endpoints must differ");
    if (seen[e.i][e.j]) throw std::invalid_argument("duplicate edge");
    seen[e.i][e.j] = seen[e.j][e.i] = true;
    if (e.payoff_i.rows != actions[e.i] || e.payoff_i.cols != actions[e.j] ||
        e.payoff_j.rows != actions[e.j] || e.payoff_j.cols != actions[e.i]) {
      throw std::invalid_argument("edge payoff matrix shape mismatch");
    }
  }
  Game g;
  g.actions_ = std::move(actions);
  g.form_ = GameForm::kPolymatrix;
  g.edges_ = std::move(edges);
  g.affine_ = NormalizeAffine(std::move(affine), n);
  g.declared_constant_sum_ = declared_constant_sum;
  if (declared_constant_sum) {
    ConstantSumReport rep = g.ValidateConstantSum();
    if (!rep.ok) {
      throw std::invalid_argument("game declared constant-sum but is not");
    }
  }
  return g;
}

Game Game::MakeNormalForm(std::vector<int> actions, std::vector<Vec> tensors,
                          std::vector<AffineTransform> affine,
                          bool declared_constant_sum) {
  CheckActions(actions);
  const int n = static_cast<int>(actions.size());
  if (static_cast<int>(tensors.size()) != n) {
    throw std::invalid_argument("need one payoff tensor per player");
  }
  size_t cells = 1;
  for (int a : actions) cells *= static_cast<size_t>(a);
  for (const Vec& t : tensors) {
    if (t.size() != cells) {
      throw std::invalid_argument("payoff tensor has wrong cell count");
    }
  }

  if (n == 2) {
    // Canonicalize to a single-edge polymatrix game.
    Edge e;
    e.i = 0;
    e.j = 1;
    e.payoff_i = Mat(actions[0], actions[1]);
    e.payoff_j = Mat(actions[1], actions[0]);
    for (int a = 0; a < actions[0]; ++a) {
      for (int b = 0; b < actions[1]; ++b) {
        e.payoff_i.at(a, b) = tensors[0][a * actions[1] + b];
        e.payoff_j.at(b, a) = tensors[1][a * actions[1] + b];
      }
    }
    return MakePolymatrix(std::move(actions), {std::move(e)}, std::move(affine),
                          declared_constant_sum);
  }

  Game g;
  g.actions_ = std::move(actions);
  g.form_ = GameForm::kNormalForm;
  g.tensors_ = std::move(tensors);
  g.affine_ = NormalizeAffine(std::move(affine), n);
  g.declared_constant_sum_ = declared_constant_sum;
  return g;
}

Game Game::MakeZeroSum(const Mat& a) {
  Edge e;
  e.i = 0;
  e.j = 1;
  e.payoff_i = a;
  e.payoff_j = Mat(a.cols, a.rows);
  for (int r = 0; r < a.rows; ++r) {
    for (int c = 0; c < a.cols; ++c) e.payoff_j.at(c, r) = -a.at(r, c);
  }
  return MakePolymatrix({a.rows, a.cols}, {std::move(e)}, {}, true);
}

double Game::ExpectedPayoff(const MixedProfile& x, int player) const {
  Vec v = PayoffVector(x, player);
  double s = 0.0;
  for (size_t k = 0; k < v.size(); ++k) s += v[k] * x[player][k];
  return s;
}

Vec Game::PayoffVector(const MixedProfile& x, int player) const {
  if (x.num_players() != num_players()) {
    throw std::invalid_argument("profile has wrong number of players");
  }
  for (int i = 0; i < num_players(); ++i) {
    if (static_cast<int>(x[i].size()) != actions_[i]) {
      throw std::invalid_argument("strategy length does not match action set");
    }
  }
  Vec v(actions_[player], 0.0);
  if (form_ == GameForm::kPolymatrix) {
    for (const Edge& e : edges_) {
      if (e.i == player) {
        Vec part = e.payoff_i.Apply(x[e.j]);
        for (int k = 0; k < actions_[player]; ++k) v[k] += part[k];
      } else if (e.j == player) {
        Vec part = e.payoff_j.Apply(x[e.i]);
        for (int k = 0; k < actions_[player]; ++k) v[k] += part[k];
      }
    }
  } else {
    const Vec& tensor = tensors_[player];
    const int n = num_players();
    std::vector<int> idx(n, 0);
    const size_t cells = tensor.size();
    for (size_t flat = 0; flat < cells; ++flat) {
      size_t rem = flat;
      for (int i = n - 1; i >= 0; --i) {
        idx[i] = static_cast<int>(rem % actions_[i]);
        rem /= actions_[i];
      }
      double w = 1.0;
      for (int i = 0; i < n; ++i) {
        if (i == player) continue;
        w *= x[i][idx[i]];
      }
      v[idx[player]] += w * tensor[flat];
    }
  }
  const AffineTransform& t = affine_[player];
  for (double& c : v) c = t.scale * c + t.offset;
  return v;
}

ConstantSumReport Game::ValidateConstantSum(double tol) const {
  if (form_ != GameForm::kPolymatrix) {
    throw std::invalid_argument("constant-sum validation needs polymatrix form");
  }
  ConstantSumReport rep;
  rep.ok = true;
  for (size_t idx = 0; idx < edges_.size(); ++idx) {
    const Edge& e = edges_[idx];
    EdgeSumCheck chk;
    chk.edge_index = static_cast<int>(idx);
    chk.gamma = e.payoff_i.at(0, 0) + e.payoff_j.at(0, 0);
    for (int a = 0; a < e.payoff_i.rows; ++a) {
      for (int b = 0; b < e.payoff_i.cols; ++b) {
        double s = e.payoff_i.at(a, b) + e.payoff_j.at(b, a);
        double viol = std::fabs(s - chk.gamma);
        if (viol > chk.max_violation) {
          chk.max_violation = viol;
          chk.worst_row = a;
          chk.worst_col = b;
        }
      }
    }
    chk.constant_sum = chk.max_violation <= tol;
    rep.ok = rep.ok && chk.constant_sum;
    rep.edges.push_back(chk);
  }
  return rep;
}

std::uint64_t Game::Hash() const {
  std::uint64_t h = 1469598103934665603ull;
  auto mix = [&h](const void* p, size_t n) {
    const auto* b = static_cast<const unsigned char*>(p);
    for (size_t k = 0; k < n; ++k) {
      h ^= b[k];
      h *= 1099511628211ull;
    }
  };
  auto mix_double = [&](double d) { mix(&d, sizeof(d)); };
  int form = static_cast<int>(form_);
  mix(&form, sizeof(form));
  for (int a : actions_) mix(&a, sizeof(a));
  for (const Edge& e : edges_) {
    mix(&e.i, sizeof(e.i));
    mix(&e.j, sizeof(e.j));
    for (double d : e.payoff_i.data) mix_double(d);
    for (double d : e.payoff_j.data) mix_double(d);
  }
  for (const Vec& t : tensors_) {
    for (double d : t) mix_double(d);
  }
  for (const AffineTransform& t : affine_) {
    mix_double(t.scale);
    mix_double(t.offset);
  }
  return h;
}

const Mat& Game::TwoPlayerBaseMatrix() const {
  if (num_players() != 2 || edges_.size() != 1) {
    throw std::invalid_argument("not a single-edge 2-player game");
  }
  return edges_[0].payoff_i;
}

}  // namespace forel
