#include "forel/equilibrium.hpp"

#include <cmath>

#include "doctest.h"
#include "oracles.hpp"

using namespace forel;

namespace {

Mat MatFromRows(const std::vector<Vec>& rows) { return Mat::FromRows(rows); }

oracles::Matrix ToOracle(const Mat& a) {
  oracles::Matrix m(a.rows, oracles::Vec(a.cols));
  for (int r = 0; r < a.rows; ++r) {
    for (int c = 0; c < a.cols; ++c) m[r][c] = a.at(r, c);
  }
  return m;
}

// The corpus used by the oracle-equivalence acceptance criterion: every
// game here has shape <= 4x4 with square-support-enumerable equilibria.
std::vector<Mat> ZeroSumCorpus() {
  return {
      MatFromRows({{1, -1}, {-1, 1}}),                      // matching pennies
      MatFromRows({{1, 2}, {0, 1}}),                        // dominant row/col
      MatFromRows({{1, -1, 2}, {-1, 1, 2}}),                // dominated column
      MatFromRows({{2, -1}, {-2, 4}}),                      // skewed interior
      MatFromRows({{0, 1, -1}, {-1, 0, 1}, {1, -1, 0}}),    // rock-paper-scissors
      MatFromRows({{1, -1, 10}, {-1, 1, 10}, {-10, -10, 0}}),  // embedded pennies
      MatFromRows({{1, -1, -1}, {-1, 1, 1}}),               // duplicated column
      MatFromRows({{3, -1}, {-1, 3}}),                      // diagonal interior
      MatFromRows({{0, 2, -2, 1}, {-2, 0, 2, -1}, {2, -2, 0, 0}, {-1, 1, 0, 0}}),
      MatFromRows({{5, 1}, {3, 4}}),                        // positive interior
  };
}

}  // namespace

TEST_CASE("lp solver basics") {
  SUBCASE("max x subject to x <= 3") {
    LinearProgram lp;
    lp.objective = {1.0};
    lp.rows = {{1.0}};
    lp.senses = {RowSense::kLe};
    lp.rhs = {3.0};
    LpSolution sol = LpSolve(lp);
    REQUIRE(sol.status == LpStatus::kOptimal);
    CHECK(sol.x[0] == doctest::Approx(3.0));
    CHECK(sol.objective == doctest::Approx(3.0));
  }

  SUBCASE("infeasible system") {
    LinearProgram lp;
    lp.objective = {1.0};
    lp.rows = {{1.0}};
    lp.senses = {RowSense::kLe};
    lp.rhs = {-1.0};
    CHECK(LpSolve(lp).status == LpStatus::kInfeasible);
  }

  SUBCASE("unbounded") {
    LinearProgram lp;
    lp.objective = {1.0};
    lp.rows = {{-1.0}};
    lp.senses = {RowSense::kLe};
    lp.rhs = {0.0};
    CHECK(LpSolve(lp).status == LpStatus::kUnbounded);
  }

  SUBCASE("equality and free variable") {
    // max x + y with x + y = 2, y free, 0 <= x <= 1 -> objective 2.
    LinearProgram lp;
    lp.objective = {1.0, 1.0};
    lp.rows = {{1.0, 1.0}};
    lp.senses = {RowSense::kEq};
    lp.rhs = {2.0};
    lp.lower = {0.0, -kInf};
    lp.upper = {1.0, kInf};
    LpSolution sol = LpSolve(lp);
    REQUIRE(sol.status == LpStatus::kOptimal);
    CHECK(sol.objective == doctest::Approx(2.0));
    CHECK(sol.x[0] + sol.x[1] == doctest::Approx(2.0));
  }

  SUBCASE("degenerate ties do not cycle") {
    // Heavily tied/redundant rows; Bland terminates at the true optimum.
    LinearProgram lp;
    lp.objective = {1.0, 1.0, 1.0};
    lp.rows = {{1.0, 0.0, 0.0}, {1.0, 1.0, 0.0}, {1.0, 1.0, 1.0},
               {0.0, 1.0, 1.0}, {0.0, 0.0, 1.0}};
    lp.senses = {RowSense::kLe, RowSense::kLe, RowSense::kLe, RowSense::kLe,
                 RowSense::kLe};
    lp.rhs = {1.0, 1.0, 1.0, 1.0, 1.0};
    LpSolution sol = LpSolve(lp);
    REQUIRE(sol.status == LpStatus::kOptimal);
    CHECK(sol.objective == doctest::Approx(1.0));
  }

  SUBCASE("dimension mismatch is a shape error") {
    LinearProgram lp;
    lp.objective = {1.0, 2.0};
    lp.rows = {{1.0}};
    lp.senses = {RowSense::kLe};
    lp.rhs = {1.0};
    CHECK_THROWS_AS(LpSolve(lp), std::invalid_argument);
  }
}

TEST_CASE("matching pennies value and equilibrium") {
  ZeroSumSolution sol = ZeroSumSolve(MatFromRows({{1, -1}, {-1, 1}}));
  CHECK(sol.value == doctest::Approx(0.0).epsilon(1e-12));
  CHECK(sol.duality_gap <= 1e-9);
  for (int k = 0; k < 2; ++k) {
    CHECK(sol.x1[k] == doctest::Approx(0.5).epsilon(1e-9));
    CHECK(sol.x2[k] == doctest::Approx(0.5).epsilon(1e-9));
  }
}

TEST_CASE("dominant-strategy game solves to the pure equilibrium") {
  ZeroSumSolution sol = ZeroSumSolve(MatFromRows({{1, 2}, {0, 1}}));
  CHECK(sol.value == doctest::Approx(1.0).epsilon(1e-9));
  CHECK(sol.x1[0] == doctest::Approx(1.0).epsilon(1e-9));
  CHECK(sol.x2[0] == doctest::Approx(1.0).epsilon(1e-9));
}

TEST_CASE("constant shifts move the value, not the equilibrium") {
  Mat a = MatFromRows({{2, -1}, {-2, 4}});
  ZeroSumSolution base = ZeroSumSolve(a);
  Mat shifted = a;
  for (double& v : shifted.data) v += 7.5;
  ZeroSumSolution moved = ZeroSumSolve(shifted);
  CHECK(moved.value == doctest::Approx(base.value + 7.5).epsilon(1e-9));
  for (int k = 0; k < 2; ++k) {
    CHECK(moved.x1[k] == doctest::Approx(base.x1[k]).epsilon(1e-8));
    CHECK(moved.x2[k] == doctest::Approx(base.x2[k]).epsilon(1e-8));
  }
}

TEST_CASE("solver matches support enumeration on the whole corpus") {
  for (const Mat& a : ZeroSumCorpus()) {
    CAPTURE(a.rows);
    CAPTURE(a.cols);
    oracles::EnumerationResult ref = oracles::SupportEnumerationSolve(ToOracle(a));
    REQUIRE(ref.found);

    ZeroSumSolution sol = ZeroSumSolve(a);
    CHECK(sol.duality_gap <= 1e-9);
    CHECK(sol.value == doctest::Approx(ref.value).epsilon(1e-9));

    // The returned pair is an equilibrium: best-response gap <= 1e-8.
    Game g = Game::MakeZeroSum(a);
    NashCheck nash = VerifyNash(g, MixedProfile{{sol.x1, sol.x2}}, 1e-8);
    CHECK(nash.is_nash);

    EssentialSets ess = EssentialStrategies(a);
    CHECK(ess.essential[0] == ref.essential[0]);
    CHECK(ess.essential[1] == ref.essential[1]);
  }
}

TEST_CASE("essential sets for the named games") {
  EssentialSets mp = EssentialStrategies(MatFromRows({{1, -1}, {-1, 1}}));
  CHECK(mp.essential[0] == std::vector<int>{0, 1});
  CHECK(mp.essential[1] == std::vector<int>{0, 1});

  EssentialSets dom = EssentialStrategies(MatFromRows({{1, 2}, {0, 1}}));
  CHECK(dom.essential[0] == std::vector<int>{0});
  CHECK(dom.essential[1] == std::vector<int>{0});

  EssentialSets wide = EssentialStrategies(MatFromRows({{1, -1, 2}, {-1, 1, 2}}));
  CHECK(wide.essential[0] == std::vector<int>{0, 1});
  CHECK(wide.essential[1] == std::vector<int>{0, 1});
}

TEST_CASE("maximal-support equilibrium properties on the corpus") {
  for (const Mat& a : ZeroSumCorpus()) {
    CAPTURE(a.rows);
    CAPTURE(a.cols);
    EquilibriumReport rep = MaxSupportEquilibrium(a);

    // Support equals the essential sets exactly.
    for (int player = 0; player < 2; ++player) {
      std::vector<int> support;
      for (int k = 0; k < static_cast<int>(rep.x_star[player].size()); ++k) {
        if (rep.x_star[player][k] > 1e-9) support.push_back(k);
      }
      CHECK(support == rep.essential[player]);
    }

    // The barycenter is itself an equilibrium.
    Game g = Game::MakeZeroSum(a);
    CHECK(VerifyNash(g, rep.x_star, 1e-8).is_nash);

    // Non-essential actions lose by a strict margin.
    for (int player = 0; player < 2; ++player) {
      int n = player == 0 ? a.rows : a.cols;
      for (int action = 0; action < n; ++action) {
        bool essential = std::find(rep.essential[player].begin(),
                                   rep.essential[player].end(),
                                   action) != rep.essential[player].end();
        if (essential) {
          CHECK(rep.margins[player][action] == 0.0);
        } else {
          CHECK(rep.margins[player][action] > 1e-6);
        }
      }
    }
  }
}

TEST_CASE("matching pennies maximal-support equilibrium is interior uniform") {
  EquilibriumReport rep = MaxSupportEquilibrium(MatFromRows({{1, -1}, {-1, 1}}));
  for (int i = 0; i < 2; ++i) {
    REQUIRE(rep.x_star[i].size() == 2);
    for (double p : rep.x_star[i]) {
      CHECK(p == doctest::Approx(0.5).epsilon(1e-9));
    }
  }
}

TEST_CASE("embedded 3x3 pennies: support on the pennies block") {
  Mat a = MatFromRows({{1, -1, 10}, {-1, 1, 10}, {-10, -10, 0}});
  EquilibriumReport rep = MaxSupportEquilibrium(a);
  CHECK(rep.value == doctest::Approx(0.0).epsilon(1e-9));
  CHECK(rep.essential[0] == std::vector<int>{0, 1});
  CHECK(rep.essential[1] == std::vector<int>{0, 1});
  CHECK(rep.x_star[0][0] == doctest::Approx(0.5).epsilon(1e-8));
  CHECK(rep.x_star[0][2] == doctest::Approx(0.0));
  CHECK(rep.margins[0][2] > 1.0);
  CHECK(rep.margins[1][2] > 1.0);
}

TEST_CASE("verify_nash gaps") {
  Game g = Game::MakeZeroSum(MatFromRows({{1, -1}, {-1, 1}}));
  NashCheck at_ne = VerifyNash(g, MixedProfile{{{0.5, 0.5}, {0.5, 0.5}}}, 1e-9);
  CHECK(at_ne.max_gap == doctest::Approx(0.0).epsilon(1e-15));
  CHECK(at_ne.is_nash);

  NashCheck off = VerifyNash(g, MixedProfile{{{1.0, 0.0}, {1.0, 0.0}}}, 1e-9);
  CHECK(off.gaps[1] == doctest::Approx(2.0));
  CHECK_FALSE(off.is_nash);
}

TEST_CASE("verify_nash scales gaps with positive-affine transforms") {
  Mat a = MatFromRows({{1, -1}, {-1, 1}});
  Game base = Game::MakeZeroSum(a);
  Game scaled = Game::MakePolymatrix({2, 2}, base.edges(),
                                     {{3.0, -2.0}, {0.5, 1.0}});
  oracles::Rng rng(4);
  for (int trial = 0; trial < 20; ++trial) {
    MixedProfile x{{rng.Simplex(2), rng.Simplex(2)}};
    NashCheck nb = VerifyNash(base, x, 1e-9);
    NashCheck ns = VerifyNash(scaled, x, 1e-9);
    CHECK(ns.gaps[0] == doctest::Approx(3.0 * nb.gaps[0]).epsilon(1e-10));
    CHECK(ns.gaps[1] == doctest::Approx(0.5 * nb.gaps[1]).epsilon(1e-10));
  }
}

TEST_CASE("three-player cycle uniform profile is the interior equilibrium") {
  Mat a = MatFromRows({{1, -1}, {-1, 1}});
  Mat neg_at(2, 2);
  for (int r = 0; r < 2; ++r) {
    for (int c = 0; c < 2; ++c) neg_at.at(r, c) = -a.at(c, r);
  }
  std::vector<Edge> edges = {Edge{0, 1, a, neg_at}, Edge{1, 2, a, neg_at},
                             Edge{0, 2, a, neg_at}};
  Game g = Game::MakePolymatrix({2, 2, 2}, edges, {}, true);

  MixedProfile uniform{{{0.5, 0.5}, {0.5, 0.5}, {0.5, 0.5}}};
  NashCheck nash = VerifyNash(g, uniform, 1e-12);
  CHECK(nash.is_nash);

  InteriorSolveResult interior = PolymatrixInteriorEquilibrium(g);
  REQUIRE(interior.profile.has_value());
  for (int i = 0; i < 3; ++i) {
    CHECK((*interior.profile)[i][0] == doctest::Approx(0.5).epsilon(1e-12));
  }
}

TEST_CASE("interior solve reports failure when no interior equilibrium exists") {
  Game g = Game::MakeZeroSum(MatFromRows({{1, 2}, {0, 1}}));
  InteriorSolveResult res = PolymatrixInteriorEquilibrium(g);
  CHECK_FALSE(res.profile.has_value());
  CHECK_FALSE(res.message.empty());
}
