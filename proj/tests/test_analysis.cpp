#include "forel/analysis.hpp"

#include <cmath>

#include "doctest.h"
#include "oracles.hpp"

using namespace forel;

namespace {

Mat MatchingPennies() { return Mat::FromRows({{1.0, -1.0}, {-1.0, 1.0}}); }

Game PenniesCycle() {
  Mat a = MatchingPennies();
  Mat neg_at(2, 2);
  for (int r = 0; r < 2; ++r) {
    for (int c = 0; c < 2; ++c) neg_at.at(r, c) = -a.at(c, r);
  }
  return Game::MakePolymatrix(
      {2, 2, 2},
      {Edge{0, 1, a, neg_at}, Edge{1, 2, a, neg_at}, Edge{0, 2, a, neg_at}}, {},
      true);
}

RegularizerSet Regs(const Game& g, RegularizerKind kind) {
  return MakeRegularizers(
      g, std::vector<RegularizerKind>(g.num_players(), kind));
}

ScoreState LogProfile(const std::vector<Vec>& x) {
  ScoreState y;
  for (const Vec& xi : x) {
    Vec yi;
    for (double p : xi) yi.push_back(std::log(p));
    y.scores.push_back(yi);
  }
  return y;
}

MixedProfile Uniform(int players, int actions) {
  MixedProfile x;
  for (int i = 0; i < players; ++i) {
    x.strategies.push_back(Vec(actions, 1.0 / actions));
  }
  return x;
}

}  // namespace

TEST_CASE("fenchel coupling closed-form values") {
  Game mp = Game::MakeZeroSum(MatchingPennies());

  SUBCASE("entropic, zero scores, uniform reference") {
    RegularizerSet regs = Regs(mp, RegularizerKind::kEntropic);
    CouplingReference ref = MakeCouplingReference(Uniform(2, 2));
    CHECK(ref.interior);
    ScoreState y{{{0.0, 0.0}, {0.0, 0.0}}};
    CHECK(FenchelCoupling(regs, ref, y) ==
          doctest::Approx(2.0 * std::log(2.0)).epsilon(1e-15));
  }

  SUBCASE("euclidean, zero scores") {
    RegularizerSet regs = Regs(mp, RegularizerKind::kEuclidean);
    CouplingReference ref = MakeCouplingReference(Uniform(2, 2));
    ScoreState y{{{0.0, 0.0}, {0.0, 0.0}}};
    CHECK(FenchelCoupling(regs, ref, y) == doctest::Approx(-0.5).epsilon(1e-15));
  }

  SUBCASE("weighted three-player variant") {
    Game cyc = PenniesCycle();
    RegularizerSet regs = Regs(cyc, RegularizerKind::kEntropic);
    CouplingReference ref = MakeCouplingReference(Uniform(3, 2), {2.0, 1.0, 1.0});
    ScoreState y{{{0.0, 0.0}, {0.0, 0.0}, {0.0, 0.0}}};
    CHECK(FenchelCoupling(regs, ref, y) ==
          doctest::Approx(4.0 * std::log(2.0)).epsilon(1e-14));
  }
}

TEST_CASE("coupling drift") {
  Game mp = Game::MakeZeroSum(MatchingPennies());
  RegularizerSet regs = Regs(mp, RegularizerKind::kEntropic);

  SUBCASE("interior equilibrium reference: zero drift everywhere") {
    CouplingReference ref = MakeCouplingReference(Uniform(2, 2));
    oracles::Rng rng(2);
    for (int trial = 0; trial < 100; ++trial) {
      ScoreState y{{{rng.Range(-4, 4), rng.Range(-4, 4)},
                    {rng.Range(-4, 4), rng.Range(-4, 4)}}};
      CHECK(std::fabs(CouplingDrift(mp, regs, ref, y)) <= 1e-12);
    }
  }

  SUBCASE("reference equal to the current profile: exactly zero") {
    ScoreState y = LogProfile({{0.7, 0.3}, {0.2, 0.8}});
    CouplingReference ref =
        MakeCouplingReference(ChoiceProfile(regs, y));
    CHECK(CouplingDrift(mp, regs, ref, y) == doctest::Approx(0.0));
  }

  SUBCASE("no interior equilibrium: strictly negative drift from interior") {
    Game dom = Game::MakeZeroSum(Mat::FromRows({{1.0, 2.0}, {0.0, 1.0}}));
    RegularizerSet dregs = Regs(dom, RegularizerKind::kEntropic);
    EquilibriumReport eq = MaxSupportEquilibrium(dom.TwoPlayerBaseMatrix());
    CouplingReference ref = MakeCouplingReference(eq.x_star);
    CHECK_FALSE(ref.interior);
    oracles::Rng rng(8);
    for (int trial = 0; trial < 50; ++trial) {
      ScoreState y{{{rng.Range(-2, 2), rng.Range(-2, 2)},
                    {rng.Range(-2, 2), rng.Range(-2, 2)}}};
      CHECK(CouplingDrift(dom, dregs, ref, y) < 0.0);
    }
  }
}

TEST_CASE("coupling drift matches the finite-difference slope of G") {
  Game mp = Game::MakeZeroSum(Mat::FromRows({{2.0, -1.0}, {-2.0, 4.0}}));
  RegularizerSet regs = Regs(mp, RegularizerKind::kEntropic);
  ScoreState y0 = LogProfile({{0.6, 0.4}, {0.3, 0.7}});
  const double h = 1e-3;
  Trajectory traj = Integrate(
      mp, regs, y0, IntegrateOptions{.horizon = 2.0, .step = h});
  // A non-equilibrium reference makes the drift nonzero.
  CouplingReference ref = MakeCouplingReference(
      MixedProfile{{{0.9, 0.1}, {0.2, 0.8}}});
  for (int k = 1; k + 1 < traj.num_samples(); k += 50) {
    double glo = FenchelCoupling(regs, ref, traj.states[k - 1]);
    double ghi = FenchelCoupling(regs, ref, traj.states[k + 1]);
    double slope = (ghi - glo) / (2.0 * h);
    double drift = CouplingDrift(mp, regs, ref, traj.states[k]);
    CHECK(std::fabs(slope - drift) <= 1e-5);
  }
}

TEST_CASE("regret series") {
  Game mp = Game::MakeZeroSum(MatchingPennies());
  RegularizerSet regs = Regs(mp, RegularizerKind::kEntropic);

  SUBCASE("pinned at the equilibrium: zero regret") {
    ScoreState y0{{{0.0, 0.0}, {0.0, 0.0}}};
    Trajectory traj = Integrate(
        mp, regs, y0,
        IntegrateOptions{.horizon = 5.0, .step = 1e-2, .sample_every = 10});
    for (int i = 0; i < 2; ++i) {
      Vec r = RegretSeries(traj, i);
      CHECK(std::isnan(r[0]));  // t = 0 skipped
      for (int k = 1; k < traj.num_samples(); ++k) {
        CHECK(std::fabs(r[k]) <= 1e-12);
      }
    }
  }

  SUBCASE("equalized-score start obeys the omega bound") {
    // Theorem-backed bound: valid when the initial scores are constant
    // per player (uniform prior).
    ScoreState y0{{{0.3, 0.3}, {-1.0, -1.0}}};
    Trajectory traj = Integrate(
        mp, regs, y0,
        IntegrateOptions{.horizon = 30.0, .step = 1e-3, .sample_every = 10});
    for (int i = 0; i < 2; ++i) {
      Vec r = RegretSeries(traj, i);
      for (int k = 1; k < traj.num_samples(); ++k) {
        CHECK(traj.times[k] * r[k] <= std::log(2.0) + 1e-6);
      }
    }
  }

  SUBCASE("single-player constant payoffs against a trapezoid oracle") {
    Game solo = Game::MakeNormalForm({3}, {Vec{1.0, 0.2, -0.5}});
    RegularizerSet sregs = Regs(solo, RegularizerKind::kEntropic);
    ScoreState y0{{{0.0, 0.0, 0.0}}};
    Trajectory traj = Integrate(
        solo, sregs, y0,
        IntegrateOptions{.horizon = 8.0, .step = 1e-3, .sample_every = 10});
    Vec r = RegretSeries(traj, 0);

    // Oracle: R(t) = max_a v_a - (1/t) integral of <v, x(s)> ds by
    // trapezoid quadrature on the sampled profiles.
    Vec times, util;
    for (int k = 0; k < traj.num_samples(); ++k) {
      Vec v = solo.PayoffVector(traj.profiles[k], 0);
      double u = 0.0;
      for (int a = 0; a < 3; ++a) u += v[a] * traj.profiles[k][0][a];
      times.push_back(traj.times[k]);
      util.push_back(u);
    }
    for (int k = 10; k < traj.num_samples(); k += 100) {
      Vec t_slice(times.begin(), times.begin() + k + 1);
      Vec u_slice(util.begin(), util.begin() + k + 1);
      double integral = oracles::Trapezoid(t_slice, u_slice);
      double expect = 1.0 - integral / times[k];
      CHECK(std::fabs(r[k] - expect) <= 1e-5);
    }
  }
}

TEST_CASE("reduced-field divergence estimate") {
  Game mp = Game::MakeZeroSum(MatchingPennies());
  RegularizerSet regs = Regs(mp, RegularizerKind::kEntropic);
  std::vector<int> benchmark = DefaultBenchmark(mp);

  SUBCASE("zero at the symmetric point") {
    ReducedState z{{{0.0}, {0.0}}, benchmark};
    DivergenceCheck chk = DivergenceEstimate(mp, regs, z, 1e-4);
    CHECK_FALSE(chk.skipped_at_kink);
    CHECK(std::fabs(chk.value) <= 1e-8);
  }

  SUBCASE("stays numerically zero over random states") {
    oracles::Rng rng(6);
    for (int trial = 0; trial < 100; ++trial) {
      ReducedState z{{{rng.Range(-3, 3)}, {rng.Range(-3, 3)}}, benchmark};
      DivergenceCheck chk = DivergenceEstimate(mp, regs, z, 1e-4);
      CHECK(std::fabs(chk.value) <= 1e-5);
    }
  }

  SUBCASE("payoff fields never depend on own scores, so the trace is a "
          "structural zero even off the constant-sum class") {
    Game coord = Game::MakeNormalForm(
        {2, 2}, {Vec{1.0, 0.0, 0.0, 1.0}, Vec{1.0, 0.0, 0.0, 1.0}});
    RegularizerSet cregs = Regs(coord, RegularizerKind::kEntropic);
    oracles::Rng rng(14);
    for (int trial = 0; trial < 20; ++trial) {
      ReducedState z{{{rng.Range(-3, 3)}, {rng.Range(-3, 3)}}, benchmark};
      DivergenceCheck chk = DivergenceEstimate(coord, cregs, z, 1e-4);
      CHECK(chk.value == 0.0);
    }
  }

  SUBCASE("euclidean estimates are refused at kinks") {
    RegularizerSet eregs = Regs(mp, RegularizerKind::kEuclidean);
    // Far inside the simplex: active set stable, value defined.
    ReducedState interior{{{0.0}, {0.0}}, benchmark};
    DivergenceCheck ok = DivergenceEstimate(mp, eregs, interior, 1e-4);
    CHECK_FALSE(ok.skipped_at_kink);
    CHECK(std::fabs(ok.value) <= 1e-8);
    // The projection's active set changes within +/- delta of z = 1:
    // embed gives y = (1, 0) whose projection sits exactly at the vertex
    // boundary.
    ReducedState kink{{{1.0}, {0.0}}, benchmark};
    DivergenceCheck skipped = DivergenceEstimate(mp, eregs, kink, 1e-4);
    CHECK(skipped.skipped_at_kink);
  }

  SUBCASE("delta must be positive") {
    ReducedState z{{{0.0}, {0.0}}, benchmark};
    CHECK_THROWS_AS(DivergenceEstimate(mp, regs, z, 0.0),
                    std::invalid_argument);
  }
}

TEST_CASE("recurrence statistics") {
  Game mp = Game::MakeZeroSum(MatchingPennies());
  RegularizerSet regs = Regs(mp, RegularizerKind::kEntropic);

  SUBCASE("stationary trajectory returns immediately") {
    ScoreState y0{{{0.0, 0.0}, {0.0, 0.0}}};
    Trajectory traj = Integrate(
        mp, regs, y0,
        IntegrateOptions{.horizon = 5.0, .step = 0.5});
    RecurrenceReport rep = RecurrenceStats(traj, 1e-2, 1.0);
    REQUIRE(rep.first_return_time.has_value());
    CHECK(*rep.first_return_time == doctest::Approx(1.5));
    CHECK(rep.min_distance_after_burn_in == 0.0);
    CHECK(rep.n_returns == 1);  // never leaves, so a single visit
  }

  SUBCASE("pennies orbit returns repeatedly") {
    ScoreState y0 = LogProfile({{0.8, 0.2}, {0.5, 0.5}});
    Trajectory traj = Integrate(
        mp, regs, y0,
        IntegrateOptions{.horizon = 30.0, .step = 1e-3, .sample_every = 10});
    RecurrenceReport rep = RecurrenceStats(traj, 1e-2, 1.0);
    REQUIRE(rep.first_return_time.has_value());
    CHECK(*rep.first_return_time > 1.0);
    CHECK(rep.n_returns >= 2);
    // The orbit is periodic with period near 7.
    CHECK(*rep.first_return_time == doctest::Approx(7.0).epsilon(0.05));
  }

  SUBCASE("boundary-convergent run never returns") {
    Game dom = Game::MakeZeroSum(Mat::FromRows({{1.0, 2.0}, {0.0, 1.0}}));
    RegularizerSet dregs = Regs(dom, RegularizerKind::kEntropic);
    ScoreState y0 = LogProfile({{0.6, 0.4}, {0.6, 0.4}});
    Trajectory traj = Integrate(
        dom, dregs, y0,
        IntegrateOptions{.horizon = 50.0, .step = 1e-3, .sample_every = 10});
    RecurrenceReport rep = RecurrenceStats(traj, 1e-3, 1.0);
    CHECK_FALSE(rep.first_return_time.has_value());
    CHECK(rep.n_returns == 0);
    CHECK(rep.min_distance_after_burn_in > 1e-3);
  }

  SUBCASE("burn-in must end before the horizon") {
    ScoreState y0{{{0.0, 0.0}, {0.0, 0.0}}};
    Trajectory traj = Integrate(
        mp, regs, y0, IntegrateOptions{.horizon = 1.0, .step = 0.5});
    CHECK_THROWS_AS(RecurrenceStats(traj, 1e-2, 5.0), std::invalid_argument);
  }
}

TEST_CASE("support classification") {
  SUBCASE("matching pennies: interior recurrent") {
    Game mp = Game::MakeZeroSum(MatchingPennies());
    RegularizerSet regs = Regs(mp, RegularizerKind::kEntropic);
    EquilibriumReport eq = MaxSupportEquilibrium(mp.TwoPlayerBaseMatrix());
    ScoreState y0 = LogProfile({{0.8, 0.2}, {0.5, 0.5}});
    Trajectory traj = Integrate(
        mp, regs, y0,
        IntegrateOptions{.horizon = 20.0, .step = 1e-3, .sample_every = 10});
    SupportClassification cls = ClassifySupport(traj, eq, 1e-2);
    CHECK(cls.verdict == SupportVerdict::kInteriorRecurrent);
  }

  SUBCASE("dominant-strategy game: converged to pure") {
    Game dom = Game::MakeZeroSum(Mat::FromRows({{1.0, 2.0}, {0.0, 1.0}}));
    RegularizerSet regs = Regs(dom, RegularizerKind::kEntropic);
    EquilibriumReport eq = MaxSupportEquilibrium(dom.TwoPlayerBaseMatrix());
    ScoreState y0 = LogProfile({{0.5, 0.5}, {0.5, 0.5}});
    Trajectory traj = Integrate(
        dom, regs, y0,
        IntegrateOptions{.horizon = 100.0, .step = 1e-3, .sample_every = 100});
    SupportClassification cls = ClassifySupport(traj, eq, 1e-2);
    CHECK(cls.verdict == SupportVerdict::kConvergedToPure);
    CHECK(cls.tail_distance_to_x_star <= 1e-2);
  }

  SUBCASE("embedded pennies: converging to the 2x2 face") {
    Game emb = Game::MakeZeroSum(Mat::FromRows(
        {{1.0, -1.0, 10.0}, {-1.0, 1.0, 10.0}, {-10.0, -10.0, 0.0}}));
    RegularizerSet regs = Regs(emb, RegularizerKind::kEntropic);
    EquilibriumReport eq = MaxSupportEquilibrium(emb.TwoPlayerBaseMatrix());
    ScoreState y0 = LogProfile({{0.3, 0.3, 0.4}, {0.2, 0.3, 0.5}});
    Trajectory traj = Integrate(
        emb, regs, y0,
        IntegrateOptions{.horizon = 100.0, .step = 1e-3, .sample_every = 100});
    SupportClassification cls = ClassifySupport(traj, eq, 1e-2);
    CHECK(cls.verdict == SupportVerdict::kConvergingToFace);
    CHECK(cls.support[0] == std::vector<int>{0, 1});
    CHECK(cls.support[1] == std::vector<int>{0, 1});
    CHECK(cls.final_face_mass <= 1e-2);
    CHECK(cls.tail_monotone);
  }
}

TEST_CASE("conservation and boundedness on a short run") {
  Game mp = Game::MakeZeroSum(MatchingPennies());
  RegularizerSet regs = Regs(mp, RegularizerKind::kEntropic);
  CouplingReference ref = MakeCouplingReference(Uniform(2, 2));
  ScoreState y0 = LogProfile({{0.8, 0.2}, {0.3, 0.7}});
  Trajectory traj = Integrate(
      mp, regs, y0,
      IntegrateOptions{.horizon = 10.0, .step = 1e-3, .sample_every = 10});
  CHECK(MaxCouplingDeviation(regs, ref, traj) <= 1e-7);
  CHECK(MaxScoreDifference(traj, DefaultBenchmark(mp)) < 1e3);
}

TEST_CASE("weighted coupling is the conserved one for transformed games") {
  Mat a = MatchingPennies();
  Mat neg_at(2, 2);
  for (int r = 0; r < 2; ++r) {
    for (int c = 0; c < 2; ++c) neg_at.at(r, c) = -a.at(c, r);
  }
  Game cyc = Game::MakePolymatrix(
      {2, 2, 2},
      {Edge{0, 1, a, neg_at}, Edge{1, 2, a, neg_at}, Edge{0, 2, a, neg_at}},
      {{1.0, 0.0}, {2.0, 1.0}, {3.0, -1.0}}, true);
  RegularizerSet regs = Regs(cyc, RegularizerKind::kEntropic);

  Vec w = ConservedWeights(cyc);
  CHECK(w[0] == doctest::Approx(1.0));
  CHECK(w[1] == doctest::Approx(0.5));
  CHECK(w[2] == doctest::Approx(1.0 / 3.0));

  ScoreState y0 = LogProfile({{0.8, 0.2}, {0.6, 0.4}, {0.3, 0.7}});
  Trajectory traj = Integrate(
      cyc, regs, y0,
      IntegrateOptions{.horizon = 10.0, .step = 1e-3, .sample_every = 10});

  CouplingReference weighted = MakeCouplingReference(Uniform(3, 2), w);
  CouplingReference unweighted = MakeCouplingReference(Uniform(3, 2));
  CHECK(MaxCouplingDeviation(regs, weighted, traj) <= 1e-7);
  // The unweighted coupling is genuinely not conserved here.
  CHECK(MaxCouplingDeviation(regs, unweighted, traj) > 1e-3);
}
