#include <catch2/catch_amalgamated.hpp>
#include <cmath>

#include "dyngame/clne.hpp"
#include "dyngame/platooning.hpp"
#include "oracles.hpp"

using namespace dyngame;

namespace {

GameDefinition symmetric_scalar_game() {
  GameDefinition g;
  g.a = Mat::Ones(1, 1);
  g.b.assign(2, Mat::Ones(1, 1));
  g.q.assign(2, Mat::Ones(1, 1));
  g.r.assign(2, Mat::Ones(1, 1));
  g.horizon = 2;
  return g;
}

double scalar_cl_root() {
  // positive root of 4p^3 - p^2 - 4p - 1
  return oracles::bisect([](double p) { return ((4.0 * p - 1.0) * p - 4.0) * p - 1.0; }, 1.0, 2.0);
}

}  // namespace

TEST_CASE("solve_clne") {
  SECTION("single agent reduces to the LQR") {
    GameDefinition g;
    g.a = Mat::Ones(1, 1);
    g.b = {Mat::Ones(1, 1)};
    g.q = {Mat::Ones(1, 1)};
    g.r = {Mat::Ones(1, 1)};
    g.horizon = 1;
    const DareSolution lqr = solve_dare(g.a, g.b[0], g.q[0], g.r[0]);
    for (ClNeMethod method : {ClNeMethod::lyapunov_recursion, ClNeMethod::riccati_recursion}) {
      ClneSettings s;
      s.method = method;
      const ClNeSolution sol = solve_clne(g, s);
      REQUIRE((sol.p_cl[0] - lqr.p).norm() <= 1e-9);
      REQUIRE((sol.k_cl[0] - lqr.k).norm() <= 1e-9);
    }
  }
  SECTION("scalar two-agent equilibrium solves the cubic") {
    const GameDefinition g = symmetric_scalar_game();
    const double p_ref = scalar_cl_root();
    for (ClNeMethod method : {ClNeMethod::lyapunov_recursion, ClNeMethod::riccati_recursion}) {
      ClneSettings s;
      s.method = method;
      const ClNeSolution sol = solve_clne(g, s);
      REQUIRE(sol.p_cl[0](0, 0) == Catch::Approx(p_ref).margin(1e-8));
      REQUIRE(sol.k_cl[0](0, 0) == Catch::Approx(-p_ref / (1.0 + 2.0 * p_ref)).margin(1e-8));
      sol.verify(g, 1e-8);
    }
  }
  SECTION("zero cost on a Schur plant") {
    oracles::Rng rng(19);
    GameDefinition g;
    g.a = rng.schur_matrix(3, 0.7);
    g.b = {rng.matrix(3, 1), rng.matrix(3, 1)};
    g.q.assign(2, Mat::Zero(3, 3));
    g.r.assign(2, Mat::Identity(1, 1));
    g.horizon = 2;
    // zero weights leave (A, 0) undetectable only in name; the equilibrium is 0
    ClneSettings s;
    const ClNeSolution sol = solve_clne(g, s);
    REQUIRE(sol.p_cl[0].norm() < 1e-12);
    REQUIRE(sol.k_cl[0].norm() < 1e-12);
  }
  SECTION("methods agree on random stabilizable instances") {
    oracles::Rng rng(29);
    int done = 0;
    while (done < 20) {
      const Eigen::Index n = rng.integer(1, 4);
      const int num_agents = rng.integer(1, 3);
      GameDefinition g;
      g.a = rng.matrix(n, n) * 0.9;
      for (int i = 0; i < num_agents; ++i) {
        g.b.push_back(rng.matrix(n, 1));
        g.q.push_back(rng.psd_matrix(n) + 0.05 * Mat::Identity(n, n));
        g.r.push_back(Mat::Identity(1, 1) * rng.uniform(0.5, 2.0));
      }
      g.horizon = 2;
      if (!is_stabilizable(g.a, hstack(g.b))) continue;
      ClneSettings lyap, ric;
      lyap.method = ClNeMethod::lyapunov_recursion;
      ric.method = ClNeMethod::riccati_recursion;
      ClNeSolution a, b;
      try {
        a = solve_clne(g, lyap);
        b = solve_clne(g, ric);
      } catch (const NonConvergenceError&) {
        continue;  // no global guarantee for either recursion
      }
      ++done;
      for (int i = 0; i < num_agents; ++i)
        REQUIRE((a.p_cl[i] - b.p_cl[i]).norm() <= 1e-6 * (1.0 + a.p_cl[i].norm()));
    }
  }
  SECTION("per-iteration symmetry is preserved") {
    const PlatooningScenario sc = build_platooning(PlatooningParams::defaults(3));
    const ClNeSolution sol = solve_clne(sc.game);
    for (const Mat& p : sol.p_cl)
      REQUIRE((p - p.transpose()).norm() <= 1e-9 * (1.0 + p.norm()));
    sol.verify(sc.game, 1e-8);
  }
}

TEST_CASE("bellman_check_cl") {
  const GameDefinition g = symmetric_scalar_game();
  const ClNeSolution sol = solve_clne(g);
  SECTION("zero state") {
    const BellmanCheck chk = bellman_check_cl(sol, g, 0, Vec::Zero(1));
    REQUIRE(chk.lhs == 0.0);
    REQUIRE(chk.rhs == 0.0);
    REQUIRE(chk.argmin.norm() == 0.0);
  }
  SECTION("scalar value p/2 and gain at x = 1") {
    const double p_ref = scalar_cl_root();
    const BellmanCheck chk = bellman_check_cl(sol, g, 0, Vec::Ones(1));
    REQUIRE(chk.lhs == Catch::Approx(p_ref / 2.0).margin(1e-8));
    REQUIRE(chk.argmin(0) == Catch::Approx(-p_ref / (1.0 + 2.0 * p_ref)).margin(1e-8));
    REQUIRE(std::abs(chk.lhs - chk.rhs) <= 1e-8 * (1.0 + std::abs(chk.lhs)));
  }
  SECTION("identity holds on 100 random platooning states") {
    const PlatooningScenario sc = build_platooning(PlatooningParams::defaults(4));
    const ClNeSolution psol = solve_clne(sc.game);
    oracles::Rng rng(37);
    for (int trial = 0; trial < 100; ++trial) {
      const Vec x = rng.vector(8);
      for (int i = 0; i < 4; ++i) {
        const BellmanCheck chk = bellman_check_cl(psol, sc.game, i, x);
        REQUIRE(std::abs(chk.lhs - chk.rhs) <= 1e-8 * (1.0 + std::abs(chk.lhs)));
        REQUIRE((chk.argmin - psol.k_cl[i] * x).norm() <= 1e-8 * (1.0 + x.norm()));
      }
    }
  }
}

TEST_CASE("closed-loop cost realization") {
  // 1/2 x0^T P_i x0 equals the rolled-out cost under the equilibrium feedback.
  const PlatooningScenario sc = build_platooning(PlatooningParams::defaults(3));
  const ClNeSolution sol = solve_clne(sc.game);
  const double rho = spectral_radius(sol.abar_cl);
  oracles::Rng rng(43);
  for (int trial = 0; trial < 5; ++trial) {
    const Vec x0 = rng.vector(6);
    for (int i = 0; i < 3; ++i) {
      double cost = 0.0;
      Vec x = x0;
      for (int t = 0; t < 500; ++t) {
        cost += stage_cost(sc.game, i, x, Vec(sol.k_cl[i] * x));
        x = sol.abar_cl * x;
      }
      const double v = 0.5 * x0.dot(sol.p_cl[i] * x0);
      const double tail = 0.5 * x.dot(sol.p_cl[i] * x);
      REQUIRE(std::abs(cost - v) <= 2.0 * tail + 1e-9 * (1.0 + std::abs(v)));
      REQUIRE(tail <= std::pow(rho, 2 * 500) * 1e6 * (1.0 + x0.squaredNorm()));
    }
  }
}
