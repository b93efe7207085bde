#include <catch2/catch_amalgamated.hpp>
#include <cmath>

#include "dyngame/olne.hpp"
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

// n=2, N=2 game with anisotropic weights; its equilibrium P matrices are
// visibly non-symmetric.
GameDefinition asymmetric_witness_game() {
  GameDefinition g;
  g.a.resize(2, 2);
  g.a << 1.2, 0.3, 0.1, 0.8;
  g.b.resize(2);
  g.b[0].resize(2, 1);
  g.b[0] << 1.0, 0.2;
  g.b[1].resize(2, 1);
  g.b[1] << 0.1, 1.0;
  g.q.resize(2);
  g.q[0] = Eigen::Vector2d(3.0, 0.5).asDiagonal();
  g.q[1] = Eigen::Vector2d(0.4, 2.0).asDiagonal();
  g.r.resize(2);
  g.r[0] = Mat::Identity(1, 1);
  g.r[1] = 0.7 * Mat::Identity(1, 1);
  g.horizon = 3;
  return g;
}

}  // namespace

TEST_CASE("schur reordering keeps the factorization and sorts stable modes first") {
  oracles::Rng rng(97);
  for (int trial = 0; trial < 25; ++trial) {
    const Eigen::Index n = rng.integer(2, 8);
    const Mat h = rng.matrix(n, n);
    Eigen::ComplexSchur<Eigen::MatrixXcd> schur(h.cast<std::complex<double>>());
    Eigen::MatrixXcd t = schur.matrixT(), u = schur.matrixU();
    const double cutoff = 1.0;
    detail::reorder_schur_stable_first(t, u, cutoff);
    REQUIRE((u * t * u.adjoint() - h.cast<std::complex<double>>()).norm() <=
            1e-10 * (1.0 + h.norm()));
    REQUIRE((u.adjoint() * u - Eigen::MatrixXcd::Identity(n, n)).norm() <= 1e-12 * n);
    bool seen_unstable = false;
    for (Eigen::Index k = 0; k < n; ++k) {
      for (Eigen::Index j = 0; j < k; ++j) REQUIRE(std::abs(t(k, j)) <= 1e-11 * (1.0 + h.norm()));
      if (std::abs(t(k, k)) >= cutoff) seen_unstable = true;
      if (seen_unstable) REQUIRE(std::abs(t(k, k)) >= cutoff);
    }
  }
}

TEST_CASE("check_assumptions") {
  SECTION("scalar H matrix and eigenvalue count") {
    GameDefinition g;
    g.a = 2.0 * Mat::Ones(1, 1);
    g.b = {Mat::Ones(1, 1)};
    g.q = {Mat::Ones(1, 1)};
    g.r = {Mat::Ones(1, 1)};
    g.horizon = 1;
    const AssumptionReport rep = check_assumptions(g);
    REQUIRE(rep.a_invertible);
    Mat expected(2, 2);
    expected << 2.5, -0.5, -0.5, 0.5;
    REQUIRE((rep.h - expected).norm() < 1e-12);
    // eigenvalues (3 +- sqrt(5)) / 2
    REQUIRE(rep.stable_eig_count == 1);
    REQUIRE(rep.complementarity_ok);
    REQUIRE(rep.overall);
  }
  SECTION("singular A is reported, H omitted") {
    GameDefinition g;
    g.a = Mat::Zero(1, 1);
    g.b = {Mat::Ones(1, 1)};
    g.q = {Mat::Ones(1, 1)};
    g.r = {Mat::Ones(1, 1)};
    g.horizon = 1;
    const AssumptionReport rep = check_assumptions(g);
    REQUIRE_FALSE(rep.a_invertible);
    REQUIRE(rep.h.size() == 0);
    REQUIRE_FALSE(rep.overall);
  }
  SECTION("prestabilized platooning: A structurally singular, pairs all stabilizable") {
    // The leader's first error coordinate is identically zero, so the
    // prestabilized A keeps a zero row and the H-matrix condition cannot be
    // evaluated on this instance. The per-agent pairs all pass.
    const PlatooningScenario sc = build_platooning(PlatooningParams::defaults(4));
    const AssumptionReport rep = check_assumptions(sc.game);
    REQUIRE_FALSE(rep.a_invertible);
    for (int i = 0; i < 4; ++i) {
      REQUIRE(rep.stabilizable[i]);
      REQUIRE(rep.detectable[i]);
    }
  }
}

TEST_CASE("solve_olne") {
  SECTION("single agent reduces to the LQR") {
    GameDefinition g;
    g.a = Mat::Ones(1, 1);
    g.b = {Mat::Ones(1, 1)};
    g.q = {Mat::Ones(1, 1)};
    g.r = {Mat::Ones(1, 1)};
    g.horizon = 1;
    const OlNeSolution sol = solve_olne(g);
    const DareSolution lqr = solve_dare(g.a, g.b[0], g.q[0], g.r[0]);
    REQUIRE((sol.p_ol[0] - lqr.p).norm() < 1e-9);
    REQUIRE((sol.k_ol[0] - lqr.k).norm() < 1e-9);
  }
  SECTION("symmetric scalar two-agent fixed point") {
    const GameDefinition g = symmetric_scalar_game();
    const OlNeSolution sol = solve_olne(g);
    const double p_expected = (1.0 + std::sqrt(3.0)) / 2.0;  // root of 2p^2 - 2p - 1
    const double abar_expected = 1.0 / (1.0 + 2.0 * p_expected);
    REQUIRE(sol.p_ol[0](0, 0) == Catch::Approx(p_expected).margin(1e-10));
    REQUIRE(sol.p_ol[1](0, 0) == Catch::Approx(p_expected).margin(1e-10));
    REQUIRE(sol.abar_ol(0, 0) == Catch::Approx(abar_expected).margin(1e-10));
    REQUIRE(sol.k_ol[0](0, 0) == Catch::Approx(-p_expected * abar_expected).margin(1e-10));
    REQUIRE(1.0 + sol.k_ol[0](0, 0) + sol.k_ol[1](0, 0) ==
            Catch::Approx(sol.abar_ol(0, 0)).margin(1e-12));
    sol.verify(g, 1e-9);
  }
  SECTION("zero cost on a Schur plant gives the open loop back") {
    oracles::Rng rng(13);
    GameDefinition g;
    g.a = rng.schur_matrix(3, 0.8);
    g.b = {rng.matrix(3, 1), rng.matrix(3, 1)};
    g.q.assign(2, Mat::Zero(3, 3));
    g.r.assign(2, Mat::Identity(1, 1));
    g.horizon = 2;
    const OlNeSolution sol = solve_olne(g);
    REQUIRE(sol.p_ol[0].norm() < 1e-12);
    REQUIRE(sol.k_ol[0].norm() < 1e-12);
    REQUIRE((sol.abar_ol - g.a).norm() < 1e-12);
  }
  SECTION("feeding the solution back as initial gains reconverges immediately") {
    const GameDefinition g = asymmetric_witness_game();
    const OlNeSolution first = solve_olne(g);
    OlneSettings settings;
    settings.initial_gains = first.k_ol;
    const OlNeSolution second = solve_olne(g, settings);
    REQUIRE(second.iterations <= 2);
    REQUIRE((second.p_ol[0] - first.p_ol[0]).norm() <= 1e-9 * (1.0 + first.p_ol[0].norm()));
  }
  SECTION("non-symmetric equilibrium witness") {
    const OlNeSolution sol = solve_olne(asymmetric_witness_game());
    REQUIRE((sol.p_ol[0] - sol.p_ol[0].transpose()).norm() > 1e-6);
  }
  SECTION("platooning instance converges with tight residuals") {
    const PlatooningScenario sc = build_platooning(PlatooningParams::defaults(4));
    const OlNeSolution sol = solve_olne(sc.game);
    sol.verify(sc.game, 1e-8);
    for (double r : sol.residuals) REQUIRE(r <= 1e-8);
    REQUIRE(is_schur(sol.abar_ol));
    INFO("platooning P_ol asymmetry " << (sol.p_ol[0] - sol.p_ol[0].transpose()).norm());
    // With identical weights across agents the platooning P_ol can come out
    // symmetric; the asymmetry witness is asserted on the dedicated
    // instance above instead.
  }
}

TEST_CASE("build_cost_to_go") {
  SECTION("single agent: P_tilde = 0 and the lifted weight is block diagonal") {
    GameDefinition g;
    g.a = Mat::Ones(1, 1);
    g.b = {Mat::Ones(1, 1)};
    g.q = {Mat::Ones(1, 1)};
    g.r = {Mat::Ones(1, 1)};
    g.horizon = 1;
    const OlNeSolution sol = solve_olne(g);
    const AugmentedCostToGo ctg = build_cost_to_go(g, sol);
    REQUIRE(ctg.p_tilde[0].norm() < 1e-9);
    REQUIRE(ctg.k_tilde[0].norm() < 1e-9);
    REQUIRE(std::abs(ctg.p_hat[0](0, 1)) < 1e-9);
  }
  SECTION("scalar two-agent blocks match the fixed points") {
    const GameDefinition g = symmetric_scalar_game();
    const OlNeSolution sol = solve_olne(g);
    const AugmentedCostToGo ctg = build_cost_to_go(g, sol);
    const double p_lqr = (1.0 + std::sqrt(5.0)) / 2.0;
    const double p_ol = (1.0 + std::sqrt(3.0)) / 2.0;
    REQUIRE(ctg.p_lqr[0](0, 0) == Catch::Approx(p_lqr).margin(1e-10));
    REQUIRE(ctg.p_tilde[0](0, 0) == Catch::Approx(p_ol - p_lqr).margin(1e-10));
    REQUIRE(ctg.sylvester_consistency[0] <= 1e-9);
  }
  SECTION("identity P_lqr + P_tilde = P_ol holds exactly as assembled") {
    const GameDefinition g = asymmetric_witness_game();
    const OlNeSolution sol = solve_olne(g);
    const AugmentedCostToGo ctg = build_cost_to_go(g, sol);
    for (int i = 0; i < 2; ++i)
      REQUIRE((ctg.p_lqr[i] + ctg.p_tilde[i] - sol.p_ol[i]).norm() <=
              1e-14 * (1.0 + sol.p_ol[i].norm()));
  }
  SECTION("lifted closed loop is Schur and the ARE residual is tight") {
    const GameDefinition g = asymmetric_witness_game();
    const OlNeSolution sol = solve_olne(g);
    const AugmentedCostToGo ctg = build_cost_to_go(g, sol);
    for (int i = 0; i < 2; ++i) {
      REQUIRE(is_schur(ctg.a_hat[i] + ctg.b_hat[i] * ctg.k_hat[i]));
      REQUIRE(ctg.are_residual[i] <= 1e-8);
      REQUIRE(min_symmetric_eigenvalue(ctg.p_hat[i]) >= -1e-8 * (1.0 + ctg.p_hat[i].norm()));
    }
  }
}

TEST_CASE("cost-to-go identities") {
  const GameDefinition g = asymmetric_witness_game();
  const OlNeSolution sol = solve_olne(g);
  const AugmentedCostToGo ctg = build_cost_to_go(g, sol);
  oracles::Rng rng(41);

  SECTION("V vanishes at the origin") {
    REQUIRE(eval_V(ctg, 0, Vec::Zero(2), Vec::Zero(2)) == 0.0);
  }

  SECTION("one-step Bellman identity at 100 random states") {
    for (int trial = 0; trial < 100; ++trial) {
      const Vec x = rng.vector(2);
      for (int i = 0; i < 2; ++i) {
        const double v = eval_V(ctg, i, x, x);
        const Vec ui = sol.k_ol[i] * x;
        const double rhs = stage_cost(g, i, x, ui) +
                           eval_V(ctg, i, sol.abar_ol * x, sol.abar_ol * x);
        REQUIRE(std::abs(v - rhs) <= 1e-9 * (1.0 + std::abs(v)));
      }
    }
  }

  SECTION("argmin of the one-step problem is K_lqr x + K_tilde y") {
    for (int trial = 0; trial < 50; ++trial) {
      const Vec x = rng.vector(2), y = rng.vector(2);
      for (int i = 0; i < 2; ++i) {
        // normal equations of u -> l_i(x,u) + V_i(Ax + B_i u + W y, Abar y)
        Mat w = Mat::Zero(2, 2);
        for (int j = 0; j < 2; ++j)
          if (j != i) w += g.b[j] * sol.k_ol[j];
        const Mat p11 = ctg.p_hat[i].topLeftCorner(2, 2);
        const Mat p12 = ctg.p_hat[i].topRightCorner(2, 2);
        const Mat hess = g.r[i] + g.b[i].transpose() * p11 * g.b[i];
        const Vec lin = g.b[i].transpose() *
                        (p11 * (g.a * x + w * y) + p12 * (sol.abar_ol * y));
        const Vec u_star = -hess.llt().solve(lin);
        const Vec u_gain = ctg.k_lqr[i] * x + ctg.k_tilde[i] * y;
        REQUIRE((u_star - u_gain).norm() <= 1e-8 * (1.0 + x.norm() + y.norm()));
      }
    }
  }

  SECTION("500-step rollout reproduces V(x, x) up to the geometric tail") {
    const double rho = spectral_radius(sol.abar_ol);
    for (int trial = 0; trial < 5; ++trial) {
      const Vec x0 = rng.vector(2);
      for (int i = 0; i < 2; ++i) {
        double cost = 0.0;
        Vec x = x0;
        for (int t = 0; t < 500; ++t) {
          cost += stage_cost(g, i, x, Vec(sol.k_ol[i] * x));
          x = sol.abar_ol * x;
        }
        const double v = eval_V(ctg, i, x0, x0);
        const double tail = eval_V(ctg, i, x, x);  // exact remainder of the series
        REQUIRE(std::abs(cost - v) <= 2.0 * tail + 1e-10 * (1.0 + std::abs(v)));
        REQUIRE(tail <= std::pow(rho, 2 * 500) * 1e6 * (1.0 + x0.squaredNorm()));
      }
    }
  }
}
