#pragma once

// Infinite-horizon open-loop Nash equilibrium machinery. The coupled
// equations per agent are
//   P_i = Q_i + A^T P_i Abar,   K_i = -R_i^{-1} B_i^T P_i Abar,
//   Abar = A + sum_i B_i K_i = (I + sum_i S_i P_i)^{-1} A,
// solved by fixing Abar, solving the N decoupled Stein equations, and
// updating Abar until the P_i settle. The equilibrium cost-to-go for agent i
// is the value function of a regulator in a doubled state space whose second
// half replays the opponents' equilibrium inputs.

#include <Eigen/Dense>
#include <Eigen/Eigenvalues>
#include <cmath>
#include <complex>
#include <optional>
#include <string>
#include <vector>

#include "dyngame/game.hpp"
#include "dyngame/matrix_eq.hpp"
#include "dyngame/matrix_utils.hpp"
#include "dyngame/spectral.hpp"

namespace dyngame {

namespace detail {

// Reorders a complex Schur form H = U T U^* so that all diagonal entries with
// |t| < cutoff come first, using adjacent similarity swaps.
inline void reorder_schur_stable_first(Eigen::MatrixXcd& t, Eigen::MatrixXcd& u, double cutoff) {
  const Eigen::Index n = t.rows();
  auto stable = [&](Eigen::Index k) { return std::abs(t(k, k)) < cutoff; };
  auto swap_adjacent = [&](Eigen::Index k) {
    // Rotation mapping the eigenvector [t(k,k+1); t(k+1,k+1)-t(k,k)] of the
    // trailing eigenvalue onto e1 swaps the two diagonal entries.
    const std::complex<double> x = t(k, k + 1);
    const std::complex<double> d = t(k + 1, k + 1) - t(k, k);
    Eigen::JacobiRotation<std::complex<double>> rot;
    rot.makeGivens(x, d);
    t.applyOnTheLeft(k, k + 1, rot.adjoint());
    t.applyOnTheRight(k, k + 1, rot);
    u.applyOnTheRight(k, k + 1, rot);
    t(k + 1, k) = 0.0;
  };
  Eigen::Index front = 0;
  for (Eigen::Index k = 0; k < n; ++k) {
    if (!stable(k)) continue;
    for (Eigen::Index j = k; j > front; --j) swap_adjacent(j - 1);
    ++front;
  }
}

// Orthonormal real basis of the invariant subspace spanned by the first
// `dim` (conjugation-closed) Schur vectors of a real matrix.
inline Mat real_basis(const Eigen::MatrixXcd& u_cols, Eigen::Index dim) {
  Mat w(u_cols.rows(), 2 * dim);
  w << u_cols.leftCols(dim).real(), u_cols.leftCols(dim).imag();
  Eigen::JacobiSVD<Mat> svd(w, Eigen::ComputeThinU);
  return svd.matrixU().leftCols(dim);
}

}  // namespace detail

struct AssumptionReport {
  bool a_invertible = false;
  std::vector<bool> stabilizable;  // per agent, (A, B_i)
  std::vector<bool> detectable;    // per agent, (A, C_i)
  Mat h;                           // (N+1)n x (N+1)n; empty when A is singular
  int stable_eig_count = 0;        // eigenvalues of h with modulus < 1
  bool complementarity_ok = false;
  bool ambiguous_stable_count = false;  // eigenvalue modulus within tie band of 1
  bool overall = false;
};

inline AssumptionReport check_assumptions(const GameDefinition& game) {
  const Eigen::Index n = game.state_dim();
  const int num_agents = game.num_agents();
  AssumptionReport rep;

  Eigen::JacobiSVD<Mat> svd_a(game.a);
  const auto& sv = svd_a.singularValues();
  rep.a_invertible = sv.size() > 0 && sv(sv.size() - 1) > 1e-12 * sv(0);

  for (int i = 0; i < num_agents; ++i) {
    rep.stabilizable.push_back(is_stabilizable(game.a, game.b[i]));
    rep.detectable.push_back(is_detectable(game.a, game.c(i)));
  }

  if (!rep.a_invertible) return rep;  // H is defined through A^{-T}

  const Mat a_inv_t = game.a.transpose().partialPivLu().solve(Mat::Identity(n, n));
  Mat h((num_agents + 1) * n, (num_agents + 1) * n);
  h.setZero();
  Mat h11 = game.a;
  for (int j = 0; j < num_agents; ++j) h11 += game.s(j) * a_inv_t * game.q[j];
  h.topLeftCorner(n, n) = h11;
  for (int j = 0; j < num_agents; ++j) {
    h.block(0, (1 + j) * n, n, n) = -game.s(j) * a_inv_t;
    h.block((1 + j) * n, 0, n, n) = -a_inv_t * game.q[j];
    h.block((1 + j) * n, (1 + j) * n, n, n) = a_inv_t;
  }
  rep.h = h;

  Eigen::ComplexSchur<Eigen::MatrixXcd> schur(h.cast<std::complex<double>>());
  if (schur.info() != Eigen::Success)
    throw NonConvergenceError("check_assumptions: Schur factorization of H failed");
  Eigen::MatrixXcd t = schur.matrixT();
  Eigen::MatrixXcd u = schur.matrixU();
  const double cutoff = 1.0 - kSchurTol;
  for (Eigen::Index k = 0; k < t.rows(); ++k) {
    const double mod = std::abs(t(k, k));
    if (mod < cutoff) ++rep.stable_eig_count;
    if (std::abs(mod - 1.0) <= kSchurTol) rep.ambiguous_stable_count = true;
  }

  if (rep.stable_eig_count == n) {
    detail::reorder_schur_stable_first(t, u, cutoff);
    Mat basis = detail::real_basis(u, n);
    Eigen::JacobiSVD<Mat> svd_top(basis.topRows(n));
    const auto& tsv = svd_top.singularValues();
    rep.complementarity_ok = tsv.size() > 0 && tsv(tsv.size() - 1) > kHautusRankTol;
  }

  bool sub = rep.a_invertible && rep.stable_eig_count == n && rep.complementarity_ok &&
             !rep.ambiguous_stable_count;
  for (int i = 0; i < num_agents; ++i) sub = sub && rep.stabilizable[i] && rep.detectable[i];
  rep.overall = sub;
  return rep;
}

struct OlNeSolution {
  std::vector<Mat> p_ol;  // generally non-symmetric
  std::vector<Mat> k_ol;
  Mat abar_ol;
  std::vector<double> residuals;  // per-agent ||P_i - Q_i - A^T P_i Abar||_F
  int iterations = 0;

  // Checks the defining relations; throws on violation.
  void verify(const GameDefinition& game, double tol) const {
    Mat abar_from_gains = game.a;
    for (int i = 0; i < game.num_agents(); ++i) abar_from_gains += game.b[i] * k_ol[i];
    if ((abar_from_gains - abar_ol).norm() > 1e-10 * (1.0 + abar_ol.norm()))
      throw AssumptionError("OlNeSolution: closed-loop matrix inconsistent with gains");
    Mat gram = Mat::Identity(game.state_dim(), game.state_dim());
    for (int i = 0; i < game.num_agents(); ++i) gram += game.s(i) * p_ol[i];
    if ((gram * abar_ol - game.a).norm() > 1e-8 * (1.0 + game.a.norm()))
      throw AssumptionError("OlNeSolution: resolvent form of the closed loop violated");
    for (int i = 0; i < game.num_agents(); ++i) {
      const double res = (p_ol[i] - game.q[i] - game.a.transpose() * p_ol[i] * abar_ol).norm();
      if (res > tol * (1.0 + game.q[i].norm()))
        throw AssumptionError("OlNeSolution: Riccati residual above tolerance (agent " +
                              std::to_string(i + 1) + ")");
    }
    if (!is_schur(abar_ol)) throw AssumptionError("OlNeSolution: closed loop not Schur");
  }
};

// Splits one centralized LQR gain on (A, [B_1 ... B_N]) row-wise across the
// agents. Falls back to zero gains when A is already Schur.
inline std::vector<Mat> default_initial_gains(const GameDefinition& game) {
  const int num_agents = game.num_agents();
  const Eigen::Index m = game.input_dim();
  if (is_schur(game.a)) return std::vector<Mat>(num_agents, Mat::Zero(m, game.state_dim()));
  Mat b_all = hstack(game.b);
  Mat q_sum = Mat::Zero(game.state_dim(), game.state_dim());
  for (int i = 0; i < num_agents; ++i) q_sum += game.q[i];
  std::vector<Mat> r_blocks(game.r.begin(), game.r.end());
  DareSolution lqr = solve_dare(game.a, b_all, q_sum, blkdiag(r_blocks));
  std::vector<Mat> k0(num_agents);
  for (int i = 0; i < num_agents; ++i) k0[i] = lqr.k.middleRows(static_cast<Eigen::Index>(i) * m, m);
  return k0;
}

struct OlneSettings {
  double tol = 1e-10;
  int max_iter = 10000;
  std::optional<std::vector<Mat>> initial_gains;
};

inline OlNeSolution solve_olne(const GameDefinition& game, const OlneSettings& settings = {}) {
  const Eigen::Index n = game.state_dim();
  const int num_agents = game.num_agents();
  std::vector<Mat> k0 = settings.initial_gains ? *settings.initial_gains : default_initial_gains(game);
  require(static_cast<int>(k0.size()) == num_agents, "solve_olne: one initial gain per agent");

  Mat abar = game.a;
  for (int i = 0; i < num_agents; ++i) abar += game.b[i] * k0[i];
  if (!is_schur(abar))
    throw AssumptionError("solve_olne: initial gains do not make the closed loop Schur");

  std::vector<Mat> s(num_agents);
  for (int i = 0; i < num_agents; ++i) s[i] = game.s(i);

  OlNeSolution sol;
  sol.p_ol.assign(num_agents, Mat::Zero(n, n));
  std::vector<double> history;
  const Mat eye = Mat::Identity(n, n);
  bool converged = false;
  for (int it = 1; it <= settings.max_iter; ++it) {
    std::vector<Mat> p_next(num_agents);
    for (int i = 0; i < num_agents; ++i) p_next[i] = solve_stein(game.a, abar, game.q[i]);

    Mat gram = eye;
    for (int i = 0; i < num_agents; ++i) gram += s[i] * p_next[i];
    Eigen::FullPivLU<Mat> lu(gram);
    if (!lu.isInvertible())
      throw NonConvergenceError("solve_olne: I + sum_j S_j P_j became singular", history);
    abar = lu.solve(game.a);
    if (spectral_radius(abar) >= 1.0 - kSchurTol)
      throw NonConvergenceError("solve_olne: iterate left the Schur region", history);

    double delta = 0.0;
    for (int i = 0; i < num_agents; ++i)
      delta = std::max(delta, rel_fro_diff(p_next[i], sol.p_ol[i]));
    history.push_back(delta);
    sol.p_ol = std::move(p_next);
    sol.iterations = it;
    if (delta < settings.tol) {
      converged = true;
      break;
    }
  }
  if (!converged)
    throw NonConvergenceError("solve_olne: no convergence within max_iter", history);

  sol.abar_ol = abar;
  sol.k_ol.resize(num_agents);
  sol.residuals.resize(num_agents);
  for (int i = 0; i < num_agents; ++i) {
    sol.k_ol[i] = -game.r[i].llt().solve(game.b[i].transpose() * sol.p_ol[i] * abar);
    sol.residuals[i] = (sol.p_ol[i] - game.q[i] - game.a.transpose() * sol.p_ol[i] * abar).norm();
  }
  return sol;
}

// Per-agent augmented regulator housing the equilibrium cost-to-go
// V_i(x, y) = 1/2 [x; y]^T Phat_i [x; y].
struct AugmentedCostToGo {
  std::vector<Mat> p_lqr;
  std::vector<Mat> k_lqr;
  std::vector<Mat> p_tilde;  // P_ol - P_lqr, exact by assembly
  std::vector<Mat> k_tilde;
  std::vector<Mat> a_hat;  // 2n x 2n
  std::vector<Mat> b_hat;  // 2n x m
  std::vector<Mat> p_hat;  // 2n x 2n symmetric PSD
  std::vector<Mat> k_hat;  // m x 2n
  std::vector<double> sylvester_consistency;  // ||P_tilde(sylvester) - (P_ol - P_lqr)||_F
  std::vector<double> are_residual;           // augmented ARE defect of the assembled P_hat

  Eigen::Index state_dim() const { return p_lqr.empty() ? 0 : p_lqr.front().rows(); }
};

inline double eval_V(const AugmentedCostToGo& ctg, int i, const Vec& x, const Vec& y) {
  const Eigen::Index n = ctg.state_dim();
  require(x.size() == n && y.size() == n, "eval_V: state dimension mismatch");
  Vec z(2 * n);
  z << x, y;
  return 0.5 * z.dot(ctg.p_hat[i] * z);
}

inline AugmentedCostToGo build_cost_to_go(const GameDefinition& game, const OlNeSolution& sol) {
  const Eigen::Index n = game.state_dim(), m = game.input_dim();
  const int num_agents = game.num_agents();
  AugmentedCostToGo ctg;

  for (int i = 0; i < num_agents; ++i) {
    DareSolution lqr = solve_dare(game.a, game.b[i], game.q[i], game.r[i]);
    const Mat abar_lqr = game.a + game.b[i] * lqr.k;

    Mat w = Mat::Zero(n, n);  // opponents' closed-loop input map
    for (int j = 0; j < num_agents; ++j)
      if (j != i) w += game.b[j] * sol.k_ol[j];

    const Mat p_tilde_sylv =
        solve_sylvester_stein(abar_lqr, sol.abar_ol, abar_lqr.transpose() * lqr.p * w);
    const Mat p_tilde = sol.p_ol[i] - lqr.p;
    ctg.sylvester_consistency.push_back((p_tilde_sylv - p_tilde).norm());

    const Mat k_tilde = -(game.r[i] + game.b[i].transpose() * lqr.p * game.b[i])
                             .llt()
                             .solve(game.b[i].transpose() * (p_tilde * sol.abar_ol + lqr.p * w));

    Mat a_hat(2 * n, 2 * n), b_hat(2 * n, m), q_hat = Mat::Zero(2 * n, 2 * n);
    a_hat << game.a, w, Mat::Zero(n, n), sol.abar_ol;
    b_hat << game.b[i], Mat::Zero(n, m);
    q_hat.topLeftCorner(n, n) = game.q[i];
    Mat k_hat(m, 2 * n);
    k_hat << lqr.k, k_tilde;

    const Mat a_hat_cl = a_hat + b_hat * k_hat;
    if (!is_schur(a_hat_cl))
      throw AssumptionError("build_cost_to_go: lifted closed loop not Schur (agent " +
                            std::to_string(i + 1) + ")");

    // Closed-loop cost matrix of the lifted regulator; its trailing block is
    // the only part Eq-level algebra leaves unspecified.
    const Mat p_full = solve_dlyap(a_hat_cl, q_hat + k_hat.transpose() * game.r[i] * k_hat);
    Mat p_hat(2 * n, 2 * n);
    p_hat.topLeftCorner(n, n) = lqr.p;
    p_hat.topRightCorner(n, n) = p_tilde;
    p_hat.bottomLeftCorner(n, n) = p_tilde.transpose();
    p_hat.bottomRightCorner(n, n) = symmetrize(p_full.bottomRightCorner(n, n));

    const double are_res =
        (p_hat - q_hat - a_hat.transpose() * p_hat * a_hat_cl).norm() / (1.0 + p_hat.norm());
    ctg.are_residual.push_back(are_res);
    if (are_res > 1e-8)
      throw AssumptionError("build_cost_to_go: augmented ARE residual above tolerance (agent " +
                            std::to_string(i + 1) + ")");
    if (min_symmetric_eigenvalue(p_hat) < -1e-8 * (1.0 + p_hat.norm()))
      throw AssumptionError("build_cost_to_go: assembled P_hat not PSD (agent " +
                            std::to_string(i + 1) + ")");

    ctg.p_lqr.push_back(lqr.p);
    ctg.k_lqr.push_back(lqr.k);
    ctg.p_tilde.push_back(p_tilde);
    ctg.k_tilde.push_back(k_tilde);
    ctg.a_hat.push_back(std::move(a_hat));
    ctg.b_hat.push_back(std::move(b_hat));
    ctg.p_hat.push_back(std::move(p_hat));
    ctg.k_hat.push_back(std::move(k_hat));
  }
  return ctg;
}

}  // namespace dyngame
