#pragma once

// Infinite-horizon closed-loop Nash equilibrium via the coupled symmetric
// Riccati equations
//   P_i = Q_i + Abar_{-i}^T P_i Abar,   K_i = -R_i^{-1} B_i^T P_i Abar,
// with Abar = A + sum_j B_j K_j and Abar_{-i} = A + sum_{j != i} B_j K_j.
// Two iteration schemes: fixing the opponents' gains and solving a standard
// Riccati equation per agent, or rewriting the equation as a Lyapunov
// equation in Abar with an absorbed weight
//   Qtil_i = Q_i + (P_i Abar)^T S_i (P_i Abar).

#include <optional>
#include <string>
#include <tuple>
#include <vector>

#include "dyngame/game.hpp"
#include "dyngame/matrix_eq.hpp"
#include "dyngame/olne.hpp"

namespace dyngame {

enum class ClNeMethod { riccati_recursion, lyapunov_recursion };

struct ClNeSolution {
  std::vector<Mat> p_cl;  // symmetric PSD
  std::vector<Mat> k_cl;
  Mat abar_cl;
  std::vector<Mat> abar_cl_minus;  // Abar_{-i}
  std::vector<double> residuals;
  int iterations = 0;
  ClNeMethod method = ClNeMethod::lyapunov_recursion;

  void verify(const GameDefinition& game, double tol) const {
    for (int i = 0; i < game.num_agents(); ++i) {
      if (!is_symmetric(p_cl[i], 1e-9) ||
          min_symmetric_eigenvalue(p_cl[i]) < -1e-8 * (1.0 + p_cl[i].norm()))
        throw AssumptionError("ClNeSolution: P not symmetric PSD (agent " + std::to_string(i + 1) +
                              ")");
      const double res =
          (p_cl[i] - game.q[i] - abar_cl_minus[i].transpose() * p_cl[i] * abar_cl).norm();
      if (res > tol * (1.0 + game.q[i].norm()))
        throw AssumptionError("ClNeSolution: coupled ARE residual above tolerance (agent " +
                              std::to_string(i + 1) + ")");
    }
    if (!is_schur(abar_cl)) throw AssumptionError("ClNeSolution: closed loop not Schur");
  }
};

struct ClneSettings {
  ClNeMethod method = ClNeMethod::lyapunov_recursion;
  double tol = 1e-10;
  int max_iter = 100000;
  std::optional<std::vector<Mat>> initial_gains;
};

inline ClNeSolution solve_clne(const GameDefinition& game, const ClneSettings& settings = {}) {
  const Eigen::Index n = game.state_dim();
  const int num_agents = game.num_agents();
  Mat b_all = hstack(game.b);
  Mat q_sum = Mat::Zero(n, n);
  for (int i = 0; i < num_agents; ++i) q_sum += game.q[i];
  if (!is_stabilizable(game.a, b_all))
    throw AssumptionError("solve_clne: (A, row(B_i)) not stabilizable");
  if (!is_detectable(game.a, psd_sqrt(q_sum)))
    throw AssumptionError("solve_clne: (A, sum_i Q_i) not detectable");

  std::vector<Mat> gains =
      settings.initial_gains ? *settings.initial_gains : default_initial_gains(game);
  require(static_cast<int>(gains.size()) == num_agents, "solve_clne: one initial gain per agent");

  ClNeSolution sol;
  sol.method = settings.method;
  sol.p_cl.assign(num_agents, Mat::Zero(n, n));
  std::vector<double> history;
  bool converged = false;

  if (settings.method == ClNeMethod::lyapunov_recursion) {
    Mat abar = game.a;
    for (int i = 0; i < num_agents; ++i) abar += game.b[i] * gains[i];
    if (!is_schur(abar))
      throw AssumptionError("solve_clne: initial gains do not make the closed loop Schur");
    std::vector<Mat> s(num_agents), q_til(game.q.begin(), game.q.end());
    for (int i = 0; i < num_agents; ++i) s[i] = game.s(i);
    const Mat eye = Mat::Identity(n, n);
    for (int it = 1; it <= settings.max_iter; ++it) {
      std::vector<Mat> p_next(num_agents);
      for (int i = 0; i < num_agents; ++i) {
        p_next[i] = symmetrize(solve_dlyap(abar, q_til[i]));
        if ((p_next[i] - p_next[i].transpose()).norm() > 1e-9 * p_next[i].norm())
          throw NonConvergenceError("solve_clne: symmetry lost", history);
      }
      Mat gram = eye;
      for (int i = 0; i < num_agents; ++i) gram += s[i] * p_next[i];
      Eigen::FullPivLU<Mat> lu(gram);
      if (!lu.isInvertible())
        throw NonConvergenceError("solve_clne: I + sum_j S_j P_j became singular", history);
      abar = lu.solve(game.a);
      if (spectral_radius(abar) >= 1.0 - kSchurTol)
        throw NonConvergenceError("solve_clne: iterate left the Schur region", history);
      for (int i = 0; i < num_agents; ++i) {
        const Mat pa = p_next[i] * abar;
        q_til[i] = game.q[i] + pa.transpose() * s[i] * pa;
      }
      double delta = 0.0;
      for (int i = 0; i < num_agents; ++i)
        delta = std::max(delta, rel_fro_diff(p_next[i], sol.p_cl[i]));
      history.push_back(delta);
      sol.p_cl = std::move(p_next);
      sol.iterations = it;
      if (delta < settings.tol) {
        converged = true;
        break;
      }
    }
    sol.abar_cl = abar;
  } else {
    // Gauss-Seidel sweeps: each agent solves a standard Riccati equation
    // against the opponents' current gains.
    for (int it = 1; it <= settings.max_iter; ++it) {
      std::vector<Mat> p_next(num_agents);
      for (int i = 0; i < num_agents; ++i) {
        Mat a_minus = game.a;
        for (int j = 0; j < num_agents; ++j)
          if (j != i) a_minus += game.b[j] * gains[j];
        DareSolution d = solve_dare(a_minus, game.b[i], game.q[i], game.r[i]);
        p_next[i] = d.p;
        gains[i] = d.k;
      }
      double delta = 0.0;
      for (int i = 0; i < num_agents; ++i)
        delta = std::max(delta, rel_fro_diff(p_next[i], sol.p_cl[i]));
      history.push_back(delta);
      sol.p_cl = std::move(p_next);
      sol.iterations = it;
      if (delta < settings.tol) {
        converged = true;
        break;
      }
    }
    sol.abar_cl = game.a;
    for (int i = 0; i < num_agents; ++i) sol.abar_cl += game.b[i] * gains[i];
  }
  if (!converged) throw NonConvergenceError("solve_clne: no convergence within max_iter", history);

  sol.k_cl.resize(num_agents);
  for (int i = 0; i < num_agents; ++i)
    sol.k_cl[i] = -game.r[i].llt().solve(game.b[i].transpose() * sol.p_cl[i] * sol.abar_cl);
  sol.abar_cl_minus.assign(num_agents, Mat());
  for (int i = 0; i < num_agents; ++i) {
    sol.abar_cl_minus[i] = game.a;
    for (int j = 0; j < num_agents; ++j)
      if (j != i) sol.abar_cl_minus[i] += game.b[j] * sol.k_cl[j];
  }
  sol.residuals.resize(num_agents);
  for (int i = 0; i < num_agents; ++i)
    sol.residuals[i] =
        (sol.p_cl[i] - game.q[i] - sol.abar_cl_minus[i].transpose() * sol.p_cl[i] * sol.abar_cl)
            .norm();
  return sol;
}

struct BellmanCheck {
  double lhs = 0.0;  // 1/2 ||x||^2_{P_i}
  double rhs = 0.0;  // min_u l_i(x,u) + 1/2 ||Abar_{-i} x + B_i u||^2_{P_i}
  Vec argmin;
};

// One-step optimality of the equilibrium feedback: the minimizing input of
// the quadratic subproblem is K_i x and the value equals 1/2 ||x||^2_{P_i}.
inline BellmanCheck bellman_check_cl(const ClNeSolution& sol, const GameDefinition& game, int i,
                                     const Vec& x) {
  require(i >= 0 && i < game.num_agents(), "bellman_check_cl: agent index out of range");
  BellmanCheck chk;
  chk.lhs = 0.5 * x.dot(sol.p_cl[i] * x);
  const Mat hess = game.r[i] + game.b[i].transpose() * sol.p_cl[i] * game.b[i];
  const Vec lin = game.b[i].transpose() * sol.p_cl[i] * (sol.abar_cl_minus[i] * x);
  chk.argmin = -hess.llt().solve(lin);
  const Vec succ = sol.abar_cl_minus[i] * x + game.b[i] * chk.argmin;
  chk.rhs = stage_cost(game, i, x, chk.argmin) + 0.5 * succ.dot(sol.p_cl[i] * succ);
  return chk;
}

}  // namespace dyngame
