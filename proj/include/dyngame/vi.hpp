#pragma once

// Finite-horizon game as an affine variational inequality. Decision variable
// is the agent-major stack u = col_i(col_t(u_i[t])) of length T*N*m, the
// operator is F(u | x0) = M u + W x0, and the feasible set combines per-step
// input boxes, stacked linear rows for state and coupling constraints, and an
// optional terminal ellipsoid on the predicted final state.
//
// The solver is a projected forward-backward scheme: local boxes are handled
// by projection, the remaining rows by multiplier ascent. Plain
// forward-backward is used when the operator is strongly monotone and no
// rows are dualized; otherwise an extragradient pass on the primal-dual
// operator provides convergence for merely monotone instances. Reported
// residuals are certified against the true natural residual, with the exact
// projection onto the feasible set computed by an inner solve.

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <optional>
#include <vector>

#include "dyngame/clne.hpp"
#include "dyngame/game.hpp"
#include "dyngame/olne.hpp"
#include "dyngame/terminal_set.hpp"

namespace dyngame {

enum class ViKind { olne_terminal, clne_surrogate, no_terminal };

struct FeasibleSet {
  Vec lo, hi;        // box on the stacked decision vector
  Mat rows;          // dualized rows: rows * u <= rhs_const + rhs_x0 * x0
  Vec rhs_const;
  Mat rhs_x0;
  // Optional terminal ellipsoid || theta_last x0 + gamma_last u ||^2_P <= r.
  bool has_terminal = false;
  Mat p_term;
  double r_term = 0.0;

  Eigen::Index num_rows() const { return rows.rows(); }
};

struct FiniteHorizonVi {
  ViKind kind = ViKind::no_terminal;
  int T = 0, num_agents = 0;
  Eigen::Index n = 0, m = 0;

  Mat big_m;   // TNm x TNm
  Mat w_mat;   // TNm x n, offset map x0 -> W x0
  std::vector<Mat> gamma;  // per-agent cost-side prediction of col(x[1..T])
  std::vector<Mat> theta;  // per-agent offset map for the same prediction
  std::vector<Mat> qbar;   // per-agent block weights
  std::vector<Mat> rbar;
  FeasibleSet feasible;

  // True-dynamics prediction of the terminal state x[T] = theta_last x0 +
  // gamma_last u (also used by the terminal ellipsoid row).
  Mat gamma_last;  // n x TNm
  Mat theta_last;  // n x n
  Mat gamma_true;  // Tn x TNm, full true-dynamics prediction
  Mat theta_true;  // Tn x n

  Eigen::Index dim() const { return static_cast<Eigen::Index>(T) * num_agents * m; }

  Vec f(const Vec& u, const Vec& x0) const { return big_m * u + w_mat * x0; }

  // Stacked input col_i(u_i[t]) at one time step, from the agent-major stack.
  Vec stacked_input_at(const Vec& u, int t) const {
    Vec out(static_cast<Eigen::Index>(num_agents) * m);
    for (int i = 0; i < num_agents; ++i)
      out.segment(static_cast<Eigen::Index>(i) * m, m) =
          u.segment((static_cast<Eigen::Index>(i) * T + t) * m, m);
    return out;
  }

  Vec terminal_state(const Vec& u, const Vec& x0) const { return theta_last * x0 + gamma_last * u; }
};

namespace detail {

// Lower block-triangular prediction matrix with (r, c) block A^{r-c} B, plus
// the matching offset stack col(A^{t+1}).
inline void prediction_matrices(const Mat& a, const Mat& b, int T, Mat* gamma, Mat* theta) {
  const Eigen::Index n = a.rows(), m = b.cols();
  std::vector<Mat> apow(static_cast<size_t>(T) + 1);
  apow[0] = Mat::Identity(n, n);
  for (int k = 1; k <= T; ++k) apow[k] = a * apow[k - 1];
  gamma->setZero(static_cast<Eigen::Index>(T) * n, static_cast<Eigen::Index>(T) * m);
  theta->resize(static_cast<Eigen::Index>(T) * n, n);
  for (int r = 0; r < T; ++r) {
    theta->middleRows(static_cast<Eigen::Index>(r) * n, n) = apow[static_cast<size_t>(r) + 1];
    for (int c = 0; c <= r; ++c)
      gamma->block(static_cast<Eigen::Index>(r) * n, static_cast<Eigen::Index>(c) * m, n, m) =
          apow[static_cast<size_t>(r - c)] * b;
  }
}

struct SurrogatePrediction {
  Mat gamma_own;           // from (Abar_{-i}, B_i)
  std::vector<Mat> cross;  // first-step-only effect of each opponent input
  Mat theta;               // col(Abar_{-i}^t A)
};

// Agent prediction for the closed-loop surrogate: the first step uses the
// shared dynamics, afterwards opponents are replaced by their equilibrium
// feedback absorbed into Abar_{-i}.
inline SurrogatePrediction surrogate_prediction(const Mat& a, const Mat& abar_minus,
                                                const std::vector<Mat>& b, int i, int T) {
  const Eigen::Index n = a.rows(), m = b[static_cast<size_t>(i)].cols();
  SurrogatePrediction pred;
  prediction_matrices(abar_minus, b[static_cast<size_t>(i)], T, &pred.gamma_own, &pred.theta);
  std::vector<Mat> apow(static_cast<size_t>(T));
  apow[0] = Mat::Identity(n, n);
  for (int k = 1; k < T; ++k) apow[static_cast<size_t>(k)] = abar_minus * apow[static_cast<size_t>(k) - 1];
  for (int r = 0; r < T; ++r)
    pred.theta.middleRows(static_cast<Eigen::Index>(r) * n, n) = apow[static_cast<size_t>(r)] * a;
  pred.cross.assign(b.size(), Mat::Zero(static_cast<Eigen::Index>(T) * n, m));
  for (size_t j = 0; j < b.size(); ++j) {
    if (static_cast<int>(j) == i) continue;
    for (int r = 0; r < T; ++r)
      pred.cross[j].middleRows(static_cast<Eigen::Index>(r) * n, n) = apow[static_cast<size_t>(r)] * b[j];
  }
  return pred;
}

}  // namespace detail

namespace detail {

inline void assemble_feasible_set(const ConstraintSpec& spec,
                                  const std::optional<TerminalSet>& terminal, FiniteHorizonVi* vi) {
  const int T = vi->T, num_agents = vi->num_agents;
  const Eigen::Index n = vi->n, m = vi->m;
  const Eigen::Index dim = vi->dim();
  FeasibleSet& fs = vi->feasible;

  fs.lo.resize(dim);
  fs.hi.resize(dim);
  for (int i = 0; i < num_agents; ++i)
    for (int t = 0; t < T; ++t) {
      const Eigen::Index off = (static_cast<Eigen::Index>(i) * T + t) * m;
      fs.lo.segment(off, m) = spec.input_boxes[static_cast<size_t>(i)].lo;
      fs.hi.segment(off, m) = spec.input_boxes[static_cast<size_t>(i)].hi;
    }

  const Eigen::Index state_rows = spec.state.rows();
  const Eigen::Index coup_rows = spec.coupling ? spec.coupling->rows() : 0;
  const Eigen::Index total = static_cast<Eigen::Index>(T) * (state_rows + coup_rows);
  fs.rows.setZero(total, dim);
  fs.rhs_const.resize(total);
  fs.rhs_x0.setZero(total, n);
  Eigen::Index r0 = 0;
  if (state_rows > 0) {
    for (int t = 0; t < T; ++t) {
      const Eigen::Index rows_off = r0 + static_cast<Eigen::Index>(t) * state_rows;
      fs.rows.middleRows(rows_off, state_rows) =
          spec.state.g * vi->gamma_true.middleRows(static_cast<Eigen::Index>(t) * n, n);
      fs.rhs_const.segment(rows_off, state_rows) = spec.state.h;
      fs.rhs_x0.middleRows(rows_off, state_rows) =
          -spec.state.g * vi->theta_true.middleRows(static_cast<Eigen::Index>(t) * n, n);
    }
    r0 += static_cast<Eigen::Index>(T) * state_rows;
  }
  if (coup_rows > 0) {
    for (int t = 0; t < T; ++t) {
      const Eigen::Index rows_off = r0 + static_cast<Eigen::Index>(t) * coup_rows;
      for (int i = 0; i < num_agents; ++i)
        fs.rows.block(rows_off, (static_cast<Eigen::Index>(i) * T + t) * m, coup_rows, m) =
            spec.coupling->g.middleCols(static_cast<Eigen::Index>(i) * m, m);
      fs.rhs_const.segment(rows_off, coup_rows) = spec.coupling->h;
    }
  }

  if (terminal && !terminal->unbounded()) {
    fs.has_terminal = true;
    fs.p_term = terminal->p_lyap;
    fs.r_term = terminal->r;
  }
}

}  // namespace detail

// Open-loop terminal-cost variant: prediction from the shared dynamics, last
// block weight P_ol.
inline FiniteHorizonVi build_vi(const GameDefinition& game, const AugmentedCostToGo& ctg,
                                const ConstraintSpec& spec,
                                const std::optional<TerminalSet>& terminal = {}) {
  FiniteHorizonVi vi;
  vi.kind = ViKind::olne_terminal;
  vi.T = game.horizon;
  vi.num_agents = game.num_agents();
  vi.n = game.state_dim();
  vi.m = game.input_dim();
  require(static_cast<int>(ctg.p_lqr.size()) == vi.num_agents, "build_vi: cost-to-go agent count");

  Mat gamma_i, theta_i;
  std::vector<Mat> gammas(static_cast<size_t>(vi.num_agents));
  for (int i = 0; i < vi.num_agents; ++i) {
    detail::prediction_matrices(game.a, game.b[static_cast<size_t>(i)], vi.T, &gamma_i, &theta_i);
    gammas[static_cast<size_t>(i)] = gamma_i;
  }
  vi.gamma = gammas;
  vi.theta.assign(static_cast<size_t>(vi.num_agents), theta_i);
  vi.gamma_true = hstack(gammas);
  vi.theta_true = theta_i;
  vi.gamma_last = vi.gamma_true.bottomRows(vi.n);
  vi.theta_last = vi.theta_true.bottomRows(vi.n);

  const Eigen::Index dim = vi.dim();
  const Eigen::Index tm = static_cast<Eigen::Index>(vi.T) * vi.m;
  vi.big_m.setZero(dim, dim);
  vi.w_mat.setZero(dim, vi.n);
  for (int i = 0; i < vi.num_agents; ++i) {
    Mat qbar = blkdiag(std::vector<Mat>(static_cast<size_t>(vi.T), game.q[static_cast<size_t>(i)]));
    qbar.bottomRightCorner(vi.n, vi.n) = ctg.p_lqr[static_cast<size_t>(i)] + ctg.p_tilde[static_cast<size_t>(i)];
    Mat rbar = blkdiag(std::vector<Mat>(static_cast<size_t>(vi.T), game.r[static_cast<size_t>(i)]));
    const Mat gq = gammas[static_cast<size_t>(i)].transpose() * qbar;
    for (int j = 0; j < vi.num_agents; ++j)
      vi.big_m.block(static_cast<Eigen::Index>(i) * tm, static_cast<Eigen::Index>(j) * tm, tm, tm) =
          gq * gammas[static_cast<size_t>(j)];
    vi.big_m.block(static_cast<Eigen::Index>(i) * tm, static_cast<Eigen::Index>(i) * tm, tm, tm) += rbar;
    vi.w_mat.middleRows(static_cast<Eigen::Index>(i) * tm, tm) = gq * theta_i;
    vi.qbar.push_back(std::move(qbar));
    vi.rbar.push_back(std::move(rbar));
  }
  detail::assemble_feasible_set(spec, terminal, &vi);
  return vi;
}

// Closed-loop surrogate: agent i predicts opponents playing their
// equilibrium feedback after the shared first step; last block weight P_cl.
inline FiniteHorizonVi build_vi(const GameDefinition& game, const ClNeSolution& cl,
                                const ConstraintSpec& spec,
                                const std::optional<TerminalSet>& terminal = {}) {
  FiniteHorizonVi vi;
  vi.kind = ViKind::clne_surrogate;
  vi.T = game.horizon;
  vi.num_agents = game.num_agents();
  vi.n = game.state_dim();
  vi.m = game.input_dim();
  require(static_cast<int>(cl.p_cl.size()) == vi.num_agents, "build_vi: CL solution agent count");

  Mat gamma_i, theta_true;
  std::vector<Mat> gammas_true(static_cast<size_t>(vi.num_agents));
  for (int i = 0; i < vi.num_agents; ++i)
    detail::prediction_matrices(game.a, game.b[static_cast<size_t>(i)], vi.T,
                                &gammas_true[static_cast<size_t>(i)], &theta_true);
  vi.gamma_true = hstack(gammas_true);
  vi.theta_true = theta_true;
  vi.gamma_last = vi.gamma_true.bottomRows(vi.n);
  vi.theta_last = vi.theta_true.bottomRows(vi.n);

  const Eigen::Index dim = vi.dim();
  const Eigen::Index tm = static_cast<Eigen::Index>(vi.T) * vi.m;
  vi.big_m.setZero(dim, dim);
  vi.w_mat.setZero(dim, vi.n);
  for (int i = 0; i < vi.num_agents; ++i) {
    detail::SurrogatePrediction pred =
        detail::surrogate_prediction(game.a, cl.abar_cl_minus[static_cast<size_t>(i)], game.b, i, vi.T);
    Mat qbar = blkdiag(std::vector<Mat>(static_cast<size_t>(vi.T), game.q[static_cast<size_t>(i)]));
    qbar.bottomRightCorner(vi.n, vi.n) = cl.p_cl[static_cast<size_t>(i)];
    Mat rbar = blkdiag(std::vector<Mat>(static_cast<size_t>(vi.T), game.r[static_cast<size_t>(i)]));
    const Mat gq = pred.gamma_own.transpose() * qbar;
    for (int j = 0; j < vi.num_agents; ++j) {
      Mat block;
      if (j == i) {
        block = gq * pred.gamma_own + rbar;
      } else {
        block = Mat::Zero(tm, tm);
        block.leftCols(vi.m) = gq * pred.cross[static_cast<size_t>(j)];
      }
      vi.big_m.block(static_cast<Eigen::Index>(i) * tm, static_cast<Eigen::Index>(j) * tm, tm, tm) = block;
    }
    vi.w_mat.middleRows(static_cast<Eigen::Index>(i) * tm, tm) = gq * pred.theta;
    vi.gamma.push_back(pred.gamma_own);
    vi.theta.push_back(pred.theta);
    vi.qbar.push_back(std::move(qbar));
    vi.rbar.push_back(std::move(rbar));
  }
  detail::assemble_feasible_set(spec, terminal, &vi);
  return vi;
}

// No terminal weight: plain truncated game.
inline FiniteHorizonVi build_vi(const GameDefinition& game, const ConstraintSpec& spec,
                                const std::optional<TerminalSet>& terminal = {}) {
  AugmentedCostToGo plain;
  const Eigen::Index n = game.state_dim(), m = game.input_dim();
  for (int i = 0; i < game.num_agents(); ++i) {
    plain.p_lqr.push_back(game.q[static_cast<size_t>(i)]);
    plain.p_tilde.push_back(Mat::Zero(n, n));
    plain.k_lqr.push_back(Mat::Zero(m, n));
    plain.k_tilde.push_back(Mat::Zero(m, n));
  }
  FiniteHorizonVi vi = build_vi(game, plain, spec, terminal);
  vi.kind = ViKind::no_terminal;
  return vi;
}

struct MonotonicityReport {
  double min_eig_sym = 0.0;
  bool strongly_monotone = false;
  double gerschgorin_bound = 0.0;
  double max_diag_asymmetry = 0.0;  // max_i ||M_ii - M_ii^T||_F
};

inline MonotonicityReport diagnose_monotonicity(const FiniteHorizonVi& vi) {
  MonotonicityReport rep;
  const Mat sym = symmetrize(vi.big_m);
  rep.min_eig_sym = Eigen::SelfAdjointEigenSolver<Mat>(sym).eigenvalues().minCoeff();
  rep.strongly_monotone = rep.min_eig_sym > 1e-10;
  // Block Gerschgorin on the symmetric part: lambda_min(S) is at least
  // min_i [lambda_min(S_ii) - sum_{j != i} ||S_ij||_2].
  const Eigen::Index tm = static_cast<Eigen::Index>(vi.T) * vi.m;
  rep.gerschgorin_bound = std::numeric_limits<double>::infinity();
  for (int i = 0; i < vi.num_agents; ++i) {
    const Mat sii = sym.block(static_cast<Eigen::Index>(i) * tm, static_cast<Eigen::Index>(i) * tm, tm, tm);
    double bound = Eigen::SelfAdjointEigenSolver<Mat>(sii).eigenvalues().minCoeff();
    for (int j = 0; j < vi.num_agents; ++j) {
      if (j == i) continue;
      const Mat sij = sym.block(static_cast<Eigen::Index>(i) * tm, static_cast<Eigen::Index>(j) * tm, tm, tm);
      bound -= Eigen::JacobiSVD<Mat>(sij).singularValues()(0);
    }
    rep.gerschgorin_bound = std::min(rep.gerschgorin_bound, bound);
    const Mat mii = vi.big_m.block(static_cast<Eigen::Index>(i) * tm, static_cast<Eigen::Index>(i) * tm, tm, tm);
    rep.max_diag_asymmetry = std::max(rep.max_diag_asymmetry, (mii - mii.transpose()).norm());
  }
  return rep;
}

struct ViSolveResult {
  Vec u;
  double residual = std::numeric_limits<double>::infinity();  // certified natural residual
  int iterations = 0;
  bool converged = false;
  Vec dual;  // multipliers of the dualized rows (terminal multiplier last)
  double feasibility_violation = 0.0;
};

struct ViSolveSettings {
  double tol = 1e-8;
  int max_iter = 200000;
  std::optional<double> step;
};

// Primal-dual solver bound to one (vi, x0) pair. The same projected loop
// serves both the VI solve (F(u) = M u + W x0) and the exact Euclidean
// projection onto the feasible set (F(v) = v - z), which backs the certified
// natural residual.
class ViSolver {
 public:
  ViSolver(const FiniteHorizonVi& vi, const Vec& x0) : vi_(vi), x0_(x0) {
    w_ = vi.w_mat * x0;
    rhs_ = vi.feasible.rhs_const + vi.feasible.rhs_x0 * x0;
    if (vi.feasible.has_terminal) {
      c_term_ = vi.theta_last * x0;
      pg_ = vi.feasible.p_term * vi.gamma_last;
      h_term_ = vi.gamma_last.transpose() * pg_;
    }
  }

  // max positive violation of any constraint at u (terminal measured on the
  // squared level).
  double violation(const Vec& u) const {
    double v = 0.0;
    v = std::max(v, (u - vi_.feasible.hi).maxCoeff());
    v = std::max(v, (vi_.feasible.lo - u).maxCoeff());
    if (vi_.feasible.num_rows() > 0)
      v = std::max(v, (vi_.feasible.rows * u - rhs_).maxCoeff());
    if (vi_.feasible.has_terminal) v = std::max(v, quad(u) - vi_.feasible.r_term);
    return v;
  }

  // Natural residual || u - Pi_C(u - F(u)) || with the exact projection.
  double natural_residual(const Vec& u) const {
    const Vec z = u - (vi_.big_m * u + w_);
    return (u - project(z)).norm();
  }

  // Euclidean projection onto the feasible set at this x0.
  Vec project(const Vec& z) const {
    if (vi_.feasible.num_rows() == 0 && !vi_.feasible.has_terminal) return clip(z);
    Vec u = clip(z);
    auto ident = [&z](const Vec& v) -> Vec { return v - z; };
    const double gamma = 0.9 / kkt_norm_estimate(1.0);
    Vec dual;
    double res = 0.0;
    int iters = 0;
    if (!run(ident, gamma, gamma, /*tol=*/1e-12, /*max_iter=*/400000, &u, &dual, &res, &iters))
      throw NonConvergenceError("vi projection: inner solve did not converge", {res});
    return u;
  }

  // Dykstra sweeps converge to the projection when the polyhedral part is
  // nonempty and to a minimum-violation point otherwise, so the residual
  // violation certifies emptiness.
  double polyhedral_gap() const {
    if (vi_.feasible.num_rows() == 0) return 0.0;
    const Vec u = project_polyhedral(Vec::Zero(vi_.dim()));
    double gap = (vi_.feasible.rows * u - rhs_).maxCoeff();
    gap = std::max(gap, (u - vi_.feasible.hi).maxCoeff());
    gap = std::max(gap, (vi_.feasible.lo - u).maxCoeff());
    return std::max(0.0, gap);
  }

  // Projected-gradient descent of the terminal quadratic over the polyhedral
  // part; returns the best level reached (an upper bound on the minimum).
  double min_terminal_level() const {
    Vec u = Vec::Zero(vi_.dim());
    const double lip = std::max(2.0 * op_norm_estimate(h_term_), 1e-12);
    double best = quad(u);
    for (int it = 0; it < 300; ++it) {
      u = project_polyhedral(u - (1.0 / lip) * quad_grad(u));
      best = std::min(best, quad(u));
    }
    return best;
  }

  // Sound lower bound on min q over the feasible set: convexity gives
  // q(v) >= q(u) + <grad q(u), v - u>, and minimizing the linear term over
  // the box relaxation is separable and closed-form.
  double terminal_level_lower_bound() const {
    Vec u = Vec::Zero(vi_.dim());
    const double lip = std::max(2.0 * op_norm_estimate(h_term_), 1e-12);
    double best = -std::numeric_limits<double>::infinity();
    for (int it = 0; it < 300; ++it) {
      u = project_polyhedral(u - (1.0 / lip) * quad_grad(u));
      const Vec g = quad_grad(u);
      double bound = quad(u);
      for (Eigen::Index k = 0; k < g.size(); ++k) {
        const double lo = vi_.feasible.lo[k], hi = vi_.feasible.hi[k];
        const double drop = g[k] >= 0.0 ? g[k] * (lo - u[k]) : g[k] * (hi - u[k]);
        if (!std::isfinite(drop)) return -std::numeric_limits<double>::infinity();
        bound += drop;
      }
      best = std::max(best, bound);
    }
    return best;
  }

  // Infeasibility certificate: the polyhedral part is certified empty, or a
  // convexity lower bound keeps the terminal level above its threshold.
  bool certify_infeasible() const {
    if (polyhedral_gap() > 1e-7) return true;
    if (vi_.feasible.has_terminal &&
        terminal_level_lower_bound() >
            vi_.feasible.r_term + 1e-6 * (1.0 + vi_.feasible.r_term))
      return true;
    return false;
  }

  ViSolveResult solve(const std::optional<Vec>& warm, const ViSolveSettings& settings) const {
    const Eigen::Index dim = vi_.dim();
    ViSolveResult result;
    Vec u = warm ? clip(*warm) : Vec(Vec::Zero(dim));
    require(u.size() == dim, "solve_vi: warm start dimension mismatch");

    const MonotonicityReport mono = diagnose_monotonicity(vi_);
    const double norm_m = op_norm_estimate(vi_.big_m);
    double gamma;
    const bool pure_box = vi_.feasible.num_rows() == 0 && !vi_.feasible.has_terminal;
    if (settings.step) {
      gamma = *settings.step;
      if (!(gamma > 0.0)) throw AssumptionError("solve_vi: step size must be positive");
    } else if (pure_box && mono.strongly_monotone) {
      gamma = 0.9 * mono.min_eig_sym / (norm_m * norm_m);
    } else {
      gamma = 0.9 / kkt_norm_estimate(norm_m);
    }

    auto fop = [this](const Vec& v) -> Vec { return vi_.big_m * v + w_; };
    Vec dual;
    double inner_res = std::numeric_limits<double>::infinity();
    int iters_used = 0;
    double inner_tol = settings.tol;
    // The cheap multiplier-based residual drives the iteration; convergence
    // is only declared once the exact natural residual confirms it.
    for (int attempt = 0; attempt < 6 && iters_used < settings.max_iter; ++attempt) {
      int iters = 0;
      const bool met = run(fop, gamma, gamma, inner_tol, settings.max_iter - iters_used, &u,
                           &dual, &inner_res, &iters,
                           /*plain_fb=*/pure_box && mono.strongly_monotone);
      iters_used += iters;
      result.residual = natural_residual(u);
      if (result.residual <= settings.tol) break;
      if (!met) break;
      inner_tol *= 0.2;
    }
    result.u = u;
    result.dual = dual;
    result.iterations = iters_used;
    result.feasibility_violation = std::max(0.0, violation(u));
    result.converged =
        result.residual <= settings.tol && result.feasibility_violation <= 1e-6;
    return result;
  }

 private:
  Vec clip(const Vec& u) const { return u.cwiseMax(vi_.feasible.lo).cwiseMin(vi_.feasible.hi); }

  // Dykstra sweep projection onto box + halfspaces only (terminal row
  // excluded); adequate for the infeasibility certificates.
  Vec project_polyhedral(const Vec& z) const {
    const Eigen::Index nrows = vi_.feasible.num_rows();
    if (nrows == 0) return clip(z);
    Vec u = z;
    std::vector<Vec> increments(static_cast<size_t>(nrows) + 1, Vec::Zero(vi_.dim()));
    for (int sweep = 0; sweep < 600; ++sweep) {
      for (Eigen::Index k = 0; k <= nrows; ++k) {
        const Vec y = u + increments[static_cast<size_t>(k)];
        Vec projected;
        if (k == 0) {
          projected = clip(y);
        } else {
          const Eigen::Index r = k - 1;
          const double nsq = vi_.feasible.rows.row(r).squaredNorm();
          const double gap = vi_.feasible.rows.row(r).dot(y) - rhs_[r];
          projected = gap > 0.0 && nsq > 0.0
                          ? Vec(y - (gap / nsq) * vi_.feasible.rows.row(r).transpose())
                          : y;
        }
        increments[static_cast<size_t>(k)] = y - projected;
        u = projected;
      }
    }
    return u;
  }

  double quad(const Vec& u) const {
    const Vec xt = c_term_ + vi_.gamma_last * u;
    return xt.dot(vi_.feasible.p_term * xt);
  }

  Vec quad_grad(const Vec& u) const { return 2.0 * (pg_.transpose() * c_term_ + h_term_ * u); }

  static double op_norm_estimate(const Mat& m) {
    if (m.size() == 0) return 0.0;
    Vec v = Vec::Ones(m.cols()).normalized();
    double nrm = 0.0;
    for (int k = 0; k < 100; ++k) {
      Vec w = m.transpose() * (m * v);
      nrm = std::sqrt(w.norm());
      if (w.norm() == 0.0) return 0.0;
      v = w.normalized();
    }
    return nrm;
  }

  double kkt_norm_estimate(double norm_m) const {
    double est = norm_m;
    if (vi_.feasible.num_rows() > 0) {
      const double na = op_norm_estimate(vi_.feasible.rows);
      est = std::sqrt(est * est + 2.0 * na * na);
    }
    if (vi_.feasible.has_terminal) {
      // local Lipschitz contribution of the dualized quadratic row
      const double box_rad = box_radius();
      const double grad_scale =
          2.0 * (op_norm_estimate(pg_) * c_term_.norm() + op_norm_estimate(h_term_) * box_rad);
      est += grad_scale;
    }
    return std::max(est, 1e-12);
  }

  double box_radius() const {
    double rad = 0.0;
    for (Eigen::Index k = 0; k < vi_.feasible.lo.size(); ++k) {
      const double m = std::max(std::abs(vi_.feasible.lo[k]), std::abs(vi_.feasible.hi[k]));
      rad += std::isfinite(m) ? m * m : 100.0;
    }
    return std::sqrt(rad);
  }

  // Shared primal-dual loop. Returns true when the internal KKT residual met
  // tol. Plain forward-backward on the primal only applies to the pure-box
  // strongly monotone case; otherwise one extragradient correction per
  // iteration keeps merely monotone instances convergent.
  template <typename FOp>
  bool run(FOp&& f, double gamma_primal, double gamma_dual, double tol, int max_iter, Vec* u_io,
           Vec* dual_out, double* res_out, int* iters_out, bool plain_fb = false) const {
    const Eigen::Index nrows = vi_.feasible.num_rows();
    const bool has_term = vi_.feasible.has_terminal;
    Vec u = *u_io;
    Vec lam = Vec::Zero(nrows);
    double mu = 0.0;

    auto stationarity = [&](const Vec& uu, const Vec& ll, double mm) -> Vec {
      Vec g = f(uu);
      if (nrows > 0) g += vi_.feasible.rows.transpose() * ll;
      if (has_term) g += mm * quad_grad(uu);
      return g;
    };
    auto kkt_residual = [&](const Vec& uu, const Vec& ll, double mm) -> double {
      double sq = (uu - clip(uu - stationarity(uu, ll, mm))).squaredNorm();
      if (nrows > 0) {
        const Vec slack = vi_.feasible.rows * uu - rhs_;
        sq += (ll - (ll + slack).cwiseMax(0.0)).squaredNorm();
      }
      if (has_term) {
        const double slack = quad(uu) - vi_.feasible.r_term;
        const double d = mm - std::max(mm + slack, 0.0);
        sq += d * d;
      }
      return std::sqrt(sq);
    };

    double best_res = std::numeric_limits<double>::infinity();
    Vec best_u = u, best_lam = lam;
    double best_mu = mu;
    double gamma = gamma_primal;
    double stall_violation = std::numeric_limits<double>::infinity();
    int stall_since = 0;
    int it = 0;
    bool met = false;
    for (; it < max_iter; ++it) {
      if (it % 25 == 0) {
        const double res = kkt_residual(u, lam, mu);
        if (res < best_res) {
          best_res = res;
          best_u = u;
          best_lam = lam;
          best_mu = mu;
        }
        if (res <= tol) {
          met = true;
          break;
        }
        if (!std::isfinite(res) || res > 1e12) {
          // step too aggressive; restart from the best point seen
          gamma *= 0.5;
          u = best_u;
          lam = best_lam;
          mu = best_mu;
          if (gamma < 1e-18) break;
        }
        // infeasibility: exploding duals, or a persistent violation the
        // certificate confirms cannot be removed
        const double dual_norm = (nrows > 0 ? lam.lpNorm<Eigen::Infinity>() : 0.0) + mu;
        const double viol = std::max(0.0, violation(u));
        if (viol < stall_violation - 1e-12) {
          stall_violation = viol;
          stall_since = it;
        }
        if (it - stall_since > 10000 && viol > 1e-6) {
          if (dual_norm > 1e8)
            throw InfeasibleError("solve_vi: feasible set appears empty (diverging multipliers)");
          if (certify_infeasible())
            throw InfeasibleError("solve_vi: feasible set certified empty");
          stall_since = it;  // certified feasible, keep iterating
        }
      }

      if (plain_fb) {
        u = clip(u - gamma * f(u));
        continue;
      }
      const Vec g1 = stationarity(u, lam, mu);
      Vec u_half = clip(u - gamma * g1);
      Vec lam_half = lam;
      double mu_half = mu;
      if (nrows > 0) lam_half = (lam + gamma_dual * (vi_.feasible.rows * u - rhs_)).cwiseMax(0.0);
      if (has_term) mu_half = std::max(mu + gamma_dual * (quad(u) - vi_.feasible.r_term), 0.0);
      const Vec g2 = stationarity(u_half, lam_half, mu_half);
      Vec u_next = clip(u - gamma * g2);
      if (nrows > 0) lam = (lam + gamma_dual * (vi_.feasible.rows * u_half - rhs_)).cwiseMax(0.0);
      if (has_term) mu = std::max(mu + gamma_dual * (quad(u_half) - vi_.feasible.r_term), 0.0);
      u = std::move(u_next);
    }
    const double final_res = kkt_residual(u, lam, mu);
    if (final_res < best_res) {
      best_res = final_res;
      best_u = u;
      best_lam = lam;
      best_mu = mu;
      met = met || final_res <= tol;
    }
    *u_io = best_u;
    dual_out->resize(nrows + (has_term ? 1 : 0));
    if (nrows > 0) dual_out->head(nrows) = best_lam;
    if (has_term) (*dual_out)(nrows) = best_mu;
    *res_out = best_res;
    *iters_out = it;
    return met;
  }

  const FiniteHorizonVi& vi_;
  Vec x0_;
  Vec w_;
  Vec rhs_;
  Vec c_term_;
  Mat pg_;      // P * gamma_last
  Mat h_term_;  // gamma_last^T P gamma_last
};

inline ViSolveResult solve_vi(const FiniteHorizonVi& vi, const Vec& x0,
                              const std::optional<Vec>& warm = {},
                              const ViSolveSettings& settings = {}) {
  return ViSolver(vi, x0).solve(warm, settings);
}

// Natural residual of an arbitrary point (exact projection).
inline double vi_natural_residual(const FiniteHorizonVi& vi, const Vec& x0, const Vec& u) {
  return ViSolver(vi, x0).natural_residual(u);
}

// Previous solution advanced one step, last element filled with the
// equilibrium gains applied to the previously predicted terminal state.
inline Vec shifted_warm_start(const Vec& prev_u, const FiniteHorizonVi& vi,
                              const std::vector<Mat>& gains, const Vec& x_terminal) {
  const Eigen::Index tm = static_cast<Eigen::Index>(vi.T) * vi.m;
  Vec out(vi.dim());
  for (int i = 0; i < vi.num_agents; ++i) {
    const Eigen::Index off = static_cast<Eigen::Index>(i) * tm;
    if (vi.T > 1)
      out.segment(off, tm - vi.m) = prev_u.segment(off + vi.m, tm - vi.m);
    out.segment(off + tm - vi.m, vi.m) = gains[static_cast<size_t>(i)] * x_terminal;
  }
  return out;
}

// Stationarity defect of the closed-form equilibrium rollout in the
// closed-loop surrogate game (unconstrained).
inline double surrogate_clne_residual(const GameDefinition& game, const ClNeSolution& cl,
                                      const Vec& x0, int T) {
  GameDefinition g = game;
  g.horizon = T;
  const FiniteHorizonVi vi =
      build_vi(g, cl, ConstraintSpec::unconstrained(g.num_agents(), g.state_dim(), g.input_dim()));
  Vec u(vi.dim());
  Vec x = x0;
  for (int t = 0; t < T; ++t) {
    for (int i = 0; i < g.num_agents(); ++i)
      u.segment((static_cast<Eigen::Index>(i) * T + t) * g.input_dim(), g.input_dim()) =
          cl.k_cl[static_cast<size_t>(i)] * x;
    x = cl.abar_cl * x;
  }
  return vi.f(u, x0).lpNorm<Eigen::Infinity>();
}

}  // namespace dyngame
