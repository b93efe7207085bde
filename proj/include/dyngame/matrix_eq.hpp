#pragma once

// Dense solvers for the discrete-time matrix equations used throughout:
// Stein / Sylvester-Stein equations of the form X = M^T X N + C via a
// Bartels-Stewart style reduction (two complex Schur forms, then one
// triangular solve per column), the discrete Lyapunov equation as the
// special case M = N, and the discrete algebraic Riccati equation via
// the structured doubling iteration. All contracts are residual-based.

#include <Eigen/Dense>
#include <Eigen/Eigenvalues>
#include <cmath>
#include <complex>
#include <utility>

#include "dyngame/matrix_utils.hpp"
#include "dyngame/spectral.hpp"

namespace dyngame {

namespace detail {

using CMat = Eigen::MatrixXcd;

// Solves X = M^T X N + C for general square M, N. Unique solution exists iff
// no product lambda_i(M) * lambda_j(N) equals one.
inline Mat solve_left_transposed_stein(const Mat& m, const Mat& n_right, const Mat& c) {
  const Eigen::Index n = c.rows();
  require(m.rows() == n && m.cols() == n && n_right.rows() == n && n_right.cols() == n &&
              c.cols() == n,
          "stein: all operands must be square with equal size");
  if (n == 0) return Mat(0, 0);

  Eigen::ComplexSchur<CMat> schur_left(m.transpose().cast<std::complex<double>>());
  Eigen::ComplexSchur<CMat> schur_right(n_right.cast<std::complex<double>>());
  if (schur_left.info() != Eigen::Success || schur_right.info() != Eigen::Success)
    throw NonConvergenceError("stein: Schur factorization failed");

  const CMat& tl = schur_left.matrixT();   // upper triangular, M^T = U tl U*
  const CMat& u = schur_left.matrixU();
  const CMat& tr = schur_right.matrixT();  // upper triangular, N = V tr V*
  const CMat& v = schur_right.matrixU();

  // resonance check
  for (Eigen::Index k = 0; k < n; ++k)
    for (Eigen::Index l = 0; l < n; ++l)
      if (std::abs(1.0 - tl(k, k) * tr(l, l)) < 1e-14)
        throw ResonanceError("stein: eigenvalue product equal to one, equation is singular");

  // Y = Cbar + tl * Y * tr with Cbar = U* C V, solved column by column:
  // (I - tr(l,l) tl) y_l = cbar_l + tl * sum_{q<l} y_q tr(q,l).
  CMat cbar = u.adjoint() * c.cast<std::complex<double>>() * v;
  CMat y = CMat::Zero(n, n);
  const CMat eye = CMat::Identity(n, n);
  for (Eigen::Index l = 0; l < n; ++l) {
    Eigen::VectorXcd z = Eigen::VectorXcd::Zero(n);
    for (Eigen::Index q = 0; q < l; ++q) z += y.col(q) * tr(q, l);
    Eigen::VectorXcd rhs = cbar.col(l) + tl.triangularView<Eigen::Upper>() * z;
    CMat lhs = eye - tr(l, l) * tl;
    y.col(l) = lhs.triangularView<Eigen::Upper>().solve(rhs);
  }
  CMat x = u * y * v.adjoint();
  return x.real();
}

}  // namespace detail

// P = Q + A^T P Abar.
inline Mat solve_stein(const Mat& a, const Mat& abar, const Mat& q) {
  Mat p = detail::solve_left_transposed_stein(a, abar, q);
  const double res = (p - q - a.transpose() * p * abar).norm();
  if (res > 1e-10 * (1.0 + q.norm()))
    throw NonConvergenceError("solve_stein: residual above contract", {res});
  return p;
}

// X = M^T X N + C.
inline Mat solve_sylvester_stein(const Mat& m, const Mat& n, const Mat& c) {
  Mat x = detail::solve_left_transposed_stein(m, n, c);
  const double res = (x - m.transpose() * x * n - c).norm();
  if (res > 1e-10 * (1.0 + c.norm()))
    throw NonConvergenceError("solve_sylvester_stein: residual above contract", {res});
  return x;
}

// P = Q + Abar^T P Abar for Schur Abar. P is symmetric when Q is, and PSD
// when Q is PSD.
inline Mat solve_dlyap(const Mat& abar, const Mat& q) {
  if (!is_schur(abar)) throw AssumptionError("solve_dlyap: matrix is not Schur");
  Mat p = detail::solve_left_transposed_stein(abar, abar, q);
  if (is_symmetric(q, 1e-9)) p = symmetrize(p);
  const double res = (p - q - abar.transpose() * p * abar).norm();
  if (res > 1e-10 * (1.0 + q.norm()))
    throw NonConvergenceError("solve_dlyap: residual above contract", {res});
  return p;
}

inline constexpr double kHautusRankTol = 1e-8;

namespace detail {

// rank of [A - lambda I, W] at the eigenvalues of A with modulus >= 1.
inline bool hautus_full_rank_at_unstable_modes(const Mat& a, const Mat& w) {
  const Eigen::Index n = a.rows();
  Eigen::EigenSolver<Mat> es(a, /*computeEigenvectors=*/false);
  if (es.info() != Eigen::Success) throw NonConvergenceError("hautus: eigensolver failed");
  for (Eigen::Index k = 0; k < n; ++k) {
    const std::complex<double> lam = es.eigenvalues()[k];
    if (std::abs(lam) < 1.0 - kSchurTol) continue;
    Eigen::MatrixXcd pencil(n, n + w.cols());
    pencil.leftCols(n) = a.cast<std::complex<double>>() - lam * Eigen::MatrixXcd::Identity(n, n);
    pencil.rightCols(w.cols()) = w.cast<std::complex<double>>();
    Eigen::JacobiSVD<Eigen::MatrixXcd> svd(pencil);
    const auto& sv = svd.singularValues();
    if (sv.size() == 0 || sv(n - 1) <= kHautusRankTol * sv(0)) return false;
  }
  return true;
}

}  // namespace detail

inline bool is_stabilizable(const Mat& a, const Mat& b) {
  return detail::hautus_full_rank_at_unstable_modes(a, b);
}

// Detectability of (A, C) tested as stabilizability of the transposed pair.
inline bool is_detectable(const Mat& a, const Mat& c) {
  return detail::hautus_full_rank_at_unstable_modes(a.transpose(), c.transpose());
}

struct DareSolution {
  Mat p;  // stabilizing solution, symmetric PSD
  Mat k;  // k = -(R + B^T P B)^{-1} B^T P A, A + B K Schur
  double residual = 0.0;
};

// Discrete algebraic Riccati equation P = Q + A^T P (A + B K) by structured
// doubling. Requires (A, B) stabilizable and (A, sqrt(Q)) detectable.
inline DareSolution solve_dare(const Mat& a, const Mat& b, const Mat& q, const Mat& r) {
  const Eigen::Index n = a.rows(), m = b.cols();
  require(a.cols() == n && b.rows() == n && q.rows() == n && q.cols() == n && r.rows() == m &&
              r.cols() == m,
          "solve_dare: dimension mismatch");
  if (!is_psd(q, 1e-9)) throw AssumptionError("solve_dare: Q must be symmetric PSD");
  Eigen::LLT<Mat> r_llt(symmetrize(r));
  if (r_llt.info() != Eigen::Success) throw AssumptionError("solve_dare: R must be positive definite");
  if (!is_stabilizable(a, b)) throw AssumptionError("solve_dare: (A, B) not stabilizable");
  if (!is_detectable(a, psd_sqrt(q))) throw AssumptionError("solve_dare: (A, sqrt(Q)) not detectable");

  Mat ak = a;
  Mat g = b * r_llt.solve(b.transpose());
  Mat h = symmetrize(q);
  const Mat eye = Mat::Identity(n, n);
  std::vector<double> deltas;
  bool settled = false;
  for (int it = 0; it < 120 && !settled; ++it) {
    Eigen::PartialPivLU<Mat> w_lu(eye + g * h);
    Mat wia = w_lu.solve(ak);
    Mat wig = w_lu.solve(g);
    Mat h_next = symmetrize(h + wia.transpose() * (h * ak));
    g = symmetrize(g + ak * wig * ak.transpose());
    const double delta = rel_fro_diff(h_next, h);
    deltas.push_back(delta);
    ak = ak * wia;
    h = h_next;
    settled = delta < 1e-15;
  }

  DareSolution sol;
  sol.p = h;
  sol.k = -(r + b.transpose() * sol.p * b).llt().solve(b.transpose() * sol.p * a);
  auto residual_of = [&](const DareSolution& s) {
    return (s.p - q - a.transpose() * s.p * (a + b * s.k)).norm();
  };
  sol.residual = residual_of(sol);

  // Newton polish from the doubling iterate: with a stabilizing gain, the
  // closed-loop Lyapunov solve plus a gain update converges quadratically
  // and tightens ill-conditioned cases the doubling pass leaves behind.
  for (int it = 0; it < 30 && sol.residual > 1e-13 * (1.0 + q.norm()); ++it) {
    const Mat abar = a + b * sol.k;
    if (!is_schur(abar)) break;
    DareSolution next;
    next.p = symmetrize(detail::solve_left_transposed_stein(
        abar, abar, symmetrize(q + sol.k.transpose() * r * sol.k)));
    next.k = -(r + b.transpose() * next.p * b).llt().solve(b.transpose() * next.p * a);
    next.residual = residual_of(next);
    if (next.residual >= sol.residual) break;
    sol = std::move(next);
  }

  // Backward-error scale: barely stabilizable pairs produce huge P whose
  // representable residual grows with ||P||.
  if (sol.residual > 1e-9 * (1.0 + q.norm() + sol.p.norm()))
    throw NonConvergenceError("solve_dare: residual above contract", deltas);
  if (!is_schur(a + b * sol.k))
    throw NonConvergenceError("solve_dare: closed loop not Schur", deltas);
  return sol;
}

}  // namespace dyngame
