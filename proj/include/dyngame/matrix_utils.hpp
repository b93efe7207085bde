#pragma once

#include <Eigen/Dense>
#include <string>
#include <vector>

#include "dyngame/errors.hpp"

namespace dyngame {

using Mat = Eigen::MatrixXd;
using Vec = Eigen::VectorXd;

inline constexpr double kSymTol = 1e-10;  // symmetry / PSD slack on loaded data

inline Mat symmetrize(const Mat& m) { return 0.5 * (m + m.transpose()); }

inline double fro_norm(const Mat& m) { return m.norm(); }

// ||a - b||_F / (1 + ||b||_F)
inline double rel_fro_diff(const Mat& a, const Mat& b) {
  return (a - b).norm() / (1.0 + b.norm());
}

inline bool is_symmetric(const Mat& m, double tol = kSymTol) {
  if (m.rows() != m.cols()) return false;
  return (m - m.transpose()).cwiseAbs().maxCoeff() <= tol * (1.0 + m.cwiseAbs().maxCoeff());
}

inline double min_symmetric_eigenvalue(const Mat& m) {
  Eigen::SelfAdjointEigenSolver<Mat> es(symmetrize(m));
  return es.eigenvalues().minCoeff();
}

inline bool is_psd(const Mat& m, double tol = kSymTol) {
  return is_symmetric(m, tol) && min_symmetric_eigenvalue(m) >= -tol;
}

// Any C with C^T C = Q, from the eigendecomposition of Q with negative
// eigenvalues clipped at zero.
inline Mat psd_sqrt(const Mat& q) {
  Eigen::SelfAdjointEigenSolver<Mat> es(symmetrize(q));
  Vec lam = es.eigenvalues().cwiseMax(0.0);
  return lam.cwiseSqrt().asDiagonal() * es.eigenvectors().transpose();
}

inline Mat hstack(const std::vector<Mat>& blocks) {
  if (blocks.empty()) return Mat(0, 0);
  Eigen::Index rows = blocks.front().rows(), cols = 0;
  for (const auto& b : blocks) {
    if (b.rows() != rows) throw DimensionError("hstack: inconsistent row counts");
    cols += b.cols();
  }
  Mat out(rows, cols);
  Eigen::Index c = 0;
  for (const auto& b : blocks) {
    out.middleCols(c, b.cols()) = b;
    c += b.cols();
  }
  return out;
}

inline Mat vstack(const std::vector<Mat>& blocks) {
  if (blocks.empty()) return Mat(0, 0);
  Eigen::Index cols = blocks.front().cols(), rows = 0;
  for (const auto& b : blocks) {
    if (b.cols() != cols) throw DimensionError("vstack: inconsistent column counts");
    rows += b.rows();
  }
  Mat out(rows, cols);
  Eigen::Index r = 0;
  for (const auto& b : blocks) {
    out.middleRows(r, b.rows()) = b;
    r += b.rows();
  }
  return out;
}

inline Mat blkdiag(const std::vector<Mat>& blocks) {
  Eigen::Index rows = 0, cols = 0;
  for (const auto& b : blocks) {
    rows += b.rows();
    cols += b.cols();
  }
  Mat out = Mat::Zero(rows, cols);
  Eigen::Index r = 0, c = 0;
  for (const auto& b : blocks) {
    out.block(r, c, b.rows(), b.cols()) = b;
    r += b.rows();
    c += b.cols();
  }
  return out;
}

inline void require(bool cond, const std::string& msg) {
  if (!cond) throw DimensionError(msg);
}

}  // namespace dyngame
