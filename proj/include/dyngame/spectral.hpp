#pragma once

#include <Eigen/Eigenvalues>
#include <algorithm>
#include <complex>
#include <vector>

#include "dyngame/matrix_utils.hpp"

namespace dyngame {

inline constexpr double kSchurTol = 1e-9;  // Schur margin: radius < 1 - kSchurTol

struct SpectralReport {
  std::vector<std::complex<double>> eigenvalues;  // sorted by (modulus desc, angle asc)
  double spectral_radius = 0.0;
  bool is_schur = false;
};

inline SpectralReport spectrum(const Mat& m) {
  require(m.rows() == m.cols(), "spectrum: matrix must be square");
  SpectralReport rep;
  if (m.rows() == 0) {
    rep.is_schur = true;
    return rep;
  }
  Eigen::EigenSolver<Mat> es(m, /*computeEigenvectors=*/false);
  if (es.info() != Eigen::Success) throw NonConvergenceError("spectrum: eigensolver failed");
  rep.eigenvalues.resize(m.rows());
  for (Eigen::Index i = 0; i < m.rows(); ++i) rep.eigenvalues[i] = es.eigenvalues()[i];
  std::sort(rep.eigenvalues.begin(), rep.eigenvalues.end(),
            [](const std::complex<double>& a, const std::complex<double>& b) {
              const double ma = std::abs(a), mb = std::abs(b);
              if (ma != mb) return ma > mb;
              return std::arg(a) < std::arg(b);
            });
  rep.spectral_radius = std::abs(rep.eigenvalues.front());
  rep.is_schur = rep.spectral_radius < 1.0 - kSchurTol;
  return rep;
}

inline double spectral_radius(const Mat& m) { return spectrum(m).spectral_radius; }

inline bool is_schur(const Mat& m) { return spectrum(m).is_schur; }

}  // namespace dyngame
