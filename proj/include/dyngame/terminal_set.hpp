#pragma once

// Constraint-admissible forward-invariant ellipsoid {x : ||x||^2_P <= r} for
// a Schur closed-loop matrix. P solves the Lyapunov equation P = W + Abar^T P
// Abar (weight W = I by default) and r is the largest level for which every
// state row and every gain-generated input row holds on the whole sublevel
// set: max of a^T x over the ellipsoid is sqrt(r a^T P^{-1} a).

#include <cmath>
#include <limits>
#include <vector>

#include "dyngame/game.hpp"
#include "dyngame/matrix_eq.hpp"

namespace dyngame {

struct TerminalSet {
  Mat p_lyap;        // symmetric PD
  double r = std::numeric_limits<double>::infinity();  // level; +inf when no rows bind
  Mat closed_loop;
  std::vector<Mat> gains;  // feedback whose input admissibility is certified

  bool unbounded() const { return std::isinf(r); }
};

struct Membership {
  bool inside = false;
  double distance = 0.0;            // gauge distance max(0, ||x||_P - sqrt(r))
  double euclidean_distance = 0.0;  // along the ray to the boundary
};

inline TerminalSet compute_terminal_set(const Mat& abar, const ConstraintSpec& spec,
                                        const std::vector<Mat>& gains,
                                        const Mat& lyap_weight = Mat()) {
  const Eigen::Index n = abar.rows();
  if (!is_schur(abar)) throw AssumptionError("compute_terminal_set: closed loop not Schur");
  TerminalSet ts;
  ts.closed_loop = abar;
  ts.gains = gains;
  const Mat w = lyap_weight.size() > 0 ? lyap_weight : Mat(Mat::Identity(n, n));
  ts.p_lyap = solve_dlyap(abar, w);
  const Mat p_inv = ts.p_lyap.llt().solve(Mat::Identity(n, n));

  // Affine rows a^T x <= g over the ellipsoid: r <= g^2 / (a^T P^{-1} a).
  auto clip_row = [&](const Vec& a, double g) {
    if (!std::isfinite(g)) return;
    const double denom = a.dot(p_inv * a);
    if (denom <= 0.0) throw AssumptionError("compute_terminal_set: zero-normal constraint row");
    ts.r = std::min(ts.r, g * g / denom);
  };
  for (Eigen::Index k = 0; k < spec.state.rows(); ++k)
    clip_row(spec.state.g.row(k).transpose(), spec.state.h[k]);

  const Eigen::Index m = spec.input_boxes.empty() ? 0 : spec.input_boxes.front().lo.size();
  require(gains.size() == spec.input_boxes.size(),
          "compute_terminal_set: one gain per input box required");
  for (size_t i = 0; i < gains.size(); ++i) {
    require(gains[i].rows() == m && gains[i].cols() == n, "compute_terminal_set: gain dimension");
    for (Eigen::Index k = 0; k < m; ++k) {
      clip_row(gains[i].row(k).transpose(), spec.input_boxes[i].hi[k]);
      clip_row(-gains[i].row(k).transpose(), -spec.input_boxes[i].lo[k]);
    }
  }
  if (spec.coupling) {
    Mat k_stack = vstack(std::vector<Mat>(gains.begin(), gains.end()));
    const Mat rows = spec.coupling->g * k_stack;
    for (Eigen::Index k = 0; k < rows.rows(); ++k)
      clip_row(rows.row(k).transpose(), spec.coupling->h[k]);
  }
  return ts;
}

inline Membership membership(const TerminalSet& ts, const Vec& x) {
  Membership mem;
  const double norm_p = std::sqrt(std::max(0.0, x.dot(ts.p_lyap * x)));
  if (ts.unbounded()) {
    mem.inside = true;
    return mem;
  }
  const double rad = std::sqrt(ts.r);
  mem.inside = norm_p * norm_p <= ts.r + 1e-12;
  mem.distance = std::max(0.0, norm_p - rad);
  // Shrinking x radially to the boundary gives the Euclidean gap along the ray.
  if (norm_p > rad && norm_p > 0.0) mem.euclidean_distance = (1.0 - rad / norm_p) * x.norm();
  return mem;
}

}  // namespace dyngame
