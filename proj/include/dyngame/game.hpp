#pragma once

// Problem data for a discrete-time linear-quadratic dynamic game:
// shared dynamics x[t+1] = A x[t] + sum_i B_i u_i[t], per-agent quadratic
// stage costs, and the polyhedral/box constraint geometry.

#include <Eigen/Dense>
#include <cmath>
#include <limits>
#include <optional>
#include <string>
#include <vector>

#include "dyngame/matrix_utils.hpp"

namespace dyngame {

struct GameDefinition {
  Mat a;               // n x n state matrix
  std::vector<Mat> b;  // N input matrices, each n x m
  std::vector<Mat> q;  // N state weights, symmetric PSD
  std::vector<Mat> r;  // N input weights, symmetric PD
  int horizon = 1;     // control horizon T

  int num_agents() const { return static_cast<int>(b.size()); }
  Eigen::Index state_dim() const { return a.rows(); }
  Eigen::Index input_dim() const { return b.empty() ? 0 : b.front().cols(); }

  // S_i = B_i R_i^{-1} B_i^T
  Mat s(int i) const { return b[i] * r[i].llt().solve(b[i].transpose()); }

  // Any square root C_i with C_i^T C_i = Q_i.
  Mat c(int i) const { return psd_sqrt(q[i]); }

  void validate() const {
    const Eigen::Index n = state_dim();
    if (a.rows() != a.cols()) throw DimensionError("GameDefinition: A must be square");
    if (b.empty()) throw AssumptionError("GameDefinition: at least one agent required");
    if (horizon < 1) throw AssumptionError("GameDefinition: horizon T must be >= 1");
    if (b.size() != q.size() || b.size() != r.size())
      throw DimensionError("GameDefinition: B, Q, R must have one entry per agent");
    const Eigen::Index m = input_dim();
    for (size_t i = 0; i < b.size(); ++i) {
      const std::string tag = " (agent " + std::to_string(i + 1) + ")";
      if (b[i].rows() != n) throw DimensionError("GameDefinition: B row dimension" + tag);
      if (b[i].cols() != m) throw DimensionError("GameDefinition: B column dimension" + tag);
      if (q[i].rows() != n || q[i].cols() != n)
        throw DimensionError("GameDefinition: Q dimension" + tag);
      if (r[i].rows() != m || r[i].cols() != m)
        throw DimensionError("GameDefinition: R dimension" + tag);
      if (!is_symmetric(q[i], kSymTol) || min_symmetric_eigenvalue(q[i]) < -kSymTol)
        throw AssumptionError("Q not positive semidefinite" + tag);
      if (!is_symmetric(r[i], kSymTol) || min_symmetric_eigenvalue(r[i]) <= 0.0)
        throw AssumptionError("R not positive definite" + tag);
    }
  }
};

struct Box {
  Vec lo;  // entries may be -inf
  Vec hi;  // entries may be +inf
};

struct Polytope {
  Mat g;  // rows of G x <= g
  Vec h;

  Eigen::Index rows() const { return g.rows(); }
};

// State polytope, per-agent input boxes, and an optional shared polytope over
// the stacked input col(u_1, ..., u_N) at a single time step. The origin must
// be strictly feasible for every family.
struct ConstraintSpec {
  Polytope state;                    // empty rows = unconstrained state
  std::vector<Box> input_boxes;      // one per agent; +-inf = unbounded
  std::optional<Polytope> coupling;  // over the stacked input

  static ConstraintSpec unconstrained(int num_agents, Eigen::Index n, Eigen::Index m) {
    ConstraintSpec spec;
    spec.state.g = Mat(0, n);
    spec.state.h = Vec(0);
    const double inf = std::numeric_limits<double>::infinity();
    spec.input_boxes.assign(num_agents, Box{Vec::Constant(m, -inf), Vec::Constant(m, inf)});
    return spec;
  }

  void validate(int num_agents, Eigen::Index n, Eigen::Index m) const {
    if (state.rows() > 0) {
      if (state.g.cols() != n) throw DimensionError("ConstraintSpec: state rows must have n columns");
      if (state.h.size() != state.rows()) throw DimensionError("ConstraintSpec: state bound size");
      if ((state.h.array() <= 0.0).any())
        throw AssumptionError("ConstraintSpec: origin not strictly inside the state set");
    }
    if (static_cast<int>(input_boxes.size()) != num_agents)
      throw DimensionError("ConstraintSpec: one input box per agent required");
    for (const auto& box : input_boxes) {
      if (box.lo.size() != m || box.hi.size() != m)
        throw DimensionError("ConstraintSpec: input box dimension");
      if ((box.lo.array() >= 0.0).any() || (box.hi.array() <= 0.0).any())
        throw AssumptionError("ConstraintSpec: origin not strictly inside an input box");
    }
    if (coupling) {
      if (coupling->g.cols() != num_agents * m)
        throw DimensionError("ConstraintSpec: coupling rows must match stacked input size");
      if (coupling->h.size() != coupling->rows())
        throw DimensionError("ConstraintSpec: coupling bound size");
      if ((coupling->h.array() <= 0.0).any())
        throw AssumptionError("ConstraintSpec: origin not strictly inside the coupling set");
    }
  }
};

// Slack of each constraint row at (x, u); positive slack = satisfied strictly.
struct FeasibilityReport {
  Vec state_slack;     // g - Gx
  Vec input_slack;     // per agent: [u - lo; hi - u] stacked
  Vec coupling_slack;  // g - G col(u)
  double max_violation = 0.0;  // max over all rows of (-slack); <= 0 iff admissible

  bool admissible(double tol = 0.0) const { return max_violation <= tol; }
};

// u is the stacked input col(u_1, ..., u_N) at one time step.
inline FeasibilityReport feasible(const ConstraintSpec& spec, const Vec& x, const Vec& u) {
  FeasibilityReport rep;
  rep.state_slack = spec.state.h - spec.state.g * x;
  const Eigen::Index m = spec.input_boxes.empty() ? 0 : spec.input_boxes.front().lo.size();
  require(u.size() == static_cast<Eigen::Index>(spec.input_boxes.size()) * m,
          "feasible: stacked input size mismatch");
  rep.input_slack.resize(2 * u.size());
  for (size_t i = 0; i < spec.input_boxes.size(); ++i) {
    const Vec ui = u.segment(static_cast<Eigen::Index>(i) * m, m);
    rep.input_slack.segment(2 * static_cast<Eigen::Index>(i) * m, m) = ui - spec.input_boxes[i].lo;
    rep.input_slack.segment((2 * static_cast<Eigen::Index>(i) + 1) * m, m) =
        spec.input_boxes[i].hi - ui;
  }
  rep.coupling_slack = spec.coupling ? Vec(spec.coupling->h - spec.coupling->g * u) : Vec(0);

  double worst = -std::numeric_limits<double>::infinity();
  auto scan = [&worst](const Vec& slack) {
    for (Eigen::Index k = 0; k < slack.size(); ++k)
      if (std::isfinite(slack[k])) worst = std::max(worst, -slack[k]);
  };
  scan(rep.state_slack);
  scan(rep.input_slack);
  scan(rep.coupling_slack);
  rep.max_violation = std::isfinite(worst) ? worst : 0.0;
  return rep;
}

// State sequence of length L+1 driven by inputs u[t] (stacked, size N*m).
inline std::vector<Vec> propagate(const GameDefinition& game, const Vec& x0,
                                  const std::vector<Vec>& u) {
  const Eigen::Index n = game.state_dim(), m = game.input_dim();
  require(x0.size() == n, "propagate: initial state dimension mismatch");
  std::vector<Vec> x;
  x.reserve(u.size() + 1);
  x.push_back(x0);
  for (const Vec& ut : u) {
    require(ut.size() == game.num_agents() * m, "propagate: stacked input dimension mismatch");
    Vec next = game.a * x.back();
    for (int i = 0; i < game.num_agents(); ++i)
      next += game.b[i] * ut.segment(static_cast<Eigen::Index>(i) * m, m);
    x.push_back(std::move(next));
  }
  return x;
}

// l_i(x, u_i) = 1/2 ||x||^2_{Q_i} + 1/2 ||u_i||^2_{R_i}, agent index 0-based.
inline double stage_cost(const GameDefinition& game, int i, const Vec& x, const Vec& ui) {
  require(i >= 0 && i < game.num_agents(), "stage_cost: agent index out of range");
  require(x.size() == game.state_dim() && ui.size() == game.input_dim(),
          "stage_cost: dimension mismatch");
  return 0.5 * x.dot(game.q[i] * x) + 0.5 * ui.dot(game.r[i] * ui);
}

struct SolverStats {
  int iterations = 0;
  double residual = 0.0;
  bool converged = true;
};

// Realized closed-loop record: states x[0..L], applied stacked inputs
// u[0..L-1], per-agent stage costs, per-step solver stats and the distance of
// the predicted terminal state to the terminal set.
struct TrajectoryLog {
  std::vector<Vec> states;
  std::vector<Vec> inputs;
  std::vector<std::vector<double>> stage_costs;  // [step][agent]
  std::vector<SolverStats> solver_stats;
  std::vector<double> terminal_distance;

  // Max relative defect of x[t+1] = A x[t] + sum_i B_i u_i[t] over the log.
  double replay_defect(const GameDefinition& game) const {
    const Eigen::Index m = game.input_dim();
    double worst = 0.0;
    for (size_t t = 0; t + 1 < states.size(); ++t) {
      Vec pred = game.a * states[t];
      for (int i = 0; i < game.num_agents(); ++i)
        pred += game.b[i] * inputs[t].segment(static_cast<Eigen::Index>(i) * m, m);
      worst = std::max(worst, (states[t + 1] - pred).norm() / (1.0 + states[t + 1].norm()));
    }
    return worst;
  }
};

}  // namespace dyngame
