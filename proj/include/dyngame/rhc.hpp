#pragma once

// Receding-horizon loop: at each step measure the state, solve the
// finite-horizon VI (warm-started with the shifted previous solution), apply
// the first stacked input, and log. Diagnostics cover terminal-set entry,
// shifted-solution optimality at the successor state, cumulative-cost
// decrease and constraint satisfaction.

#include <cmath>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include "dyngame/game.hpp"
#include "dyngame/terminal_set.hpp"
#include "dyngame/vi.hpp"

namespace dyngame {

struct PerturbationConfig {
  double variance = 0.0;
  int trials = 1;
  unsigned long long seed = 0;
};

struct RhcConfig {
  ViKind controller_kind = ViKind::olne_terminal;
  int steps = 200;
  bool enforce_terminal = false;  // terminal set rows in the feasible set
  bool warm_start = true;
  bool diagnose_shifted = true;  // per-step shifted-plan residuals (costs one
                                 // projection per step)
  double tol = 1e-8;
  int max_iter = 200000;
  std::optional<PerturbationConfig> perturbation;

  void validate() const {
    if (steps < 1) throw AssumptionError("RhcConfig: steps must be >= 1");
    if (perturbation && (perturbation->variance < 0.0 || perturbation->trials < 1))
      throw AssumptionError("RhcConfig: perturbation variance must be >= 0 and trials >= 1");
  }
};

struct DiagnosticsReport {
  std::vector<double> cum_cost_sequence;  // sum_i J_i at each step's solution
  std::optional<int> entered_terminal_at;
  std::vector<double> shifted_solution_residuals;  // step k -> residual at state k+1
  double constraint_max_violation = 0.0;
  bool converged_to_origin = false;  // ||x_end||_inf below threshold
};

inline constexpr double kOriginThreshold = 1e-4;

struct RhcResult {
  TrajectoryLog log;
  DiagnosticsReport diagnostics;
  std::vector<Vec> solutions;           // per-step VI solutions (agent-major)
  std::vector<Vec> predicted_terminal;  // per-step predicted x[T]
};

// Carries InfeasibleError out of the loop together with what was logged
// before the failing step.
class RhcInfeasibleError : public InfeasibleError {
 public:
  RhcInfeasibleError(const std::string& msg, TrajectoryLog log, int step)
      : InfeasibleError(msg), partial_log(std::move(log)), step(step) {}
  TrajectoryLog partial_log;
  int step = 0;
};

// Everything the loop needs: the assembled VI, the equilibrium gains that
// extend a shifted plan by one step, the terminal set used for diagnostics,
// and the per-agent terminal value weight V_i(x) = 1/2 x^T W_i x.
struct RhcController {
  FiniteHorizonVi vi;
  std::vector<Mat> tail_gains;
  TerminalSet terminal_set;
  std::vector<Mat> terminal_value;
};

inline RhcController make_rhc_controller(const GameDefinition& game, const ConstraintSpec& spec,
                                         const OlNeSolution& sol, const AugmentedCostToGo& ctg,
                                         const TerminalSet& ts, const RhcConfig& cfg) {
  RhcController ctrl;
  std::optional<TerminalSet> enforce = cfg.enforce_terminal ? std::optional<TerminalSet>(ts)
                                                            : std::nullopt;
  ctrl.vi = build_vi(game, ctg, spec, enforce);
  ctrl.tail_gains = sol.k_ol;
  ctrl.terminal_set = ts;
  const Eigen::Index n = game.state_dim();
  for (int i = 0; i < game.num_agents(); ++i) {
    const Mat& ph = ctg.p_hat[static_cast<size_t>(i)];
    // V_i(x, x) collapses the four blocks of the doubled-space weight.
    ctrl.terminal_value.push_back(symmetrize(ph.topLeftCorner(n, n) + ph.topRightCorner(n, n) +
                                             ph.bottomLeftCorner(n, n) + ph.bottomRightCorner(n, n)));
  }
  return ctrl;
}

inline RhcController make_rhc_controller(const GameDefinition& game, const ConstraintSpec& spec,
                                         const ClNeSolution& cl, const TerminalSet& ts,
                                         const RhcConfig& cfg) {
  RhcController ctrl;
  std::optional<TerminalSet> enforce = cfg.enforce_terminal ? std::optional<TerminalSet>(ts)
                                                            : std::nullopt;
  ctrl.vi = build_vi(game, cl, spec, enforce);
  ctrl.tail_gains = cl.k_cl;
  ctrl.terminal_set = ts;
  ctrl.terminal_value = cl.p_cl;
  return ctrl;
}

namespace detail {

// sum_i [ stage costs of the plan under the true dynamics + terminal value ].
inline double plan_cost(const GameDefinition& game, const RhcController& ctrl, const Vec& x0,
                        const Vec& u) {
  const int T = ctrl.vi.T;
  std::vector<Vec> stacked(static_cast<size_t>(T));
  for (int t = 0; t < T; ++t) stacked[static_cast<size_t>(t)] = ctrl.vi.stacked_input_at(u, t);
  const std::vector<Vec> xs = propagate(game, x0, stacked);
  double total = 0.0;
  for (int i = 0; i < game.num_agents(); ++i) {
    for (int t = 0; t < T; ++t)
      total += stage_cost(game, i, xs[static_cast<size_t>(t)],
                          stacked[static_cast<size_t>(t)].segment(
                              static_cast<Eigen::Index>(i) * game.input_dim(), game.input_dim()));
    const Vec& xt = xs[static_cast<size_t>(T)];
    total += 0.5 * xt.dot(ctrl.terminal_value[static_cast<size_t>(i)] * xt);
  }
  return total;
}

}  // namespace detail

inline RhcResult run_rhc(const GameDefinition& game, const ConstraintSpec& spec,
                         const RhcController& ctrl, const Vec& x0, const RhcConfig& cfg,
                         const std::optional<Vec>& first_warm = {}) {
  cfg.validate();
  RhcResult out;
  ViSolveSettings vs;
  vs.tol = cfg.tol;
  vs.max_iter = cfg.max_iter;

  Vec x = x0;
  std::optional<Vec> warm = first_warm;
  for (int step = 0; step < cfg.steps; ++step) {
    ViSolveResult sol;
    try {
      sol = solve_vi(ctrl.vi, x, warm, vs);
    } catch (const InfeasibleError& e) {
      out.log.states.push_back(x);
      throw RhcInfeasibleError(std::string(e.what()) + " at step " + std::to_string(step),
                               out.log, step);
    }

    const Vec u0 = ctrl.vi.stacked_input_at(sol.u, 0);
    const Vec x_term = ctrl.vi.terminal_state(sol.u, x);

    out.log.states.push_back(x);
    out.log.inputs.push_back(u0);
    std::vector<double> costs(static_cast<size_t>(game.num_agents()));
    for (int i = 0; i < game.num_agents(); ++i)
      costs[static_cast<size_t>(i)] = stage_cost(
          game, i, x, u0.segment(static_cast<Eigen::Index>(i) * game.input_dim(), game.input_dim()));
    out.log.stage_costs.push_back(std::move(costs));
    out.log.solver_stats.push_back({sol.iterations, sol.residual, sol.converged});
    out.log.terminal_distance.push_back(membership(ctrl.terminal_set, x_term).distance);
    out.diagnostics.cum_cost_sequence.push_back(detail::plan_cost(game, ctrl, x, sol.u));
    if (!out.diagnostics.entered_terminal_at && membership(ctrl.terminal_set, x_term).inside)
      out.diagnostics.entered_terminal_at = step;

    out.solutions.push_back(sol.u);
    out.predicted_terminal.push_back(x_term);

    Vec x_next = game.a * x;
    for (int i = 0; i < game.num_agents(); ++i)
      x_next += game.b[static_cast<size_t>(i)] *
                u0.segment(static_cast<Eigen::Index>(i) * game.input_dim(), game.input_dim());
    x = std::move(x_next);
    if (cfg.warm_start)
      warm = shifted_warm_start(sol.u, ctrl.vi, ctrl.tail_gains, x_term);
    else
      warm.reset();
  }
  out.log.states.push_back(x);

  double worst = 0.0;
  for (size_t t = 0; t + 1 < out.log.states.size(); ++t)
    worst = std::max(worst,
                     feasible(spec, out.log.states[t], out.log.inputs[t]).max_violation);
  out.diagnostics.constraint_max_violation = worst;
  out.diagnostics.converged_to_origin =
      out.log.states.back().lpNorm<Eigen::Infinity>() < kOriginThreshold;

  // Shifted-plan optimality at the successor state, evaluated post hoc.
  if (cfg.diagnose_shifted) {
    for (size_t step = 0; step + 1 < out.solutions.size(); ++step) {
      const Vec shifted = shifted_warm_start(out.solutions[step], ctrl.vi, ctrl.tail_gains,
                                             out.predicted_terminal[step]);
      out.diagnostics.shifted_solution_residuals.push_back(
          vi_natural_residual(ctrl.vi, out.log.states[step + 1], shifted));
    }
  }
  return out;
}

// Residuals of the shifted plans, one per consecutive step pair.
inline std::vector<double> check_shifted_optimality(const RhcResult& result) {
  return result.diagnostics.shifted_solution_residuals;
}

struct PerturbationRow {
  double variance = 0.0;
  int trial = 0;
  double max_rel_deviation = 0.0;  // max_t ||x - xhat|| / max_t ||xhat||
  bool stable = false;
  bool failed = false;  // solver failure during the trial
};

// Re-runs the loop with the terminal-cost weights P_ol perturbed by additive
// Gaussian entry noise; the warm-start tail gains stay nominal.
inline std::vector<PerturbationRow> run_perturbation_experiment(
    const GameDefinition& game, const ConstraintSpec& spec, const OlNeSolution& sol,
    const AugmentedCostToGo& ctg, const TerminalSet& ts, const Vec& x0, const RhcConfig& cfg) {
  if (!cfg.perturbation) throw AssumptionError("run_perturbation_experiment: config missing");
  cfg.validate();
  RhcConfig nominal_cfg = cfg;
  nominal_cfg.perturbation.reset();
  nominal_cfg.diagnose_shifted = false;
  const RhcController nominal_ctrl = make_rhc_controller(game, spec, sol, ctg, ts, nominal_cfg);
  const RhcResult nominal = run_rhc(game, spec, nominal_ctrl, x0, nominal_cfg);

  double scale = 0.0;
  for (const Vec& xs : nominal.log.states) scale = std::max(scale, xs.norm());
  if (scale == 0.0) scale = 1.0;
  const std::optional<Vec> warm0(nominal.solutions.front());

  std::vector<PerturbationRow> rows;
  const double sigma = std::sqrt(cfg.perturbation->variance);
  for (int trial = 0; trial < cfg.perturbation->trials; ++trial) {
    PerturbationRow row;
    row.variance = cfg.perturbation->variance;
    row.trial = trial;
    std::mt19937_64 rng(cfg.perturbation->seed + static_cast<unsigned long long>(trial));
    std::normal_distribution<double> gauss(0.0, sigma);

    AugmentedCostToGo noisy_ctg = ctg;
    const Eigen::Index n = game.state_dim();
    for (int i = 0; i < game.num_agents(); ++i) {
      Mat noise(n, n);
      for (Eigen::Index r = 0; r < n; ++r)
        for (Eigen::Index c = 0; c < n; ++c) noise(r, c) = gauss(rng);
      // P_ol enters the horizon problem through p_lqr + p_tilde.
      noisy_ctg.p_tilde[static_cast<size_t>(i)] += noise;
    }
    try {
      RhcController ctrl = nominal_ctrl;
      ctrl.vi = build_vi(game, noisy_ctg, spec,
                         cfg.enforce_terminal ? std::optional<TerminalSet>(ts) : std::nullopt);
      RhcConfig trial_cfg = cfg;
      trial_cfg.perturbation.reset();
      trial_cfg.diagnose_shifted = false;
      const RhcResult run = run_rhc(game, spec, ctrl, x0, trial_cfg, warm0);
      double dev = 0.0;
      for (size_t t = 0; t < run.log.states.size() && t < nominal.log.states.size(); ++t)
        dev = std::max(dev, (run.log.states[t] - nominal.log.states[t]).norm());
      row.max_rel_deviation = dev / scale;
      row.stable = run.diagnostics.converged_to_origin;
    } catch (const Error&) {
      row.failed = true;
    }
    rows.push_back(row);
  }
  return rows;
}

}  // namespace dyngame
