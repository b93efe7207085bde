#pragma once

// Convenience bundles wiring a loaded scenario through equilibrium synthesis,
// cost-to-go assembly and terminal-set computation, shared by the CLI and the
// acceptance suite.

#include <optional>

#include "dyngame/clne.hpp"
#include "dyngame/olne.hpp"
#include "dyngame/rhc.hpp"
#include "dyngame/scenario_io.hpp"
#include "dyngame/terminal_set.hpp"
#include "dyngame/vi.hpp"

namespace dyngame {

struct OlPipeline {
  OlNeSolution sol;
  AugmentedCostToGo ctg;
  TerminalSet ts;
};

inline OlPipeline run_ol_pipeline(const Scenario& sc, double tol = 1e-10, int max_iter = 10000) {
  OlPipeline p;
  OlneSettings settings;
  settings.tol = tol;
  settings.max_iter = max_iter;
  p.sol = solve_olne(sc.game, settings);
  p.ctg = build_cost_to_go(sc.game, p.sol);
  p.ts = compute_terminal_set(p.sol.abar_ol, sc.constraints, p.sol.k_ol);
  return p;
}

struct ClPipeline {
  ClNeSolution sol;
  TerminalSet ts;
};

inline ClPipeline run_cl_pipeline(const Scenario& sc, ClNeMethod method, double tol = 1e-10,
                                  int max_iter = 100000) {
  ClPipeline p;
  ClneSettings settings;
  settings.method = method;
  settings.tol = tol;
  settings.max_iter = max_iter;
  p.sol = solve_clne(sc.game, settings);
  p.ts = compute_terminal_set(p.sol.abar_cl, sc.constraints, p.sol.k_cl);
  return p;
}

// Controller without a terminal cost; the shifted warm start is padded with
// zeros and the terminal set only feeds the diagnostics.
inline RhcController make_plain_controller(const GameDefinition& game,
                                           const ConstraintSpec& spec) {
  RhcController ctrl;
  ctrl.vi = build_vi(game, spec);
  const Eigen::Index n = game.state_dim(), m = game.input_dim();
  ctrl.tail_gains.assign(static_cast<size_t>(game.num_agents()), Mat::Zero(m, n));
  ctrl.terminal_set.p_lyap = Mat::Identity(n, n);
  ctrl.terminal_set.closed_loop = game.a;
  ctrl.terminal_value.assign(static_cast<size_t>(game.num_agents()), Mat::Zero(n, n));
  return ctrl;
}

}  // namespace dyngame
