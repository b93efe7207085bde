// Command-line front end: assumption checks, equilibrium synthesis, terminal
// sets, finite-horizon solves, closed-loop simulation and experiment
// reproduction. Exit codes: 0 success, 1 usage/parse error, 2 assumption
// failure, 3 solver non-convergence, 4 infeasibility.

#include <CLI11.hpp>
#include <filesystem>
#include <iostream>
#include <nlohmann/json.hpp>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "dyngame/csv_io.hpp"
#include "dyngame/log.hpp"
#include "dyngame/manifest.hpp"
#include "dyngame/pipeline.hpp"
#include "dyngame/platooning.hpp"
#include "dyngame/version.hpp"

namespace {

using namespace dyngame;
namespace fs = std::filesystem;

Vec parse_csv_vector(const std::string& text) {
  std::vector<double> vals;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    try {
      vals.push_back(std::stod(item));
    } catch (const std::exception&) {
      throw ParseError("--x0: cannot parse '" + item + "' as a number");
    }
  }
  if (vals.empty()) throw ParseError("--x0: empty vector");
  return Eigen::Map<const Vec>(vals.data(), static_cast<Eigen::Index>(vals.size()));
}

json matrix_json(const Mat& m) { return detail::matrix_to_json(m); }

json matrices_json(const std::vector<Mat>& ms) {
  json arr = json::array();
  for (const Mat& m : ms) arr.push_back(matrix_json(m));
  return arr;
}

void write_json(const json& j, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw ParseError("cannot open output file: " + path);
  out << j.dump(2) << "\n";
}

void write_manifest(const std::string& command, const std::string& config_path,
                    unsigned long long seed, const std::vector<std::string>& outputs) {
  if (outputs.empty()) return;
  RunManifest mf;
  mf.command = command;
  mf.config_hash = config_path.empty() ? "" : hash_file(config_path);
  mf.seed = seed;
  mf.outputs = outputs;
  mf.write(outputs.front() + ".manifest.json");
}

// The bundled default platooning instance: the scenario builder's defaults
// plus an off-origin feasible start with the input boxes active early on.
PlatooningParams default_platooning_params() { return PlatooningParams::defaults(4); }

Vec default_platooning_x0() {
  Vec x0(8);
  x0 << 0.0, 6.0, -4.0, 3.0, -2.5, 2.0, 3.0, -2.0;
  return x0;
}

Scenario platooning_scenario() {
  const PlatooningScenario sc = build_platooning(default_platooning_params());
  Scenario out;
  out.game = sc.game;
  out.constraints = sc.constraints;
  return out;
}

json assumption_report_json(const AssumptionReport& rep) {
  json j;
  j["a_invertible"] = rep.a_invertible;
  j["stabilizable"] = rep.stabilizable;
  j["detectable"] = rep.detectable;
  j["stable_eig_count"] = rep.stable_eig_count;
  j["complementarity_ok"] = rep.complementarity_ok;
  j["ambiguous_stable_count"] = rep.ambiguous_stable_count;
  j["overall"] = rep.overall;
  if (rep.h.size() > 0) j["H"] = matrix_json(rep.h);
  return j;
}

int cmd_check(const std::string& config_path, const std::string& which, const std::string& out) {
  const Scenario sc = load_scenario(config_path);
  json j;
  bool ok = true;
  if (which == "ol" || which == "all") {
    const AssumptionReport rep = check_assumptions(sc.game);
    j["open_loop"] = assumption_report_json(rep);
    ok = ok && rep.overall;
    if (!rep.a_invertible) log_warn("A is singular; the H-matrix condition cannot be evaluated");
  }
  if (which == "cl" || which == "all") {
    Mat b_all = hstack(sc.game.b);
    Mat q_sum = Mat::Zero(sc.game.state_dim(), sc.game.state_dim());
    for (int i = 0; i < sc.game.num_agents(); ++i) q_sum += sc.game.q[i];
    const bool stab = is_stabilizable(sc.game.a, b_all);
    const bool det = is_detectable(sc.game.a, psd_sqrt(q_sum));
    j["closed_loop"]["stabilizable"] = stab;
    j["closed_loop"]["detectable"] = det;
    ok = ok && stab && det;
  }
  j["overall"] = ok;
  std::cout << j.dump(2) << "\n";
  std::cout << (ok ? "all requested assumptions hold" : "assumption check FAILED") << "\n";
  if (!out.empty()) {
    write_json(j, out);
    write_manifest("check", config_path, 0, {out});
  }
  return ok ? 0 : 2;
}

int cmd_solve_ol(const std::string& config_path, double tol, int max_iter, const std::string& out) {
  const Scenario sc = load_scenario(config_path);
  const OlPipeline p = run_ol_pipeline(sc, tol, max_iter);
  json j;
  j["P_ol"] = matrices_json(p.sol.p_ol);
  j["K_ol"] = matrices_json(p.sol.k_ol);
  j["Abar_ol"] = matrix_json(p.sol.abar_ol);
  j["residuals"] = p.sol.residuals;
  j["iterations"] = p.sol.iterations;
  j["spectral_radius"] = spectral_radius(p.sol.abar_ol);
  j["P_hat"] = matrices_json(p.ctg.p_hat);
  j["K_hat"] = matrices_json(p.ctg.k_hat);
  j["P_lqr"] = matrices_json(p.ctg.p_lqr);
  j["P_tilde"] = matrices_json(p.ctg.p_tilde);
  j["are_residuals"] = p.ctg.are_residual;
  j["sylvester_consistency"] = p.ctg.sylvester_consistency;
  if (out.empty()) {
    std::cout << j.dump(2) << "\n";
  } else {
    write_json(j, out);
    write_manifest("solve-ol", config_path, 0, {out});
    std::cout << "open-loop equilibrium written to " << out << " (" << p.sol.iterations
              << " iterations)\n";
  }
  return 0;
}

int cmd_solve_cl(const std::string& config_path, const std::string& method, double tol,
                 int max_iter, const std::string& out) {
  const Scenario sc = load_scenario(config_path);
  const ClNeMethod m = method == "riccati" ? ClNeMethod::riccati_recursion
                                           : ClNeMethod::lyapunov_recursion;
  const ClPipeline p = run_cl_pipeline(sc, m, tol, max_iter);
  json j;
  j["P_cl"] = matrices_json(p.sol.p_cl);
  j["K_cl"] = matrices_json(p.sol.k_cl);
  j["Abar_cl"] = matrix_json(p.sol.abar_cl);
  j["residuals"] = p.sol.residuals;
  j["iterations"] = p.sol.iterations;
  j["method"] = method;
  j["spectral_radius"] = spectral_radius(p.sol.abar_cl);
  if (out.empty()) {
    std::cout << j.dump(2) << "\n";
  } else {
    write_json(j, out);
    write_manifest("solve-cl", config_path, 0, {out});
    std::cout << "closed-loop equilibrium written to " << out << " (" << p.sol.iterations
              << " iterations)\n";
  }
  return 0;
}

int cmd_terminal_set(const std::string& config_path, const std::string& which,
                     const std::string& out) {
  const Scenario sc = load_scenario(config_path);
  TerminalSet ts;
  if (which == "ol") {
    const OlPipeline p = run_ol_pipeline(sc);
    ts = p.ts;
  } else {
    const ClPipeline p = run_cl_pipeline(sc, ClNeMethod::lyapunov_recursion);
    ts = p.ts;
  }
  json j;
  j["P_lyap"] = matrix_json(ts.p_lyap);
  j["r"] = ts.unbounded() ? json(nullptr) : json(ts.r);
  j["closed_loop"] = matrix_json(ts.closed_loop);
  j["gains"] = matrices_json(ts.gains);
  if (out.empty()) {
    std::cout << j.dump(2) << "\n";
  } else {
    write_json(j, out);
    write_manifest("terminal-set", config_path, 0, {out});
    std::cout << "terminal set written to " << out << "\n";
  }
  return 0;
}

RhcController controller_for_kind(const Scenario& sc, const std::string& kind,
                                  const RhcConfig& cfg) {
  if (kind == "ol") {
    const OlPipeline p = run_ol_pipeline(sc);
    return make_rhc_controller(sc.game, sc.constraints, p.sol, p.ctg, p.ts, cfg);
  }
  if (kind == "cl") {
    const ClPipeline p = run_cl_pipeline(sc, ClNeMethod::lyapunov_recursion);
    return make_rhc_controller(sc.game, sc.constraints, p.sol, p.ts, cfg);
  }
  return make_plain_controller(sc.game, sc.constraints);
}

int cmd_solve_fh(const std::string& config_path, const std::string& x0_text,
                 const std::string& kind, double tol, const std::string& out) {
  const Scenario sc = load_scenario(config_path);
  const Vec x0 = parse_csv_vector(x0_text);
  require(x0.size() == sc.game.state_dim(), "--x0: dimension mismatch with the scenario");
  RhcConfig cfg;
  cfg.tol = tol;
  cfg.max_iter = sc.solver.max_iter;
  const RhcController ctrl = controller_for_kind(sc, kind, cfg);
  ViSolveSettings vs;
  vs.tol = tol;
  vs.max_iter = sc.solver.max_iter;
  vs.step = sc.solver.step_size;
  const ViSolveResult res = solve_vi(ctrl.vi, x0, {}, vs);
  const MonotonicityReport mono = diagnose_monotonicity(ctrl.vi);

  json j;
  j["residual"] = res.residual;
  j["iterations"] = res.iterations;
  j["converged"] = res.converged;
  j["feasibility_violation"] = res.feasibility_violation;
  j["monotonicity"]["min_eig_sym"] = mono.min_eig_sym;
  j["monotonicity"]["strongly_monotone"] = mono.strongly_monotone;
  j["monotonicity"]["gerschgorin_bound"] = mono.gerschgorin_bound;
  j["monotonicity"]["max_diag_asymmetry"] = mono.max_diag_asymmetry;
  std::cout << j.dump(2) << "\n";
  if (!res.converged) return 3;

  if (!out.empty()) {
    CsvWriter csv(out);
    std::vector<std::string> cols{"t"};
    for (int i = 1; i <= ctrl.vi.num_agents; ++i)
      for (Eigen::Index k = 0; k < ctrl.vi.m; ++k)
        cols.push_back("u_" + std::to_string(i) + "_" + std::to_string(k));
    csv.header(cols);
    for (int t = 0; t < ctrl.vi.T; ++t) {
      std::vector<double> row{static_cast<double>(t)};
      const Vec ut = ctrl.vi.stacked_input_at(res.u, t);
      for (Eigen::Index k = 0; k < ut.size(); ++k) row.push_back(ut[k]);
      csv.row(row);
    }
    write_manifest("solve-fh", config_path, 0, {out});
    std::cout << "input sequence written to " << out << "\n";
  }
  return 0;
}

int cmd_simulate(const std::string& config_path, const std::string& x0_text,
                 const std::string& kind, int steps, unsigned long long seed,
                 const std::string& out) {
  const Scenario sc = load_scenario(config_path);
  const Vec x0 = parse_csv_vector(x0_text);
  require(x0.size() == sc.game.state_dim(), "--x0: dimension mismatch with the scenario");
  RhcConfig cfg;
  cfg.controller_kind = kind == "ol"   ? ViKind::olne_terminal
                        : kind == "cl" ? ViKind::clne_surrogate
                                       : ViKind::no_terminal;
  cfg.steps = steps;
  cfg.tol = sc.solver.tol;
  cfg.max_iter = sc.solver.max_iter;
  const RhcController ctrl = controller_for_kind(sc, kind, cfg);
  const RhcResult res = run_rhc(sc.game, sc.constraints, ctrl, x0, cfg);

  json j;
  j["converged_to_origin"] = res.diagnostics.converged_to_origin;
  j["constraint_max_violation"] = res.diagnostics.constraint_max_violation;
  if (res.diagnostics.entered_terminal_at)
    j["entered_terminal_at"] = *res.diagnostics.entered_terminal_at;
  else
    j["entered_terminal_at"] = nullptr;
  j["final_state_norm"] = res.log.states.back().lpNorm<Eigen::Infinity>();
  std::cout << j.dump(2) << "\n";

  if (!out.empty()) {
    write_trajectory_csv(out, sc.game, res.log);
    write_manifest("simulate", config_path, seed, {out});
    std::cout << "trajectory written to " << out << "\n";
  }
  for (const auto& st : res.log.solver_stats)
    if (!st.converged) return 3;
  return 0;
}

int cmd_experiment_perturb(const std::string& config_path, const std::string& x0_text,
                           std::vector<double> variance_fractions, int trials,
                           unsigned long long seed, int steps, const std::string& out) {
  const Scenario sc = config_path.empty() ? platooning_scenario() : load_scenario(config_path);
  const Vec x0 = x0_text.empty() ? default_platooning_x0() : parse_csv_vector(x0_text);
  require(x0.size() == sc.game.state_dim(), "--x0: dimension mismatch with the scenario");
  const OlPipeline p = run_ol_pipeline(sc);
  double max_entry = 0.0;
  for (const Mat& pm : p.sol.p_ol) max_entry = std::max(max_entry, pm.cwiseAbs().maxCoeff());

  CsvWriter csv(out);
  csv.header({"variance_fraction", "variance", "trial", "max_rel_deviation", "stable", "failed"});
  for (double frac : variance_fractions) {
    RhcConfig cfg;
    cfg.steps = steps;
    cfg.perturbation = PerturbationConfig{frac * max_entry, trials, seed};
    const auto rows =
        run_perturbation_experiment(sc.game, sc.constraints, p.sol, p.ctg, p.ts, x0, cfg);
    for (const auto& row : rows)
      csv.row({frac, row.variance, static_cast<double>(row.trial), row.max_rel_deviation,
               row.stable ? 1.0 : 0.0, row.failed ? 1.0 : 0.0});
  }
  write_manifest("experiment perturb", config_path, seed, {out});
  std::cout << "perturbation sweep written to " << out << "\n";
  return 0;
}

// Relative positions and speeds recovered from the platooning error state.
void write_platooning_physical(const std::string& outdir, const PlatooningScenario& sc,
                               const TrajectoryLog& log) {
  const int nveh = sc.params.num_vehicles;
  const double v_ref = sc.params.ref_speed;
  CsvWriter pos(outdir + "/positions.csv");
  CsvWriter vel(outdir + "/velocities.csv");
  std::vector<std::string> pos_cols{"t"}, vel_cols{"t"};
  for (int i = 2; i <= nveh; ++i) pos_cols.push_back("p" + std::to_string(i) + "_minus_p1");
  for (int i = 1; i <= nveh; ++i) vel_cols.push_back("v" + std::to_string(i));
  pos.header(pos_cols);
  vel.header(vel_cols);
  for (size_t t = 0; t < log.states.size(); ++t) {
    const Vec& x = log.states[t];
    std::vector<double> speeds(static_cast<size_t>(nveh));
    double cum = 0.0;
    for (int i = 0; i < nveh; ++i) {
      cum += x[2 * i + 1];
      speeds[static_cast<size_t>(i)] = v_ref - cum;
    }
    std::vector<double> prow{static_cast<double>(t)}, vrow{static_cast<double>(t)};
    double pos_rel = 0.0;
    for (int i = 1; i < nveh; ++i) {
      const double gap =
          x[2 * i] + sc.params.desired_gap[static_cast<size_t>(i)] +
          sc.params.headway[static_cast<size_t>(i)] * speeds[static_cast<size_t>(i)];
      pos_rel -= gap;  // p_i - p_1 accumulates the gaps with a negative sign
      prow.push_back(pos_rel);
    }
    for (int i = 0; i < nveh; ++i) vrow.push_back(speeds[static_cast<size_t>(i)]);
    pos.row(prow);
    vel.row(vrow);
  }
}

int cmd_reproduce(const std::string& figure, const std::string& outdir, unsigned long long seed) {
  fs::create_directories(outdir);
  if (figure == "platooning") {
    const PlatooningScenario psc = build_platooning(default_platooning_params());
    Scenario sc;
    sc.game = psc.game;
    sc.constraints = psc.constraints;
    const OlPipeline p = run_ol_pipeline(sc);
    RhcConfig cfg;
    cfg.steps = 220;
    const RhcController ctrl = make_rhc_controller(sc.game, sc.constraints, p.sol, p.ctg, p.ts, cfg);
    const RhcResult res = run_rhc(sc.game, sc.constraints, ctrl, default_platooning_x0(), cfg);

    const std::string traj = outdir + "/trajectory.csv";
    write_trajectory_csv(traj, sc.game, res.log);
    write_platooning_physical(outdir, psc, res.log);
    CsvWriter td(outdir + "/terminal_distance.csv");
    td.header({"t", "gauge_distance"});
    for (size_t t = 0; t < res.log.terminal_distance.size(); ++t)
      td.row({static_cast<double>(t), res.log.terminal_distance[t]});
    write_manifest("reproduce platooning", "", seed,
                   {traj, outdir + "/positions.csv", outdir + "/velocities.csv",
                    outdir + "/terminal_distance.csv"});
    std::cout << "platooning run written to " << outdir << "\n";
    std::cout << "entered terminal set at step "
              << (res.diagnostics.entered_terminal_at
                      ? std::to_string(*res.diagnostics.entered_terminal_at)
                      : std::string("never"))
              << ", final |x|_inf = " << res.log.states.back().lpNorm<Eigen::Infinity>() << "\n";
    return 0;
  }
  if (figure == "perturbation") {
    return cmd_experiment_perturb("", "", {0.001, 0.01, 0.05}, 25, seed, 220,
                                  outdir + "/perturbation.csv");
  }
  throw ParseError("unknown figure '" + figure + "'");
}

int cmd_export_scenario(const std::string& which, int nveh, const std::string& out) {
  Scenario sc;
  if (which == "platooning") {
    const PlatooningScenario psc = build_platooning(PlatooningParams::defaults(nveh));
    sc.game = psc.game;
    sc.constraints = psc.constraints;
  } else if (which == "power-system-template") {
    // Placeholder dynamics: the generator/tie-line matrices live in an
    // external reference and must be filled in by the user. Weights follow
    // the four-generator automatic-generation-control layout (three states
    // per generator plus three tie-line flows).
    const int n = 15, num_agents = 4;
    sc.game.a = 0.95 * Mat::Identity(n, n);
    for (int i = 0; i < num_agents; ++i) {
      Mat b = Mat::Zero(n, 1);
      b(3 * i, 0) = 1.0;
      sc.game.b.push_back(b);
      Mat q = Mat::Zero(n, n);
      if (i == 0) {
        q(0, 0) = 5.0;
      } else {
        q(3 * i, 3 * i) = 5.0;
        q(12 + (i - 1), 12 + (i - 1)) = 5.0;
      }
      sc.game.q.push_back(q);
      sc.game.r.push_back(Mat::Identity(1, 1));
    }
    sc.game.horizon = 10;
    sc.constraints = ConstraintSpec::unconstrained(num_agents, n, 1);
  } else {
    throw ParseError("unknown scenario '" + which + "'");
  }
  if (which == "power-system-template") {
    json j = scenario_to_json(sc);
    j["_note"] =
        "Template only: A and B are placeholders; fill in the generator and tie-line "
        "matrices from your model reference before use.";
    write_json(j, out);
  } else {
    save_scenario(sc, out);
  }
  write_manifest("export-scenario", "", 0, {out});
  std::cout << "scenario written to " << out << "\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Constrained linear-quadratic dynamic games: Nash equilibrium synthesis and "
               "receding-horizon control"};
  app.set_version_flag("--version", dyngame::kVersion);
  app.require_subcommand(1);

  std::string config, out, outdir = "out", x0_text, kind = "ol", which = "ol",
              method = "lyapunov", figure;
  double tol = 1e-8;
  int max_iter = 10000, steps = 220, trials = 100, nveh = 4;
  unsigned long long seed = 0;
  std::vector<double> variances{0.01};

  auto* check = app.add_subcommand("check", "verify the structural assumptions of a scenario");
  check->add_option("--config", config)->required();
  check->add_option("--for", which, "ol | cl | all")
      ->default_val("all")
      ->check(CLI::IsMember({"ol", "cl", "all"}));
  check->add_option("--out", out);

  auto* solve_ol = app.add_subcommand("solve-ol", "open-loop equilibrium via the Stein recursion");
  solve_ol->add_option("--config", config)->required();
  solve_ol->add_option("--tol", tol)->default_val(1e-10);
  solve_ol->add_option("--max-iter", max_iter);
  solve_ol->add_option("--out", out);

  auto* solve_cl = app.add_subcommand("solve-cl", "closed-loop equilibrium via coupled Riccati equations");
  solve_cl->add_option("--config", config)->required();
  solve_cl->add_option("--method", method, "riccati | lyapunov")
      ->default_val("lyapunov")
      ->check(CLI::IsMember({"riccati", "lyapunov"}));
  solve_cl->add_option("--tol", tol)->default_val(1e-10);
  solve_cl->add_option("--max-iter", max_iter)->default_val(100000);
  solve_cl->add_option("--out", out);

  auto* tset = app.add_subcommand("terminal-set", "constraint-admissible invariant ellipsoid");
  tset->add_option("--config", config)->required();
  tset->add_option("--which", which, "ol | cl")->default_val("ol")->check(CLI::IsMember({"ol", "cl"}));
  tset->add_option("--out", out);

  auto* fh = app.add_subcommand("solve-fh", "solve one finite-horizon game as a VI");
  fh->add_option("--config", config)->required();
  fh->add_option("--x0", x0_text)->required();
  fh->add_option("--kind", kind, "ol | cl | none")
      ->default_val("ol")
      ->check(CLI::IsMember({"ol", "cl", "none"}));
  fh->add_option("--tol", tol)->default_val(1e-8);
  fh->add_option("--out", out);

  auto* sim = app.add_subcommand("simulate", "receding-horizon closed loop");
  sim->add_option("--config", config)->required();
  sim->add_option("--x0", x0_text)->required();
  sim->add_option("--kind", kind, "ol | cl | none")
      ->default_val("ol")
      ->check(CLI::IsMember({"ol", "cl", "none"}));
  sim->add_option("--steps", steps)->default_val(220);
  sim->add_option("--seed", seed)->default_val(0);
  sim->add_option("--out", out);

  auto* exp = app.add_subcommand("experiment", "experiment harnesses");
  exp->require_subcommand(1);
  auto* perturb = exp->add_subcommand("perturb", "terminal-cost perturbation sweep");
  perturb->add_option("--config", config, "scenario file (default: built-in platooning)");
  perturb->add_option("--x0", x0_text, "initial state (default: built-in platooning start)");
  perturb->add_option("--variances", variances,
                      "variance as a fraction of the largest |P_ol| entry")
      ->expected(-1);
  perturb->add_option("--trials", trials)->default_val(100);
  perturb->add_option("--steps", steps)->default_val(220);
  perturb->add_option("--seed", seed)->default_val(0);
  perturb->add_option("--out", out)->required();

  auto* rep = app.add_subcommand("reproduce", "regenerate the bundled experiment data");
  rep->add_option("figure", figure, "platooning | perturbation")->required();
  rep->add_option("--outdir", outdir)->default_val("out");
  rep->add_option("--seed", seed)->default_val(0);

  auto* exp_sc = app.add_subcommand("export-scenario", "write a scenario config file");
  exp_sc->add_option("--scenario", which, "platooning | power-system-template")
      ->default_val("platooning")
      ->check(CLI::IsMember({"platooning", "power-system-template"}));
  exp_sc->add_option("--vehicles", nveh)->default_val(4);
  exp_sc->add_option("--out", out)->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 1;  // usage errors exit with 1
  }

  try {
    if (check->parsed()) return cmd_check(config, which, out);
    if (solve_ol->parsed()) return cmd_solve_ol(config, tol, max_iter, out);
    if (solve_cl->parsed()) return cmd_solve_cl(config, method, tol, max_iter, out);
    if (tset->parsed()) return cmd_terminal_set(config, which, out);
    if (fh->parsed()) return cmd_solve_fh(config, x0_text, kind, tol, out);
    if (sim->parsed()) return cmd_simulate(config, x0_text, kind, steps, seed, out);
    if (exp->parsed() && perturb->parsed())
      return cmd_experiment_perturb(config, x0_text, variances, trials, seed, steps, out);
    if (rep->parsed()) return cmd_reproduce(figure, outdir, seed);
    if (exp_sc->parsed()) return cmd_export_scenario(which, nveh, out);
  } catch (const dyngame::ParseError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  } catch (const dyngame::DimensionError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  } catch (const dyngame::AssumptionError& e) {
    std::cerr << "assumption failure: " << e.what() << "\n";
    return 2;
  } catch (const dyngame::InfeasibleError& e) {
    std::cerr << "infeasible: " << e.what() << "\n";
    return 4;
  } catch (const dyngame::NonConvergenceError& e) {
    std::cerr << "solver did not converge: " << e.what() << "\n";
    return 3;
  } catch (const dyngame::Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
