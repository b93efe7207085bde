#pragma once

// CSV output. Numbers are printed with 17 significant digits so that parsing
// them back reproduces the exact double.

#include <cstdio>
#include <fstream>
#include <string>
#include <vector>

#include "dyngame/game.hpp"

namespace dyngame {

inline std::string format_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

class CsvWriter {
 public:
  explicit CsvWriter(const std::string& path) : out_(path) {
    if (!out_) throw ParseError("cannot open output file: " + path);
  }

  void header(const std::vector<std::string>& cols) {
    for (size_t k = 0; k < cols.size(); ++k) out_ << (k ? "," : "") << cols[k];
    out_ << "\n";
  }

  void row(const std::vector<double>& vals) {
    for (size_t k = 0; k < vals.size(); ++k) out_ << (k ? "," : "") << format_double(vals[k]);
    out_ << "\n";
  }

 private:
  std::ofstream out_;
};

// Schema: t, x_0..x_{n-1}, u_{1,0}..u_{N,m-1}, cost_1..cost_N, term_dist,
// vi_iters, vi_residual.
inline void write_trajectory_csv(const std::string& path, const GameDefinition& game,
                                 const TrajectoryLog& log) {
  CsvWriter csv(path);
  std::vector<std::string> cols{"t"};
  for (Eigen::Index k = 0; k < game.state_dim(); ++k) cols.push_back("x_" + std::to_string(k));
  for (int i = 1; i <= game.num_agents(); ++i)
    for (Eigen::Index k = 0; k < game.input_dim(); ++k)
      cols.push_back("u_" + std::to_string(i) + "_" + std::to_string(k));
  for (int i = 1; i <= game.num_agents(); ++i) cols.push_back("cost_" + std::to_string(i));
  cols.insert(cols.end(), {"term_dist", "vi_iters", "vi_residual"});
  csv.header(cols);

  for (size_t t = 0; t < log.inputs.size(); ++t) {
    std::vector<double> row{static_cast<double>(t)};
    for (Eigen::Index k = 0; k < game.state_dim(); ++k) row.push_back(log.states[t][k]);
    for (Eigen::Index k = 0; k < log.inputs[t].size(); ++k) row.push_back(log.inputs[t][k]);
    for (double c : log.stage_costs[t]) row.push_back(c);
    row.push_back(t < log.terminal_distance.size() ? log.terminal_distance[t] : 0.0);
    row.push_back(t < log.solver_stats.size() ? static_cast<double>(log.solver_stats[t].iterations)
                                              : 0.0);
    row.push_back(t < log.solver_stats.size() ? log.solver_stats[t].residual : 0.0);
    csv.row(row);
  }
}

}  // namespace dyngame
