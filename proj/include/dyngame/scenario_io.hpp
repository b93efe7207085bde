#pragma once

// JSON scenario files. Schema:
//   {
//     "A": [[...]], "B": [[[...]]], "Q": [[[...]]], "R": [[[...]]], "T": 10,
//     "constraints": {
//       "state": {"G": [[...]], "g": [...]},
//       "input_boxes": [{"min": [...], "max": [...]}, ...],
//       "coupling": {"G": [[...]], "g": [...]}
//     },
//     "solver": {"tol": 1e-8, "max_iter": 200000, "step_size": null, "seed": 0}
//   }
// Matrices are row-major nested arrays of doubles; null stands for an
// unbounded box entry. Q and R are symmetrized on load, then validated.

#include <fstream>
#include <limits>
#include <nlohmann/json.hpp>
#include <optional>
#include <string>

#include "dyngame/game.hpp"

namespace dyngame {

using json = nlohmann::json;

struct SolverSettings {
  double tol = 1e-8;
  int max_iter = 200000;
  std::optional<double> step_size;  // override for the splitting step
  unsigned long long seed = 0;
};

struct Scenario {
  GameDefinition game;
  ConstraintSpec constraints;
  SolverSettings solver;
};

namespace detail {

inline Mat parse_matrix(const json& j, const std::string& field) {
  if (!j.is_array() || j.empty() || !j.front().is_array())
    throw ParseError("field '" + field + "': expected a nested array matrix");
  const Eigen::Index rows = static_cast<Eigen::Index>(j.size());
  const Eigen::Index cols = static_cast<Eigen::Index>(j.front().size());
  Mat m(rows, cols);
  for (Eigen::Index r = 0; r < rows; ++r) {
    if (static_cast<Eigen::Index>(j[r].size()) != cols)
      throw ParseError("field '" + field + "': ragged rows");
    for (Eigen::Index c = 0; c < cols; ++c) {
      if (!j[r][c].is_number()) throw ParseError("field '" + field + "': non-numeric entry");
      m(r, c) = j[r][c].get<double>();
    }
  }
  return m;
}

inline Vec parse_vector(const json& j, const std::string& field) {
  if (!j.is_array()) throw ParseError("field '" + field + "': expected an array");
  Vec v(static_cast<Eigen::Index>(j.size()));
  for (Eigen::Index k = 0; k < v.size(); ++k) {
    if (!j[k].is_number()) throw ParseError("field '" + field + "': non-numeric entry");
    v[k] = j[k].get<double>();
  }
  return v;
}

// null entries mean unbounded.
inline Vec parse_bound(const json& j, const std::string& field, double inf_sign) {
  if (!j.is_array()) throw ParseError("field '" + field + "': expected an array");
  Vec v(static_cast<Eigen::Index>(j.size()));
  for (Eigen::Index k = 0; k < v.size(); ++k) {
    if (j[k].is_null())
      v[k] = inf_sign * std::numeric_limits<double>::infinity();
    else if (j[k].is_number())
      v[k] = j[k].get<double>();
    else
      throw ParseError("field '" + field + "': entries must be numbers or null");
  }
  return v;
}

inline json matrix_to_json(const Mat& m) {
  json rows = json::array();
  for (Eigen::Index r = 0; r < m.rows(); ++r) {
    json row = json::array();
    for (Eigen::Index c = 0; c < m.cols(); ++c) row.push_back(m(r, c));
    rows.push_back(std::move(row));
  }
  return rows;
}

inline json bound_to_json(const Vec& v) {
  json out = json::array();
  for (Eigen::Index k = 0; k < v.size(); ++k) {
    if (std::isinf(v[k]))
      out.push_back(nullptr);
    else
      out.push_back(v[k]);
  }
  return out;
}

}  // namespace detail

inline Scenario parse_scenario(const json& j) {
  Scenario sc;
  for (const char* field : {"A", "B", "Q", "R", "T"})
    if (!j.contains(field)) throw ParseError(std::string("missing field '") + field + "'");

  sc.game.a = detail::parse_matrix(j["A"], "A");
  if (!j["B"].is_array() || j["B"].empty()) throw ParseError("field 'B': expected a list of matrices");
  for (size_t i = 0; i < j["B"].size(); ++i)
    sc.game.b.push_back(detail::parse_matrix(j["B"][i], "B[" + std::to_string(i) + "]"));
  for (size_t i = 0; i < j["Q"].size(); ++i)
    sc.game.q.push_back(symmetrize(detail::parse_matrix(j["Q"][i], "Q[" + std::to_string(i) + "]")));
  for (size_t i = 0; i < j["R"].size(); ++i)
    sc.game.r.push_back(symmetrize(detail::parse_matrix(j["R"][i], "R[" + std::to_string(i) + "]")));
  if (!j["T"].is_number_integer()) throw ParseError("field 'T': expected an integer");
  sc.game.horizon = j["T"].get<int>();
  sc.game.validate();

  const int num_agents = sc.game.num_agents();
  const Eigen::Index n = sc.game.state_dim(), m = sc.game.input_dim();
  sc.constraints = ConstraintSpec::unconstrained(num_agents, n, m);
  if (j.contains("constraints")) {
    const json& jc = j["constraints"];
    if (jc.contains("state")) {
      sc.constraints.state.g = detail::parse_matrix(jc["state"]["G"], "constraints.state.G");
      sc.constraints.state.h = detail::parse_vector(jc["state"]["g"], "constraints.state.g");
    }
    if (jc.contains("input_boxes")) {
      if (jc["input_boxes"].size() != static_cast<size_t>(num_agents))
        throw ParseError("constraints.input_boxes: one box per agent required");
      sc.constraints.input_boxes.clear();
      for (const auto& jb : jc["input_boxes"])
        sc.constraints.input_boxes.push_back(
            Box{detail::parse_bound(jb["min"], "input_boxes.min", -1.0),
                detail::parse_bound(jb["max"], "input_boxes.max", +1.0)});
    }
    if (jc.contains("coupling") && !jc["coupling"].is_null()) {
      Polytope cp;
      cp.g = detail::parse_matrix(jc["coupling"]["G"], "constraints.coupling.G");
      cp.h = detail::parse_vector(jc["coupling"]["g"], "constraints.coupling.g");
      sc.constraints.coupling = std::move(cp);
    }
  }
  sc.constraints.validate(num_agents, n, m);

  if (j.contains("solver")) {
    const json& js = j["solver"];
    if (js.contains("tol")) sc.solver.tol = js["tol"].get<double>();
    if (js.contains("max_iter")) sc.solver.max_iter = js["max_iter"].get<int>();
    if (js.contains("step_size") && !js["step_size"].is_null())
      sc.solver.step_size = js["step_size"].get<double>();
    if (js.contains("seed")) sc.solver.seed = js["seed"].get<unsigned long long>();
    if (sc.solver.tol <= 0.0 || sc.solver.max_iter < 1)
      throw ParseError("solver: tol must be positive and max_iter >= 1");
  }
  return sc;
}

inline json scenario_to_json(const Scenario& sc) {
  json j;
  j["A"] = detail::matrix_to_json(sc.game.a);
  j["B"] = json::array();
  j["Q"] = json::array();
  j["R"] = json::array();
  for (int i = 0; i < sc.game.num_agents(); ++i) {
    j["B"].push_back(detail::matrix_to_json(sc.game.b[i]));
    j["Q"].push_back(detail::matrix_to_json(sc.game.q[i]));
    j["R"].push_back(detail::matrix_to_json(sc.game.r[i]));
  }
  j["T"] = sc.game.horizon;
  json jc;
  if (sc.constraints.state.rows() > 0) {
    jc["state"]["G"] = detail::matrix_to_json(sc.constraints.state.g);
    jc["state"]["g"] = detail::bound_to_json(sc.constraints.state.h);
  }
  jc["input_boxes"] = json::array();
  for (const auto& box : sc.constraints.input_boxes) {
    json jb;
    jb["min"] = detail::bound_to_json(box.lo);
    jb["max"] = detail::bound_to_json(box.hi);
    jc["input_boxes"].push_back(std::move(jb));
  }
  if (sc.constraints.coupling) {
    jc["coupling"]["G"] = detail::matrix_to_json(sc.constraints.coupling->g);
    jc["coupling"]["g"] = detail::bound_to_json(sc.constraints.coupling->h);
  }
  j["constraints"] = std::move(jc);
  j["solver"]["tol"] = sc.solver.tol;
  j["solver"]["max_iter"] = sc.solver.max_iter;
  if (sc.solver.step_size)
    j["solver"]["step_size"] = *sc.solver.step_size;
  else
    j["solver"]["step_size"] = nullptr;
  j["solver"]["seed"] = sc.solver.seed;
  return j;
}

inline Scenario load_scenario(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ParseError("cannot open scenario file: " + path);
  json j;
  try {
    in >> j;
  } catch (const json::parse_error& e) {
    throw ParseError("scenario parse error in " + path + ": " + e.what());
  }
  return parse_scenario(j);
}

inline void save_scenario(const Scenario& sc, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw ParseError("cannot open output file: " + path);
  out << scenario_to_json(sc).dump(2) << "\n";
}

}  // namespace dyngame
