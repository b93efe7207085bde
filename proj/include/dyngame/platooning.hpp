#pragma once

// Vehicle platooning scenario. The leader (agent 1) tracks a reference speed;
// each follower regulates its spacing error p_{i-1} - p_i - d_i - h_i v_i and
// speed error v_{i-1} - v_i. States are these error coordinates, stacked in
// blocks of two per vehicle, so the game regulates to the origin. The raw
// chain of integrators is not stabilizable per agent, so a local
// prestabilizer u_i = K_i^stab x is absorbed into A before the game is built;
// the game input is the correction on top of it.

#include <cmath>
#include <vector>

#include "dyngame/game.hpp"
#include "dyngame/matrix_utils.hpp"

namespace dyngame {

struct PlatooningParams {
  int num_vehicles = 4;
  double sample_time = 0.1;          // seconds
  std::vector<double> headway;       // h_i, seconds; scalar default expanded per vehicle
  std::vector<double> desired_gap;   // d_i, meters
  double min_gap = 3.0;              // d_i^min
  double ref_speed = 15.0;           // v^ref
  double speed_min = 0.0;            // bounds on absolute vehicle speed
  double speed_max = 30.0;
  double input_limit = 1.0;          // |u_i| bound on the correction input
  int horizon = 10;
  // Prestabilizer gain magnitudes on (position error, speed error).
  double stab_gain_pos = 1.0;
  double stab_gain_vel = 1.0;

  static PlatooningParams defaults(int n_vehicles = 4) {
    PlatooningParams p;
    p.num_vehicles = n_vehicles;
    p.headway.assign(n_vehicles, 0.5);
    p.desired_gap.assign(n_vehicles, 5.0);
    return p;
  }
};

struct PlatooningScenario {
  GameDefinition game;          // built on the prestabilized A
  ConstraintSpec constraints;   // in error coordinates
  std::vector<Mat> k_stab;      // prestabilizer, u_i^phys = K_i^stab x + u_i
  Mat a_open;                   // A before prestabilization
  PlatooningParams params;
};

inline PlatooningScenario build_platooning(const PlatooningParams& params) {
  const int nveh = params.num_vehicles;
  if (nveh < 2) throw AssumptionError("build_platooning: at least two vehicles required");
  if (params.sample_time <= 0.0) throw AssumptionError("build_platooning: sample time must be positive");
  const double ts = params.sample_time;
  const Eigen::Index n = 2 * nveh;

  PlatooningScenario sc;
  sc.params = params;
  if (sc.params.headway.size() == 1) sc.params.headway.assign(nveh, params.headway.front());
  if (sc.params.desired_gap.size() == 1) sc.params.desired_gap.assign(nveh, params.desired_gap.front());
  require(sc.params.headway.size() == static_cast<size_t>(nveh) &&
              sc.params.desired_gap.size() == static_cast<size_t>(nveh),
          "build_platooning: headway/gap lists must have one entry per vehicle");

  // Error dynamics: leader block [[0,0],[0,1]], follower blocks a sampled
  // double integrator.
  Mat a = Mat::Zero(n, n);
  a.block(0, 0, 2, 2) << 0, 0, 0, 1;
  for (int i = 1; i < nveh; ++i) a.block(2 * i, 2 * i, 2, 2) << 1, ts, 0, 1;
  sc.a_open = a;

  // Input of vehicle i acts on its own error block (negatively, with the
  // headway term) and on its successor's block.
  std::vector<Mat> b(nveh, Mat::Zero(n, 1));
  const Eigen::Vector2d successor(ts * ts / 2.0, ts);
  for (int i = 0; i < nveh; ++i) {
    const Eigen::Vector2d own =
        (i == 0) ? Eigen::Vector2d(0.0, ts)
                 : Eigen::Vector2d(sc.params.headway[i] * ts + ts * ts / 2.0, ts);
    b[i].block(2 * i, 0, 2, 1) = -own;
    if (i + 1 < nveh) b[i].block(2 * (i + 1), 0, 2, 1) = successor;
  }

  // Local prestabilizer. Each vehicle's own input channel enters its block
  // with a negative sign, so positive gains on (pos, vel) stabilize it.
  sc.k_stab.assign(nveh, Mat::Zero(1, n));
  for (int i = 0; i < nveh; ++i) {
    sc.k_stab[i](0, 2 * i) = params.stab_gain_pos;
    sc.k_stab[i](0, 2 * i + 1) = params.stab_gain_vel;
  }
  Mat a_stab = a;
  for (int i = 0; i < nveh; ++i) a_stab += b[i] * sc.k_stab[i];

  sc.game.a = a_stab;
  sc.game.b = b;
  sc.game.q.assign(nveh, Mat::Identity(n, n));
  sc.game.r.assign(nveh, Mat::Identity(1, 1));
  sc.game.horizon = params.horizon;
  sc.game.validate();

  // Constraints expressed in error coordinates. With v_i = v_ref - sum_{k<=i}
  // x_{k,2} and p_{i-1} - p_i = x_{i,1} + d_i + h_i v_i:
  //   gap:    -x_{i,1} + h_i sum_{k<=i} x_{k,2} <= d_i + h_i v_ref - d_min
  //   speed:   sum_{k<=i} x_{k,2} <= v_ref - v_min, and the mirrored row
  //   input:  |u_i| <= input_limit (on the correction input)
  std::vector<Mat> rows;
  std::vector<double> bounds;
  for (int i = 1; i < nveh; ++i) {
    Mat row = Mat::Zero(1, n);
    row(0, 2 * i) = -1.0;
    for (int k = 0; k <= i; ++k) row(0, 2 * k + 1) += sc.params.headway[i];
    rows.push_back(row);
    bounds.push_back(sc.params.desired_gap[i] + sc.params.headway[i] * params.ref_speed -
                     params.min_gap);
  }
  for (int i = 0; i < nveh; ++i) {
    Mat row = Mat::Zero(1, n);
    for (int k = 0; k <= i; ++k) row(0, 2 * k + 1) = 1.0;
    rows.push_back(row);
    bounds.push_back(params.ref_speed - params.speed_min);
    rows.push_back(-row);
    bounds.push_back(params.speed_max - params.ref_speed);
  }
  sc.constraints.state.g = vstack(rows);
  sc.constraints.state.h = Eigen::Map<const Vec>(bounds.data(), static_cast<Eigen::Index>(bounds.size()));
  sc.constraints.input_boxes.assign(
      nveh, Box{Vec::Constant(1, -params.input_limit), Vec::Constant(1, params.input_limit)});
  sc.constraints.validate(nveh, n, 1);
  return sc;
}

}  // namespace dyngame
