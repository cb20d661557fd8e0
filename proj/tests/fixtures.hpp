#pragma once

// Hand-sized fixtures shared by the unit tests and the acceptance checks.
// They are small enough for the extensive-form scenario tree to serve as a
// brute-force oracle: 2 intensity levels, 2 landfall cells, M = 1, T = 3,
// 2 staging points, 2 demand points.

#include "relief/instance.hpp"

namespace fixtures {

// Deterministic landfall time (demand fires at t = T = 3).
inline relief::Instance tiny_det() {
  relief::Instance t;
  t.network.mdc = {0.0, 50.0};
  t.network.sp_xy = {{0.0, 0.0}, {100.0, 0.0}};
  t.network.sp_capacity = {30.0, 30.0};
  t.network.dp_xy = {{0.0, 100.0}, {150.0, 100.0}};
  t.costs = relief::CostModel{};
  t.costs.nu = 0.5;
  t.demand_params = {10.0, 300.0, 1};
  t.markov.kind = relief::ModelKind::DeterministicLandfall;
  t.markov.intensity.matrix = {{1.0, 0.0}, {0.2, 0.8}};
  for (int i = 0; i < 2; ++i)
    t.markov.track_x.cells.push_back({100.0 * i, 100.0 * (i + 1)});
  t.markov.track_x.matrix = {{0.7, 0.3}, {0.4, 0.6}};
  t.markov.horizon = 3;
  t.horizon = 3;
  t.initial_state = {1, 0, -1};
  t.initial_inventory = {0.0, 0.0};
  t.validate();
  return t;
}

// Random landfall time: a 3-cell approach track ([-100,-50), [-50,0),
// [0,inf)); landfall happens in the period whose cell is [-50, 0).
inline relief::Instance tiny_rand() {
  relief::Instance t = tiny_det();
  t.markov.kind = relief::ModelKind::RandomLandfall;
  t.markov.track_y.cells = {{-100.0, -50.0}, {-50.0, 0.0}, {0.0, relief::kInf}};
  t.markov.track_y.matrix = {{0.0, 0.6, 0.4}, {0.0, 0.0, 1.0}, {0.0, 0.0, 1.0}};
  t.markov.horizon = 3;
  t.horizon = 3;
  t.initial_state = {1, 0, 0};
  t.validate();
  return t;
}

// Single-scenario chain (every transition certain): the fully adaptive
// optimum, the rolling policy and the clairvoyant all coincide.
inline relief::Instance tiny_degenerate() {
  relief::Instance t = tiny_det();
  t.markov.intensity.matrix = {{1.0, 0.0}, {0.0, 1.0}};
  t.markov.track_x.matrix = {{1.0, 0.0}, {0.0, 1.0}};
  return t;
}

}  // namespace fixtures
