#pragma once

#include <vector>

#include "relief/instance.hpp"
#include "relief/markov.hpp"
#include "relief/rng.hpp"

namespace relief {

// One realized trajectory of the hurricane plus the landfall-point draw.
// Demands are nonzero only at the landfall period (if any).
struct Scenario {
  std::vector<HurricaneState> path;
  int landfall_period = -1;    // 1-based period; -1 if dissipated before landfall
  int absorption_period = -1;  // random kind: first absorbing period; -1 for det
  int m_index = 0;             // which of the M landfall points was realized
  double landfall_x = 0.0;
  std::vector<double> demands;  // per DP, at the landfall period

  bool has_landfall() const { return landfall_period >= 1; }

  // First period after which no further cost can accrue: the landfall period
  // for the deterministic kind, absorption for the random kind.
  int terminal_period(const Instance& inst) const {
    if (!inst.random_kind()) return inst.horizon;
    return absorption_period >= 1 ? absorption_period : inst.horizon;
  }
};

inline int sample_m_index(int m_points, RngStream& rng) {
  const int m = static_cast<int>(rng.next_double() * m_points);
  return m < m_points ? m : m_points - 1;
}

// Fills in landfall period/point and demands for an already-sampled path.
inline Scenario make_scenario(const Instance& inst, std::vector<HurricaneState> path,
                              int m_index) {
  Scenario sc;
  sc.path = std::move(path);
  sc.m_index = m_index;
  const MarkovModel& m = inst.markov;
  if (!inst.random_kind()) {
    sc.landfall_period = inst.horizon;
  } else {
    for (int t = 1; t <= inst.horizon; ++t) {
      const HurricaneState& s = sc.path[t - 1];
      if (sc.landfall_period < 0 && at_landfall(m, s)) sc.landfall_period = t;
      if (sc.absorption_period < 0 && classify(m, s) == StateClass::Absorbing)
        sc.absorption_period = t;
    }
  }
  sc.demands.assign(inst.n_dp(), 0.0);
  if (sc.landfall_period >= 1) {
    const HurricaneState& s = sc.path[sc.landfall_period - 1];
    sc.landfall_x = landfall_points(inst, s.lx).at(m_index);
    sc.demands = demand_vector(inst, s.alpha, sc.landfall_x);
  }
  return sc;
}

// Samples a trajectory and a landfall point from the given stream. The point
// index is always drawn (after the path) so stream usage does not depend on
// whether landfall occurs.
inline Scenario realize(const Instance& inst, RngStream rng) {
  std::vector<HurricaneState> path{inst.initial_state};
  for (int t = 1; t < inst.horizon; ++t)
    path.push_back(sample_step(inst.markov, path.back(), rng));
  const int m = sample_m_index(inst.demand_params.m_points, rng);
  return make_scenario(inst, std::move(path), m);
}

}  // namespace relief
