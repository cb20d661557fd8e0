#pragma once

#include <array>
#include <cmath>
#include <cstdint>
#include <stdexcept>
#include <vector>

#include "relief/markov.hpp"
#include "relief/rng.hpp"

namespace relief {

using Point = std::array<double, 2>;

inline double dist(const Point& a, const Point& b) {
  return std::hypot(a[0] - b[0], a[1] - b[1]);
}

// Logistics network: one uncapacitated distribution center, capacitated
// staging points (SPs) and demand points (DPs).
struct Network {
  Point mdc{};
  std::vector<Point> sp_xy;
  std::vector<double> sp_capacity;
  std::vector<Point> dp_xy;

  int n_sp() const { return static_cast<int>(sp_xy.size()); }
  int n_dp() const { return static_cast<int>(dp_xy.size()); }

  void validate() const {
    if (sp_xy.empty() || dp_xy.empty())
      throw std::invalid_argument("network: need at least one SP and one DP");
    if (sp_capacity.size() != sp_xy.size())
      throw std::invalid_argument("network: capacity array does not match SP count");
    for (double u : sp_capacity)
      if (!(u >= 0.0) || !std::isfinite(u))
        throw std::invalid_argument("network: capacities must be nonnegative and finite");
  }
};

// Unit cost model. Per-period transport/procurement costs scale by the
// temporal factor (1 + nu (t-1)); holding is a flat multiple of the base.
struct CostModel {
  double omega = 0.0038;       // transport cost per item-distance
  double base = 5.0;           // base cost beta
  double nu = 0.0;             // temporal scaling per period
  double shortage_penalty = 400.0;  // p, per undelivered item
  double salvage_value = -0.25;     // q, per leftover item (credit)
  double holding_rate = 0.2;        // c^h = holding_rate * base, per item-period

  double time_factor(int t) const { return 1.0 + nu * (t - 1); }
  double holding_cost() const { return holding_rate * base; }
  double procurement_surcharge(int t) const { return base * time_factor(t); }

  void validate() const {
    if (!(shortage_penalty > 0.0)) throw std::invalid_argument("costs: p must be > 0");
    if (!(salvage_value < 0.0)) throw std::invalid_argument("costs: q must be < 0");
    if (nu < 0.0) throw std::invalid_argument("costs: nu must be >= 0");
  }
};

struct DemandParams {
  double d_bar = 400.0;     // maximum demand per DP
  double delta_bar = 300.0; // demand radius
  int m_points = 10;        // landfall-point discretization per x cell

  void validate() const {
    if (!(d_bar > 0.0) || !(delta_bar > 0.0) || m_points < 1)
      throw std::invalid_argument("demand: d_bar, delta_bar must be > 0 and M >= 1");
  }
};

struct Instance {
  Network network;
  CostModel costs;
  DemandParams demand_params;
  MarkovModel markov;
  HurricaneState initial_state;
  std::vector<double> initial_inventory;
  int horizon = 0;  // T (deterministic landfall) or T_max (random landfall)

  bool random_kind() const { return markov.random_kind(); }
  int n_sp() const { return network.n_sp(); }
  int n_dp() const { return network.n_dp(); }

  void validate() {
    network.validate();
    costs.validate();
    demand_params.validate();
    markov.validate();
    markov.check_state(initial_state);
    if (initial_inventory.size() != network.sp_xy.size())
      throw std::invalid_argument("initial inventory dimension does not match SP count");
    if (horizon < 2) throw std::invalid_argument("horizon must be >= 2");
    if (horizon != markov.horizon)
      throw std::invalid_argument("horizon disagrees with markov horizon");
  }
};

// Directed transfer arc; from == -1 denotes the MDC.
struct Arc {
  int from = -1;
  int to = 0;
};

// MDC->SP arcs first (index i for SP i), then SP->SP arcs for distinct pairs.
inline std::vector<Arc> transfer_arcs(int n_sp) {
  std::vector<Arc> arcs;
  for (int i = 0; i < n_sp; ++i) arcs.push_back({-1, i});
  for (int i = 0; i < n_sp; ++i)
    for (int k = 0; k < n_sp; ++k)
      if (k != i) arcs.push_back({i, k});
  return arcs;
}

// Unit cost of moving one item from `from` (-1 for the MDC, else an SP index)
// to SP `to` in period t. The procurement surcharge h_t is separate.
inline double transfer_cost(const Instance& inst, int from, int to, int t) {
  if (t < 1) throw std::invalid_argument("transfer_cost: period must be >= 1");
  if (to < 0 || to >= inst.n_sp())
    throw std::invalid_argument("transfer_cost: destination must be an SP");
  const Point& a = from < 0 ? inst.network.mdc : inst.network.sp_xy.at(from);
  return inst.costs.omega * inst.costs.time_factor(t) * dist(a, inst.network.sp_xy[to]);
}

inline double delivery_cost(const Instance& inst, int sp, int dp, int t) {
  if (t < 1) throw std::invalid_argument("delivery_cost: period must be >= 1");
  return inst.costs.omega * inst.costs.time_factor(t) *
         dist(inst.network.sp_xy.at(sp), inst.network.dp_xy.at(dp));
}

// Equally likely landfall x-coordinates for one track cell: M midpoints of an
// even subdivision of the cell (spacing = width / M).
inline std::vector<double> landfall_points(const Instance& inst, int lx_cell) {
  const Interval cell = inst.markov.track_x.cells.at(lx_cell);
  const int m = inst.demand_params.m_points;
  const double spacing = (cell.hi - cell.lo) / m;
  std::vector<double> pts(m);
  for (int k = 0; k < m; ++k) pts[k] = cell.lo + spacing * (0.5 + k);
  return pts;
}

// Demand at DP j for a hurricane of intensity `alpha` making landfall at
// (landfall_x, 0): linear decay in distance, quadratic growth in intensity.
inline double demand_at(const Instance& inst, int alpha, double landfall_x, int dp) {
  const double delta = dist({landfall_x, 0.0}, inst.network.dp_xy.at(dp));
  if (delta > inst.demand_params.delta_bar) return 0.0;
  const double top = inst.markov.intensity.size() - 1;
  return inst.demand_params.d_bar * (1.0 - delta / inst.demand_params.delta_bar) *
         (alpha * alpha) / (top * top);
}

inline std::vector<double> demand_vector(const Instance& inst, int alpha,
                                         double landfall_x) {
  std::vector<double> d(inst.n_dp());
  for (int j = 0; j < inst.n_dp(); ++j) d[j] = demand_at(inst, alpha, landfall_x, j);
  return d;
}

// ---------------------------------------------------------------------------
// Synthetic instance generator.

struct GenParams {
  int sp_count = 3;
  int dp_count = 10;
  double nu = 0.6;
  std::uint64_t seed = 0;
  ModelKind kind = ModelKind::DeterministicLandfall;
  int alpha1 = 1;  // initial intensity category
  DemandParams demand;
};

inline Instance generate(const GenParams& p) {
  if (p.sp_count < 1 || p.dp_count < 1)
    throw std::invalid_argument("generate: SP and DP counts must be positive");
  Instance inst;
  RngStream rng(p.seed, {0x67656eull});  // "gen"

  inst.network.mdc = {350.0, 450.0};
  for (int i = 0; i < p.sp_count; ++i)
    inst.network.sp_xy.push_back({rng.uniform(0.0, 700.0), rng.uniform(0.0, 100.0)});
  const double cap_scale = p.demand.d_bar * p.dp_count / p.sp_count;
  for (int i = 0; i < p.sp_count; ++i)
    inst.network.sp_capacity.push_back(rng.uniform(0.05 * cap_scale, 0.5 * cap_scale));
  for (int j = 0; j < p.dp_count; ++j)
    inst.network.dp_xy.push_back({rng.uniform(0.0, 700.0), rng.uniform(100.0, 200.0)});

  inst.costs = CostModel{};
  inst.costs.nu = p.nu;
  inst.costs.shortage_penalty = 80.0 * inst.costs.base;
  inst.costs.salvage_value = -0.05 * inst.costs.base;

  inst.demand_params = p.demand;

  inst.markov.kind = p.kind;
  inst.markov.intensity = builtin_intensity_chain();
  inst.markov.track_x = builtin_track_x_chain();
  const AttributeChain approach = builtin_track_y_chain();
  if (p.kind == ModelKind::RandomLandfall) {
    inst.markov.track_y = approach;
    inst.markov.horizon = max_steps_to_absorption(approach, 0);
  } else {
    // T = floor of the expected approach time from the first y cell.
    const int landed = approach.size() - 1;
    inst.markov.horizon = static_cast<int>(
        std::floor(expected_absorption_steps(approach, 0, {landed})));
  }
  inst.horizon = inst.markov.horizon;

  inst.initial_state = {p.alpha1, 1, p.kind == ModelKind::RandomLandfall ? 0 : -1};
  inst.initial_inventory.assign(p.sp_count, 0.0);
  inst.validate();
  return inst;
}

}  // namespace relief
