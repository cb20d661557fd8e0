#pragma once

#include <cmath>
#include <stdexcept>
#include <vector>

#include "relief/instance.hpp"
#include "relief/lp.hpp"
#include "relief/scenario.hpp"
#include "relief/stage.hpp"

namespace relief {

// Perfect-information solution for one realized scenario.
struct CvResult {
  double cost = 0.0;
  std::vector<std::vector<double>> x;  // [t-1][i] inventories
  std::vector<std::vector<double>> f;  // [t-1][arc] transfer flows
  std::vector<double> y;               // deliveries at landfall, i * |J| + j
  std::vector<double> procurement;     // per period: total flow out of the MDC
};

namespace detail {
inline CvResult extract_cv(const Instance& inst, const LpSolution& sol,
                           const std::vector<StageVars>& blocks) {
  CvResult r;
  r.cost = sol.objective;
  const int I = inst.n_sp();
  for (const StageVars& sv : blocks) {
    std::vector<double> xs, fs;
    for (int v : sv.x) xs.push_back(sol.x[v]);
    for (int v : sv.f) fs.push_back(sol.x[v]);
    double proc = 0.0;
    for (int i = 0; i < I; ++i) proc += fs[i];  // MDC arcs come first
    r.x.push_back(std::move(xs));
    r.f.push_back(std::move(fs));
    r.procurement.push_back(proc);
  }
  return r;
}
}  // namespace detail

// Multiperiod flow LP with demand revealed: preparation periods 1..T-1, then
// the landfall period with deliveries, shortage and salvage.
inline CvResult solve_cv_det(const Instance& inst, const Scenario& scen) {
  if (inst.random_kind())
    throw std::invalid_argument("solve_cv_det: instance has random landfall time");
  LinearProgram lp;
  std::vector<StageVars> blocks;
  for (int t = 1; t <= inst.horizon; ++t) {
    const PrevInventory prev =
        t == 1 ? PrevInventory(PrevLinks{0}) : PrevInventory(PrevVars{blocks.back().x});
    const StageForm form = t == inst.horizon ? StageForm::Terminal : StageForm::Prep;
    blocks.push_back(append_stage_block(lp, inst, t, form, prev, scen.demands));
  }
  const LpSolution sol = lp.solve(inst.initial_inventory);
  if (sol.status != LpStatus::Optimal)
    throw std::runtime_error("solve_cv_det: LP not optimal");
  CvResult r = detail::extract_cv(inst, sol, blocks);
  for (int v : blocks.back().y) r.y.push_back(sol.x[v]);
  return r;
}

// Full-horizon LP for the random-landfall kind: every period carries the full
// variable block; demand is nonzero only at the scenario's landfall period.
inline CvResult solve_cv_rand(const Instance& inst, const Scenario& scen) {
  if (!inst.random_kind())
    throw std::invalid_argument("solve_cv_rand: instance has deterministic landfall");
  bool idle = !scen.has_landfall();
  for (double v : inst.initial_inventory)
    if (v != 0.0) idle = false;
  if (idle && inst.costs.base > -inst.costs.salvage_value) {
    // No demand will ever fire and nothing is in stock: doing nothing is
    // optimal because one unit procured costs at least the surcharge, which
    // exceeds the salvage credit it could ever return.
    CvResult r;
    r.x.assign(inst.horizon, std::vector<double>(inst.n_sp(), 0.0));
    r.f.assign(inst.horizon,
               std::vector<double>(transfer_arcs(inst.n_sp()).size(), 0.0));
    r.procurement.assign(inst.horizon, 0.0);
    return r;
  }
  LinearProgram lp;
  std::vector<StageVars> blocks;
  const std::vector<double> zero(inst.n_dp(), 0.0);
  for (int t = 1; t <= inst.horizon; ++t) {
    const PrevInventory prev =
        t == 1 ? PrevInventory(PrevLinks{0}) : PrevInventory(PrevVars{blocks.back().x});
    const auto& d = t == scen.landfall_period ? scen.demands : zero;
    blocks.push_back(append_stage_block(lp, inst, t, StageForm::Transient, prev, d));
  }
  const LpSolution sol = lp.solve(inst.initial_inventory);
  if (sol.status != LpStatus::Optimal)
    throw std::runtime_error("solve_cv_rand: LP not optimal");
  CvResult r = detail::extract_cv(inst, sol, blocks);
  if (scen.has_landfall())
    for (int v : blocks[scen.landfall_period - 1].y) r.y.push_back(sol.x[v]);
  return r;
}

inline CvResult solve_cv(const Instance& inst, const Scenario& scen) {
  return inst.random_kind() ? solve_cv_rand(inst, scen) : solve_cv_det(inst, scen);
}

// ---------------------------------------------------------------------------
// Extensive-form scenario-tree LP: the brute-force optimum of the fully
// adaptive problem on small instances, used as a testing oracle.

namespace detail {

struct TreeNode {
  HurricaneState s;
  int t = 1;
  int m = -1;  // landfall-point index where demand fires, else -1
  double prob = 1.0;
  int parent = -1;
  bool leaf = true;
};

// Appends the node(s) for (t, s) reached with probability `prob`; landfall
// states (or the deterministic terminal period) fan out into M point nodes.
inline void expand_state(const Instance& inst, std::vector<TreeNode>& nodes, int t,
                         const HurricaneState& s, double prob, int parent) {
  const bool fires = inst.random_kind() ? at_landfall(inst.markov, s)
                                        : (t == inst.horizon && s.alpha > 0);
  const int M = fires ? inst.demand_params.m_points : 1;
  for (int m = 0; m < M; ++m)
    nodes.push_back({s, t, fires ? m : -1, prob / M, parent, true});
}

inline std::vector<TreeNode> build_tree(const Instance& inst, int t_root,
                                        const HurricaneState& root,
                                        std::size_t max_leaves) {
  std::vector<TreeNode> nodes;
  expand_state(inst, nodes, t_root, root, 1.0, -1);
  std::size_t leaves = nodes.size();
  for (std::size_t n = 0; n < nodes.size(); ++n) {
    if (nodes[n].t >= inst.horizon) continue;
    const HurricaneState cur = nodes[n].s;
    const int tn = nodes[n].t;
    const double pn = nodes[n].prob;
    for (int idx = 0; idx < inst.markov.joint_size(); ++idx) {
      const HurricaneState nxt = inst.markov.state_from_index(idx);
      const double p = joint_transition_prob(inst.markov, cur, nxt);
      if (p <= 0.0) continue;
      if (inst.random_kind() && classify(inst.markov, nxt) == StateClass::Absorbing)
        continue;  // zero cost and zero cost-to-go: prune
      const std::size_t before = nodes.size();
      expand_state(inst, nodes, tn + 1, nxt, pn * p, static_cast<int>(n));
      if (nodes[n].leaf) {
        nodes[n].leaf = false;
        --leaves;
      }
      leaves += nodes.size() - before;
      if (leaves > max_leaves)
        throw std::runtime_error("extensive form: scenario tree exceeds the leaf guard");
    }
  }
  return nodes;
}

}  // namespace detail

// Optimal value of the cost-to-go subtree rooted at (t_root, state) with
// incoming inventory x_init: immediate cost at t_root plus expected future
// cost under full adaptability.
inline double subtree_value(const Instance& inst, int t_root, const HurricaneState& root,
                            std::span<const double> x_init,
                            std::size_t max_leaves = 100000) {
  if (inst.random_kind() && classify(inst.markov, root) == StateClass::Absorbing)
    return 0.0;
  const auto nodes = detail::build_tree(inst, t_root, root, max_leaves);

  LinearProgram lp;
  std::vector<StageVars> blocks(nodes.size());
  for (std::size_t n = 0; n < nodes.size(); ++n) {
    const detail::TreeNode& nd = nodes[n];
    StageForm form = StageForm::Transient;
    if (!inst.random_kind())
      form = nd.t == inst.horizon ? StageForm::Terminal : StageForm::Prep;
    std::vector<double> demand(inst.n_dp(), 0.0);
    if (nd.m >= 0)
      demand = demand_vector(inst, nd.s.alpha,
                             landfall_points(inst, nd.s.lx).at(nd.m));
    const PrevInventory prev = nd.parent < 0
                                   ? PrevInventory(PrevLinks{0})
                                   : PrevInventory(PrevVars{blocks[nd.parent].x});
    blocks[n] = append_stage_block(lp, inst, nd.t, form, prev, demand, nd.prob);
  }
  const LpSolution sol = lp.solve(x_init);
  if (sol.status != LpStatus::Optimal)
    throw std::runtime_error("extensive form: LP not optimal");
  return sol.objective;
}

// Exact optimum of the fully adaptive multistage problem.
inline double extensive_form_value(const Instance& inst, std::size_t max_leaves = 100000) {
  return subtree_value(inst, 1, inst.initial_state, inst.initial_inventory, max_leaves);
}

// Exact expected cost-to-go E[Q_{t+1}(x, xi_{t+1}) | xi_t = s], by solving one
// extensive subtree per reachable successor. Testing oracle for cut validity.
inline double oracle_expected_cost_to_go(const Instance& inst, int t,
                                         const HurricaneState& s,
                                         std::span<const double> x,
                                         std::size_t max_leaves = 100000) {
  if (t >= inst.horizon) return 0.0;
  double value = 0.0;
  for (int idx = 0; idx < inst.markov.joint_size(); ++idx) {
    const HurricaneState nxt = inst.markov.state_from_index(idx);
    const double p = joint_transition_prob(inst.markov, s, nxt);
    if (p <= 0.0) continue;
    value += p * subtree_value(inst, t + 1, nxt, x, max_leaves);
  }
  return value;
}

}  // namespace relief
