#pragma once

#include <chrono>
#include <cmath>
#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "relief/instance.hpp"
#include "relief/lp.hpp"
#include "relief/scenario.hpp"
#include "relief/stage.hpp"

namespace relief {

// Affine under-estimator of an expected cost-to-go function of the inventory.
struct Cut {
  std::vector<double> slope;
  double intercept = 0.0;

  double value_at(std::span<const double> x) const {
    double v = intercept;
    for (std::size_t k = 0; k < slope.size(); ++k) v += slope[k] * x[k];
    return v;
  }
};

// Cuts keyed by (stage t, Markov state at t), approximating the expected
// cost-to-go from stage t+1 as a function of the stage-t inventory.
using CutPool = std::map<std::pair<int, int>, std::vector<Cut>>;

struct TrainConfig {
  long max_iterations = 100000;
  double time_limit_seconds = 10800.0;
  double stability_epsilon = 1e-5;
  int stability_window = 500;
  double initial_lower_bound = 0.0;  // lower bound put on every theta
  std::uint64_t seed = 0;
  int scenario_count = 100;  // training scenarios for the two-stage models
  // Extra stop for the two-stage L-shaped method: terminate once the master's
  // theta matches the sampled recourse at the incumbent (exact SAA optimum).
  double exact_gap_epsilon = 1e-7;
};

struct TrainLogEntry {
  long iteration = 0;
  double lower_bound = 0.0;
  double seconds = 0.0;
};

// One stage problem: the LP, its variable handles, and what it models.
struct StageProblem {
  LinearProgram lp;
  StageVars sv;
  int theta = -1;
  StageForm form = StageForm::Prep;
  std::vector<double> demand;
  int t = 1;
};

namespace detail {
inline void append_cut_row(StageProblem& sp, const Cut& c) {
  const int row = sp.lp.add_row(RowSense::Ge, c.intercept);
  sp.lp.set_coeff(row, sp.theta, 1.0);
  for (std::size_t k = 0; k < c.slope.size(); ++k)
    sp.lp.set_coeff(row, sp.sv.x[k], -c.slope[k]);
}
inline void append_cut_rows(StageProblem& sp, const std::vector<Cut>& cuts) {
  for (const Cut& c : cuts) append_cut_row(sp, c);
}

// Solves a stage problem built *without* cut rows against a cut pool by lazy
// activation: add the most violated cut, re-solve, repeat. Returns the same
// optimum as a solve with all cuts present, but the LP stays small even when
// thousands of cuts have accumulated.
inline LpSolution solve_stage_lazy(StageProblem& sp, const std::vector<Cut>* cuts,
                                   std::span<const double> x_prev) {
  const std::size_t n_cuts = cuts && sp.theta >= 0 ? cuts->size() : 0;
  std::vector<bool> active(n_cuts, false);
  std::vector<double> xs(sp.sv.x.size());
  for (;;) {
    const LpSolution sol = sp.lp.solve(x_prev);
    if (sol.status != LpStatus::Optimal || n_cuts == 0) return sol;
    for (std::size_t i = 0; i < xs.size(); ++i) xs[i] = sol.x[sp.sv.x[i]];
    const double theta = sol.x[sp.theta];
    int worst = -1;
    double worst_gap = 1e-7 * (1.0 + std::abs(sol.objective));
    for (std::size_t k = 0; k < n_cuts; ++k) {
      if (active[k]) continue;
      const double gap = (*cuts)[k].value_at(xs) - theta;
      if (gap > worst_gap) {
        worst = static_cast<int>(k);
        worst_gap = gap;
      }
    }
    if (worst < 0) return sol;
    append_cut_row(sp, (*cuts)[worst]);
    active[worst] = true;
  }
}
}  // namespace detail

// Deterministic-landfall stage problem at period t for state xi. Demand
// enters only at t = T, where it is determined by (xi, landfall point m).
// x_{t-1} enters through link values 0..|I|-1 at solve time.
inline StageProblem build_stage_det(const Instance& inst, int t, const HurricaneState& xi,
                                    int m_index, const std::vector<Cut>* cuts,
                                    double theta_lb) {
  if (t < 1 || t > inst.horizon) throw std::out_of_range("build_stage_det: bad period");
  StageProblem sp;
  sp.t = t;
  sp.form = t == inst.horizon ? StageForm::Terminal : StageForm::Prep;
  sp.demand.assign(inst.n_dp(), 0.0);
  if (sp.form == StageForm::Terminal)
    sp.demand =
        demand_vector(inst, xi.alpha, landfall_points(inst, xi.lx).at(m_index));
  sp.sv = append_stage_block(sp.lp, inst, t, sp.form, PrevLinks{0}, sp.demand);
  if (t < inst.horizon) {
    sp.theta = sp.lp.add_variable(1.0, theta_lb);
    if (cuts) detail::append_cut_rows(sp, *cuts);
  }
  return sp;
}

// Random-landfall stage problem; absorbing states have no problem (value 0).
inline std::optional<StageProblem> build_stage_rand(const Instance& inst, int t,
                                                    const HurricaneState& xi, int m_index,
                                                    const std::vector<Cut>* cuts,
                                                    double theta_lb) {
  if (t < 1 || t > inst.horizon) throw std::out_of_range("build_stage_rand: bad period");
  if (classify(inst.markov, xi) == StateClass::Absorbing) return std::nullopt;
  StageProblem sp;
  sp.t = t;
  sp.form = StageForm::Transient;
  sp.demand.assign(inst.n_dp(), 0.0);
  if (at_landfall(inst.markov, xi))
    sp.demand =
        demand_vector(inst, xi.alpha, landfall_points(inst, xi.lx).at(m_index));
  sp.sv = append_stage_block(sp.lp, inst, t, sp.form, PrevLinks{0}, sp.demand);
  if (t < inst.horizon) {
    sp.theta = sp.lp.add_variable(1.0, theta_lb);
    if (cuts) detail::append_cut_rows(sp, *cuts);
  }
  return sp;
}

inline std::optional<StageProblem> build_stage(const Instance& inst, int t,
                                               const HurricaneState& xi, int m_index,
                                               const std::vector<Cut>* cuts,
                                               double theta_lb) {
  if (inst.random_kind()) return build_stage_rand(inst, t, xi, m_index, cuts, theta_lb);
  return build_stage_det(inst, t, xi, m_index, cuts, theta_lb);
}

// Trained offline policy: the instance plus the collected cut pool.
struct OfflinePolicy {
  Instance inst;
  TrainConfig cfg;
  CutPool pool;

  const std::vector<Cut>* cuts_at(int t, const HurricaneState& xi) const {
    const auto it = pool.find({t, inst.markov.state_index(xi)});
    return it == pool.end() ? nullptr : &it->second;
  }
};

struct StageDecision {
  std::vector<double> x;  // end-of-period inventory
  std::vector<double> f;  // transfer flows
  double immediate_cost = 0.0;
  double procurement = 0.0;  // total flow out of the MDC this period
};

// Applies the trained policy at (t, xi, x_prev); m_index selects the landfall
// point when demand fires this period. The reported cost excludes theta.
inline StageDecision act(const OfflinePolicy& policy, int t, const HurricaneState& xi,
                         int m_index, std::span<const double> x_prev) {
  const Instance& inst = policy.inst;
  StageDecision d;
  d.x.assign(inst.n_sp(), 0.0);
  d.f.assign(transfer_arcs(inst.n_sp()).size(), 0.0);
  auto sp = build_stage(inst, t, xi, m_index, nullptr, policy.cfg.initial_lower_bound);
  if (!sp) return d;  // absorbing: zero action, zero cost
  const LpSolution sol = detail::solve_stage_lazy(*sp, policy.cuts_at(t, xi), x_prev);
  if (sol.status != LpStatus::Optimal)
    throw std::runtime_error("policy stage LP not optimal at t=" + std::to_string(t));
  for (int i = 0; i < inst.n_sp(); ++i) d.x[i] = sol.x[sp->sv.x[i]];
  for (std::size_t a = 0; a < d.f.size(); ++a) d.f[a] = sol.x[sp->sv.f[a]];
  for (int i = 0; i < inst.n_sp(); ++i) d.procurement += d.f[i];
  d.immediate_cost = stage_cost(inst, t, sp->form, sp->sv, sol, sp->demand);
  return d;
}

namespace detail {

// Expected stage-t value and subgradient (w.r.t. x_{t-1}) over the successors
// of pred_state, with landfall/terminal states expanded over the M points.
struct QEval {
  double value = 0.0;
  std::vector<double> slope;
};

inline QEval expected_stage_q(const Instance& inst, int t, const HurricaneState& pred,
                              std::span<const double> x_prev, const CutPool& pool,
                              double theta_lb) {
  QEval q;
  q.slope.assign(inst.n_sp(), 0.0);
  for (int idx = 0; idx < inst.markov.joint_size(); ++idx) {
    const HurricaneState xi = inst.markov.state_from_index(idx);
    const double p = joint_transition_prob(inst.markov, pred, xi);
    if (p <= 0.0) continue;
    if (inst.random_kind() && classify(inst.markov, xi) == StateClass::Absorbing)
      continue;  // value 0, slope 0
    const bool fires = inst.random_kind() ? at_landfall(inst.markov, xi)
                                          : t == inst.horizon;
    const int M = fires ? inst.demand_params.m_points : 1;
    const auto it = pool.find({t, idx});
    const std::vector<Cut>* cuts = it == pool.end() ? nullptr : &it->second;
    for (int m = 0; m < M; ++m) {
      auto sp = build_stage(inst, t, xi, m, nullptr, theta_lb);
      const LpSolution sol = detail::solve_stage_lazy(*sp, cuts, x_prev);
      if (sol.status != LpStatus::Optimal)
        throw std::runtime_error("backward stage LP not optimal at t=" +
                                 std::to_string(t));
      const std::vector<double> g = sp->lp.cut_slope(sol);
      const double w = p / M;
      q.value += w * sol.objective;
      for (int i = 0; i < inst.n_sp(); ++i) q.slope[i] += w * g[i];
    }
  }
  return q;
}

}  // namespace detail

struct TrainResult {
  OfflinePolicy policy;
  std::vector<TrainLogEntry> log;
  double lower_bound = 0.0;
  double train_seconds = 0.0;
  std::string stop_reason;
};

// Nested Benders training: forward pass along one sampled path collecting
// trial inventories, backward pass adding one cut per visited predecessor.
inline TrainResult train(const Instance& inst, const TrainConfig& cfg) {
  const auto t0 = std::chrono::steady_clock::now();
  auto elapsed = [&] {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  };
  TrainResult res;
  res.policy.inst = inst;
  res.policy.cfg = cfg;
  CutPool& pool = res.policy.pool;
  const int T = inst.horizon;
  const int I = inst.n_sp();
  RngStream root(cfg.seed, {0x747261696eull});  // "train"
  std::vector<double> lb_history;

  for (long n = 0;; ++n) {
    RngStream rng = root.split(static_cast<std::uint64_t>(n));

    // Forward pass: sample a path, solve stages 1..T-1, record trial points.
    std::vector<HurricaneState> path{inst.initial_state};
    for (int t = 1; t < T; ++t) path.push_back(sample_step(inst.markov, path.back(), rng));
    std::vector<std::vector<double>> trial(T);  // trial[t-1] = x after period t
    std::vector<double> x_prev = inst.initial_inventory;
    double first_stage_value = 0.0;
    int last_solved = 0;  // deepest period with a trial point
    for (int t = 1; t < T; ++t) {
      const HurricaneState& xi = path[t - 1];
      int m = 0;
      if (inst.random_kind() && at_landfall(inst.markov, xi))
        m = sample_m_index(inst.demand_params.m_points, rng);
      const auto key = std::make_pair(t, inst.markov.state_index(xi));
      const auto it = pool.find(key);
      auto sp = build_stage(inst, t, xi, m, nullptr, cfg.initial_lower_bound);
      if (!sp) break;  // absorbed: nothing further accrues on this path
      const LpSolution sol = detail::solve_stage_lazy(
          *sp, it == pool.end() ? nullptr : &it->second, x_prev);
      if (sol.status != LpStatus::Optimal)
        throw std::runtime_error("forward stage LP not optimal at iteration " +
                                 std::to_string(n) + ", t=" + std::to_string(t));
      if (t == 1) first_stage_value = sol.objective;
      trial[t - 1].assign(I, 0.0);
      for (int i = 0; i < I; ++i) trial[t - 1][i] = sol.x[sp->sv.x[i]];
      x_prev = trial[t - 1];
      last_solved = t;
    }

    res.lower_bound = first_stage_value;
    lb_history.push_back(first_stage_value);
    res.log.push_back({n, first_stage_value, elapsed()});

    // Termination checks (after the forward pass, before placing new cuts).
    if (n + 1 >= cfg.max_iterations) {
      res.stop_reason = "max_iterations";
      break;
    }
    if (elapsed() > cfg.time_limit_seconds) {
      res.stop_reason = "time_limit";
      break;
    }
    if (n >= cfg.stability_window) {
      const double zn = lb_history[n];
      const double zo = lb_history[n - cfg.stability_window];
      if ((zn - zo) / std::max(std::abs(zn), 1e-12) < cfg.stability_epsilon) {
        res.stop_reason = "stability";
        break;
      }
    }

    // Backward pass: one cut per visited predecessor state, from the deepest
    // stage with a trial point down to stage 2.
    for (int t = last_solved + 1; t >= 2; --t) {
      const HurricaneState& pred = path[t - 2];
      if (inst.random_kind() && classify(inst.markov, pred) == StateClass::Absorbing)
        continue;
      const auto q = detail::expected_stage_q(inst, t, pred, trial[t - 2], pool,
                                              cfg.initial_lower_bound);
      Cut cut;
      cut.slope = q.slope;
      cut.intercept = q.value;
      for (int i = 0; i < I; ++i) cut.intercept -= q.slope[i] * trial[t - 2][i];
      pool[{t - 1, inst.markov.state_index(pred)}].push_back(std::move(cut));
    }
  }
  res.train_seconds = elapsed();
  return res;
}

// Simulates the trained policy on one scenario, accruing immediate costs.
struct SimulationResult {
  double cost = 0.0;
  std::vector<double> procurement;  // per period
};

inline SimulationResult simulate(const OfflinePolicy& policy, const Scenario& scen) {
  const Instance& inst = policy.inst;
  SimulationResult r;
  r.procurement.assign(inst.horizon, 0.0);
  std::vector<double> x_prev = inst.initial_inventory;
  for (int t = 1; t <= inst.horizon; ++t) {
    const HurricaneState& xi = scen.path[t - 1];
    if (inst.random_kind() && classify(inst.markov, xi) == StateClass::Absorbing) break;
    const int m = t == scen.landfall_period ? scen.m_index : 0;
    const StageDecision d = act(policy, t, xi, m, x_prev);
    r.cost += d.immediate_cost;
    r.procurement[t - 1] = d.procurement;
    x_prev = d.x;
  }
  return r;
}

}  // namespace relief
