#pragma once

#include <chrono>
#include <cmath>
#include <map>
#include <span>
#include <stdexcept>
#include <string>
#include <tuple>
#include <vector>

#include "relief/instance.hpp"
#include "relief/lp.hpp"
#include "relief/scenario.hpp"
#include "relief/sddp.hpp"
#include "relief/stage.hpp"

namespace relief {

// Committed prepositioning plan: inventories and flows per period, starting
// at first_period (1 for the static models, t_roll when used inside a roll).
struct StaticPlan {
  ModelKind kind = ModelKind::DeterministicLandfall;
  int first_period = 1;
  std::vector<std::vector<double>> x;  // [t - first_period][i]
  std::vector<std::vector<double>> f;  // [t - first_period][arc]
};

struct TwoStageResult {
  StaticPlan plan;
  double value = 0.0;  // master objective = lower bound at termination
  std::vector<TrainLogEntry> log;
  double train_seconds = 0.0;
  std::string stop_reason;
};

namespace detail {

// Per-period cost of a committed (x_t, f_t): rerouting + procurement
// surcharge + holding, matching the preparation-period objective.
inline double plan_period_cost(const Instance& inst, int t, std::span<const double> x,
                               std::span<const double> f) {
  const auto arcs = transfer_arcs(inst.n_sp());
  double cost = 0.0;
  for (std::size_t a = 0; a < arcs.size(); ++a) {
    double c = transfer_cost(inst, arcs[a].from, arcs[a].to, t);
    if (arcs[a].from < 0) c += inst.costs.procurement_surcharge(t);
    cost += c * f[a];
  }
  for (int i = 0; i < inst.n_sp(); ++i) cost += inst.costs.holding_cost() * x[i];
  return cost;
}

// Weighted terminal outcomes (xi_T, landfall point m) for the deterministic
// kind: either every positive-probability pair under the (T-1)-step marginal,
// or the empirical distribution of K sampled trajectories.
struct DetOutcome {
  HurricaneState xi;
  int m = 0;
  double prob = 0.0;
};

inline std::vector<DetOutcome> det_outcomes_exact(const Instance& inst, int from_period,
                                                  const HurricaneState& xi_now) {
  const int steps = inst.horizon - from_period;
  const Matrix pa = n_step_matrix(inst.markov.intensity, steps);
  const Matrix px = n_step_matrix(inst.markov.track_x, steps);
  const int M = inst.demand_params.m_points;
  std::vector<DetOutcome> out;
  for (int a = 0; a < inst.markov.intensity.size(); ++a)
    for (int l = 0; l < inst.markov.track_x.size(); ++l) {
      const double p = pa[xi_now.alpha][a] * px[xi_now.lx][l];
      if (p <= 0.0) continue;
      for (int m = 0; m < M; ++m) out.push_back({{a, l, -1}, m, p / M});
    }
  return out;
}

inline std::vector<DetOutcome> det_outcomes_sampled(const Instance& inst, int from_period,
                                                    const HurricaneState& xi_now,
                                                    int count, RngStream rng) {
  std::map<std::pair<int, int>, double> weight;  // (state index, m) -> prob
  for (int k = 0; k < count; ++k) {
    HurricaneState s = xi_now;
    for (int t = from_period; t < inst.horizon; ++t) s = sample_step(inst.markov, s, rng);
    const int m = sample_m_index(inst.demand_params.m_points, rng);
    weight[{inst.markov.state_index(s), m}] += 1.0 / count;
  }
  std::vector<DetOutcome> out;
  for (const auto& [key, p] : weight)
    out.push_back({inst.markov.state_from_index(key.first), key.second, p});
  return out;
}

// Shared L-shaped driver: repeatedly solves the master, asks `recourse` for
// the expected second-stage value and a valid cut at the incumbent, and stops
// on exact convergence (theta supports the sampled recourse) or the standard
// iteration/time/stability criteria.
struct LShapedCut {
  double value = 0.0;              // expected recourse at the incumbent
  std::vector<double> slope;       // d(recourse)/d(master variable), dense
  double intercept = 0.0;          // value - slope . incumbent
};

template <typename RecourseFn>
inline void run_l_shaped(LinearProgram& master, int theta_var,
                         std::span<const double> link_values, const TrainConfig& cfg,
                         RecourseFn&& recourse, LpSolution& final_sol,
                         std::vector<TrainLogEntry>& log, std::string& stop_reason) {
  const auto t0 = std::chrono::steady_clock::now();
  auto elapsed = [&] {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  };
  std::vector<double> lb_history;
  for (long n = 0;; ++n) {
    LpSolution sol = master.solve(link_values);
    if (sol.status != LpStatus::Optimal)
      throw std::runtime_error("two-stage master LP not optimal at iteration " +
                               std::to_string(n));
    lb_history.push_back(sol.objective);
    log.push_back({n, sol.objective, elapsed()});
    const LShapedCut cut = recourse(sol);
    const double theta_hat = sol.x[theta_var];
    const double scale = 1.0 + std::abs(sol.objective);
    final_sol = std::move(sol);
    if (theta_hat >= cut.value - cfg.exact_gap_epsilon * scale) {
      stop_reason = "converged";
      return;
    }
    if (n + 1 >= cfg.max_iterations) {
      stop_reason = "max_iterations";
      return;
    }
    if (elapsed() > cfg.time_limit_seconds) {
      stop_reason = "time_limit";
      return;
    }
    if (n >= cfg.stability_window) {
      const double zn = lb_history[n];
      const double zo = lb_history[n - cfg.stability_window];
      if ((zn - zo) / std::max(std::abs(zn), 1e-12) < cfg.stability_epsilon) {
        stop_reason = "stability";
        return;
      }
    }
    const int row = master.add_row(RowSense::Ge, cut.intercept);
    master.set_coeff(row, theta_var, 1.0);
    for (std::size_t v = 0; v < cut.slope.size(); ++v)
      if (cut.slope[v] != 0.0) master.set_coeff(row, static_cast<int>(v), -cut.slope[v]);
  }
}

}  // namespace detail

// ---------------------------------------------------------------------------
// Deterministic landfall time: master over preparation periods, recourse at T.

// All-in-one LP with every terminal outcome expanded (testing oracle for the
// L-shaped method on small instances).
inline double deterministic_equivalent_value(const Instance& inst) {
  if (inst.random_kind())
    throw std::invalid_argument("deterministic equivalent: needs deterministic kind");
  LinearProgram lp;
  std::vector<StageVars> blocks;
  for (int t = 1; t < inst.horizon; ++t) {
    const PrevInventory prev =
        t == 1 ? PrevInventory(PrevLinks{0}) : PrevInventory(PrevVars{blocks.back().x});
    blocks.push_back(append_stage_block(lp, inst, t, StageForm::Prep, prev, {}));
  }
  for (const auto& o : detail::det_outcomes_exact(inst, 1, inst.initial_state)) {
    const auto demand =
        demand_vector(inst, o.xi.alpha, landfall_points(inst, o.xi.lx).at(o.m));
    append_stage_block(lp, inst, inst.horizon, StageForm::Terminal,
                       PrevVars{blocks.back().x}, demand, o.prob);
  }
  const LpSolution sol = lp.solve(inst.initial_inventory);
  if (sol.status != LpStatus::Optimal)
    throw std::runtime_error("deterministic equivalent: LP not optimal");
  return sol.objective;
}

namespace detail {

// Core of Static2SSP-D, parameterized on the starting period/state/inventory
// so the rolling-horizon policy can reuse it on residual horizons.
inline TwoStageResult train_static_det_from(const Instance& inst, const TrainConfig& cfg,
                                            int from_period, const HurricaneState& xi_now,
                                            std::span<const double> x_now,
                                            const std::vector<DetOutcome>& outcomes) {
  const auto t0 = std::chrono::steady_clock::now();
  const int T = inst.horizon;
  if (from_period >= T)
    throw std::invalid_argument("two-stage master needs at least one preparation period");

  LinearProgram master;
  std::vector<StageVars> blocks;
  for (int t = from_period; t < T; ++t) {
    const PrevInventory prev = t == from_period
                                   ? PrevInventory(PrevLinks{0})
                                   : PrevInventory(PrevVars{blocks.back().x});
    blocks.push_back(append_stage_block(master, inst, t, StageForm::Prep, prev, {}));
  }
  const int theta = master.add_variable(1.0, cfg.initial_lower_bound);

  // Terminal subproblems keyed by outcome; only the demand differs.
  std::vector<std::vector<double>> demands;
  demands.reserve(outcomes.size());
  for (const auto& o : outcomes)
    demands.push_back(
        demand_vector(inst, o.xi.alpha, landfall_points(inst, o.xi.lx).at(o.m)));

  const std::vector<int>& x_last = blocks.back().x;
  auto recourse = [&](const LpSolution& sol) {
    std::vector<double> x_hat(inst.n_sp());
    for (int i = 0; i < inst.n_sp(); ++i) x_hat[i] = sol.x[x_last[i]];
    detail::LShapedCut cut;
    cut.slope.assign(master.n_vars(), 0.0);
    for (std::size_t o = 0; o < outcomes.size(); ++o) {
      LinearProgram sub;
      const StageVars sv =
          append_stage_block(sub, inst, T, StageForm::Terminal, PrevLinks{0}, demands[o]);
      (void)sv;
      const LpSolution ssol = sub.solve(x_hat);
      if (ssol.status != LpStatus::Optimal)
        throw std::runtime_error("terminal subproblem not optimal");
      const std::vector<double> g = sub.cut_slope(ssol);
      cut.value += outcomes[o].prob * ssol.objective;
      for (int i = 0; i < inst.n_sp(); ++i)
        cut.slope[x_last[i]] += outcomes[o].prob * g[i];
    }
    cut.intercept = cut.value;
    for (int i = 0; i < inst.n_sp(); ++i) cut.intercept -= cut.slope[x_last[i]] * x_hat[i];
    return cut;
  };

  TwoStageResult res;
  LpSolution sol;
  run_l_shaped(master, theta, x_now, cfg, recourse, sol, res.log, res.stop_reason);
  res.value = sol.objective;
  res.plan.kind = ModelKind::DeterministicLandfall;
  res.plan.first_period = from_period;
  for (const StageVars& sv : blocks) {
    std::vector<double> xs, fs;
    for (int v : sv.x) xs.push_back(sol.x[v]);
    for (int v : sv.f) fs.push_back(sol.x[v]);
    res.plan.x.push_back(std::move(xs));
    res.plan.f.push_back(std::move(fs));
  }
  res.train_seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  return res;
}

}  // namespace detail

inline TwoStageResult train_static_det(const Instance& inst, const TrainConfig& cfg,
                                       bool exact_outcomes = false) {
  if (inst.random_kind())
    throw std::invalid_argument("train_static_det: instance has random landfall time");
  RngStream rng(cfg.seed, {0x32737370ull});  // "2ssp"
  const auto outcomes =
      exact_outcomes
          ? detail::det_outcomes_exact(inst, 1, inst.initial_state)
          : detail::det_outcomes_sampled(inst, 1, inst.initial_state,
                                         cfg.scenario_count, rng);
  return detail::train_static_det_from(inst, cfg, 1, inst.initial_state,
                                       inst.initial_inventory, outcomes);
}

// Realized cost of a committed deterministic-kind plan on one scenario:
// preparation costs plus the terminal recourse at the realized demand.
// Fills `procurement` (if given) with per-period flow out of the MDC.
inline double evaluate_static_det(const StaticPlan& plan, const Instance& inst,
                                  const Scenario& scen,
                                  std::vector<double>* procurement = nullptr) {
  const int T = inst.horizon;
  const int I = inst.n_sp();
  if (procurement) procurement->assign(T, 0.0);
  double cost = 0.0;
  for (int t = 1; t < T; ++t) {
    cost += detail::plan_period_cost(inst, t, plan.x[t - 1], plan.f[t - 1]);
    if (procurement)
      for (int i = 0; i < I; ++i) (*procurement)[t - 1] += plan.f[t - 1][i];
  }
  LinearProgram sub;
  const StageVars sv =
      append_stage_block(sub, inst, T, StageForm::Terminal, PrevLinks{0}, scen.demands);
  const LpSolution sol = sub.solve(plan.x[T - 2]);
  if (sol.status != LpStatus::Optimal)
    throw std::runtime_error("evaluate_static_det: terminal LP not optimal");
  cost += sol.objective;
  if (procurement)
    for (int i = 0; i < I; ++i) (*procurement)[T - 1] += sol.x[sv.f[i]];
  return cost;
}

// ---------------------------------------------------------------------------
// Random landfall time: first stage commits (x, f) through T_max; the second
// stage delivers/salvages per period and reimburses first-stage costs after
// the trajectory's landfall (or absorption).

namespace detail {

// First-stage problem of Static2SSP-R / RH-2SSP-R. There are no balance
// equalities: x_t may drop below the carried inventory, and the slack
// w_{i,t} = x_{i,t-1} + inflow - outflow - x_{i,t} is what the second stage
// delivers or salvages in period t. The second stage needs w >= 0, and the
// paper's first stage has no row inducing that, so we add w >= 0 explicitly
// (induced feasibility, in lieu of feasibility cuts). When `demand` is
// non-null the first period also carries its delivery block (rolling mode).
struct RandMaster {
  LinearProgram lp;
  int from_period = 1;
  std::vector<std::vector<int>> x, f;  // [t - from_period][...]
  std::vector<int> y, e_bar, e_und;    // first-period delivery block (rolling)
  int theta = -1;
};

inline RandMaster build_rand_master(const Instance& inst, int from_period,
                                    const std::vector<double>* demand, double theta_lb) {
  const int I = inst.n_sp();
  const int J = inst.n_dp();
  const auto arcs = transfer_arcs(I);
  RandMaster m;
  m.from_period = from_period;
  for (int t = from_period; t <= inst.horizon; ++t) {
    std::vector<int> xs, fs;
    for (int i = 0; i < I; ++i)
      xs.push_back(m.lp.add_variable(inst.costs.holding_cost()));
    for (const Arc& a : arcs) {
      double c = transfer_cost(inst, a.from, a.to, t);
      if (a.from < 0) c += inst.costs.procurement_surcharge(t);
      fs.push_back(m.lp.add_variable(c));
    }
    m.x.push_back(std::move(xs));
    m.f.push_back(std::move(fs));
  }
  if (demand) {
    for (int i = 0; i < I; ++i)
      for (int j = 0; j < J; ++j)
        m.y.push_back(m.lp.add_variable(delivery_cost(inst, i, j, from_period)));
    for (int i = 0; i < I; ++i)
      m.e_bar.push_back(m.lp.add_variable(inst.costs.salvage_value));
    for (int j = 0; j < J; ++j)
      m.e_und.push_back(m.lp.add_variable(inst.costs.shortage_penalty));
  }
  m.theta = m.lp.add_variable(1.0, theta_lb);

  // Post-landfall periods are reimbursed, which leaves flows in them with a
  // net-zero objective; cap each period's total flow at a generous physical
  // bound (refill all storage, deliver the largest possible demand, plus
  // re-route all stored stock) so the simplex cannot wander off along that
  // degenerate direction.
  double throughput = inst.demand_params.d_bar * J;
  for (int i = 0; i < I; ++i) throughput += 2.0 * inst.network.sp_capacity[i];

  for (int t = from_period; t <= inst.horizon; ++t) {
    const int k = t - from_period;
    {
      const int row = m.lp.add_row(RowSense::Le, throughput);
      for (int a = 0; a < static_cast<int>(arcs.size()); ++a)
        m.lp.set_coeff(row, m.f[k][a], 1.0);
    }
    for (int i = 0; i < I; ++i) {
      // Outflow to other SPs cannot exceed the inventory carried in.
      const int row = m.lp.add_row(RowSense::Le, 0.0);
      for (int a = 0; a < static_cast<int>(arcs.size()); ++a)
        if (arcs[a].from == i) m.lp.set_coeff(row, m.f[k][a], 1.0);
      if (k == 0) m.lp.set_link(row, i, 1.0);
      else m.lp.set_coeff(row, m.x[k - 1][i], -1.0);
    }
    for (int i = 0; i < I; ++i) {
      const int row = m.lp.add_row(RowSense::Le, inst.network.sp_capacity[i]);
      m.lp.set_coeff(row, m.x[k][i], 1.0);
    }
    if (demand && k == 0) continue;  // first period gets an equality instead
    for (int i = 0; i < I; ++i) {
      // w_{i,t} >= 0: the period slack handed to the second stage. With the
      // carried inventory on the right: -x + in - out >= -x_prev.
      const int row = m.lp.add_row(RowSense::Ge, 0.0);
      m.lp.set_coeff(row, m.x[k][i], -1.0);
      for (int a = 0; a < static_cast<int>(arcs.size()); ++a) {
        if (arcs[a].to == i) m.lp.set_coeff(row, m.f[k][a], 1.0);
        if (arcs[a].from == i) m.lp.set_coeff(row, m.f[k][a], -1.0);
      }
      if (k == 0) m.lp.set_link(row, i, -1.0);
      else m.lp.set_coeff(row, m.x[k - 1][i], 1.0);
    }
  }
  if (demand) {
    // First-period deliveries: sum_j y + salvage = w, coverage >= demand.
    for (int i = 0; i < I; ++i) {
      const int row = m.lp.add_row(RowSense::Eq, 0.0);
      for (int j = 0; j < J; ++j) m.lp.set_coeff(row, m.y[i * J + j], 1.0);
      m.lp.set_coeff(row, m.e_bar[i], 1.0);
      m.lp.set_coeff(row, m.x[0][i], 1.0);
      for (int a = 0; a < static_cast<int>(arcs.size()); ++a) {
        if (arcs[a].to == i) m.lp.set_coeff(row, m.f[0][a], -1.0);
        if (arcs[a].from == i) m.lp.set_coeff(row, m.f[0][a], 1.0);
      }
      m.lp.set_link(row, i, 1.0);
    }
    for (int j = 0; j < J; ++j) {
      const int row = m.lp.add_row(RowSense::Ge, (*demand)[j]);
      for (int i = 0; i < I; ++i) m.lp.set_coeff(row, m.y[i * J + j], 1.0);
      m.lp.set_coeff(row, m.e_und[j], 1.0);
    }
  }
  return m;
}

// A residual trajectory only matters to the second stage through: when (and
// whether) demand fires, the demand vector itself, and the first reimbursed
// period. Sampled trajectories are collapsed onto these keys.
struct RandOutcome {
  int landfall_period = -1;    // -1: no demand on this trajectory
  int state_index = -1;        // Markov state at landfall
  int m = 0;
  int reimburse_from = 0;      // first period with first-stage costs refunded
  double prob = 0.0;
};

// Landfall time for reimbursement: the landfall period itself, or the first
// absorbing period when the hurricane dissipates or skips the landfall cell
// (the model leaves that case open; costs after the process dies are sunk
// preparation for nothing, so we treat them like post-landfall costs).
inline std::vector<RandOutcome> rand_outcomes_sampled(const Instance& inst,
                                                      int from_period,
                                                      const HurricaneState& xi_now,
                                                      int count, RngStream rng) {
  std::map<std::tuple<int, int, int, int>, double> weight;
  for (int k = 0; k < count; ++k) {
    int landfall = -1, absorbed = -1, landfall_state = -1;
    HurricaneState s = xi_now;
    for (int t = from_period; t <= inst.horizon; ++t) {
      if (t > from_period) s = sample_step(inst.markov, s, rng);
      if (landfall < 0 && at_landfall(inst.markov, s)) {
        landfall = t;
        landfall_state = inst.markov.state_index(s);
      }
      if (absorbed < 0 && classify(inst.markov, s) == StateClass::Absorbing) absorbed = t;
    }
    const int m = sample_m_index(inst.demand_params.m_points, rng);
    const int T_reimb = landfall >= 1 ? landfall
                        : absorbed >= 1 ? absorbed
                                        : inst.horizon;
    weight[{landfall, landfall_state, landfall >= 1 ? m : 0, T_reimb}] += 1.0 / count;
  }
  std::vector<RandOutcome> out;
  for (const auto& [key, p] : weight) {
    const auto& [landfall, sidx, m, T_reimb] = key;
    out.push_back({landfall, sidx, m, T_reimb + 1, p});
  }
  return out;
}

// One period of the second stage: distribute the slack w_i over deliveries,
// salvage, and shortage. Returns the optimum and its sensitivity to w.
struct DeliveryResult {
  double value = 0.0;
  std::vector<double> lambda;  // d(value)/d(w_i)
};

inline DeliveryResult solve_delivery_period(const Instance& inst, int t,
                                            std::span<const double> demand,
                                            std::span<const double> w) {
  const int I = inst.n_sp();
  const int J = inst.n_dp();
  DeliveryResult r;
  double total_demand = 0.0;
  for (double d : demand) total_demand += d;
  if (total_demand <= 0.0) {
    // Nothing to deliver: salvage everything (q < 0, so this is optimal).
    r.lambda.assign(I, inst.costs.salvage_value);
    for (double wi : w) r.value += inst.costs.salvage_value * std::max(wi, 0.0);
    return r;
  }
  LinearProgram lp;
  std::vector<int> y, e_bar, e_und;
  for (int i = 0; i < I; ++i)
    for (int j = 0; j < J; ++j) y.push_back(lp.add_variable(delivery_cost(inst, i, j, t)));
  for (int i = 0; i < I; ++i) e_bar.push_back(lp.add_variable(inst.costs.salvage_value));
  for (int j = 0; j < J; ++j) e_und.push_back(lp.add_variable(inst.costs.shortage_penalty));
  for (int i = 0; i < I; ++i) {
    const int row = lp.add_row(RowSense::Eq, 0.0);
    for (int j = 0; j < J; ++j) lp.set_coeff(row, y[i * J + j], 1.0);
    lp.set_coeff(row, e_bar[i], 1.0);
    lp.set_link(row, i, 1.0);
  }
  for (int j = 0; j < J; ++j) {
    const int row = lp.add_row(RowSense::Ge, demand[j]);
    for (int i = 0; i < I; ++i) lp.set_coeff(row, y[i * J + j], 1.0);
    lp.set_coeff(row, e_und[j], 1.0);
  }
  std::vector<double> w_clamped(w.begin(), w.end());
  for (double& wi : w_clamped) wi = std::max(wi, 0.0);
  const LpSolution sol = lp.solve(w_clamped);
  if (sol.status != LpStatus::Optimal)
    throw std::runtime_error("delivery subproblem not optimal at t=" + std::to_string(t));
  r.value = sol.objective;
  r.lambda = lp.cut_slope(sol);
  return r;
}

inline std::vector<double> outcome_demand(const Instance& inst,
                                          const RandOutcome& outcome) {
  if (outcome.landfall_period < 1) return std::vector<double>(inst.n_dp(), 0.0);
  const HurricaneState s = inst.markov.state_from_index(outcome.state_index);
  return demand_vector(inst, s.alpha, landfall_points(inst, s.lx).at(outcome.m));
}

// Second-stage value of one trajectory outcome given the committed plan,
// summed over periods `second_from`..T_max:
//   - costed periods (t <= landfall/absorption) pay delivery/shortage and
//     salvage the period slack w;
//   - reimbursed periods (t > that) refund the committed first-stage costs
//     and are otherwise cost-neutral (their slack is returned at no charge;
//     pricing it would make post-landfall procurement profitable, since the
//     procurement cost itself is refunded).
// `slope`, when non-null, accumulates prob-weighted d(value)/d(master var)
// using the master variable layout in `m`.
inline double rand_second_stage_value(const Instance& inst, const RandOutcome& outcome,
                                      int from, int second_from,
                                      const std::vector<std::vector<double>>& x_hat,
                                      const std::vector<std::vector<double>>& f_hat,
                                      const std::vector<std::vector<double>>& w_hat,
                                      const RandMaster* m, double prob,
                                      std::vector<double>* slope) {
  const int I = inst.n_sp();
  const auto arcs = transfer_arcs(I);
  const std::vector<double> demand = outcome_demand(inst, outcome);
  double value = 0.0;
  std::vector<std::vector<double>> lambda(x_hat.size(), std::vector<double>(I, 0.0));
  for (int t = second_from; t <= inst.horizon; ++t) {
    const int k = t - from;
    if (t >= outcome.reimburse_from) {
      value -= plan_period_cost(inst, t, x_hat[k], f_hat[k]);
      if (slope) {
        for (int i = 0; i < I; ++i)
          (*slope)[m->x[k][i]] -= prob * inst.costs.holding_cost();
        for (int a = 0; a < static_cast<int>(arcs.size()); ++a) {
          double c = transfer_cost(inst, arcs[a].from, arcs[a].to, t);
          if (arcs[a].from < 0) c += inst.costs.procurement_surcharge(t);
          (*slope)[m->f[k][a]] -= prob * c;
        }
      }
      continue;  // lambda stays 0: the slack is cost-neutral
    }
    DeliveryResult dr;
    if (t == outcome.landfall_period)
      dr = solve_delivery_period(inst, t, demand, w_hat[k]);
    else
      dr = solve_delivery_period(inst, t, std::vector<double>(inst.n_dp(), 0.0),
                                 w_hat[k]);
    value += dr.value;
    lambda[k] = std::move(dr.lambda);
  }
  if (slope) {
    // w_{i,t} = x_{i,t-1} + inflow_t - outflow_t - x_{i,t}; x_{from-1} is a
    // constant (the incoming inventory), so it contributes no slope.
    for (std::size_t k = 0; k < lambda.size(); ++k) {
      const int t = from + static_cast<int>(k);
      if (t < second_from) continue;
      for (int i = 0; i < I; ++i) {
        const double l = lambda[k][i];
        if (l == 0.0) continue;
        (*slope)[m->x[k][i]] -= prob * l;
        if (k > 0) (*slope)[m->x[k - 1][i]] += prob * l;
        for (int a = 0; a < static_cast<int>(arcs.size()); ++a) {
          if (arcs[a].to == i) (*slope)[m->f[k][a]] += prob * l;
          if (arcs[a].from == i) (*slope)[m->f[k][a]] -= prob * l;
        }
      }
    }
  }
  return value;
}

// Core of Static2SSP-R / the first stage of an RH-2SSP-R roll. `demand_now`
// non-null puts the current period's delivery block into the first stage.
inline TwoStageResult train_static_rand_from(const Instance& inst, const TrainConfig& cfg,
                                             int from_period, const HurricaneState& xi_now,
                                             std::span<const double> x_now,
                                             const std::vector<double>* demand_now,
                                             const std::vector<RandOutcome>& outcomes) {
  const auto t0 = std::chrono::steady_clock::now();
  const int I = inst.n_sp();
  const auto arcs = transfer_arcs(I);
  const int n_periods = inst.horizon - from_period + 1;
  const int second_from = demand_now ? from_period + 1 : from_period;

  // Reimbursement can push the recourse below zero, but never below the
  // refundable first-stage cost plus the salvage credit, both bounded thanks
  // to the per-period throughput cap. A bound of matching magnitude keeps the
  // master numerically well-scaled (a huge generic bound makes the simplex
  // wander through ill-conditioned vertices).
  const auto arcs_all = transfer_arcs(inst.n_sp());
  double cap_sum = 0.0;
  for (double u : inst.network.sp_capacity) cap_sum += u;
  double throughput = inst.demand_params.d_bar * inst.n_dp() + 2.0 * cap_sum;
  double theta_lb = 0.0;
  for (int t = from_period; t <= inst.horizon; ++t) {
    double c_max = 0.0;
    for (const Arc& a : arcs_all) {
      double c = transfer_cost(inst, a.from, a.to, t);
      if (a.from < 0) c += inst.costs.procurement_surcharge(t);
      c_max = std::max(c_max, c);
    }
    theta_lb -= inst.costs.holding_cost() * cap_sum + c_max * throughput;
    theta_lb -= std::abs(inst.costs.salvage_value) * (cap_sum + throughput);
  }

  RandMaster master = build_rand_master(inst, from_period, demand_now, theta_lb);

  auto recourse = [&](const LpSolution& sol) {
    std::vector<std::vector<double>> x_hat(n_periods), f_hat(n_periods), w_hat(n_periods);
    for (int k = 0; k < n_periods; ++k) {
      x_hat[k].assign(I, 0.0);
      f_hat[k].assign(arcs.size(), 0.0);
      w_hat[k].assign(I, 0.0);
      for (int i = 0; i < I; ++i) x_hat[k][i] = sol.x[master.x[k][i]];
      for (std::size_t a = 0; a < arcs.size(); ++a) f_hat[k][a] = sol.x[master.f[k][a]];
      for (int i = 0; i < I; ++i) {
        double w = (k == 0 ? x_now[i] : x_hat[k - 1][i]) - x_hat[k][i];
        for (std::size_t a = 0; a < arcs.size(); ++a) {
          if (arcs[a].to == i) w += f_hat[k][a];
          if (arcs[a].from == i) w -= f_hat[k][a];
        }
        w_hat[k][i] = w;
      }
    }
    LShapedCut cut;
    cut.slope.assign(master.lp.n_vars(), 0.0);
    for (const RandOutcome& o : outcomes)
      cut.value += o.prob * rand_second_stage_value(inst, o, from_period, second_from,
                                                    x_hat, f_hat, w_hat, &master, o.prob,
                                                    &cut.slope);
    cut.intercept = cut.value;
    for (int v = 0; v < master.lp.n_vars(); ++v)
      cut.intercept -= cut.slope[v] * sol.x[v];
    return cut;
  };

  TwoStageResult res;
  LpSolution sol;
  run_l_shaped(master.lp, master.theta, x_now, cfg, recourse, sol, res.log,
               res.stop_reason);
  res.value = sol.objective;
  res.plan.kind = ModelKind::RandomLandfall;
  res.plan.first_period = from_period;
  for (int k = 0; k < n_periods; ++k) {
    std::vector<double> xs, fs;
    for (int v : master.x[k]) xs.push_back(sol.x[v]);
    for (int v : master.f[k]) fs.push_back(sol.x[v]);
    res.plan.x.push_back(std::move(xs));
    res.plan.f.push_back(std::move(fs));
  }
  res.train_seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  return res;
}

}  // namespace detail

inline TwoStageResult train_static_rand(const Instance& inst, const TrainConfig& cfg) {
  if (!inst.random_kind())
    throw std::invalid_argument("train_static_rand: instance has deterministic landfall");
  RngStream rng(cfg.seed, {0x32737370ull});  // "2ssp"
  const auto outcomes = detail::rand_outcomes_sampled(inst, 1, inst.initial_state,
                                                      cfg.scenario_count, rng);
  return detail::train_static_rand_from(inst, cfg, 1, inst.initial_state,
                                        inst.initial_inventory, nullptr, outcomes);
}

// Realized cost of a committed random-kind plan on one scenario: committed
// logistics costs and per-period second-stage costs through the landfall (or
// absorption) period; later periods are reimbursed / cost-neutral.
inline double evaluate_static_rand(const StaticPlan& plan, const Instance& inst,
                                   const Scenario& scen,
                                   std::vector<double>* procurement = nullptr) {
  const int I = inst.n_sp();
  const auto arcs = transfer_arcs(I);
  if (procurement) procurement->assign(inst.horizon, 0.0);
  const int T_reimb = scen.has_landfall() ? scen.landfall_period
                      : scen.absorption_period >= 1 ? scen.absorption_period
                                                    : inst.horizon;
  const std::vector<double> zero(inst.n_dp(), 0.0);
  double cost = 0.0;
  std::vector<double> x_prev = inst.initial_inventory;
  for (int t = 1; t <= T_reimb; ++t) {
    const int k = t - 1;
    cost += detail::plan_period_cost(inst, t, plan.x[k], plan.f[k]);
    std::vector<double> w(I, 0.0);
    for (int i = 0; i < I; ++i) {
      w[i] = x_prev[i] - plan.x[k][i];
      for (std::size_t a = 0; a < arcs.size(); ++a) {
        if (arcs[a].to == i) w[i] += plan.f[k][a];
        if (arcs[a].from == i) w[i] -= plan.f[k][a];
      }
    }
    const auto& d = t == scen.landfall_period ? scen.demands : zero;
    cost += detail::solve_delivery_period(inst, t, d, w).value;
    if (procurement)
      for (int i = 0; i < I; ++i) (*procurement)[k] += plan.f[k][i];
    x_prev = plan.x[k];
  }
  return cost;
}

inline double evaluate_static(const StaticPlan& plan, const Instance& inst,
                              const Scenario& scen,
                              std::vector<double>* procurement = nullptr) {
  return inst.random_kind() ? evaluate_static_rand(plan, inst, scen, procurement)
                            : evaluate_static_det(plan, inst, scen, procurement);
}

}  // namespace relief
