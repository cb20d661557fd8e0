#pragma once

#include <bit>
#include <cmath>
#include <cstdint>
#include <map>
#include <span>
#include <stdexcept>
#include <tuple>
#include <vector>

#include "relief/twostage.hpp"

namespace relief {

// Rolling-horizon policy: at every period it re-solves the residual two-stage
// model from the observed Markov state and carried inventory, commits only the
// first period of the resulting plan, and rolls forward.
//
// Decisions depend only on (period, state, carried inventory), so they are
// memoized across evaluation paths; the outcome-sampling stream is keyed by
// (seed, period, state) so identical roll points see identical samples.
class RollingPolicy {
 public:
  RollingPolicy(const Instance& inst, const TrainConfig& cfg,
                bool exact_outcomes = false)
      : inst_(inst), cfg_(cfg), exact_outcomes_(exact_outcomes) {}

  const Instance& instance() const { return inst_; }

  // Realized cost of the policy on one scenario. Fills `procurement` (if
  // given) with the per-period flow out of the MDC.
  double rollout(const Scenario& scen, std::vector<double>* procurement = nullptr) const {
    return inst_.random_kind() ? rollout_rand(scen, procurement)
                               : rollout_det(scen, procurement);
  }

 private:
  struct Decision {
    std::vector<double> x, f;  // committed first-period decision
  };

  // (period, state index, m at landfall or -1, bit-exact inventory). Exact
  // keys keep rollouts independent of cache contents (and so of the worker
  // sharding); hits still happen whenever decision histories coincide.
  using Key = std::tuple<int, int, int, std::vector<std::int64_t>>;

  static std::vector<std::int64_t> quantize(std::span<const double> x) {
    std::vector<std::int64_t> q(x.size());
    for (std::size_t i = 0; i < x.size(); ++i) q[i] = std::bit_cast<std::int64_t>(x[i]);
    return q;
  }

  RngStream roll_stream(int t, const HurricaneState& xi) const {
    return RngStream(cfg_.seed, {0x726f6c6cull,  // "roll"
                                 static_cast<std::uint64_t>(t),
                                 static_cast<std::uint64_t>(inst_.markov.state_index(xi))});
  }

  double rollout_det(const Scenario& scen, std::vector<double>* procurement) const {
    const int T = inst_.horizon;
    const int I = inst_.n_sp();
    if (procurement) procurement->assign(T, 0.0);
    double cost = 0.0;
    std::vector<double> x_prev = inst_.initial_inventory;
    for (int t = 1; t < T; ++t) {
      const HurricaneState& xi = scen.path[t - 1];
      const Decision& dec = decide_det(t, xi, x_prev);
      cost += detail::plan_period_cost(inst_, t, dec.x, dec.f);
      if (procurement)
        for (int i = 0; i < I; ++i) (*procurement)[t - 1] += dec.f[i];
      x_prev = dec.x;
    }
    LinearProgram sub;
    const StageVars sv = append_stage_block(sub, inst_, T, StageForm::Terminal,
                                            PrevLinks{0}, scen.demands);
    const LpSolution sol = sub.solve(x_prev);
    if (sol.status != LpStatus::Optimal)
      throw std::runtime_error("rolling terminal LP not optimal");
    cost += sol.objective;
    if (procurement)
      for (int i = 0; i < I; ++i) (*procurement)[T - 1] += sol.x[sv.f[i]];
    return cost;
  }

  double rollout_rand(const Scenario& scen, std::vector<double>* procurement) const {
    const int T = inst_.horizon;
    const int I = inst_.n_sp();
    const auto arcs = transfer_arcs(I);
    if (procurement) procurement->assign(T, 0.0);
    double cost = 0.0;
    std::vector<double> x_prev = inst_.initial_inventory;
    for (int t = 1; t <= T; ++t) {
      const HurricaneState& xi = scen.path[t - 1];
      if (t == scen.landfall_period) {
        // Landfall: commit this period's logistics jointly with the realized
        // deliveries; everything afterwards is reimbursed.
        const Decision& dec = decide_rand(t, xi, x_prev, &scen.demands, scen.m_index);
        cost += detail::plan_period_cost(inst_, t, dec.x, dec.f);
        const std::vector<double> w = period_slack(x_prev, dec, arcs);
        cost += detail::solve_delivery_period(inst_, t, scen.demands, w).value;
        if (procurement)
          for (int i = 0; i < I; ++i) (*procurement)[t - 1] += dec.f[i];
        return cost;
      }
      const bool dead = classify(inst_.markov, xi) == StateClass::Absorbing;
      if (dead || t == T) {
        // Dissipated (or end of horizon) without landfall: nothing left to
        // prepare for, salvage the carried inventory.
        for (double xp : x_prev) cost += inst_.costs.salvage_value * xp;
        return cost;
      }
      const Decision& dec = decide_rand(t, xi, x_prev, nullptr, -1);
      cost += detail::plan_period_cost(inst_, t, dec.x, dec.f);
      const std::vector<double> w = period_slack(x_prev, dec, arcs);
      for (double wi : w) cost += inst_.costs.salvage_value * std::max(wi, 0.0);
      if (procurement)
        for (int i = 0; i < I; ++i) (*procurement)[t - 1] += dec.f[i];
      x_prev = dec.x;
    }
    return cost;
  }

  std::vector<double> period_slack(std::span<const double> x_prev, const Decision& dec,
                                   std::span<const Arc> arcs) const {
    std::vector<double> w(inst_.n_sp());
    for (int i = 0; i < inst_.n_sp(); ++i) {
      w[i] = x_prev[i] - dec.x[i];
      for (std::size_t a = 0; a < arcs.size(); ++a) {
        if (arcs[a].to == i) w[i] += dec.f[a];
        if (arcs[a].from == i) w[i] -= dec.f[a];
      }
    }
    return w;
  }

  const Decision& decide_det(int t, const HurricaneState& xi,
                             std::span<const double> x_prev) const {
    const Key key{t, inst_.markov.state_index(xi), -1, quantize(x_prev)};
    auto it = cache_.find(key);
    if (it != cache_.end()) return it->second;
    const auto outcomes =
        exact_outcomes_
            ? detail::det_outcomes_exact(inst_, t, xi)
            : detail::det_outcomes_sampled(inst_, t, xi, cfg_.scenario_count,
                                           roll_stream(t, xi));
    TwoStageResult res = detail::train_static_det_from(inst_, cfg_, t, xi, x_prev, outcomes);
    return cache_.emplace(key, Decision{std::move(res.plan.x[0]), std::move(res.plan.f[0])})
        .first->second;
  }

  const Decision& decide_rand(int t, const HurricaneState& xi,
                              std::span<const double> x_prev,
                              const std::vector<double>* demand_now, int m) const {
    const Key key{t, inst_.markov.state_index(xi), m, quantize(x_prev)};
    auto it = cache_.find(key);
    if (it != cache_.end()) return it->second;
    const auto outcomes = detail::rand_outcomes_sampled(inst_, t, xi, cfg_.scenario_count,
                                                        roll_stream(t, xi));
    TwoStageResult res =
        detail::train_static_rand_from(inst_, cfg_, t, xi, x_prev, demand_now, outcomes);
    return cache_.emplace(key, Decision{std::move(res.plan.x[0]), std::move(res.plan.f[0])})
        .first->second;
  }

  const Instance& inst_;
  TrainConfig cfg_;
  bool exact_outcomes_;
  mutable std::map<Key, Decision> cache_;
};

}  // namespace relief
