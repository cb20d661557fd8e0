#pragma once

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdlib>
#include <functional>
#include <memory>
#include <ostream>
#include <span>
#include <string>
#include <thread>
#include <vector>

#include "relief/clairvoyant.hpp"
#include "relief/rolling.hpp"
#include "relief/sddp.hpp"
#include "relief/twostage.hpp"

namespace relief {

// Out-of-sample estimate for one policy on a common scenario set: sample mean,
// a 95% normal CI half-width, the clairvoyant mean on the same paths, and the
// mean per-period procurement out of the MDC.
struct EvalReport {
  std::string model;
  int n_paths = 0;
  double z_hat = 0.0;
  double sigma_hat = 0.0;     // sample standard deviation (N - 1)
  double ci_halfwidth = 0.0;  // 1.96 * sigma_hat / sqrt(N)
  double cv_mean = 0.0;
  double gap_pct = 0.0;       // 100 * (z_hat - cv_mean) / cv_mean
  std::vector<double> fbar;   // mean MDC outflow per period
  double train_seconds = 0.0;
  double eval_seconds = 0.0;
};

namespace detail {

inline double pairwise_sum(std::span<const double> v) {
  if (v.size() <= 8) {
    double s = 0.0;
    for (double x : v) s += x;
    return s;
  }
  const std::size_t half = v.size() / 2;
  return pairwise_sum(v.subspan(0, half)) + pairwise_sum(v.subspan(half));
}

}  // namespace detail

inline int worker_count_from_env() {
  if (const char* s = std::getenv("RELIEF_WORKERS")) {
    const int n = std::atoi(s);
    if (n >= 1) return n;
  }
  const unsigned hw = std::thread::hardware_concurrency();
  return hw > 0 ? static_cast<int>(hw) : 1;
}

// Common evaluation scenario set: path n comes from stream (seed, "eval", n),
// so every policy sees identical scenarios for a given instance and seed.
inline std::vector<Scenario> make_eval_scenarios(const Instance& inst, int n_paths,
                                                 std::uint64_t seed) {
  RngStream rng(seed, {0x6576616cull});  // "eval"
  std::vector<Scenario> out;
  out.reserve(n_paths);
  for (int n = 0; n < n_paths; ++n) out.push_back(realize(inst, rng.split(n)));
  return out;
}

// Per-path realized costs and procurement of one policy over the scenario
// set. `make_worker` builds one evaluator per worker thread, so policies with
// mutable per-policy state (the rolling policy's decision cache) stay
// single-threaded internally. Path order is preserved: results do not depend
// on the worker count.
struct PathCosts {
  std::vector<double> cost;                       // per path
  std::vector<std::vector<double>> procurement;   // per path, per period
  double seconds = 0.0;
};

template <typename MakeWorker>
inline PathCosts run_paths(std::span<const Scenario> scenarios, int workers,
                           MakeWorker&& make_worker) {
  const auto t0 = std::chrono::steady_clock::now();
  const int n = static_cast<int>(scenarios.size());
  PathCosts pc;
  pc.cost.assign(n, 0.0);
  pc.procurement.assign(n, {});
  workers = std::max(1, std::min(workers, n));
  if (workers == 1) {
    auto fn = make_worker(0);
    for (int i = 0; i < n; ++i) pc.cost[i] = fn(scenarios[i], &pc.procurement[i]);
  } else {
    std::atomic<int> next{0};
    std::vector<std::thread> pool;
    pool.reserve(workers);
    for (int w = 0; w < workers; ++w)
      pool.emplace_back([&, w] {
        auto fn = make_worker(w);
        for (int i = next.fetch_add(1); i < n; i = next.fetch_add(1))
          pc.cost[i] = fn(scenarios[i], &pc.procurement[i]);
      });
    for (std::thread& th : pool) th.join();
  }
  pc.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  return pc;
}

inline PathCosts clairvoyant_costs(const Instance& inst,
                                   std::span<const Scenario> scenarios, int workers) {
  return run_paths(scenarios, workers, [&](int) {
    return [&inst](const Scenario& sc, std::vector<double>* proc) {
      CvResult r = solve_cv(inst, sc);
      if (proc) *proc = r.procurement;
      return r.cost;
    };
  });
}

inline PathCosts offline_policy_costs(const OfflinePolicy& policy,
                                      std::span<const Scenario> scenarios, int workers) {
  return run_paths(scenarios, workers, [&](int) {
    return [&policy](const Scenario& sc, std::vector<double>* proc) {
      SimulationResult r = simulate(policy, sc);
      if (proc) *proc = std::move(r.procurement);
      return r.cost;
    };
  });
}

inline PathCosts static_plan_costs(const StaticPlan& plan, const Instance& inst,
                                   std::span<const Scenario> scenarios, int workers) {
  return run_paths(scenarios, workers, [&](int) {
    return [&plan, &inst](const Scenario& sc, std::vector<double>* proc) {
      return evaluate_static(plan, inst, sc, proc);
    };
  });
}

inline PathCosts rolling_policy_costs(const Instance& inst, const TrainConfig& cfg,
                                      std::span<const Scenario> scenarios, int workers,
                                      bool exact_outcomes = false) {
  return run_paths(scenarios, workers, [&](int) {
    // One policy (and decision cache) per worker; decisions are deterministic
    // in (period, state, inventory), so sharding only costs recomputation.
    auto policy = std::make_shared<RollingPolicy>(inst, cfg, exact_outcomes);
    return [policy](const Scenario& sc, std::vector<double>* proc) {
      return policy->rollout(sc, proc);
    };
  });
}

// Assembles the report from per-path costs and the clairvoyant costs on the
// same paths.
inline EvalReport make_report(std::string model, const PathCosts& pc,
                              std::span<const double> cv_cost,
                              double train_seconds) {
  EvalReport r;
  r.model = std::move(model);
  r.n_paths = static_cast<int>(pc.cost.size());
  r.train_seconds = train_seconds;
  r.eval_seconds = pc.seconds;
  if (r.n_paths == 0) return r;
  const double n = r.n_paths;
  r.z_hat = detail::pairwise_sum(pc.cost) / n;
  if (r.n_paths > 1) {
    std::vector<double> sq(pc.cost.size());
    for (std::size_t i = 0; i < pc.cost.size(); ++i) {
      const double d = pc.cost[i] - r.z_hat;
      sq[i] = d * d;
    }
    r.sigma_hat = std::sqrt(detail::pairwise_sum(sq) / (n - 1.0));
    r.ci_halfwidth = 1.96 * r.sigma_hat / std::sqrt(n);
  }
  r.cv_mean = detail::pairwise_sum(cv_cost) / n;
  if (r.cv_mean != 0.0) r.gap_pct = 100.0 * (r.z_hat - r.cv_mean) / r.cv_mean;
  std::size_t periods = 0;
  for (const auto& p : pc.procurement) periods = std::max(periods, p.size());
  r.fbar.assign(periods, 0.0);
  for (const auto& p : pc.procurement)
    for (std::size_t t = 0; t < p.size(); ++t) r.fbar[t] += p[t];
  for (double& v : r.fbar) v /= n;
  return r;
}

// One-call evaluation against a fresh scenario set (the CLI shares scenario
// sets and clairvoyant costs across models instead; these are the simple
// entry points).
inline EvalReport evaluate(const OfflinePolicy& policy, const Instance& inst,
                           int n_paths, std::uint64_t seed, int workers = 1,
                           double train_seconds = 0.0) {
  if (policy.inst.random_kind() != inst.random_kind())
    throw std::invalid_argument("evaluate: policy/instance kind mismatch");
  const auto scen = make_eval_scenarios(inst, n_paths, seed);
  const PathCosts cv = clairvoyant_costs(inst, scen, workers);
  return make_report("famsp", offline_policy_costs(policy, scen, workers), cv.cost,
                     train_seconds);
}

inline EvalReport evaluate(const StaticPlan& plan, const Instance& inst, int n_paths,
                           std::uint64_t seed, int workers = 1,
                           double train_seconds = 0.0) {
  if ((plan.kind == ModelKind::RandomLandfall) != inst.random_kind())
    throw std::invalid_argument("evaluate: plan/instance kind mismatch");
  const auto scen = make_eval_scenarios(inst, n_paths, seed);
  const PathCosts cv = clairvoyant_costs(inst, scen, workers);
  return make_report("static2ssp", static_plan_costs(plan, inst, scen, workers), cv.cost,
                     train_seconds);
}

inline EvalReport evaluate_rolling(const Instance& inst, const TrainConfig& cfg,
                                   int n_paths, std::uint64_t seed, int workers = 1) {
  const auto scen = make_eval_scenarios(inst, n_paths, seed);
  const PathCosts cv = clairvoyant_costs(inst, scen, workers);
  return make_report("rh2ssp", rolling_policy_costs(inst, cfg, scen, workers), cv.cost,
                     0.0);
}

inline EvalReport evaluate_cv(const Instance& inst, int n_paths, std::uint64_t seed,
                              int workers = 1) {
  const auto scen = make_eval_scenarios(inst, n_paths, seed);
  const PathCosts cv = clairvoyant_costs(inst, scen, workers);
  return make_report("cv", cv, cv.cost, 0.0);
}

// ---------------------------------------------------------------------------
// CSV emission.

inline const char* kEvalCsvHeader =
    "model,kind,nu,I,J,alpha1,seed,N,z_hat,ci_halfwidth,cv_mean,gap_pct,"
    "train_seconds,eval_seconds";

inline void write_csv_row(std::ostream& out, const Instance& inst, std::uint64_t seed,
                          const EvalReport& r) {
  out << r.model << ',' << (inst.random_kind() ? "rand" : "det") << ','
      << inst.costs.nu << ',' << inst.n_sp() << ',' << inst.n_dp() << ','
      << inst.initial_state.alpha << ',' << seed << ',' << r.n_paths << ','
      << r.z_hat << ',' << r.ci_halfwidth << ',' << r.cv_mean << ',' << r.gap_pct
      << ',' << r.train_seconds << ',' << r.eval_seconds << '\n';
}

inline const char* kFbarCsvHeader = "model,t,fbar_t";

inline void write_fbar_rows(std::ostream& out, const EvalReport& r) {
  for (std::size_t t = 0; t < r.fbar.size(); ++t)
    out << r.model << ',' << (t + 1) << ',' << r.fbar[t] << '\n';
}

}  // namespace relief
