#include <catch2/catch_amalgamated.hpp>

#include <cstdio>

#include "relief/clairvoyant.hpp"
#include "relief/policy_io.hpp"
#include "relief/sddp.hpp"

#include "fixtures.hpp"

using namespace relief;

namespace {
TrainConfig tiny_cfg() {
  TrainConfig cfg;
  cfg.seed = 5;
  cfg.stability_window = 100;
  return cfg;
}
}  // namespace

TEST_CASE("nested Benders reaches the extensive-form optimum (deterministic kind)") {
  const Instance inst = fixtures::tiny_det();
  const TrainResult res = train(inst, tiny_cfg());
  const double ef = extensive_form_value(inst);
  REQUIRE_THAT(res.lower_bound, Catch::Matchers::WithinRel(ef, 1e-4));
  REQUIRE_THAT(ef, Catch::Matchers::WithinAbs(89.162985, 1e-4));
  REQUIRE(res.stop_reason == "stability");

  SECTION("the lower bound never decreases") {
    for (std::size_t k = 1; k < res.log.size(); ++k)
      REQUIRE(res.log[k].lower_bound >= res.log[k - 1].lower_bound - 1e-9);
  }

  SECTION("the final bound is a true lower bound on the policy's cost") {
    RngStream rng(21, {0});
    double sum = 0.0;
    const int N = 500;
    for (int n = 0; n < N; ++n)
      sum += simulate(res.policy, realize(inst, rng.split(n))).cost;
    // LB <= out-of-sample mean up to sampling noise.
    REQUIRE(res.lower_bound <= sum / N + 1.0);
  }
}

TEST_CASE("nested Benders reaches the extensive-form optimum (random kind)") {
  const Instance inst = fixtures::tiny_rand();
  const TrainResult res = train(inst, tiny_cfg());
  const double ef = extensive_form_value(inst);
  REQUIRE_THAT(res.lower_bound, Catch::Matchers::WithinRel(ef, 1e-4));
  REQUIRE_THAT(ef, Catch::Matchers::WithinAbs(46.419936, 1e-4));
}

TEST_CASE("a single-scenario chain converges to the clairvoyant value") {
  const Instance inst = fixtures::tiny_degenerate();
  TrainConfig cfg;
  cfg.seed = 1;
  cfg.stability_window = 5;
  const TrainResult res = train(inst, cfg);
  const double cv = solve_cv(inst, realize(inst, RngStream(0, {0}))).cost;
  REQUIRE_THAT(res.lower_bound, Catch::Matchers::WithinRel(cv, 1e-6));
}

TEST_CASE("stored cuts under-estimate the oracle expected cost-to-go") {
  for (const Instance& inst : {fixtures::tiny_det(), fixtures::tiny_rand()}) {
    const TrainResult res = train(inst, tiny_cfg());
    RngStream rng(33, {2});
    for (const auto& [key, cuts] : res.policy.pool) {
      const auto& [t, state_index] = key;
      const HurricaneState s = inst.markov.state_from_index(state_index);
      for (int trial = 0; trial < 10; ++trial) {
        std::vector<double> x(inst.n_sp());
        for (int i = 0; i < inst.n_sp(); ++i)
          x[i] = rng.uniform(0.0, inst.network.sp_capacity[i]);
        const double oracle = oracle_expected_cost_to_go(inst, t, s, x);
        for (const Cut& c : cuts) REQUIRE(c.value_at(x) <= oracle + 1e-6);
      }
    }
  }
}

TEST_CASE("acting with a trained policy is deterministic and feasible") {
  const Instance inst = fixtures::tiny_det();
  const TrainResult res = train(inst, tiny_cfg());
  const std::vector<double> x0{3.0, 1.0};
  const StageDecision a = act(res.policy, 2, {1, 1, -1}, 0, x0);
  const StageDecision b = act(res.policy, 2, {1, 1, -1}, 0, x0);
  REQUIRE(a.immediate_cost == b.immediate_cost);
  REQUIRE(a.x == b.x);
  for (int i = 0; i < inst.n_sp(); ++i) {
    REQUIRE(a.x[i] >= -1e-9);
    REQUIRE(a.x[i] <= inst.network.sp_capacity[i] + 1e-9);
  }
}

TEST_CASE("absorbing states act as zero decisions at zero cost") {
  const Instance inst = fixtures::tiny_rand();
  TrainConfig cfg = tiny_cfg();
  cfg.max_iterations = 50;
  const TrainResult res = train(inst, cfg);
  const std::vector<double> x0{5.0, 5.0};
  const StageDecision d = act(res.policy, 2, {0, 0, 1}, 0, x0);
  REQUIRE(d.immediate_cost == 0.0);
  for (double v : d.x) REQUIRE(v == 0.0);
}

TEST_CASE("simulated policy cost dominates the clairvoyant per path") {
  for (const Instance& inst : {fixtures::tiny_det(), fixtures::tiny_rand()}) {
    const TrainResult res = train(inst, tiny_cfg());
    RngStream rng(55, {4});
    for (int n = 0; n < 100; ++n) {
      const Scenario sc = realize(inst, rng.split(n));
      REQUIRE(simulate(res.policy, sc).cost >= solve_cv(inst, sc).cost - 1e-6);
    }
  }
}

TEST_CASE("policies round-trip through their file format") {
  const Instance inst = fixtures::tiny_rand();
  TrainConfig cfg = tiny_cfg();
  cfg.max_iterations = 200;
  const TrainResult res = train(inst, cfg);
  const std::string path = "/tmp/relief_test_policy.json";
  save_policy(res.policy, path);
  const OfflinePolicy back = load_policy(path);
  std::remove(path.c_str());

  REQUIRE(back.pool.size() == res.policy.pool.size());
  for (const auto& [key, cuts] : res.policy.pool) {
    const auto it = back.pool.find(key);
    REQUIRE(it != back.pool.end());
    REQUIRE(it->second.size() == cuts.size());
  }
  RngStream rng(9, {1});
  for (int n = 0; n < 20; ++n) {
    const Scenario sc = realize(inst, rng.split(n));
    REQUIRE(simulate(back, sc).cost == simulate(res.policy, sc).cost);
  }
}

TEST_CASE("loading a malformed policy file reports the problem") {
  const std::string path = "/tmp/relief_test_policy_bad.json";
  {
    std::FILE* f = std::fopen(path.c_str(), "w");
    std::fputs("{\"cuts\": []}", f);
    std::fclose(f);
  }
  REQUIRE_THROWS_WITH(load_policy(path),
                      Catch::Matchers::ContainsSubstring("instance"));
  std::remove(path.c_str());
}
