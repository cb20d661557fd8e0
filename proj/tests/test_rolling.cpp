#include <catch2/catch_amalgamated.hpp>

#include "relief/clairvoyant.hpp"
#include "relief/rolling.hpp"

#include "fixtures.hpp"

using namespace relief;

TEST_CASE("rolling policy equals the clairvoyant on a single-scenario chain") {
  const Instance inst = fixtures::tiny_degenerate();
  TrainConfig cfg;
  cfg.seed = 3;
  const RollingPolicy rh(inst, cfg, /*exact_outcomes=*/true);
  const Scenario sc = realize(inst, RngStream(0, {0}));
  const double cv = solve_cv(inst, sc).cost;
  REQUIRE_THAT(rh.rollout(sc), Catch::Matchers::WithinAbs(cv, 1e-6));
  REQUIRE_THAT(cv, Catch::Matchers::WithinAbs(105.170218, 1e-4));
}

TEST_CASE("rolling decisions respect the true dynamics") {
  const Instance inst = fixtures::tiny_det();
  TrainConfig cfg;
  cfg.seed = 3;
  const RollingPolicy rh(inst, cfg);
  RngStream rng(8, {0});
  for (int n = 0; n < 10; ++n) {
    const Scenario sc = realize(inst, rng.split(n));
    std::vector<double> proc;
    const double cost = rh.rollout(sc, &proc);
    REQUIRE(std::isfinite(cost));
    REQUIRE(proc.size() == static_cast<std::size_t>(inst.horizon));
    for (double p : proc) REQUIRE(p >= -1e-9);
  }
}

TEST_CASE("rolling cost dominates the clairvoyant per path") {
  for (const Instance& inst : {fixtures::tiny_det(), fixtures::tiny_rand()}) {
    TrainConfig cfg;
    cfg.seed = 3;
    const RollingPolicy rh(inst, cfg);
    RngStream rng(15, {2});
    for (int n = 0; n < 40; ++n) {
      const Scenario sc = realize(inst, rng.split(n));
      REQUIRE(rh.rollout(sc) >= solve_cv(inst, sc).cost - 1e-6);
    }
  }
}

TEST_CASE("rollouts are deterministic and cache-independent") {
  const Instance inst = fixtures::tiny_rand();
  TrainConfig cfg;
  cfg.seed = 3;
  RngStream rng(6, {4});
  std::vector<Scenario> scen;
  for (int n = 0; n < 15; ++n) scen.push_back(realize(inst, rng.split(n)));

  // One policy evaluating all paths (warm cache) against fresh policies per
  // path (cold caches): identical costs path by path.
  const RollingPolicy shared(inst, cfg);
  for (const Scenario& sc : scen) {
    const RollingPolicy fresh(inst, cfg);
    REQUIRE(shared.rollout(sc) == fresh.rollout(sc));
  }
}

TEST_CASE("an absorbed path stops accruing costs") {
  const Instance inst = fixtures::tiny_rand();
  TrainConfig cfg;
  cfg.seed = 3;
  const RollingPolicy rh(inst, cfg);
  // A storm that has already dissipated in period 1: nothing to do, no cost.
  const Scenario dead = make_scenario(inst, {{0, 0, 0}, {0, 0, 1}, {0, 0, 2}}, 0);
  REQUIRE(dead.absorption_period == 1);
  REQUIRE_FALSE(dead.has_landfall());
  REQUIRE(rh.rollout(dead) == 0.0);

  // Dissipation after one preparation period: only that period's logistics
  // and salvage can accrue, never landfall costs.
  const Scenario late = make_scenario(inst, {{1, 0, 0}, {0, 0, 2}, {0, 0, 2}}, 0);
  REQUIRE(late.absorption_period == 2);
  const double cost = rh.rollout(late);
  REQUIRE(std::isfinite(cost));
  REQUIRE(cost >= -1e-9);
}
