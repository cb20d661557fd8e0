#pragma once

#include <fstream>
#include <stdexcept>
#include <string>

#include <json.hpp>

#include "relief/instance_io.hpp"
#include "relief/sddp.hpp"
#include "relief/twostage.hpp"

namespace relief {

inline json to_json(const TrainConfig& cfg) {
  return json{{"max_iterations", cfg.max_iterations},
              {"time_limit_seconds", cfg.time_limit_seconds},
              {"stability_epsilon", cfg.stability_epsilon},
              {"stability_window", cfg.stability_window},
              {"initial_lower_bound", cfg.initial_lower_bound},
              {"seed", cfg.seed},
              {"scenario_count", cfg.scenario_count},
              {"exact_gap_epsilon", cfg.exact_gap_epsilon}};
}

inline TrainConfig train_config_from_json(const json& j) {
  TrainConfig cfg;
  cfg.max_iterations = j.value("max_iterations", cfg.max_iterations);
  cfg.time_limit_seconds = j.value("time_limit_seconds", cfg.time_limit_seconds);
  cfg.stability_epsilon = j.value("stability_epsilon", cfg.stability_epsilon);
  cfg.stability_window = j.value("stability_window", cfg.stability_window);
  cfg.initial_lower_bound = j.value("initial_lower_bound", cfg.initial_lower_bound);
  cfg.seed = j.value("seed", cfg.seed);
  cfg.scenario_count = j.value("scenario_count", cfg.scenario_count);
  cfg.exact_gap_epsilon = j.value("exact_gap_epsilon", cfg.exact_gap_epsilon);
  return cfg;
}

inline json to_json(const OfflinePolicy& policy) {
  json cuts = json::array();
  for (const auto& [key, list] : policy.pool)
    for (const Cut& c : list)
      cuts.push_back(json{{"t", key.first},
                          {"state", key.second},
                          {"slope", c.slope},
                          {"intercept", c.intercept}});
  return json{{"instance", to_json(policy.inst)},
              {"config", to_json(policy.cfg)},
              {"cuts", std::move(cuts)}};
}

inline OfflinePolicy offline_policy_from_json(const json& j) {
  OfflinePolicy p;
  if (!j.contains("instance") || !j.contains("cuts"))
    throw std::runtime_error("policy file: missing \"instance\" or \"cuts\"");
  p.inst = from_json(j.at("instance"));
  if (j.contains("config")) p.cfg = train_config_from_json(j.at("config"));
  for (const json& c : j.at("cuts")) {
    Cut cut;
    cut.slope = c.at("slope").get<std::vector<double>>();
    cut.intercept = c.at("intercept").get<double>();
    if (static_cast<int>(cut.slope.size()) != p.inst.n_sp())
      throw std::runtime_error("policy file: cut slope dimension mismatch");
    p.pool[{c.at("t").get<int>(), c.at("state").get<int>()}].push_back(std::move(cut));
  }
  return p;
}

inline void save_policy(const OfflinePolicy& policy, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot open " + path + " for writing");
  out << to_json(policy).dump(2) << "\n";
}

inline OfflinePolicy load_policy(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open " + path);
  json j;
  try {
    in >> j;
  } catch (const std::exception& e) {
    throw std::runtime_error("policy file: " + std::string(e.what()));
  }
  return offline_policy_from_json(j);
}

// Committed two-stage plans round-trip the same way.

inline json to_json(const StaticPlan& plan) {
  return json{{"kind", plan.kind == ModelKind::RandomLandfall ? "rand" : "det"},
              {"first_period", plan.first_period},
              {"x", plan.x},
              {"f", plan.f}};
}

inline StaticPlan static_plan_from_json(const json& j) {
  StaticPlan plan;
  const std::string kind = j.at("kind").get<std::string>();
  if (kind != "det" && kind != "rand")
    throw std::runtime_error("plan file: kind must be \"det\" or \"rand\"");
  plan.kind = kind == "rand" ? ModelKind::RandomLandfall : ModelKind::DeterministicLandfall;
  plan.first_period = j.value("first_period", 1);
  plan.x = j.at("x").get<std::vector<std::vector<double>>>();
  plan.f = j.at("f").get<std::vector<std::vector<double>>>();
  if (plan.x.size() != plan.f.size())
    throw std::runtime_error("plan file: x and f must cover the same periods");
  return plan;
}

inline void save_plan(const StaticPlan& plan, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot open " + path + " for writing");
  out << to_json(plan).dump(2) << "\n";
}

inline StaticPlan load_plan(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open " + path);
  json j;
  try {
    in >> j;
  } catch (const std::exception& e) {
    throw std::runtime_error("plan file: " + std::string(e.what()));
  }
  return static_plan_from_json(j);
}

}  // namespace relief
