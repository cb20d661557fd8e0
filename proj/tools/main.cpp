// Command-line front end: instance generation, policy training, out-of-sample
// evaluation, experiment sweeps over nu, and sweep-CSV aggregation.

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "relief/evalstats.hpp"
#include "relief/instance_io.hpp"
#include "relief/policy_io.hpp"

namespace {

using namespace relief;

ModelKind parse_kind(const std::string& s) {
  if (s == "det") return ModelKind::DeterministicLandfall;
  if (s == "rand") return ModelKind::RandomLandfall;
  throw std::runtime_error("unknown kind \"" + s + "\" (expected det or rand)");
}

void write_train_log(const std::string& path, const std::vector<TrainLogEntry>& log) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot open " + path + " for writing");
  out << "iteration,lower_bound,seconds\n";
  for (const TrainLogEntry& e : log)
    out << e.iteration << ',' << e.lower_bound << ',' << e.seconds << '\n';
}

// Appends a report row, writing the header when the file is new/empty.
void append_report(const std::string& path, const Instance& inst, std::uint64_t seed,
                   const EvalReport& r) {
  const bool fresh = !std::filesystem::exists(path) || std::filesystem::file_size(path) == 0;
  std::ofstream out(path, std::ios::app);
  if (!out) throw std::runtime_error("cannot open " + path + " for writing");
  if (fresh) out << kEvalCsvHeader << '\n';
  write_csv_row(out, inst, seed, r);
}

void append_fbar(const std::string& path, const EvalReport& r) {
  const bool fresh = !std::filesystem::exists(path) || std::filesystem::file_size(path) == 0;
  std::ofstream out(path, std::ios::app);
  if (!out) throw std::runtime_error("cannot open " + path + " for writing");
  if (fresh) out << kFbarCsvHeader << '\n';
  write_fbar_rows(out, r);
}

TwoStageResult train_static(const Instance& inst, const TrainConfig& cfg) {
  return inst.random_kind() ? train_static_rand(inst, cfg) : train_static_det(inst, cfg);
}

// Shared by `evaluate` and `sweep`: trains whatever the model needs and
// evaluates it on the given scenario set against precomputed CV costs.
EvalReport run_model(const std::string& model, const Instance& inst,
                     const TrainConfig& cfg, std::span<const Scenario> scen,
                     const PathCosts& cv, int workers) {
  if (model == "cv") return make_report("cv", cv, cv.cost, 0.0);
  if (model == "famsp") {
    TrainResult tr = train(inst, cfg);
    return make_report("famsp", offline_policy_costs(tr.policy, scen, workers), cv.cost,
                       tr.train_seconds);
  }
  if (model == "static2ssp") {
    TwoStageResult ts = train_static(inst, cfg);
    return make_report("static2ssp", static_plan_costs(ts.plan, inst, scen, workers),
                       cv.cost, ts.train_seconds);
  }
  if (model == "rh2ssp")
    return make_report("rh2ssp", rolling_policy_costs(inst, cfg, scen, workers), cv.cost,
                       0.0);
  throw std::runtime_error("unknown model \"" + model + "\"");
}

int run(int argc, char** argv) {
  CLI::App app{"Hurricane disaster-relief logistics: Markov-chain storm model, "
               "adaptive and two-stage prepositioning policies, out-of-sample stats"};
  app.require_subcommand(1);

  // ---- gen ----
  auto* gen_cmd = app.add_subcommand("gen", "generate a synthetic instance file");
  GenParams gp;
  std::string gen_kind = "det", gen_out = "instance.json";
  gen_cmd->add_option("--sps", gp.sp_count, "number of staging points")->capture_default_str();
  gen_cmd->add_option("--dps", gp.dp_count, "number of demand points")->capture_default_str();
  gen_cmd->add_option("--nu", gp.nu, "late-procurement cost growth factor")->capture_default_str();
  gen_cmd->add_option("--alpha1", gp.alpha1, "initial intensity category")->capture_default_str();
  gen_cmd->add_option("--kind", gen_kind, "landfall time model: det or rand")->capture_default_str();
  gen_cmd->add_option("--seed", gp.seed, "generator seed")->capture_default_str();
  gen_cmd->add_option("--out", gen_out, "output instance file")->capture_default_str();

  // ---- shared train/evaluate options ----
  TrainConfig cfg;
  cfg.time_limit_seconds = 120.0;
  std::uint64_t seed = 1;
  std::string instance_path;

  // ---- train ----
  auto* train_cmd = app.add_subcommand("train", "train a policy/plan and save it");
  std::string train_model, train_out = "policy.json", train_log;
  train_cmd->add_option("--model", train_model, "famsp or static2ssp")->required();
  train_cmd->add_option("--instance", instance_path, "instance file")->required();
  train_cmd->add_option("--out", train_out, "output policy/plan file")->capture_default_str();
  train_cmd->add_option("--log", train_log, "training log CSV (iteration, lower bound, seconds)");
  train_cmd->add_option("--seed", seed, "training seed")->capture_default_str();
  train_cmd->add_option("--time-limit", cfg.time_limit_seconds, "training time limit, seconds")
      ->capture_default_str();
  train_cmd->add_option("--max-iters", cfg.max_iterations, "iteration cap")->capture_default_str();
  train_cmd->add_option("--scenarios", cfg.scenario_count,
                        "sampled scenarios per two-stage training")->capture_default_str();

  // ---- evaluate ----
  auto* eval_cmd = app.add_subcommand("evaluate", "evaluate a policy out of sample");
  std::string eval_model, policy_path, plan_path;
  std::string eval_out = "report.csv", fbar_out;
  int n_paths = 500;
  eval_cmd->add_option("--model", eval_model, "cv, famsp, static2ssp, or rh2ssp")->required();
  eval_cmd->add_option("--instance", instance_path, "instance file")->required();
  eval_cmd->add_option("--policy", policy_path, "trained policy file (famsp)");
  eval_cmd->add_option("--plan", plan_path, "trained plan file (static2ssp)");
  eval_cmd->add_option("--N", n_paths, "evaluation paths")->capture_default_str();
  eval_cmd->add_option("--seed", seed, "evaluation (and rh training) seed")->capture_default_str();
  eval_cmd->add_option("--time-limit", cfg.time_limit_seconds, "per-roll training time limit")
      ->capture_default_str();
  eval_cmd->add_option("--out", eval_out, "report CSV (appended)")->capture_default_str();
  eval_cmd->add_option("--fbar-out", fbar_out, "procurement-timing CSV (appended)");

  // ---- sweep ----
  auto* sweep_cmd = app.add_subcommand("sweep", "run a model grid over nu and append CSV rows");
  std::vector<std::string> sweep_models = {"cv", "famsp", "static2ssp", "rh2ssp"};
  std::vector<double> sweep_nus = {0.001, 0.6, 5.0};
  std::vector<std::string> sweep_kinds = {"det", "rand"};
  std::string sweep_out = "sweep.csv", sweep_fbar;
  GenParams sgp;
  sweep_cmd->add_option("--models", sweep_models, "models to run")->delimiter(',')
      ->capture_default_str();
  sweep_cmd->add_option("--nu", sweep_nus, "nu values")->delimiter(',')->capture_default_str();
  sweep_cmd->add_option("--kind", sweep_kinds, "kinds to run (det, rand)")->delimiter(',')
      ->capture_default_str();
  sweep_cmd->add_option("--sps", sgp.sp_count, "staging points")->capture_default_str();
  sweep_cmd->add_option("--dps", sgp.dp_count, "demand points")->capture_default_str();
  sweep_cmd->add_option("--alpha1", sgp.alpha1, "initial intensity")->capture_default_str();
  sweep_cmd->add_option("--N", n_paths, "evaluation paths per cell")->capture_default_str();
  sweep_cmd->add_option("--seed", seed, "seed for generation, training, evaluation")
      ->capture_default_str();
  sweep_cmd->add_option("--time-limit", cfg.time_limit_seconds, "per-model training limit")
      ->capture_default_str();
  sweep_cmd->add_option("--out", sweep_out, "report CSV (appended)")->capture_default_str();
  sweep_cmd->add_option("--fbar-out", sweep_fbar, "procurement-timing CSV (appended)");

  // ---- report ----
  auto* report_cmd = app.add_subcommand("report", "aggregate a sweep CSV to per-(model, nu) means");
  std::string report_in, report_out;
  report_cmd->add_option("--in", report_in, "sweep CSV")->required();
  report_cmd->add_option("--out", report_out, "aggregated CSV (otherwise stdout only)");

  CLI11_PARSE(app, argc, argv);
  const int workers = worker_count_from_env();

  if (gen_cmd->parsed()) {
    gp.kind = parse_kind(gen_kind);
    save(generate(gp), gen_out);
    std::cout << "wrote " << gen_out << "\n";
    return 0;
  }

  if (train_cmd->parsed()) {
    const Instance inst = load(instance_path);
    cfg.seed = seed;
    if (train_model == "famsp") {
      TrainResult tr = relief::train(inst, cfg);
      save_policy(tr.policy, train_out);
      if (!train_log.empty()) write_train_log(train_log, tr.log);
      std::cout << "famsp: lower bound " << tr.lower_bound << " after " << tr.log.size()
                << " iterations (" << tr.stop_reason << ", " << tr.train_seconds
                << " s); wrote " << train_out << "\n";
    } else if (train_model == "static2ssp") {
      TwoStageResult ts = train_static(inst, cfg);
      save_plan(ts.plan, train_out);
      if (!train_log.empty()) write_train_log(train_log, ts.log);
      std::cout << "static2ssp: value " << ts.value << " after " << ts.log.size()
                << " iterations (" << ts.stop_reason << ", " << ts.train_seconds
                << " s); wrote " << train_out << "\n";
    } else {
      throw std::runtime_error("unknown train model \"" + train_model +
                               "\" (expected famsp or static2ssp)");
    }
    return 0;
  }

  if (eval_cmd->parsed()) {
    if (n_paths < 1) throw std::runtime_error("--N must be at least 1");
    const Instance inst = load(instance_path);
    cfg.seed = seed;
    const auto scen = make_eval_scenarios(inst, n_paths, seed);
    const PathCosts cv = clairvoyant_costs(inst, scen, workers);
    EvalReport r;
    if (eval_model == "famsp" && !policy_path.empty()) {
      const OfflinePolicy policy = load_policy(policy_path);
      if (policy.inst.random_kind() != inst.random_kind())
        throw std::runtime_error("policy kind does not match the instance");
      r = make_report("famsp", offline_policy_costs(policy, scen, workers), cv.cost, 0.0);
    } else if (eval_model == "static2ssp" && !plan_path.empty()) {
      const StaticPlan plan = load_plan(plan_path);
      if ((plan.kind == ModelKind::RandomLandfall) != inst.random_kind())
        throw std::runtime_error("plan kind does not match the instance");
      r = make_report("static2ssp", static_plan_costs(plan, inst, scen, workers), cv.cost,
                      0.0);
    } else {
      r = run_model(eval_model, inst, cfg, scen, cv, workers);
    }
    append_report(eval_out, inst, seed, r);
    if (!fbar_out.empty()) append_fbar(fbar_out, r);
    std::cout << r.model << ": z_hat " << r.z_hat << " +- " << r.ci_halfwidth
              << " (cv " << r.cv_mean << ", gap " << r.gap_pct << "%); wrote "
              << eval_out << "\n";
    return 0;
  }

  if (sweep_cmd->parsed()) {
    if (n_paths < 1) throw std::runtime_error("--N must be at least 1");
    cfg.seed = seed;
    sgp.seed = seed;
    for (const std::string& kind : sweep_kinds) {
      sgp.kind = parse_kind(kind);
      for (double nu : sweep_nus) {
        sgp.nu = nu;
        const Instance inst = generate(sgp);
        const auto scen = make_eval_scenarios(inst, n_paths, seed);
        const PathCosts cv = clairvoyant_costs(inst, scen, workers);
        for (const std::string& model : sweep_models) {
          const EvalReport r = run_model(model, inst, cfg, scen, cv, workers);
          append_report(sweep_out, inst, seed, r);
          if (!sweep_fbar.empty()) append_fbar(sweep_fbar, r);
          std::cout << kind << " nu=" << nu << " " << r.model << ": z_hat " << r.z_hat
                    << " +- " << r.ci_halfwidth << " (gap " << r.gap_pct << "%)\n";
        }
      }
    }
    std::cout << "wrote " << sweep_out << "\n";
    return 0;
  }

  // report: mean z_hat (and gap) per (model, nu) over a sweep CSV.
  std::ifstream in(report_in);
  if (!in) throw std::runtime_error("cannot open " + report_in);
  std::string line;
  if (!std::getline(in, line)) throw std::runtime_error(report_in + " is empty");
  std::map<std::pair<std::string, std::string>, std::pair<std::vector<double>, std::vector<double>>>
      groups;  // (model, nu) -> (z_hat list, gap list)
  while (std::getline(in, line)) {
    std::vector<std::string> cells;
    std::stringstream ss(line);
    for (std::string c; std::getline(ss, c, ',');) cells.push_back(c);
    if (cells.size() < 14) continue;
    auto& [zs, gaps] = groups[{cells[0], cells[2]}];
    zs.push_back(std::stod(cells[8]));
    gaps.push_back(std::stod(cells[11]));
  }
  if (groups.empty()) throw std::runtime_error(report_in + " has no data rows");
  std::ostringstream table;
  table << "model,nu,mean_z_hat,mean_gap_pct,rows\n";
  for (const auto& [key, lists] : groups) {
    const auto& [zs, gaps] = lists;
    table << key.first << ',' << key.second << ','
          << detail::pairwise_sum(zs) / zs.size() << ','
          << detail::pairwise_sum(gaps) / gaps.size() << ',' << zs.size() << '\n';
  }
  std::cout << table.str();
  if (!report_out.empty()) {
    std::ofstream out(report_out);
    if (!out) throw std::runtime_error("cannot open " + report_out + " for writing");
    out << table.str();
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  try {
    return run(argc, argv);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
}
