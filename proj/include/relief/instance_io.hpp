#pragma once

#include <fstream>
#include <stdexcept>
#include <string>

#include <json.hpp>

#include "relief/instance.hpp"

namespace relief {

using json = nlohmann::ordered_json;

namespace detail {

inline const json& require(const json& node, const std::string& key,
                           const std::string& path) {
  auto it = node.find(key);
  if (it == node.end())
    throw std::runtime_error("instance file: missing key \"" + path + "\"");
  return *it;
}

template <typename T>
T get_as(const json& node, const std::string& key, const std::string& path) {
  try {
    return require(node, key, path).get<T>();
  } catch (const nlohmann::json::exception&) {
    throw std::runtime_error("instance file: bad value at \"" + path + "\"");
  }
}

inline json cells_to_json(const std::vector<Interval>& cells) {
  json arr = json::array();
  for (const Interval& c : cells)
    arr.push_back({c.lo, std::isinf(c.hi) ? json("inf") : json(c.hi)});
  return arr;
}

inline std::vector<Interval> cells_from_json(const json& arr, const std::string& path) {
  std::vector<Interval> cells;
  if (!arr.is_array()) throw std::runtime_error("instance file: bad value at \"" + path + "\"");
  for (const json& e : arr) {
    if (!e.is_array() || e.size() != 2)
      throw std::runtime_error("instance file: bad cell at \"" + path + "\"");
    Interval c;
    c.lo = e[0].get<double>();
    c.hi = e[1].is_string() ? kInf : e[1].get<double>();
    cells.push_back(c);
  }
  return cells;
}

inline json chain_to_json(const AttributeChain& c) {
  json node;
  if (c.has_cells()) node["cells"] = cells_to_json(c.cells);
  node["matrix"] = c.matrix;
  return node;
}

inline AttributeChain chain_from_json(const json& node, const std::string& path) {
  AttributeChain c;
  if (node.contains("cells")) c.cells = cells_from_json(node["cells"], path + ".cells");
  c.matrix = get_as<Matrix>(node, "matrix", path + ".matrix");
  return c;
}

}  // namespace detail

inline json to_json(const Instance& inst) {
  using detail::chain_to_json;
  json j;
  json& net = j["network"];
  net["mdc"] = inst.network.mdc;
  net["sps"]["xy"] = inst.network.sp_xy;
  net["sps"]["capacity"] = inst.network.sp_capacity;
  net["dps"]["xy"] = inst.network.dp_xy;

  json& c = j["costs"];
  c["omega"] = inst.costs.omega;
  c["base"] = inst.costs.base;
  c["nu"] = inst.costs.nu;
  c["shortage_penalty"] = inst.costs.shortage_penalty;
  c["salvage_value"] = inst.costs.salvage_value;
  c["holding_rate"] = inst.costs.holding_rate;

  json& d = j["demand"];
  d["d_bar"] = inst.demand_params.d_bar;
  d["delta_bar"] = inst.demand_params.delta_bar;
  d["m_points"] = inst.demand_params.m_points;

  json& m = j["markov"];
  m["kind"] = inst.markov.random_kind() ? "rand" : "det";
  m["intensity"] = chain_to_json(inst.markov.intensity);
  m["track_x"] = chain_to_json(inst.markov.track_x);
  if (inst.markov.random_kind()) m["track_y"] = chain_to_json(inst.markov.track_y);

  json& init = j["initial"];
  init["state"]["alpha"] = inst.initial_state.alpha;
  init["state"]["lx"] = inst.initial_state.lx;
  if (inst.markov.random_kind()) init["state"]["ly"] = inst.initial_state.ly;
  init["inventory"] = inst.initial_inventory;

  j["horizon"] = inst.horizon;
  return j;
}

inline Instance from_json(const json& j) {
  using detail::chain_from_json;
  using detail::get_as;
  using detail::require;

  Instance inst;
  const json& net = require(j, "network", "network");
  inst.network.mdc = get_as<Point>(net, "mdc", "network.mdc");
  const json& sps = require(net, "sps", "network.sps");
  inst.network.sp_xy = get_as<std::vector<Point>>(sps, "xy", "network.sps.xy");
  inst.network.sp_capacity =
      get_as<std::vector<double>>(sps, "capacity", "network.sps.capacity");
  const json& dps = require(net, "dps", "network.dps");
  inst.network.dp_xy = get_as<std::vector<Point>>(dps, "xy", "network.dps.xy");

  const json& c = require(j, "costs", "costs");
  inst.costs.omega = get_as<double>(c, "omega", "costs.omega");
  inst.costs.base = get_as<double>(c, "base", "costs.base");
  inst.costs.nu = get_as<double>(c, "nu", "costs.nu");
  inst.costs.shortage_penalty =
      get_as<double>(c, "shortage_penalty", "costs.shortage_penalty");
  inst.costs.salvage_value = get_as<double>(c, "salvage_value", "costs.salvage_value");
  inst.costs.holding_rate = get_as<double>(c, "holding_rate", "costs.holding_rate");

  const json& d = require(j, "demand", "demand");
  inst.demand_params.d_bar = get_as<double>(d, "d_bar", "demand.d_bar");
  inst.demand_params.delta_bar = get_as<double>(d, "delta_bar", "demand.delta_bar");
  inst.demand_params.m_points = get_as<int>(d, "m_points", "demand.m_points");

  const json& m = require(j, "markov", "markov");
  const std::string kind = get_as<std::string>(m, "kind", "markov.kind");
  if (kind == "det") inst.markov.kind = ModelKind::DeterministicLandfall;
  else if (kind == "rand") inst.markov.kind = ModelKind::RandomLandfall;
  else throw std::runtime_error("instance file: bad value at \"markov.kind\"");
  inst.markov.intensity =
      chain_from_json(require(m, "intensity", "markov.intensity"), "markov.intensity");
  inst.markov.track_x =
      chain_from_json(require(m, "track_x", "markov.track_x"), "markov.track_x");
  if (inst.markov.random_kind())
    inst.markov.track_y =
        chain_from_json(require(m, "track_y", "markov.track_y"), "markov.track_y");

  const json& init = require(j, "initial", "initial");
  const json& st = require(init, "state", "initial.state");
  inst.initial_state.alpha = get_as<int>(st, "alpha", "initial.state.alpha");
  inst.initial_state.lx = get_as<int>(st, "lx", "initial.state.lx");
  inst.initial_state.ly =
      inst.markov.random_kind() ? get_as<int>(st, "ly", "initial.state.ly") : -1;
  inst.initial_inventory =
      get_as<std::vector<double>>(init, "inventory", "initial.inventory");

  inst.horizon = get_as<int>(j, "horizon", "horizon");
  inst.markov.horizon = inst.horizon;
  inst.validate();
  return inst;
}

inline void save(const Instance& inst, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot open for writing: " + path);
  out << to_json(inst).dump(2) << '\n';
}

inline Instance load(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open instance file: " + path);
  json j;
  try {
    in >> j;
  } catch (const nlohmann::json::exception& e) {
    throw std::runtime_error("instance file " + path + ": " + e.what());
  }
  return from_json(j);
}

}  // namespace relief
