#pragma once

#include <span>
#include <variant>
#include <vector>

#include "relief/instance.hpp"
#include "relief/lp.hpp"

namespace relief {

// Variable indices of one period block inside a LinearProgram.
struct StageVars {
  std::vector<int> x;       // inventory per SP
  std::vector<int> f;       // flow per transfer arc (MDC arcs first)
  std::vector<int> y;       // delivery, row-major i * |J| + j (empty if absent)
  std::vector<int> e_bar;   // salvage per SP (random-kind blocks)
  std::vector<int> e_und;   // shortage per DP (random-kind blocks)
  int balance_row0 = -1;    // first of |I| balance rows
  int outflow_row0 = -1;    // first of |I| outflow-cap rows
};

// How the previous period's inventory enters the block: as LP variables of an
// earlier block (extensive/deterministic-equivalent forms), or as link columns
// whose values are supplied at solve time (stage problems, first periods).
struct PrevVars {
  std::span<const int> x;
};
struct PrevLinks {
  int base = 0;
};
using PrevInventory = std::variant<PrevVars, PrevLinks>;

enum class StageForm {
  Prep,         // deterministic kind, t < T: inventory + transfer flows only
  Terminal,     // deterministic kind, t = T: adds deliveries y
  Transient,    // random kind: full (x, f, y, salvage, shortage) block
};

namespace detail {
inline void add_prev(LinearProgram& lp, int row, const PrevInventory& prev, int i,
                     double var_coeff) {
  // Row is written with x_prev on the right-hand side: as a variable it moves
  // to the left with opposite sign; as a link it contributes +1 * value.
  if (const auto* pv = std::get_if<PrevVars>(&prev))
    lp.set_coeff(row, pv->x[i], -var_coeff);
  else
    lp.set_link(row, std::get<PrevLinks>(prev).base + i, var_coeff);
}
}  // namespace detail

// Appends the period-t variables and rows to `lp`, scaling all objective
// coefficients by `weight` (node probability in tree LPs, 1 in stage LPs).
// `demand` must have |J| entries for forms with deliveries and may be empty
// for Prep. Returns the indices of the created variables and rows.
inline StageVars append_stage_block(LinearProgram& lp, const Instance& inst, int t,
                                    StageForm form, const PrevInventory& prev,
                                    std::span<const double> demand,
                                    double weight = 1.0) {
  const int I = inst.n_sp();
  const int J = inst.n_dp();
  const auto arcs = transfer_arcs(I);
  const double p = inst.costs.shortage_penalty;
  const double q = inst.costs.salvage_value;
  const double ch = inst.costs.holding_cost();
  const double ht = inst.costs.procurement_surcharge(t);
  StageVars sv;

  double total_demand = 0.0;
  if (form != StageForm::Prep)
    for (double d : demand) total_demand += d;

  // Terminal deterministic blocks fold shortage p(d - sum y) and salvage
  // q(x_T - sum y) into the y and x coefficients plus a constant.
  const double x_cost = ch + (form == StageForm::Terminal ? q : 0.0);
  for (int i = 0; i < I; ++i) sv.x.push_back(lp.add_variable(weight * x_cost));
  for (const Arc& a : arcs) {
    double c = transfer_cost(inst, a.from, a.to, t);
    if (a.from < 0) c += ht;
    sv.f.push_back(lp.add_variable(weight * c));
  }
  if (form != StageForm::Prep) {
    for (int i = 0; i < I; ++i)
      for (int j = 0; j < J; ++j) {
        double c = delivery_cost(inst, i, j, t);
        if (form == StageForm::Terminal) c -= p + q;
        sv.y.push_back(lp.add_variable(weight * c));
      }
  }
  if (form == StageForm::Terminal) lp.add_objective_constant(weight * p * total_demand);
  if (form == StageForm::Transient) {
    for (int i = 0; i < I; ++i) sv.e_bar.push_back(lp.add_variable(weight * q));
    for (int j = 0; j < J; ++j) sv.e_und.push_back(lp.add_variable(weight * p));
  }

  // Balance: x_t + outflow - inflow (+ deliveries + salvage) = x_{t-1}.
  sv.balance_row0 = lp.n_rows();
  for (int i = 0; i < I; ++i) {
    const int row = lp.add_row(RowSense::Eq, 0.0);
    lp.set_coeff(row, sv.x[i], 1.0);
    for (int a = 0; a < static_cast<int>(arcs.size()); ++a) {
      if (arcs[a].from == i) lp.set_coeff(row, sv.f[a], 1.0);
      if (arcs[a].to == i) lp.set_coeff(row, sv.f[a], -1.0);
    }
    if (form == StageForm::Transient) {
      for (int j = 0; j < J; ++j) lp.set_coeff(row, sv.y[i * J + j], 1.0);
      lp.set_coeff(row, sv.e_bar[i], 1.0);
    }
    detail::add_prev(lp, row, prev, i, 1.0);
  }

  // Outflow to other SPs cannot exceed the inventory carried in.
  sv.outflow_row0 = lp.n_rows();
  for (int i = 0; i < I; ++i) {
    const int row = lp.add_row(RowSense::Le, 0.0);
    for (int a = 0; a < static_cast<int>(arcs.size()); ++a)
      if (arcs[a].from == i) lp.set_coeff(row, sv.f[a], 1.0);
    detail::add_prev(lp, row, prev, i, 1.0);
  }

  for (int i = 0; i < I; ++i) {
    const int row = lp.add_row(RowSense::Le, inst.network.sp_capacity[i]);
    lp.set_coeff(row, sv.x[i], 1.0);
  }

  if (form == StageForm::Terminal) {
    for (int i = 0; i < I; ++i) {
      const int row = lp.add_row(RowSense::Le, 0.0);
      for (int j = 0; j < J; ++j) lp.set_coeff(row, sv.y[i * J + j], 1.0);
      lp.set_coeff(row, sv.x[i], -1.0);
    }
    for (int j = 0; j < J; ++j) {
      const int row = lp.add_row(RowSense::Le, demand[j]);
      for (int i = 0; i < I; ++i) lp.set_coeff(row, sv.y[i * J + j], 1.0);
    }
  }
  if (form == StageForm::Transient) {
    for (int j = 0; j < J; ++j) {
      const int row = lp.add_row(RowSense::Ge, demand[j]);
      for (int i = 0; i < I; ++i) lp.set_coeff(row, sv.y[i * J + j], 1.0);
      lp.set_coeff(row, sv.e_und[j], 1.0);
    }
  }
  return sv;
}

// Immediate cost of a period block at the given primal values (cut/θ terms
// excluded); mirrors the objective built by append_stage_block with weight 1.
inline double stage_cost(const Instance& inst, int t, StageForm form,
                         const StageVars& sv, const LpSolution& sol,
                         std::span<const double> demand) {
  const int I = inst.n_sp();
  const int J = inst.n_dp();
  const auto arcs = transfer_arcs(I);
  const double p = inst.costs.shortage_penalty;
  const double q = inst.costs.salvage_value;
  double cost = 0.0;
  for (int i = 0; i < I; ++i) cost += inst.costs.holding_cost() * sol.x[sv.x[i]];
  for (int a = 0; a < static_cast<int>(arcs.size()); ++a) {
    double c = transfer_cost(inst, arcs[a].from, arcs[a].to, t);
    if (arcs[a].from < 0) c += inst.costs.procurement_surcharge(t);
    cost += c * sol.x[sv.f[a]];
  }
  if (form == StageForm::Prep) return cost;
  double delivered = 0.0, total_demand = 0.0;
  for (int i = 0; i < I; ++i)
    for (int j = 0; j < J; ++j) {
      cost += delivery_cost(inst, i, j, t) * sol.x[sv.y[i * J + j]];
      delivered += sol.x[sv.y[i * J + j]];
    }
  for (double d : demand) total_demand += d;
  if (form == StageForm::Terminal) {
    double inv = 0.0;
    for (int i = 0; i < I; ++i) inv += sol.x[sv.x[i]];
    cost += p * (total_demand - delivered) + q * (inv - delivered);
  } else {
    for (int j = 0; j < J; ++j) cost += p * sol.x[sv.e_und[j]];
    for (int i = 0; i < I; ++i) cost += q * sol.x[sv.e_bar[i]];
  }
  return cost;
}

}  // namespace relief
