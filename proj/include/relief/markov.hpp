#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <iostream>
#include <limits>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "relief/rng.hpp"

namespace relief {

using Matrix = std::vector<std::vector<double>>;

constexpr double kInf = std::numeric_limits<double>::infinity();

// Half-open coordinate interval [lo, hi); hi may be +inf for the last cell.
struct Interval {
  double lo = 0.0;
  double hi = 0.0;
  bool operator==(const Interval&) const = default;
};

// One attribute of the hurricane state (intensity category or a coordinate
// band) together with its one-step transition matrix. Location chains carry
// explicit interval bounds; categorical chains (intensity) leave them empty.
struct AttributeChain {
  std::vector<Interval> cells;  // empty for categorical chains
  Matrix matrix;                // row-stochastic

  int size() const { return static_cast<int>(matrix.size()); }

  bool has_cells() const { return !cells.empty(); }

  // Rows off by at most `renorm_tol` are renormalized (the published matrices
  // are rounded to 3 decimals); larger violations are rejected.
  void validate(const std::string& name, double renorm_tol = 1e-6) {
    if (matrix.empty()) throw std::invalid_argument(name + ": empty transition matrix");
    const std::size_t n = matrix.size();
    if (!cells.empty() && cells.size() != n)
      throw std::invalid_argument(name + ": labels and matrix dimension disagree");
    for (std::size_t i = 0; i < n; ++i) {
      if (matrix[i].size() != n)
        throw std::invalid_argument(name + ": matrix is not square");
      double sum = 0.0;
      for (double p : matrix[i]) {
        if (p < -1e-15 || p > 1.0 + 1e-12)
          throw std::invalid_argument(name + ": transition probability outside [0,1]");
        sum += p;
      }
      const double err = std::abs(sum - 1.0);
      if (err > renorm_tol)
        throw std::invalid_argument(name + ": row " + std::to_string(i) +
                                    " sums to " + std::to_string(sum));
      if (err > 1e-12) {
        std::cerr << "warning: renormalizing row " << i << " of " << name
                  << " (sum " << sum << ")\n";
        for (double& p : matrix[i]) p /= sum;
      }
    }
  }
};

enum class ModelKind { DeterministicLandfall, RandomLandfall };

// Markov state of the hurricane: intensity category, landfall x-cell and,
// in the random-landfall setting, the approach-track y-cell (ly = -1 when
// the model has no y component).
struct HurricaneState {
  int alpha = 0;
  int lx = 0;
  int ly = -1;
  bool operator==(const HurricaneState&) const = default;
};

enum class StateClass { Transient, Absorbing, NotApplicable };

struct MarkovModel {
  ModelKind kind = ModelKind::DeterministicLandfall;
  AttributeChain intensity;
  AttributeChain track_x;
  AttributeChain track_y;  // unused in the deterministic-landfall kind
  int horizon = 0;         // T (deterministic) or T_max (random)

  bool random_kind() const { return kind == ModelKind::RandomLandfall; }

  int joint_size() const {
    return intensity.size() * track_x.size() * (random_kind() ? track_y.size() : 1);
  }

  int state_index(const HurricaneState& s) const {
    int idx = s.alpha * track_x.size() + s.lx;
    if (random_kind()) idx = idx * track_y.size() + s.ly;
    return idx;
  }

  HurricaneState state_from_index(int idx) const {
    HurricaneState s;
    if (random_kind()) {
      s.ly = idx % track_y.size();
      idx /= track_y.size();
    }
    s.lx = idx % track_x.size();
    s.alpha = idx / track_x.size();
    return s;
  }

  void check_state(const HurricaneState& s) const {
    if (s.alpha < 0 || s.alpha >= intensity.size() || s.lx < 0 || s.lx >= track_x.size())
      throw std::invalid_argument("hurricane state out of range");
    if (random_kind()) {
      if (s.ly < 0 || s.ly >= track_y.size())
        throw std::invalid_argument("hurricane state missing/invalid y cell");
    } else if (s.ly >= 0) {
      throw std::invalid_argument("y cell present in deterministic-landfall state");
    }
  }

  void validate() {
    intensity.validate("markov.intensity");
    track_x.validate("markov.track_x");
    if (random_kind()) track_y.validate("markov.track_y");
    if (horizon < 2) throw std::invalid_argument("markov horizon must be >= 2");
  }
};

inline double joint_transition_prob(const MarkovModel& m, const HurricaneState& s,
                                    const HurricaneState& s2) {
  m.check_state(s);
  m.check_state(s2);
  double p = m.intensity.matrix[s.alpha][s2.alpha] * m.track_x.matrix[s.lx][s2.lx];
  if (m.random_kind()) p *= m.track_y.matrix[s.ly][s2.ly];
  return p;
}

inline StateClass classify(const MarkovModel& m, const HurricaneState& s) {
  if (!m.random_kind()) return StateClass::NotApplicable;
  m.check_state(s);
  if (s.alpha == 0 || m.track_y.cells[s.ly].lo >= 0.0) return StateClass::Absorbing;
  return StateClass::Transient;
}

// Landfall happens in the period whose y cell is [-w, 0), i.e. upper bound 0.
inline bool at_landfall(const MarkovModel& m, const HurricaneState& s) {
  if (!m.random_kind()) return false;
  return m.track_y.cells[s.ly].hi == 0.0 && s.alpha > 0;
}

inline HurricaneState sample_step(const MarkovModel& m, const HurricaneState& s,
                                  RngStream& rng) {
  HurricaneState nxt;
  nxt.alpha = rng.categorical(m.intensity.matrix[s.alpha]);
  nxt.lx = rng.categorical(m.track_x.matrix[s.lx]);
  if (m.random_kind()) nxt.ly = rng.categorical(m.track_y.matrix[s.ly]);
  return nxt;
}

// Samples a full trajectory of `horizon` states starting at s1, using a
// stream derived from `seed` only (identical seed, identical path).
inline std::vector<HurricaneState> sample_path(const MarkovModel& m,
                                               const HurricaneState& s1,
                                               std::uint64_t seed) {
  m.check_state(s1);
  RngStream rng(seed, {0x70617468ull});  // "path"
  std::vector<HurricaneState> path{s1};
  for (int t = 1; t < m.horizon; ++t) path.push_back(sample_step(m, path.back(), rng));
  return path;
}

inline std::vector<HurricaneState> sample_path(const MarkovModel& m,
                                               const HurricaneState& s1, RngStream rng) {
  m.check_state(s1);
  std::vector<HurricaneState> path{s1};
  for (int t = 1; t < m.horizon; ++t) path.push_back(sample_step(m, path.back(), rng));
  return path;
}

// Expected number of steps to first hit the given absorbing set, from the
// first-step system E_i = 1 + sum_j P_ij E_j over states outside the set.
inline double expected_absorption_steps(const AttributeChain& chain, int start,
                                        const std::vector<int>& absorbing) {
  const int n = chain.size();
  std::vector<bool> is_abs(n, false);
  for (int a : absorbing) is_abs.at(a) = true;
  if (is_abs[start]) return 0.0;

  std::vector<int> transient, pos(n, -1);
  for (int i = 0; i < n; ++i)
    if (!is_abs[i]) {
      pos[i] = static_cast<int>(transient.size());
      transient.push_back(i);
    }
  const int k = static_cast<int>(transient.size());

  // (I - P_TT) E = 1, solved by Gaussian elimination with partial pivoting.
  std::vector<std::vector<double>> a(k, std::vector<double>(k + 1, 0.0));
  for (int r = 0; r < k; ++r) {
    for (int c = 0; c < k; ++c)
      a[r][c] = (r == c ? 1.0 : 0.0) - chain.matrix[transient[r]][transient[c]];
    a[r][k] = 1.0;
  }
  for (int col = 0; col < k; ++col) {
    int piv = col;
    for (int r = col + 1; r < k; ++r)
      if (std::abs(a[r][col]) > std::abs(a[piv][col])) piv = r;
    if (std::abs(a[piv][col]) < 1e-12)
      throw std::runtime_error("expected_absorption_steps: absorbing set unreachable");
    std::swap(a[col], a[piv]);
    for (int r = 0; r < k; ++r) {
      if (r == col) continue;
      const double fac = a[r][col] / a[col][col];
      if (fac == 0.0) continue;
      for (int c = col; c <= k; ++c) a[r][c] -= fac * a[col][c];
    }
  }
  return a[pos[start]][k] / a[pos[start]][pos[start]];
}

namespace detail {
inline int longest_to_absorption(const AttributeChain& chain, int i,
                                 std::vector<int>& memo, std::vector<int>& on_stack) {
  if (chain.matrix[i][i] == 1.0) return 0;  // absorbing: no further steps
  if (memo[i] >= 0) return memo[i];
  if (on_stack[i])
    throw std::runtime_error("max_steps_to_absorption: chain admits a cycle");
  on_stack[i] = 1;
  int best = -1;
  for (int j = 0; j < chain.size(); ++j) {
    if (chain.matrix[i][j] <= 0.0) continue;
    if (j == i)
      throw std::runtime_error("max_steps_to_absorption: transient self-loop");
    best = std::max(best, 1 + longest_to_absorption(chain, j, memo, on_stack));
  }
  on_stack[i] = 0;
  if (best < 0) throw std::runtime_error("max_steps_to_absorption: dead-end state");
  return memo[i] = best;
}
}  // namespace detail

// Longest possible path length in periods (counting the initial period)
// before certain absorption, from the chain's first state. Requires monotone
// progress, i.e. no positive-probability cycle among transient states.
inline int max_steps_to_absorption(const AttributeChain& chain, int start = 0) {
  std::vector<int> memo(chain.size(), -1), on_stack(chain.size(), 0);
  return 1 + detail::longest_to_absorption(chain, start, memo, on_stack);
}

inline Matrix n_step_matrix(const AttributeChain& chain, int n) {
  if (n < 0) throw std::invalid_argument("n_step_matrix: negative power");
  const int k = chain.size();
  Matrix result(k, std::vector<double>(k, 0.0));
  for (int i = 0; i < k; ++i) result[i][i] = 1.0;
  for (int step = 0; step < n; ++step) {
    Matrix next(k, std::vector<double>(k, 0.0));
    for (int i = 0; i < k; ++i)
      for (int l = 0; l < k; ++l) {
        const double r = result[i][l];
        if (r == 0.0) continue;
        for (int j = 0; j < k; ++j) next[i][j] += r * chain.matrix[l][j];
      }
    result = std::move(next);
  }
  return result;
}

// ---------------------------------------------------------------------------
// Built-in chains (synthetic hurricane model used by the instance generator).

inline AttributeChain builtin_intensity_chain() {
  AttributeChain c;
  c.matrix = {
      {1.00, 0.00, 0.00, 0.00, 0.00, 0.00},
      {0.11, 0.83, 0.06, 0.00, 0.00, 0.00},
      {0.00, 0.15, 0.60, 0.25, 0.00, 0.00},
      {0.00, 0.00, 0.04, 0.68, 0.28, 0.00},
      {0.00, 0.00, 0.00, 0.18, 0.79, 0.03},
      {0.00, 0.00, 0.00, 0.00, 0.50, 0.50},
  };
  c.validate("intensity");
  return c;
}

inline AttributeChain builtin_track_x_chain() {
  AttributeChain c;
  for (int i = 0; i < 7; ++i) c.cells.push_back({100.0 * i, 100.0 * (i + 1)});
  c.matrix = {
      {0.004, 0.300, 0.395, 0.198, 0.049, 0.038, 0.016},
      {0.150, 0.202, 0.249, 0.222, 0.117, 0.033, 0.027},
      {0.198, 0.249, 0.029, 0.168, 0.206, 0.099, 0.051},
      {0.099, 0.222, 0.169, 0.012, 0.150, 0.198, 0.150},
      {0.025, 0.117, 0.206, 0.150, 0.004, 0.150, 0.348},
      {0.019, 0.033, 0.098, 0.198, 0.150, 0.004, 0.498},
      {0.008, 0.019, 0.025, 0.098, 0.198, 0.150, 0.502},
  };
  c.validate("track_x");
  return c;
}

inline AttributeChain builtin_track_y_chain() {
  AttributeChain c;
  for (int i = 0; i < 7; ++i) c.cells.push_back({-350.0 + 50.0 * i, -300.0 + 50.0 * i});
  c.cells.push_back({0.0, kInf});
  c.matrix = {
      {0.0, 0.6, 0.3, 0.1, 0.0, 0.0, 0.0, 0.0},
      {0.0, 0.0, 0.6, 0.3, 0.1, 0.0, 0.0, 0.0},
      {0.0, 0.0, 0.0, 0.6, 0.3, 0.1, 0.0, 0.0},
      {0.0, 0.0, 0.0, 0.0, 0.6, 0.3, 0.1, 0.0},
      {0.0, 0.0, 0.0, 0.0, 0.0, 0.6, 0.3, 0.1},
      {0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 1.0, 0.0},
      {0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 1.0},
      {0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 1.0},
  };
  c.validate("track_y");
  return c;
}

}  // namespace relief
