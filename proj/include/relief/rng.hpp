#pragma once

#include <cstdint>
#include <initializer_list>
#include <span>
#include <stdexcept>
#include <vector>

namespace relief {

// Counter-free splittable PRNG built on splitmix64. A stream is identified by
// a root seed plus a list of tags (e.g. {seed, "eval", path_index}), so
// independent consumers can derive disjoint streams without shared state.
// All outputs are bit-reproducible across platforms.
class RngStream {
 public:
  explicit RngStream(std::uint64_t seed) : state_(mix(seed ^ kGolden)) {}

  RngStream(std::uint64_t seed, std::initializer_list<std::uint64_t> tags)
      : RngStream(seed) {
    for (std::uint64_t t : tags) absorb(t);
  }

  // Derives a child stream; the parent is not advanced.
  RngStream split(std::uint64_t tag) const {
    RngStream child(*this);
    child.absorb(tag);
    return child;
  }

  std::uint64_t next_u64() {
    state_ += kGolden;
    return mix(state_);
  }

  // Uniform in [0, 1) with 53 bits of precision.
  double next_double() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

  double uniform(double lo, double hi) { return lo + (hi - lo) * next_double(); }

  // Samples an index proportional to the (nonnegative) weights. Weights are
  // expected to sum to ~1; any residual mass falls on the last positive entry.
  int categorical(std::span<const double> weights) {
    double u = next_double();
    double acc = 0.0;
    int last_positive = -1;
    for (int k = 0; k < static_cast<int>(weights.size()); ++k) {
      if (weights[k] <= 0.0) continue;
      acc += weights[k];
      last_positive = k;
      if (u < acc) return k;
    }
    if (last_positive < 0) throw std::invalid_argument("categorical: all weights are zero");
    return last_positive;
  }

 private:
  static constexpr std::uint64_t kGolden = 0x9e3779b97f4a7c15ull;

  static std::uint64_t mix(std::uint64_t z) {
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
    return z ^ (z >> 31);
  }

  void absorb(std::uint64_t tag) { state_ = mix(state_ ^ mix(tag + kGolden)); }

  std::uint64_t state_;
};

}  // namespace relief
