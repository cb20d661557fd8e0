#include <catch2/catch_amalgamated.hpp>

#include "relief/rng.hpp"

using relief::RngStream;

TEST_CASE("equal seeds and tags produce identical streams") {
  RngStream a(42, {1, 2, 3});
  RngStream b(42, {1, 2, 3});
  for (int i = 0; i < 100; ++i) REQUIRE(a.next_u64() == b.next_u64());
}

TEST_CASE("split derives a child without advancing the parent") {
  RngStream parent(7);
  RngStream before = parent;
  RngStream child = parent.split(11);
  REQUIRE(parent.next_u64() == before.next_u64());
  // Child and parent streams diverge.
  RngStream p2(7);
  REQUIRE(child.next_u64() != p2.next_u64());
}

TEST_CASE("distinct split tags give distinct streams") {
  RngStream root(123);
  RngStream a = root.split(0);
  RngStream b = root.split(1);
  bool differs = false;
  for (int i = 0; i < 8; ++i) differs |= a.next_u64() != b.next_u64();
  REQUIRE(differs);
}

TEST_CASE("next_double lies in [0, 1)") {
  RngStream rng(99);
  for (int i = 0; i < 1000; ++i) {
    const double u = rng.next_double();
    REQUIRE(u >= 0.0);
    REQUIRE(u < 1.0);
  }
}

TEST_CASE("uniform respects its bounds") {
  RngStream rng(5);
  for (int i = 0; i < 1000; ++i) {
    const double u = rng.uniform(-3.0, 4.0);
    REQUIRE(u >= -3.0);
    REQUIRE(u < 4.0);
  }
}

TEST_CASE("categorical matches its weights empirically") {
  RngStream rng(2024);
  const std::vector<double> w{0.2, 0.0, 0.5, 0.3};
  std::vector<int> count(4, 0);
  const int n = 100000;
  for (int i = 0; i < n; ++i) ++count[rng.categorical(w)];
  REQUIRE(count[1] == 0);
  for (int k : {0, 2, 3}) {
    const double se = std::sqrt(w[k] * (1.0 - w[k]) / n);
    REQUIRE(std::abs(count[k] / double(n) - w[k]) < 4.0 * se);
  }
}

TEST_CASE("categorical rejects all-zero weights") {
  RngStream rng(1);
  const std::vector<double> w{0.0, 0.0};
  REQUIRE_THROWS_AS(rng.categorical(w), std::invalid_argument);
}
