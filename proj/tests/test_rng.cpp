#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "enose/rng.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <set>
#include <vector>

using namespace enose;

TEST_CASE("same seed, same stream") {
  Rng a(123), b(123);
  for (int i = 0; i < 100; ++i) CHECK(a.next_u64() == b.next_u64());
}

TEST_CASE("derived streams differ across tags and indices") {
  std::set<std::uint64_t> states;
  for (std::uint64_t tag = 1; tag <= 8; ++tag) {
    for (std::uint64_t idx = 0; idx < 16; ++idx) {
      CHECK(states.insert(derive_seed(42, tag, idx)).second);
    }
  }
}

TEST_CASE("below stays in range and covers small moduli") {
  Rng rng(7);
  std::vector<int> seen(5, 0);
  for (int i = 0; i < 5000; ++i) {
    const auto v = rng.below(5);
    REQUIRE(v < 5);
    seen[static_cast<std::size_t>(v)] += 1;
  }
  for (const int count : seen) CHECK(count > 800);
}

TEST_CASE("shuffle is a permutation and deterministic") {
  std::vector<int> v(50);
  std::iota(v.begin(), v.end(), 0);
  Rng a(9);
  a.shuffle(v);
  std::vector<int> w(50);
  std::iota(w.begin(), w.end(), 0);
  Rng b(9);
  b.shuffle(w);
  CHECK(v == w);
  std::sort(v.begin(), v.end());
  std::vector<int> sorted(50);
  std::iota(sorted.begin(), sorted.end(), 0);
  CHECK(v == sorted);
}

TEST_CASE("uniform and normal have sane first moments") {
  Rng rng(11);
  double sum = 0.0;
  const int n = 200000;
  for (int i = 0; i < n; ++i) sum += rng.uniform(10.0, 1000.0);
  CHECK(std::abs(sum / n - 505.0) < 5.0);

  double nsum = 0.0, nsq = 0.0;
  for (int i = 0; i < n; ++i) {
    const double x = rng.normal(2.0, 3.0);
    nsum += x;
    nsq += x * x;
  }
  const double mean = nsum / n;
  const double var = nsq / n - mean * mean;
  CHECK(std::abs(mean - 2.0) < 0.05);
  CHECK(std::abs(var - 9.0) < 0.2);
}
