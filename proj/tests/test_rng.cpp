#include <doctest.h>

#include <atomic>
#include <cmath>
#include <cstdlib>
#include <numeric>
#include <vector>

#include "stochsym/parallel.hpp"
#include "stochsym/rng.hpp"

using namespace stochsym;

TEST_CASE("philox4x32-10 known-answer vectors") {
  CHECK(philox4x32({0, 0, 0, 0}, {0, 0}) == PhiloxCounter{0x6627e8d5, 0xe169c58d, 0xbc57ac4c, 0x9b00dbd8});
  CHECK(philox4x32({0xffffffff, 0xffffffff, 0xffffffff, 0xffffffff}, {0xffffffff, 0xffffffff}) ==
        PhiloxCounter{0x408f276d, 0x41c83b0e, 0xa20bc7c6, 0x6d5451fd});
  CHECK(philox4x32({0x243f6a88, 0x85a308d3, 0x13198a2e, 0x03707344}, {0xa4093822, 0x299f31d0}) ==
        PhiloxCounter{0xd16cfe09, 0x94fdcceb, 0x5001e420, 0x24126ea1});
}

TEST_CASE("stream draws are consecutive philox blocks") {
  const std::uint64_t seed = 0x0123456789abcdefULL;
  Stream s(seed, Leg::kReduced, 42);
  for (std::uint32_t block = 0; block < 20; ++block) {
    const auto r = philox4x32({42, 0, static_cast<std::uint32_t>(Leg::kReduced), block},
                              {static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32)});
    CHECK(s() == ((std::uint64_t{r[0]} << 32) | r[1]));
    CHECK(s() == ((std::uint64_t{r[2]} << 32) | r[3]));
  }
}

TEST_CASE("streams are reproducible and separated by leg and index") {
  Stream a(7, Leg::kDirect, 3), b(7, Leg::kDirect, 3), c(7, Leg::kReduced, 3), d(7, Leg::kDirect, 4);
  int same_c = 0, same_d = 0;
  for (int i = 0; i < 100; ++i) {
    const double x = a.normal();
    CHECK(x == b.normal());
    same_c += x == c.normal();
    same_d += x == d.normal();
  }
  CHECK(same_c == 0);
  CHECK(same_d == 0);
}

TEST_CASE("normal draws have unit variance") {
  Stream s(11, Leg::kAux, 0);
  const int n = 200000;
  double m1 = 0.0, m2 = 0.0, m4 = 0.0;
  for (int i = 0; i < n; ++i) {
    const double z = s.normal();
    m1 += z;
    m2 += z * z;
    m4 += z * z * z * z;
  }
  m1 /= n;
  m2 /= n;
  m4 /= n;
  CHECK(std::abs(m1) < 4.0 / std::sqrt(n));
  CHECK(std::abs(m2 - 1.0) < 4.0 * std::sqrt(2.0 / n));
  CHECK(std::abs(m4 - 3.0) < 4.0 * std::sqrt(96.0 / n));
  const double u = s.uniform();
  CHECK(u >= 0.0);
  CHECK(u < 1.0);
}

TEST_CASE("pairwise sum is exact on integers and independent of chunking") {
  std::vector<double> v(1000);
  std::iota(v.begin(), v.end(), 1.0);
  CHECK(pairwise_sum(v) == 500500.0);
  CHECK(pairwise_sum(std::span<const double>()) == 0.0);
}

TEST_CASE("parallel_for covers the range once under any worker count") {
  for (const char* threads : {"1", "3", "8"}) {
    setenv("STOCHSYM_THREADS", threads, 1);
    CHECK(worker_count() == std::atoi(threads));
    std::vector<std::atomic<int>> hits(1001);
    parallel_for(hits.size(), [&](std::size_t b, std::size_t e) {
      for (std::size_t i = b; i < e; ++i) ++hits[i];
    });
    bool once = true;
    for (auto& h : hits) once = once && h == 1;
    CHECK(once);
  }
  unsetenv("STOCHSYM_THREADS");
}
