#include <algorithm>
#include <array>
#include <numeric>
#include <vector>

#include "doctest.h"
#include "smarton/rng.hpp"

using namespace smarton;

TEST_CASE("counter rng draws are addressable by index") {
  CounterRng a(1234);
  std::vector<std::uint64_t> seq;
  for (int i = 0; i < 100; ++i) seq.push_back(a.next_u64());
  CounterRng b(1234);
  for (int i = 99; i >= 0; --i) CHECK(b.word_at(static_cast<std::uint64_t>(i)) == seq[static_cast<std::size_t>(i)]);
  CHECK(b.position() == 0);
  CHECK(a.position() == 100);
}

TEST_CASE("draw formula matches the documented construction") {
  const std::uint64_t key = 77;
  CounterRng r(key);
  CHECK(r.next_u64() == mix64(key + 0x9E3779B97F4A7C15ULL));
  CHECK(r.next_u64() == mix64(key + 2 * 0x9E3779B97F4A7C15ULL));
  CHECK(derive_stream(5, "trace").key() == mix64(5 ^ mix64(fnv1a64("trace"))));
  CHECK(fnv1a64("") == 0xcbf29ce484222325ULL);
  CHECK(fnv1a64("a") == 0xaf63dc4c8601ec8cULL);
}

TEST_CASE("trace stream does not depend on explore draws") {
  auto s1 = rng_streams(9);
  auto s2 = rng_streams(9);
  for (int i = 0; i < 1000; ++i) s2.explore.next_u64();
  for (int i = 0; i < 100; ++i) CHECK(s1.trace.next_u64() == s2.trace.next_u64());
}

TEST_CASE("neighbouring seeds and names give different streams") {
  auto a = rng_streams(41), b = rng_streams(42);
  int same = 0;
  for (int i = 0; i < 64; ++i) same += a.trace.next_u64() == b.trace.next_u64();
  CHECK(same == 0);
  CHECK(a.trace.key() != a.explore.key());
  CHECK(a.probe.key() != a.shuffle.key());
}

TEST_CASE("uniform doubles stay in [0, 1) and pass a chi-square test") {
  CounterRng r = derive_stream(2024, "explore");
  constexpr int bins = 100;
  constexpr int n = 1'000'000;
  std::array<int, bins> hist{};
  for (int i = 0; i < n; ++i) {
    const double u = r.uniform();
    REQUIRE(u >= 0.0);
    REQUIRE(u < 1.0);
    ++hist[static_cast<std::size_t>(u * bins)];
  }
  const double expected = static_cast<double>(n) / bins;
  double chi2 = 0.0;
  for (int h : hist) chi2 += (h - expected) * (h - expected) / expected;
  // 99th percentile of chi-square with 99 degrees of freedom
  CHECK(chi2 < 134.64);
}

TEST_CASE("bounded integers are unbiased and in range") {
  CounterRng r(3);
  std::array<int, 7> hist{};
  for (int i = 0; i < 70000; ++i) {
    const auto v = r.uniform_int(7);
    REQUIRE(v < 7);
    ++hist[v];
  }
  for (int h : hist) CHECK(h == doctest::Approx(10000).epsilon(0.05));
  CHECK_THROWS_AS(r.uniform_int(0), std::invalid_argument);
  CHECK(r.uniform_int(1) == 0);
}

TEST_CASE("shuffle is a reproducible permutation") {
  std::vector<int> v(10), w(10);
  std::iota(v.begin(), v.end(), 1);
  w = v;
  CounterRng a(8), b(8);
  shuffle_in_place(std::span<int>(v), a);
  shuffle_in_place(std::span<int>(w), b);
  CHECK(v == w);
  auto sorted = v;
  std::sort(sorted.begin(), sorted.end());
  std::vector<int> ref(10);
  std::iota(ref.begin(), ref.end(), 1);
  CHECK(sorted == ref);
}
