#pragma once

#include <cstdint>
#include <span>
#include <string_view>

namespace smarton {

/// SplitMix64 finalizer. Bijective on 64-bit words.
std::uint64_t mix64(std::uint64_t z) noexcept;

/// FNV-1a over the bytes of `text`.
std::uint64_t fnv1a64(std::string_view text) noexcept;

/// Counter-based 64-bit generator.
///
/// Draw i of a stream with key k is mix64(k + (i + 1) * 0x9E3779B97F4A7C15),
/// so any draw can be reproduced from (key, i) alone. A stream for
/// (seed, name) has key mix64(seed ^ mix64(fnv1a64(name))). Doubles take the
/// top 53 bits; bounded integers use modulo with rejection of the low
/// (2^64 mod n) words.
class CounterRng {
 public:
  explicit CounterRng(std::uint64_t key = 0) noexcept : key_(key) {}

  std::uint64_t key() const noexcept { return key_; }
  std::uint64_t position() const noexcept { return counter_; }

  std::uint64_t next_u64() noexcept { return word_at(counter_++); }

  /// Uniform in [0, 1).
  double uniform() noexcept { return to_unit(next_u64()); }

  /// Uniform in [0, n). Requires n > 0.
  std::uint64_t uniform_int(std::uint64_t n);

  bool bernoulli(double p) noexcept { return uniform() < p; }

  /// Random access, does not move the stream position.
  std::uint64_t word_at(std::uint64_t index) const noexcept;
  double uniform_at(std::uint64_t index) const noexcept { return to_unit(word_at(index)); }

  static double to_unit(std::uint64_t word) noexcept {
    return static_cast<double>(word >> 11) * 0x1.0p-53;
  }

 private:
  std::uint64_t key_;
  std::uint64_t counter_ = 0;
};

CounterRng derive_stream(std::uint64_t seed, std::string_view name) noexcept;

/// The named substreams every run draws from.
struct RngStreams {
  CounterRng trace;    // event occurrences
  CounterRng explore;  // Phase-2 action choice
  CounterRng probe;    // Phase-3 probe slots
  CounterRng shuffle;  // learning-order shuffles, random entry levels
};

RngStreams rng_streams(std::uint64_t seed) noexcept;

/// Fisher-Yates from the back: for i = n-1..1 swap(v[i], v[uniform_int(i+1)]).
template <typename T>
void shuffle_in_place(std::span<T> values, CounterRng& rng) {
  for (std::size_t i = values.size(); i > 1; --i) {
    const auto j = static_cast<std::size_t>(rng.uniform_int(i));
    std::swap(values[i - 1], values[j]);
  }
}

}  // namespace smarton
