#include "smarton/rng.hpp"

#include <stdexcept>

namespace smarton {

namespace {
constexpr std::uint64_t kGolden = 0x9E3779B97F4A7C15ULL;
}

std::uint64_t mix64(std::uint64_t z) noexcept {
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

std::uint64_t fnv1a64(std::string_view text) noexcept {
  std::uint64_t h = 0xCBF29CE484222325ULL;
  for (unsigned char c : text) {
    h ^= c;
    h *= 0x100000001B3ULL;
  }
  return h;
}

std::uint64_t CounterRng::word_at(std::uint64_t index) const noexcept {
  return mix64(key_ + (index + 1) * kGolden);
}

std::uint64_t CounterRng::uniform_int(std::uint64_t n) {
  if (n == 0) throw std::invalid_argument("uniform_int: empty range");
  const std::uint64_t threshold = (0 - n) % n;
  for (;;) {
    const std::uint64_t x = next_u64();
    if (x >= threshold) return x % n;
  }
}

CounterRng derive_stream(std::uint64_t seed, std::string_view name) noexcept {
  return CounterRng(mix64(seed ^ mix64(fnv1a64(name))));
}

RngStreams rng_streams(std::uint64_t seed) noexcept {
  return RngStreams{derive_stream(seed, "trace"), derive_stream(seed, "explore"),
                    derive_stream(seed, "probe"), derive_stream(seed, "shuffle")};
}

}  // namespace smarton
