#pragma once

#include <array>
#include <atomic>
#include <cstdint>
#include <string_view>

namespace htmsp::rng {

// Draw streams. Keying every draw by a stream tag keeps pool membership and
// permanence values uncorrelated even though both are indexed by the same
// (column, input) pair.
enum class Stream : std::uint64_t {
  kPotentialPool = 1,
  kPermanence = 2,
  kShuffle = 3,
};

namespace detail {

inline std::array<std::atomic<std::uint64_t>, 4>& counters() {
  static std::array<std::atomic<std::uint64_t>, 4> c{};
  return c;
}

constexpr std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ull;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ull;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebull;
  return x ^ (x >> 31);
}

inline void count_draw(Stream stream) {
  counters()[static_cast<std::size_t>(stream)].fetch_add(1, std::memory_order_relaxed);
}

}  // namespace detail

// Counter-based generator: a SplitMix64 finalizer chained over the key
// (seed, stream, a, b). The value depends only on the key, never on call
// order, so results are identical across iteration orders and threads.
constexpr std::uint64_t key_hash(std::uint64_t seed, Stream stream, std::uint64_t a,
                                 std::uint64_t b) {
  std::uint64_t h = detail::splitmix64(seed);
  h = detail::splitmix64(h ^ static_cast<std::uint64_t>(stream));
  h = detail::splitmix64(h ^ a);
  return detail::splitmix64(h ^ b);
}

// Uniform draw in [0, 1) from the top 53 bits of the key hash.
inline double uniform(std::uint64_t seed, Stream stream, std::uint64_t a, std::uint64_t b) {
  detail::count_draw(stream);
  return static_cast<double>(key_hash(seed, stream, a, b) >> 11) * 0x1.0p-53;
}

// Unbiased draw in [0, bound) via the 128-bit multiply reduction.
inline std::uint64_t bounded(std::uint64_t seed, Stream stream, std::uint64_t a, std::uint64_t b,
                             std::uint64_t bound) {
  detail::count_draw(stream);
  const unsigned __int128 wide =
      static_cast<unsigned __int128>(key_hash(seed, stream, a, b)) * bound;
  return static_cast<std::uint64_t>(wide >> 64);
}

// Instrumentation: per-stream tallies of consumed draws. Used to verify that
// rule-based encoding touches no randomness at all.
inline void reset_draw_counts() {
  for (auto& c : detail::counters()) c.store(0, std::memory_order_relaxed);
}

inline std::uint64_t draw_count(Stream stream) {
  return detail::counters()[static_cast<std::size_t>(stream)].load(std::memory_order_relaxed);
}

inline std::uint64_t draw_count() {
  std::uint64_t total = 0;
  for (auto& c : detail::counters()) total += c.load(std::memory_order_relaxed);
  return total;
}

constexpr std::uint64_t fnv1a(std::string_view s) {
  std::uint64_t h = 0xcbf29ce484222325ull;
  for (char ch : s) {
    h ^= static_cast<unsigned char>(ch);
    h *= 0x100000001b3ull;
  }
  return h;
}

}  // namespace htmsp::rng
