#ifndef EVLAB_RNG_HPP
#define EVLAB_RNG_HPP

#include <array>
#include <cstdint>
#include <random>

namespace evlab {

using Engine = std::mt19937_64;

/// Independent random streams used by one replicate. Paths and indicators
/// never share a stream, so the indicator sequence is independent of the path.
enum class Stream : std::uint64_t { path = 1, indicators = 2, auxiliary = 3 };

/// (base seed, replicate index) pair identifying one replicate's randomness.
struct SeedInfo {
  std::uint64_t base_seed = 0;
  std::uint64_t replicate = 0;

  friend bool operator==(const SeedInfo&, const SeedInfo&) = default;
};

namespace detail {

// splitmix64 output function
constexpr std::uint64_t mix64(std::uint64_t z) noexcept {
  z += 0x9e3779b97f4a7c15ULL;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

}  // namespace detail

/// Counter-based derivation of a 64-bit key from (seed, stream, replicate).
/// The result depends only on its arguments, never on scheduling.
constexpr std::uint64_t stream_key(const SeedInfo& seed, Stream stream) noexcept {
  std::uint64_t k = detail::mix64(seed.base_seed);
  k = detail::mix64(k ^ static_cast<std::uint64_t>(stream));
  return detail::mix64(k ^ detail::mix64(seed.replicate + 0x632be59bd9b4e019ULL));
}

/// Engine for one replicate's stream.
inline Engine make_engine(const SeedInfo& seed, Stream stream) {
  const std::uint64_t key = stream_key(seed, stream);
  const std::uint64_t key2 = detail::mix64(key);
  std::array<std::uint32_t, 4> words{static_cast<std::uint32_t>(key), static_cast<std::uint32_t>(key >> 32),
                                     static_cast<std::uint32_t>(key2), static_cast<std::uint32_t>(key2 >> 32)};
  std::seed_seq seq(words.begin(), words.end());
  return Engine(seq);
}

}  // namespace evlab

#endif  // EVLAB_RNG_HPP
