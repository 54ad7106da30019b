// Deterministic counter-keyed random streams. Every ensemble member draws from its own
// stream derived from (master seed, tags...), so results are independent of scheduling
// and worker count. No std:: distributions: the draw sequence is fixed by this file.
#pragma once

#include <array>
#include <cmath>
#include <complex>
#include <cstdint>
#include <numbers>
#include <utility>

namespace oamturb {

inline constexpr std::uint64_t splitmix64_next(std::uint64_t& state) {
  std::uint64_t z = (state += 0x9e3779b97f4a7c15ull);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
  return z ^ (z >> 31);
}

// Hash a seed with an ordered list of tags (strength index, member index, purpose...).
template <typename... Tags>
constexpr std::uint64_t derive_key(std::uint64_t seed, Tags... tags) {
  ((seed = (void(splitmix64_next(seed)), seed ^ (static_cast<std::uint64_t>(tags) * 0xd1b54a32d192ed03ull + 0x8bb84b93962eacc9ull))), ...);
  splitmix64_next(seed);
  return seed;
}

// xoshiro256++ seeded through splitmix64.
class RandomStream {
 public:
  explicit RandomStream(std::uint64_t key) {
    for (auto& s : state_) s = splitmix64_next(key);
    if ((state_[0] | state_[1] | state_[2] | state_[3]) == 0) state_[0] = 1;
  }
  RandomStream(std::uint64_t master_seed, std::uint64_t stream_id)
      : RandomStream(derive_key(master_seed, stream_id)) {}

  std::uint64_t next_u64() {
    const std::uint64_t result = rotl(state_[0] + state_[3], 23) + state_[0];
    const std::uint64_t t = state_[1] << 17;
    state_[2] ^= state_[0];
    state_[3] ^= state_[1];
    state_[1] ^= state_[2];
    state_[0] ^= state_[3];
    state_[2] ^= t;
    state_[3] = rotl(state_[3], 45);
    return result;
  }

  // Uniform in [0, 1) with 53 random bits.
  double next_double() { return double(next_u64() >> 11) * 0x1.0p-53; }

  // Box-Muller pair of independent unit normals.
  std::pair<double, double> next_gaussian_pair() {
    const double u1 = next_double();
    const double u2 = next_double();
    const double radius = std::sqrt(-2.0 * std::log1p(-u1));
    const double angle = 2.0 * std::numbers::pi * u2;
    return {radius * std::cos(angle), radius * std::sin(angle)};
  }

  // Circular complex Gaussian with <|z|^2> = 1.
  std::complex<double> next_complex_gaussian() {
    const auto [g1, g2] = next_gaussian_pair();
    constexpr double half_power = 0.70710678118654752440;
    return {g1 * half_power, g2 * half_power};
  }

 private:
  static constexpr std::uint64_t rotl(std::uint64_t x, int k) {
    return (x << k) | (x >> (64 - k));
  }
  std::array<std::uint64_t, 4> state_{};
};

}  // namespace oamturb
