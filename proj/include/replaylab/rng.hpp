#pragma once

#include <cmath>
#include <cstdint>
#include <limits>
#include <numbers>
#include <random>

namespace replaylab {

// SplitMix64 finalizer. A bijection on 64-bit words, so distinct inputs
// always map to distinct outputs.
constexpr std::uint64_t mix64(std::uint64_t z) noexcept {
  z += 0x9E3779B97F4A7C15ULL;
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

/// Fold an ordered list of keys into one seed.
constexpr std::uint64_t combine_seed(std::uint64_t seed, std::uint64_t key) noexcept {
  return mix64(seed ^ mix64(key));
}

/// Independent sub-streams that make up one replication.
///
/// Policy randomness never shares a stream with reward draws. The seed of
/// stream `tag` for run `run_index` is
///
///     mix64(base ^ mix64(run_index * kStreamCount + tag))
///
/// The inner argument is injective in (run_index, tag) and every step after
/// it is a bijection, so under one base seed no two (run, tag) pairs can
/// share a seed.
enum class StreamTag : std::uint64_t {
  Rewards = 0,  // environment draws and the pre-drawn reward stacks
  Policy0 = 1,  // randomization of the control policy
  Policy1 = 2,  // randomization of the treatment policy
  Aux = 3,      // anything else (e.g. instance sampling for Bayesian runs)
};
inline constexpr std::uint64_t kStreamCount = 4;

constexpr std::uint64_t stream_seed(std::uint64_t base, std::uint64_t run_index, StreamTag tag) noexcept {
  return mix64(base ^ mix64(run_index * kStreamCount + static_cast<std::uint64_t>(tag)));
}

/// Long-lived stream owned by one run.
using RunEngine = std::mt19937_64;

/// Small-state generator used for per-period policy streams. Seeding is one
/// store, which matters because a fresh stream is derived every period.
class SplitMix64 {
 public:
  using result_type = std::uint64_t;

  explicit constexpr SplitMix64(std::uint64_t seed) noexcept : state_(seed) {}

  static constexpr result_type min() noexcept { return 0; }
  static constexpr result_type max() noexcept { return std::numeric_limits<result_type>::max(); }

  constexpr result_type operator()() noexcept {
    std::uint64_t z = (state_ += 0x9E3779B97F4A7C15ULL);
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
  }

 private:
  std::uint64_t state_;
};

/// Master stream of one policy. Period t gets its own generator derived from
/// (seed, t), so the draws at period t do not depend on how much randomness
/// earlier periods consumed.
class PolicyStream {
 public:
  explicit constexpr PolicyStream(std::uint64_t seed) noexcept : seed_(seed) {}

  constexpr SplitMix64 at(std::uint64_t period) const noexcept {
    return SplitMix64(combine_seed(seed_, period));
  }

  constexpr std::uint64_t seed() const noexcept { return seed_; }

 private:
  std::uint64_t seed_;
};

/// Uniform on [0, 1) from exactly one 64-bit draw.
template <class Urbg>
double uniform01(Urbg& rng) {
  static_assert(Urbg::min() == 0 && Urbg::max() == std::numeric_limits<std::uint64_t>::max());
  return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

/// Standard normal via Box-Muller; always consumes exactly two draws.
template <class Urbg>
double standard_normal(Urbg& rng) {
  const double u1 = 1.0 - uniform01(rng);  // (0, 1]
  const double u2 = uniform01(rng);
  return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
}

/// Uniform integer in [0, n) from one draw (multiply-shift, bias at most n / 2^64).
template <class Urbg>
std::size_t uniform_index(Urbg& rng, std::size_t n) {
  __extension__ using u128 = unsigned __int128;
  return static_cast<std::size_t>((static_cast<u128>(rng()) * n) >> 64);
}

}  // namespace replaylab
