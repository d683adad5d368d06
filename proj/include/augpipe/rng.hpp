#pragma once

#include <cstdint>
#include <string_view>
#include <vector>

namespace augpipe {

/// splitmix64 finalizer: a fixed 64-bit bijective mixing function.
constexpr std::uint64_t mix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

/// FNV-1a hash of a byte string, used to fold textual ids into seeds.
constexpr std::uint64_t fnv1a64(std::string_view s) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (char c : s) {
    h ^= static_cast<unsigned char>(c);
    h *= 0x100000001b3ULL;
  }
  return h;
}

/// Seed for one frame's augmentation stream: a fixed mixing chain over the
/// master seed, the episode id, and the frame index. Stable across platforms
/// and independent of processing order, so any frame can be regenerated alone.
constexpr std::uint64_t derive_frame_seed(std::uint64_t master_seed, std::string_view episode_id,
                                          std::int64_t frame_index) {
  std::uint64_t s = mix64(master_seed);
  s = mix64(s ^ fnv1a64(episode_id));
  s = mix64(s ^ static_cast<std::uint64_t>(frame_index));
  return s;
}

/// Deterministic PRNG with a pinned cross-platform stream (splitmix64 core).
/// All sampling methods are fully specified here rather than delegated to
/// <random> distributions, whose streams vary between standard libraries.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : state_(seed) {}

  /// Next raw 64-bit word of the stream.
  std::uint64_t next_u64() {
    state_ += 0x9e3779b97f4a7c15ULL;
    std::uint64_t z = state_;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
  }

  /// Uniform double in [0, 1) with 53 random bits.
  double uniform01() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

  /// Uniform double in [lo, hi).
  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform01(); }

  /// Unbiased uniform integer in [0, n); n must be positive.
  std::uint64_t uniform_below(std::uint64_t n);

  /// Unbiased uniform integer in [lo, hi] (both inclusive).
  int uniform_int(int lo, int hi);

  /// Standard normal deviate (Box-Muller, cosine branch). Always consumes
  /// exactly two uniforms so the stream layout is input-independent.
  double normal();

  /// Gamma(shape = alpha, scale = 1) deviate; alpha must be positive.
  /// Marsaglia-Tsang squeeze for alpha >= 1, boosted for alpha < 1.
  double gamma(double alpha);

 private:
  std::uint64_t state_;
};

/// Dirichlet(alpha, ..., alpha) sample of dimension k: k independent
/// Gamma(alpha) draws normalized by their sum.
std::vector<double> dirichlet_symmetric(double alpha, int k, Rng& rng);

}  // namespace augpipe
