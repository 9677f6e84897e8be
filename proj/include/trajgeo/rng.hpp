// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <string_view>

namespace trajgeo {

/// SplitMix64 finalizer; used to scramble seeds and derive stream keys.
constexpr std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ull;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ull;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebull;
  return x ^ (x >> 31);
}

/// 64-bit FNV-1a over the bytes of a string; stable across platforms.
constexpr std::uint64_t fnv1a64(std::string_view s) {
  std::uint64_t h = 0xcbf29ce484222325ull;
  for (char c : s) {
    h ^= static_cast<std::uint8_t>(c);
    h *= 0x100000001b3ull;
  }
  return h;
}

/// Key of the independent stream owned by (root seed, trajectory id, sample).
/// Streams depend only on these three values, never on scheduling order.
std::uint64_t derive_stream_key(std::uint64_t root_seed, std::string_view trajectory_id,
                                std::uint64_t sample_index);

/// xoshiro256** generator with Gaussian and gamma variates built on top.
/// Every variate is a deterministic function of the seed and the call order.
class RandomStream {
 public:
  explicit RandomStream(std::uint64_t seed);

  std::uint64_t next_u64();
  /// Uniform on the open interval (0, 1).
  double uniform_open();
  /// Standard normal via the Marsaglia polar method.
  double normal();
  /// Gamma(shape, 1) via Marsaglia-Tsang; shape > 0.
  double gamma(double shape);
  /// Chi-distributed variate with k > 0 degrees of freedom.
  double chi(double k);

 private:
  std::uint64_t s_[4];
  bool has_spare_ = false;
  double spare_ = 0.0;
};

}  // namespace trajgeo
