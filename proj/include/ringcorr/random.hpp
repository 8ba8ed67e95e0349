#pragma once

#include <cmath>
#include <complex>
#include <cstdint>
#include <random>

namespace ringcorr {

/// SplitMix64 finalizer. Bijective on 64-bit words.
constexpr std::uint64_t mix64(std::uint64_t x) noexcept {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

/// A random stream identified by a 64-bit key. Streams are values: copying a
/// stream copies its position, and derive() produces a child stream whose key
/// depends only on (parent key, index), never on how much the parent consumed.
class RandomStream {
 public:
  explicit RandomStream(std::uint64_t key) : key_(key), engine_(seed_words(key)) {}

  std::uint64_t key() const noexcept { return key_; }

  RandomStream derive(std::uint64_t index) const {
    return RandomStream(mix64(key_ ^ mix64(index + 0x632be59bd9b4e019ULL)));
  }

  double normal() { return normal_(engine_); }

  /// Circularly symmetric complex Gaussian with E|z|^2 = variance.
  std::complex<double> complex_normal(double variance) {
    const double s = std::sqrt(0.5 * variance);
    const double re = normal_(engine_);
    const double im = normal_(engine_);
    return {s * re, s * im};
  }

  std::mt19937_64& engine() noexcept { return engine_; }

 private:
  static std::uint64_t seed_words(std::uint64_t key) { return mix64(key ^ 0xd1b54a32d192ed03ULL); }

  std::uint64_t key_;
  std::mt19937_64 engine_;
  std::normal_distribution<double> normal_{0.0, 1.0};
};

/// Derivation rule from a master seed to per-sample streams. The stream for
/// (sample, attempt) is a pure function of its arguments, so results do not
/// depend on thread count or execution order.
struct SeedPolicy {
  std::uint64_t master_seed = 0;

  RandomStream stream(std::uint64_t sample_index, std::uint64_t attempt = 0) const {
    const std::uint64_t k = mix64(mix64(master_seed) ^ mix64(sample_index * 0x2545f4914f6cdd1dULL + 1));
    return RandomStream(mix64(k ^ mix64(attempt + 0x7f4a7c159e3779b9ULL)));
  }
};

}  // namespace ringcorr
