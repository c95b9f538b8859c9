#pragma once

#include <cstdint>
#include <limits>

namespace ergolab {

/// Counter-based random stream.
///
/// Output number n of stream (seed, stream_id) is a pure function of the
/// triple, so every replica owns an independent, reproducible sequence no
/// matter which thread runs it. The mixer is the SplitMix64 finalizer applied
/// to a Weyl sequence offset by the stream key.
///
/// Satisfies UniformRandomBitGenerator, so it plugs into <random>
/// distributions; `normal()` and `uniform()` are the fast paths used by the
/// simulators.
class RngStream {
 public:
  using result_type = std::uint64_t;

  RngStream(std::uint64_t seed, std::uint64_t stream_id);

  static constexpr result_type min() { return 0; }
  static constexpr result_type max() { return std::numeric_limits<result_type>::max(); }

  result_type operator()() {
    return mix(key_ + (++counter_) * kGolden);
  }

  /// Uniform on the open interval (0, 1).
  double uniform() {
    return (static_cast<double>((*this)() >> 11) + 0.5) * 0x1.0p-53;
  }

  /// Standard normal (Marsaglia polar method, second variate cached).
  double normal();

  std::uint64_t key() const { return key_; }
  std::uint64_t counter() const { return counter_; }

  /// Derives a child stream; children of distinct ids never overlap with each
  /// other or with the parent with overwhelming probability.
  RngStream split(std::uint64_t child_id) const;

  static constexpr std::uint64_t mix(std::uint64_t z) {
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
  }

 private:
  static constexpr std::uint64_t kGolden = 0x9e3779b97f4a7c15ULL;

  std::uint64_t key_;
  std::uint64_t counter_ = 0;
  double cached_normal_ = 0.0;
  bool has_cached_ = false;
};

}  // namespace ergolab
