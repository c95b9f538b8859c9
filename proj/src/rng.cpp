#include "ergolab/rng.hpp"

#include <cmath>

namespace ergolab {

RngStream::RngStream(std::uint64_t seed, std::uint64_t stream_id)
    : key_(mix(mix(seed ^ 0x6a09e667f3bcc908ULL) + mix(stream_id + 0x3c6ef372fe94f82bULL))) {}

double RngStream::normal() {
  if (has_cached_) {
    has_cached_ = false;
    return cached_normal_;
  }
  double u, v, s;
  do {
    u = 2.0 * uniform() - 1.0;
    v = 2.0 * uniform() - 1.0;
    s = u * u + v * v;
  } while (s >= 1.0 || s == 0.0);
  const double factor = std::sqrt(-2.0 * std::log(s) / s);
  cached_normal_ = v * factor;
  has_cached_ = true;
  return u * factor;
}

RngStream RngStream::split(std::uint64_t child_id) const {
  RngStream child(key_, child_id ^ 0xa54ff53a5f1d36f1ULL);
  return child;
}

}  // namespace ergolab
