#include "ergolab/envelopes.hpp"

#include <cmath>
#include <numbers>

#include "ergolab/errors.hpp"

namespace ergolab {

namespace {

void require_t(double t) {
  if (!(t > 0.0) || !std::isfinite(t)) throw DomainError("envelope needs finite t > 0");
}

bool near(double a, double b) { return std::abs(a - b) <= 1e-12 * (1.0 + std::abs(b)); }

}  // namespace

double xi_k(double K, double t) {
  require_t(t);
  if (!(K > 0.0)) throw DomainError("xi_k needs K > 0");
  if (near(K, 1.0)) {
    if (!(t > 1.0)) throw DomainError("xi_k with K=1 needs t > 1");
    const double lg = std::log(t);
    return lg * lg / t;
  }
  if (K < 1.0) return 1.0 / t;
  return std::pow(t, -1.0 / (2.0 * K - 1.0));
}

double gamma_d(int d, double t) {
  require_t(t);
  if (d < 1) throw DomainError("gamma_d needs d >= 1");
  if (d < 4) return 1.0 / std::sqrt(t);
  if (d == 4) {
    if (!(t > 1.0)) throw DomainError("gamma_d with d=4 needs t > 1");
    return std::sqrt(std::log(t) / t);
  }
  return std::pow(t, -1.0 / (d - 2));
}

double rate_t5(int d, double t) {
  require_t(t);
  if (d < 1) throw DomainError("rate_t5 needs d >= 1");
  if (d <= 3) return 1.0 / t;
  if (d == 4) return std::log(t + 1.0) / t;
  return std::pow(t, -2.0 / (d - 2));
}

double limit_t6_d4(double volume) {
  if (!(volume > 0.0) || !std::isfinite(volume)) throw DomainError("volume must be positive");
  return volume / (8.0 * std::numbers::pi * std::numbers::pi);
}

int example51_case(double l, double p) {
  if (!(l > 2.0) || !std::isfinite(l)) throw DomainError("example51 needs l > 2");
  if (!(p >= 2.0) || !std::isfinite(p)) throw DomainError("example51 needs p >= 2");
  const double edge = (13.0 - l) / 4.0;
  if (l <= 5.0 || near(l, 5.0)) {
    if (near(p, edge)) return 2;
    return p < edge ? 1 : 3;
  }
  return near(p, 2.0) ? 4 : 5;
}

double example51_envelope(double l, double p, double t) {
  require_t(t);
  const int c = example51_case(l, p);
  const double lg = std::log(2.0 + t);
  switch (c) {
    case 1: return 1.0 / t;
    case 2: return lg * lg * lg / t;
    case 3: return std::pow(lg / t, 8.0 / (4.0 * p + l - 5.0));
    case 4: return std::pow(t, -4.0 / (l - 1.0)) * lg * lg;
    default: return std::pow(t, -8.0 / (p * (l - 1.0)));
  }
}

}  // namespace ergolab
