#include "ergolab/laws.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include <boost/math/tools/roots.hpp>

#include "ergolab/errors.hpp"

namespace ergolab {

namespace {

constexpr double kPi = std::numbers::pi;

// Integrates |x - y|^p g(y) over [a, b] where x is not inside (a, b).
template <class G>
double one_sided_moment(G&& g, double a, double b, double x, double p, double support) {
  if (b <= a) return 0.0;
  const int panels = std::max(1, static_cast<int>(std::ceil(64.0 * (b - a) / support)));
  return gauss_legendre([&](double y) { return std::pow(std::abs(x - y), p) * g(y); }, a, b, panels);
}

template <class G>
double split_moment(G&& g, double a, double b, double x, double p, double support) {
  if (x > a && x < b) {
    return one_sided_moment(g, a, x, x, p, support) + one_sided_moment(g, x, b, x, p, support);
  }
  return one_sided_moment(g, a, b, x, p, support);
}

// Safeguarded Newton on [lo, hi] for F(x) = u with F increasing.
template <class Cdf, class Pdf>
double newton_bracketed(Cdf&& F, Pdf&& f, double u, double lo, double hi, double x) {
  for (int it = 0; it < 60; ++it) {
    const double r = F(x) - u;
    if (r > 0) hi = x; else lo = x;
    const double d = f(x);
    double next = (d > 0) ? x - r / d : 0.5 * (lo + hi);
    if (!(next > lo && next < hi)) next = 0.5 * (lo + hi);
    if (std::abs(next - x) <= 1e-15 * (1.0 + std::abs(x)) || hi - lo <= 1e-15 * (1.0 + std::abs(x))) return next;
    x = next;
  }
  return x;
}

}  // namespace

double SmoothLaw1D::quantile(double u) const {
  if (!(u >= 0.0 && u <= 1.0)) throw DomainError("quantile level outside [0,1]");
  if (u == 0.0) return lo();
  if (u == 1.0) return hi();
  auto f = [&](double x) { return cdf(x) - u; };
  boost::uintmax_t iters = 200;
  auto tol = boost::math::tools::eps_tolerance<double>(50);
  auto [a, b] = boost::math::tools::toms748_solve(f, lo(), hi(), -u, 1.0 - u, tol, iters);
  return 0.5 * (a + b);
}

double SmoothLaw1D::partial_moment(double a, double b, double x, double p) const {
  return split_moment([this](double y) { return density(y); }, a, b, x, p, hi() - lo());
}

// ---------------------------------------------------------------- uniform

double UniformLaw::density(double x) const { return (x >= 0.0 && x <= len_) ? 1.0 / len_ : 0.0; }

double UniformLaw::cdf(double x) const { return std::clamp(x / len_, 0.0, 1.0); }

double UniformLaw::quantile(double u) const {
  if (!(u >= 0.0 && u <= 1.0)) throw DomainError("quantile level outside [0,1]");
  return u * len_;
}

double UniformLaw::partial_moment(double a, double b, double x, double p) const {
  if (b <= a) return 0.0;
  // ∫ over [a,b] on one side of x, written to avoid cancellation
  auto side = [p](double d1, double d2) {
    // d1 <= d2, both >= 0
    if (d2 <= 0.0) return 0.0;
    if (d1 <= 0.0) return std::pow(d2, p + 1) / (p + 1);
    return std::pow(d1, p + 1) * std::expm1((p + 1) * std::log1p((d2 - d1) / d1)) / (p + 1);
  };
  double total;
  if (x <= a) total = side(a - x, b - x);
  else if (x >= b) total = side(x - b, x - a);
  else total = side(0.0, x - a) + side(0.0, b - x);
  return total / len_;
}

// ------------------------------------------------------------ sine squared

SineSquaredLaw::SineSquaredLaw(double length) : len_(length) {
  constexpr int n = 1024;
  qtable_.resize(n + 1);
  // CDF on a uniform x grid, inverted by monotone search later
  for (int i = 0; i <= n; ++i) qtable_[i] = cdf(len_ * i / n);
}

double SineSquaredLaw::density(double x) const {
  if (x < 0.0 || x > len_) return 0.0;
  const double s = std::sin(kPi * x / len_);
  return 2.0 / len_ * s * s;
}

double SineSquaredLaw::cdf(double x) const {
  if (x <= 0.0) return 0.0;
  if (x >= len_) return 1.0;
  const double z = x / len_;
  // for small z use the series (2π²/3) z³ - ... to avoid cancellation
  if (z < 1e-3) {
    const double w = 2.0 * kPi * z;
    return (w * w * w / 6.0 - w * w * w * w * w / 120.0 + std::pow(w, 7) / 5040.0) / (2.0 * kPi);
  }
  if (z > 1.0 - 1e-3) return 1.0 - cdf(len_ - x);
  return z - std::sin(2.0 * kPi * z) / (2.0 * kPi);
}

double SineSquaredLaw::quantile(double u) const {
  if (!(u >= 0.0 && u <= 1.0)) throw DomainError("quantile level outside [0,1]");
  if (u == 0.0) return 0.0;
  if (u == 1.0) return len_;
  if (u > 0.5) return len_ - quantile(1.0 - u);
  const int n = static_cast<int>(qtable_.size()) - 1;
  const auto it = std::upper_bound(qtable_.begin(), qtable_.end(), u);
  const int j = std::clamp(static_cast<int>(it - qtable_.begin()) - 1, 0, n - 1);
  const double lo = len_ * j / n, hi = len_ * (j + 1) / n;
  const double frac = (u - qtable_[j]) / (qtable_[j + 1] - qtable_[j]);
  double x0 = lo + frac * (hi - lo);
  if (j == 0) x0 = len_ * std::cbrt(3.0 * u / (2.0 * kPi * kPi));
  x0 = std::clamp(x0, lo, hi);
  return newton_bracketed([this](double x) { return cdf(x); }, [this](double x) { return density(x); }, u, lo, hi, x0);
}

double SineSquaredLaw::sample(RngStream& rng) const {
  for (;;) {
    const double x = rng.uniform();
    const double s = std::sin(kPi * x);
    if (rng.uniform() < s * s) return x * len_;
  }
}

double SineSquaredLaw::partial_moment(double a, double b, double x, double p) const {
  return split_moment([this](double y) { return density(y); }, a, b, x, p, len_);
}

// ------------------------------------------------------------ confined line

ConfinedLineLaw::ConfinedLineLaw(double theta, double tau) : theta_(theta), tau_(tau) {
  if (!(theta > 0.0) || !(tau > 0.5)) throw DomainError("confined line needs theta > 0 and tau > 1/2");
  radius_ = std::sqrt((std::pow(41.0, 1.0 / tau) - 1.0) / theta);
  constexpr int n = 8192;
  step_ = 2.0 * radius_ / n;
  auto g = [this](double x) { return std::exp(-std::pow(1.0 + theta_ * x * x, tau_)); };
  cum_.assign(n + 1, 0.0);
  double second = 0.0;
  for (int i = 0; i < n; ++i) {
    const double a = -radius_ + i * step_;
    cum_[i + 1] = cum_[i] + gauss_legendre(g, a, a + step_);
    second += gauss_legendre([&](double x) { return x * x * g(x); }, a, a + step_);
  }
  const double z = cum_[n];
  log_norm_ = std::log(z);
  for (double& c : cum_) c /= z;
  variance_ = second / z;
}

double ConfinedLineLaw::density(double x) const {
  return std::exp(-std::pow(1.0 + theta_ * x * x, tau_) - log_norm_);
}

double ConfinedLineLaw::cdf(double x) const {
  if (x <= -radius_) return 0.0;
  if (x >= radius_) return 1.0;
  const int n = static_cast<int>(cum_.size()) - 1;
  const int j = std::clamp(static_cast<int>((x + radius_) / step_), 0, n - 1);
  const double a = -radius_ + j * step_;
  return cum_[j] + gauss_legendre([this](double y) { return density(y); }, a, x);
}

double ConfinedLineLaw::quantile(double u) const {
  if (!(u >= 0.0 && u <= 1.0)) throw DomainError("quantile level outside [0,1]");
  if (u == 0.0) return -radius_;
  if (u == 1.0) return radius_;
  const int n = static_cast<int>(cum_.size()) - 1;
  const auto it = std::upper_bound(cum_.begin(), cum_.end(), u);
  const int j = std::clamp(static_cast<int>(it - cum_.begin()) - 1, 0, n - 1);
  const double lo = -radius_ + j * step_, hi = lo + step_;
  const double width = cum_[j + 1] - cum_[j];
  const double x0 = width > 0 ? lo + (u - cum_[j]) / width * step_ : 0.5 * (lo + hi);
  return newton_bracketed([this](double x) { return cdf(x); }, [this](double x) { return density(x); }, u, lo, hi, x0);
}

}  // namespace ergolab
