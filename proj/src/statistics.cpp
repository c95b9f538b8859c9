#include "ergolab/statistics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>

#include <boost/math/distributions/chi_squared.hpp>
#include <boost/math/distributions/normal.hpp>
#include <boost/math/distributions/students_t.hpp>
#include <boost/math/statistics/linear_regression.hpp>

#include "ergolab/errors.hpp"

namespace ergolab {

SummaryStats summarize(std::span<const double> xs) {
  SummaryStats s;
  s.n = xs.size();
  if (s.n == 0) throw DomainError("summary of an empty sample");
  KahanSum sum;
  for (double x : xs) sum.add(x);
  s.mean = sum.value() / double(s.n);
  KahanSum m2, m4;
  for (double x : xs) {
    const double d = x - s.mean;
    m2.add(d * d);
    m4.add(d * d * d * d);
  }
  s.central_m4 = m4.value() / double(s.n);
  if (s.n < 2) {
    s.variance = s.std_error = s.ci_half = std::numeric_limits<double>::quiet_NaN();
    return s;
  }
  s.variance = m2.value() / double(s.n - 1);
  s.std_error = std::sqrt(s.variance / double(s.n));
  s.ci_half = student_t_quantile(double(s.n - 1), 0.975) * s.std_error;
  return s;
}

double variance_std_error(const SummaryStats& s) {
  if (s.n < 4) return std::numeric_limits<double>::quiet_NaN();
  const double n = double(s.n);
  const double v = s.variance;
  return std::sqrt(std::max(0.0, (s.central_m4 - v * v * (n - 3.0) / (n - 1.0)) / n));
}

double kolmogorov_sf(double lambda) {
  if (lambda <= 0.0) return 1.0;
  if (lambda < 1.18) {
    // P(K ≤ λ) = √(2π)/λ Σ exp(-(2k-1)²π²/(8λ²)), fast for small λ
    const double c = -std::numbers::pi * std::numbers::pi / (8.0 * lambda * lambda);
    double s = 0.0;
    for (int k = 1; k <= 20; ++k) {
      const double term = std::exp(double((2 * k - 1) * (2 * k - 1)) * c);
      s += term;
      if (term < 1e-17 * s) break;
    }
    return std::clamp(1.0 - std::sqrt(2.0 * std::numbers::pi) / lambda * s, 0.0, 1.0);
  }
  double s = 0.0;
  for (int k = 1; k <= 100; ++k) {
    const double term = std::exp(-2.0 * k * k * lambda * lambda);
    s += (k % 2 == 1 ? term : -term);
    if (term < 1e-17) break;
  }
  return std::clamp(2.0 * s, 0.0, 1.0);
}

namespace {

double ks_p_value(double D, double n_eff) {
  const double r = std::sqrt(n_eff);
  return kolmogorov_sf((r + 0.12 + 0.11 / r) * D);
}

}  // namespace

KSResult ks_two_sample(std::vector<double> a, std::vector<double> b) {
  if (a.empty() || b.empty()) throw DomainError("KS test needs two nonempty samples");
  std::sort(a.begin(), a.end());
  std::sort(b.begin(), b.end());
  const double n = double(a.size()), m = double(b.size());
  std::size_t i = 0, j = 0;
  double D = 0.0;
  while (i < a.size() && j < b.size()) {
    const double x = std::min(a[i], b[j]);
    while (i < a.size() && a[i] == x) ++i;
    while (j < b.size() && b[j] == x) ++j;
    D = std::max(D, std::abs(double(i) / n - double(j) / m));
  }
  KSResult r{D, ks_p_value(D, n * m / (n + m)), a.size(), b.size()};
  return r;
}

KSResult ks_one_sample(std::vector<double> a, const std::function<double(double)>& cdf) {
  if (a.empty()) throw DomainError("KS test needs a nonempty sample");
  std::sort(a.begin(), a.end());
  const double n = double(a.size());
  double D = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    const double F = cdf(a[i]);
    D = std::max({D, double(i + 1) / n - F, F - double(i) / n});
  }
  return KSResult{D, ks_p_value(D, n), a.size(), 0};
}

nlohmann::json RateFit::to_json() const {
  return {{"exponent", exponent}, {"intercept", intercept}, {"r_squared", r_squared}, {"exponent_se", exponent_se},
          {"points", points}};
}

RateFit fit_rate(std::span<const double> t, std::span<const double> y) {
  if (t.size() != y.size()) throw DomainError("fit_rate needs matching lengths");
  if (t.size() < 3) throw DomainError("fit_rate needs at least 3 points");
  std::vector<double> lx, ly;
  for (std::size_t i = 0; i < t.size(); ++i) {
    if (!(t[i] > 0.0) || !(y[i] > 0.0)) throw DomainError("fit_rate needs positive data");
    lx.push_back(std::log(t[i]));
    ly.push_back(std::log(y[i]));
  }
  RateFit f;
  f.points = lx.size();
  const bool constant = std::all_of(ly.begin(), ly.end(), [&](double v) { return std::abs(v - ly[0]) <= 1e-14 * (1.0 + std::abs(ly[0])); });
  if (constant) {
    f.exponent = 0.0;
    f.intercept = ly[0];
    f.r_squared = 1.0;
    return f;
  }
  auto [c0, c1, r2] = boost::math::statistics::simple_ordinary_least_squares_with_R_squared(lx, ly);
  f.intercept = c0;
  f.exponent = c1;
  f.r_squared = std::clamp(r2, 0.0, 1.0);
  if (f.points > 2) {
    double sse = 0.0, mx = 0.0, sxx = 0.0;
    for (double v : lx) mx += v;
    mx /= double(lx.size());
    for (std::size_t i = 0; i < lx.size(); ++i) {
      const double e = ly[i] - (c0 + c1 * lx[i]);
      sse += e * e;
      sxx += (lx[i] - mx) * (lx[i] - mx);
    }
    f.exponent_se = std::sqrt(sse / double(f.points - 2) / sxx);
  }
  return f;
}

double normal_quantile(double p) { return boost::math::quantile(boost::math::normal_distribution<double>(), p); }

double chi_square_quantile(double dof, double p) {
  return boost::math::quantile(boost::math::chi_squared_distribution<double>(dof), p);
}

double student_t_quantile(double dof, double p) {
  return boost::math::quantile(boost::math::students_t_distribution<double>(dof), p);
}

}  // namespace ergolab
