#pragma once

#include <cstddef>
#include <functional>
#include <span>
#include <vector>

#include <nlohmann/json.hpp>

namespace ergolab {

/// Compensated running sum.
class KahanSum {
 public:
  void add(double x) {
    const double y = x - c_;
    const double t = s_ + y;
    c_ = (t - s_) - y;
    s_ = t;
  }
  double value() const { return s_; }

 private:
  double s_ = 0.0, c_ = 0.0;
};

struct SummaryStats {
  std::size_t n = 0;
  double mean = 0.0;
  double variance = 0.0;   // unbiased sample variance, NaN if n < 2
  double std_error = 0.0;  // of the mean
  double ci_half = 0.0;    // 95% Student-t half-width, NaN if n < 2
  double central_m4 = 0.0; // fourth central moment (plug-in)
  bool ci_defined() const { return n >= 2; }
};

/// Aggregates in index order with compensated sums.
SummaryStats summarize(std::span<const double> xs);

/// Standard error of the sample variance, √((m4 - s⁴(n-3)/(n-1))/n).
double variance_std_error(const SummaryStats& s);

/// Survival function of the Kolmogorov distribution, P(K > λ).
double kolmogorov_sf(double lambda);

struct KSResult {
  double statistic = 0.0;
  double p_value = 1.0;
  std::size_t n1 = 0, n2 = 0;
};

/// Two-sample Kolmogorov-Smirnov with the asymptotic p-value at effective
/// size nm/(n+m) (Stephens' small-sample correction).
KSResult ks_two_sample(std::vector<double> a, std::vector<double> b);
/// One-sample test against a continuous CDF.
KSResult ks_one_sample(std::vector<double> a, const std::function<double(double)>& cdf);

struct RateFit {
  double exponent = 0.0;
  double intercept = 0.0;  // log-scale intercept
  double r_squared = 0.0;
  double exponent_se = 0.0;
  std::size_t points = 0;
  nlohmann::json to_json() const;
};

/// Least squares of log(estimate) on log(t); needs ≥ 3 positive pairs.
RateFit fit_rate(std::span<const double> t, std::span<const double> estimates);

double normal_quantile(double p);
double chi_square_quantile(double dof, double p);
double student_t_quantile(double dof, double p);

}  // namespace ergolab
