#pragma once

#include <vector>

#include "ergolab/rng.hpp"

namespace ergolab {

/// Absolutely continuous law on a bounded 1-D support [lo, hi].
class SmoothLaw1D {
 public:
  virtual ~SmoothLaw1D() = default;

  virtual double lo() const = 0;
  virtual double hi() const = 0;
  virtual double density(double x) const = 0;
  virtual double cdf(double x) const = 0;
  /// Inverse CDF; the default brackets and solves with TOMS 748.
  virtual double quantile(double u) const;
  virtual double sample(RngStream& rng) const { return quantile(rng.uniform()); }

  /// ∫_a^b |x - y|^p f(y) dy for a ≤ b inside the support.
  virtual double partial_moment(double a, double b, double x, double p) const;
  /// ∫_a^b f(y) dy.
  double mass(double a, double b) const { return cdf(b) - cdf(a); }
};

/// Uniform law on [0, length].
class UniformLaw final : public SmoothLaw1D {
 public:
  explicit UniformLaw(double length) : len_(length) {}
  double lo() const override { return 0.0; }
  double hi() const override { return len_; }
  double density(double x) const override;
  double cdf(double x) const override;
  double quantile(double u) const override;
  double partial_moment(double a, double b, double x, double p) const override;

 private:
  double len_;
};

/// Density (2/ℓ) sin²(πx/ℓ) on [0,ℓ]: the squared Dirichlet ground state.
class SineSquaredLaw final : public SmoothLaw1D {
 public:
  explicit SineSquaredLaw(double length);
  double lo() const override { return 0.0; }
  double hi() const override { return len_; }
  double density(double x) const override;
  double cdf(double x) const override;
  double quantile(double u) const override;
  double sample(RngStream& rng) const override;
  /// Closed form for p = 2, quadrature otherwise.
  double partial_moment(double a, double b, double x, double p) const override;

 private:
  double len_;
  std::vector<double> qtable_;  // quantile on a uniform u-grid, Newton seed
};

/// Gibbs density ∝ exp(-(1+θx²)^τ), truncated where it falls below e^{-40}.
class ConfinedLineLaw final : public SmoothLaw1D {
 public:
  ConfinedLineLaw(double theta, double tau);
  double lo() const override { return -radius_; }
  double hi() const override { return radius_; }
  double density(double x) const override;
  double cdf(double x) const override;
  double quantile(double u) const override;
  double variance() const { return variance_; }

 private:
  double theta_, tau_, radius_, log_norm_ = 0.0, variance_ = 0.0;
  std::vector<double> cum_;  // CDF at the table nodes
  double step_ = 0.0;
};

/// ∫_a^b g(y) dy by composite 16-point Gauss-Legendre on `pieces` panels.
template <class F>
double gauss_legendre(F&& g, double a, double b, int pieces = 1);

}  // namespace ergolab

#include "ergolab/detail/gauss_legendre.ipp"
