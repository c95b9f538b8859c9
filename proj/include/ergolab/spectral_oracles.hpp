#pragma once

#include <cstddef>
#include <functional>
#include <optional>
#include <span>
#include <utility>
#include <vector>

#include "ergolab/model_spaces.hpp"

namespace ergolab {

enum class BasisFlavor { Closed, Neumann, Dirichlet };

/// A truncated value of a positive series together with a rigorous bound on
/// the omitted tail: the exact sum lies in [lower(), upper()].
struct SeriesValue {
  double truncated = 0.0;
  double tail_bound = 0.0;
  std::size_t terms = 0;
  double lower() const { return truncated; }
  double upper() const { return truncated + tail_bound; }
  double midpoint() const { return truncated + 0.5 * tail_bound; }
};

struct Limit1Value {
  double value = 0.0;
  /// Σ ν(φ_i)² λ_i^{-3}: finite whenever the limit itself is.
  double finiteness_diagnostic = 0.0;
};

/// Ordered eigenpairs (λ_i, φ_i) of the reference generator.
///
/// Bases built from a space carry eigenfunctions and their gradients;
/// synthetic bases carry eigenvalues only and are for series arithmetic.
class SpectralBasis {
 public:
  static constexpr std::size_t kDefaultModes = 256;

  static SpectralBasis for_space(const Space& space, std::size_t n_max = kDefaultModes);
  /// Eigenvalues only. Tail bounds extrapolate λ_i ≥ c i^{2/d} with c fitted
  /// as the smallest ratio observed on the given list.
  static SpectralBasis synthetic(std::vector<double> eigenvalues, BasisFlavor flavor, int dimension = 1);

  std::size_t size() const { return lambda_.size(); }
  BasisFlavor flavor() const { return flavor_; }
  int dimension() const { return dim_; }
  const std::optional<Space>& space() const { return space_; }
  bool has_functions() const { return space_.has_value(); }

  double eigenvalue(std::size_t i) const;
  const std::vector<double>& eigenvalues() const { return lambda_; }

  /// φ_i(x). Throws DomainError for i ≥ n_max, UnsupportedError on synthetic bases.
  double eval(std::size_t i, const Point& x) const;
  double eval1(std::size_t i, double x) const;
  /// ∇φ_i(x).
  Point gradient(std::size_t i, const Point& x) const;
  double derivative1(std::size_t i, double x) const;

  std::pair<double, std::function<double(const Point&)>> eigenpair(std::size_t i) const;

  /// Constants with c1 i^{2/d} ≤ λ_i ≤ κ i^{2/d} for every i ≥ 1.
  double growth_lower() const { return c1_; }
  double growth_upper() const { return kappa_; }

  /// Nondecreasing function g with λ_i - λ_0 ≥ g(x) for every index i ≥ max(x, 1).
  double gap_lower(double x) const;

  /// Same space, fewer or more modes.
  SpectralBasis with_modes(std::size_t n_max) const;

 private:
  SpectralBasis() = default;
  void check_index(std::size_t i) const;

  std::optional<Space> space_;
  BasisFlavor flavor_ = BasisFlavor::Closed;
  int dim_ = 1;
  double omega_ = 1.0;  // base angular frequency
  double c1_ = 0.0, kappa_ = 0.0;
  double gap_c_ = 0.0;  // synthetic gap extrapolation constant
  std::vector<double> lambda_;
  // torus only: frequency vector and trig pattern (bit j set → sine in coordinate j)
  std::vector<std::vector<int>> freq_;
  std::vector<unsigned> pattern_;
};

std::pair<double, std::function<double(const Point&)>> eigenpair(const SpectralBasis& basis, std::size_t i);

/// Σ_{i≥1} 2/λ_i² (1 - V_i/λ_i), where V_i is the optional drift correction
/// of mode i (index 0 ignored; missing entries are zero).
SeriesValue limit_t4(const SpectralBasis& basis, std::span<const double> drift_correction = {});

/// Σ_{i≥1} 2/(λ_i - λ_0)² for Dirichlet bases.
SeriesValue limit_t2(const SpectralBasis& basis);

/// (μ(φ_0)ν(φ_0))^{-2} Σ_{i≥1} (ν(φ_0)μ(φ_i) + μ(φ_0)ν(φ_i))² / (λ_i - λ_0)³
/// over the indices covered by both coefficient lists and the basis.
Limit1Value limit_t1(const SpectralBasis& basis, std::span<const double> nu_coeffs, std::span<const double> mu_coeffs);

/// Σ_{i≥1} a_i²/λ_i.
double variance_vf(const SpectralBasis& basis, std::span<const double> f_coeffs);

/// Σ_i e^{-λ_i t} φ_i(x) φ_i(y). Throws TruncationError (carrying the mode
/// count needed) when n_max·e^{-λ_{n_max-1} t} ≥ 1e-8.
double heat_kernel(const SpectralBasis& basis, double t, const Point& x, const Point& y);

/// Coefficients μ(g φ_i), i < n, by composite Gauss-Legendre on 1-D spaces.
std::vector<double> project_1d(const SpectralBasis& basis, const std::function<double(double)>& g, std::size_t n,
                               int panels = 256);

}  // namespace ergolab
