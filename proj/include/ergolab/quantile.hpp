#pragma once

#include <vector>

namespace ergolab {

/// Quantile function that is linear on each piece: Q(u) = x0 + (u-u0)/(u1-u0)·(x1-x0)
/// for u in [u0, u1]. Atoms have x0 == x1.
struct QuantilePiece {
  double u0, u1, x0, x1;
};

class PiecewiseQuantile {
 public:
  PiecewiseQuantile() = default;
  explicit PiecewiseQuantile(std::vector<QuantilePiece> pieces);

  const std::vector<QuantilePiece>& pieces() const { return pieces_; }
  double operator()(double u) const;
  /// Smallest positive piece length in u.
  double min_gap() const;
  bool empty() const { return pieces_.empty(); }

  /// Atoms (sorted positions, weights) → step quantile.
  static PiecewiseQuantile from_atoms(const std::vector<double>& sorted_x, const std::vector<double>& w);
  /// Piecewise-constant density on cells [lo + iΔ, lo + (i+1)Δ) with the
  /// given cell masses → piecewise-linear quantile.
  static PiecewiseQuantile from_cells(double lo, double width, const std::vector<double>& masses);

 private:
  std::vector<QuantilePiece> pieces_;
};

/// ∫_0^w |α + β s|^p ds without cancellation.
double abs_linear_power_integral(double alpha, double beta, double w, double p);

/// ∫_0^1 |Q1(u) - Q2(u)|^p du, exact up to rounding.
double quantile_cost(const PiecewiseQuantile& q1, const PiecewiseQuantile& q2, double p);

/// ∫_0^1 |Q1(u) - Q̃2(u + θ)|^p du where Q̃2(s+1) = Q̃2(s) + 1 is the periodic
/// lift of a quantile on [0,1).
double lifted_quantile_cost(const PiecewiseQuantile& q1, const PiecewiseQuantile& q2, double theta, double p);

}  // namespace ergolab
