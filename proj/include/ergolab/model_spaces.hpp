#pragma once

#include <memory>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "ergolab/rng.hpp"

namespace ergolab {

using Point = std::vector<double>;

enum class SpaceKind { Circle, Torus, Interval, ConfinedLine };
enum class Boundary { None, Neumann, Dirichlet };

class SmoothLaw1D;

/// A model state space: circle, flat torus, interval with a boundary
/// condition, or the real line with a confining potential (1+θx²)^τ.
///
/// Points live in the fundamental domain: [0,L)^d on circle/torus and
/// [0,ℓ] on the interval. Use canonical() to bring raw coordinates there.
class Space {
 public:
  static Space circle(double circumference);
  static Space torus(int dimension, double side);
  static Space interval(double length, Boundary boundary);
  static Space confined_line(double theta, double tau);

  SpaceKind kind() const { return kind_; }
  Boundary boundary() const { return boundary_; }
  int dimension() const { return dim_; }
  /// Circumference / side / length; 0 for the confined line.
  double extent() const { return extent_; }
  double theta() const { return theta_; }
  double tau() const { return tau_; }
  bool periodic() const { return kind_ == SpaceKind::Circle || kind_ == SpaceKind::Torus; }
  bool one_dimensional() const { return dim_ == 1; }

  /// Wraps periodic coordinates into [0,L); validates everything else.
  Point canonical(const Point& x) const;
  double canonical1(double x) const;

  /// Throws DomainError unless x is a canonical point of this space.
  void check_point(const Point& x) const;

  double metric(const Point& x, const Point& y) const;
  /// 1-D metric without allocation.
  double metric1(double x, double y) const;

  /// Volume of the space in its own coordinates (1 for the confined line,
  /// whose reference measure is the normalized Gibbs density).
  double volume() const;

  /// Invariant law as a 1-D smooth law (uniform or Gibbs); null for d > 1.
  std::shared_ptr<const SmoothLaw1D> invariant_law() const;

  Point sample_invariant(RngStream& rng) const;

  std::string describe() const;
  nlohmann::json to_json() const;
  static Space from_json(const nlohmann::json& j);

  bool operator==(const Space& o) const;
  bool operator!=(const Space& o) const { return !(*this == o); }

 private:
  Space() = default;

  SpaceKind kind_ = SpaceKind::Circle;
  Boundary boundary_ = Boundary::None;
  int dim_ = 1;
  double extent_ = 0.0;
  double theta_ = 0.0;
  double tau_ = 0.0;
  std::shared_ptr<const SmoothLaw1D> law_;
};

double metric(const Space& space, const Point& x, const Point& y);

/// Upper bound ψ(r) on sup_x μ(B(x,r)). Torus uses the sup-metric ball.
double mu_ball(const Space& space, double r);

/// ψ^{-1}(s) = sup{r ≥ 0 : ψ(r) ≤ s}. For s ≥ 1 returns the radius at which
/// the ball first covers the space.
double psi_inverse(const Space& space, double s);

Point sample_invariant(const Space& space, RngStream& rng);

}  // namespace ergolab
