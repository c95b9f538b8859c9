#pragma once

#include <functional>
#include <memory>
#include <string>
#include <variant>
#include <vector>

#include <nlohmann/json.hpp>

#include "ergolab/diffusion_sim.hpp"
#include "ergolab/laws.hpp"
#include "ergolab/model_spaces.hpp"
#include "ergolab/quantile.hpp"
#include "ergolab/spectral_oracles.hpp"

namespace ergolab {

/// Density w.r.t. the (uniform) invariant measure, constant on the cells of
/// a uniform grid with `cells` cells per axis. Values are indexed with the
/// first coordinate fastest. Only spaces with uniform μ are supported.
struct DensityOnGrid {
  Space space;
  int cells = 1;
  std::vector<double> values;

  /// Samples f at cell midpoints and rescales so the quadrature is exactly 1.
  static DensityOnGrid from_function(const Space& space, int cells, const std::function<double(const Point&)>& f);
  /// The invariant measure itself (one cell, value 1).
  static DensityOnGrid uniform(const Space& space);
  /// Throws DomainError unless values ≥ 0 and the quadrature is within 1e-8 of 1.
  void validate() const;

  double cell_width() const { return space.extent() / cells; }
  std::size_t size() const { return values.size(); }
  Point midpoint(std::size_t index) const;
  /// Value of the density at x (cell lookup).
  double at(const Point& x) const;
  /// Cell masses (1-D).
  std::vector<double> masses() const;
};

/// Absolutely continuous 1-D measure given by a smooth law.
struct SmoothMeasure {
  Space space;
  std::shared_ptr<const SmoothLaw1D> law;
  static SmoothMeasure invariant(const Space& space) { return {space, space.invariant_law()}; }
};

using AnyMeasure = std::variant<EmpiricalMeasure, DensityOnGrid, SmoothMeasure>;

const Space& space_of(const AnyMeasure& m);
/// ∫ f dm.
double integrate(const AnyMeasure& m, const std::function<double(const Point&)>& f);

enum class DistanceMethod { Exact1D, CircleExact, Sinkhorn, Bound };
std::string to_string(DistanceMethod m);

struct DistanceReport {
  double p = 1.0;
  /// W_p itself (not its p-th power).
  double value = 0.0;
  DistanceMethod method = DistanceMethod::Exact1D;
  double error_estimate = 0.0;
  /// Sinkhorn only: the debiased entropic divergence, an estimate of W_2².
  double divergence = -1.0;

  double power() const;
  nlohmann::json to_json() const;
};

/// Exact W_p on an interval or the confined line via the quantile coupling.
DistanceReport wp_line(const AnyMeasure& mu1, const AnyMeasure& mu2, double p);

struct CircleOptions {
  /// Upper limit on the number of cut parameters in the dense scan. Two
  /// atomic inputs cost O(max_grid·(n1 + n2)).
  int max_grid = 20000;
  double golden_tol = 1e-12;
};

/// Exact W_p on a circle: minimum over the cut parameter of the lifted
/// quantile cost. Uses a closed form when one side is uniform and p = 2.
DistanceReport wp_circle(const AnyMeasure& mu1, const AnyMeasure& mu2, double p, const CircleOptions& opt = {});

/// wp_line or wp_circle depending on the space.
DistanceReport wp_exact(const AnyMeasure& mu1, const AnyMeasure& mu2, double p);

struct SinkhornOptions {
  int grid = 128;
  /// Regularization in squared distance units; ≤ 0 selects 5e-3·L².
  double epsilon = 0.0;
  int max_iter = 20000;
  double tolerance = 1e-7;
};

/// Debiased entropic W_2 on the 2-torus (log-domain, ε-scaling). Empirical
/// inputs are binned to the nearest grid node.
DistanceReport sinkhorn_torus(const AnyMeasure& mu1, const AnyMeasure& mu2, double p, const SinkhornOptions& opt = {});

struct TA1Bound {
  double value = 0.0;        // min of the available bounds
  double symmetric = 0.0;    // p^p 2^{p-1} ∫|G|^p/(f1+f2)^{p-1}
  double one_sided = 0.0;    // p^p ∫|G|^p/f1^{p-1}
  double mean_based = 0.0;   // ∫|G|^p·M_p(f1,f2)
  bool one_sided_skipped = false;
  bool mean_based_skipped = false;
  /// (‖f2-f1‖² - Σ b_i²)/λ_n²: size of the spectral truncation error.
  double tail_indicator = 0.0;
};

/// Upper bound on W_p(f1 μ, f2 μ)^p from the gradient of (-L)^{-1}(f2-f1).
TA1Bound ta1_bound(const SpectralBasis& basis, const DensityOnGrid& f1, const DensityOnGrid& f2, double p);
double ta1_upper_bound(const SpectralBasis& basis, const DensityOnGrid& f1, const DensityOnGrid& f2, double p);

/// M_p(a, b) with the convention M_p(a,a) = 1_{a>0} a^{1-p}.
double mean_mp(double a, double b, double p);

/// 2^{-1/p} ψ^{-1}(1/(2N)): lower bound on W_p between μ and any N-atom measure.
double lb101_bound(const Space& space, std::size_t N, double p);

using Witness = std::function<double(const Point&)>;
/// max_f |μ1(f) - μ2(f)| over witnesses checked to be 1-Lipschitz on a grid.
double w1_dual_lower(const AnyMeasure& mu1, const AnyMeasure& mu2, const std::vector<Witness>& witnesses);

}  // namespace ergolab
