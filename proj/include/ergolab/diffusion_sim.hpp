#pragma once

#include <cstddef>
#include <vector>

#include "ergolab/model_spaces.hpp"
#include "ergolab/rng.hpp"

namespace ergolab {

struct SimOptions {
  /// Multiplies the Brownian increment; 0 freezes the noise (debug mode).
  double noise_scale = 1.0;
  /// Burn-in time for the Langevin simulator; negative selects the default
  /// of 10 time units. Set to 0 when starting from the invariant law.
  double burn_in = -1.0;
  /// |X| beyond this aborts a Langevin path; non-positive picks 100× the
  /// support radius of the invariant law.
  double blowup_guard = 0.0;
};

/// Trajectory on the grid 0, h, 2h, …, horizon (last step may be partial).
/// States are stored flat, `dim` doubles per grid time.
struct SamplePath {
  Space space;
  double h = 0.0;
  double horizon = 0.0;
  std::vector<double> states;
  bool survived = true;
  double lifetime = 0.0;

  int dim() const { return space.dimension(); }
  std::size_t size() const { return states.size() / static_cast<std::size_t>(dim()); }
  /// Grid time of state k (capped at the horizon).
  double time(std::size_t k) const;
  Point state(std::size_t k) const;
  double state1(std::size_t k) const { return states[k]; }
};

/// Number of steps of the grid for (t, h); the last one is partial when t/h
/// is not an integer.
std::size_t grid_steps(double t, double h);

SamplePath simulate_wrapped_bm(const Space& space, const Point& x0, double t, double h, RngStream& rng,
                               const SimOptions& opt = {});
SamplePath simulate_reflected_bm(const Space& space, const Point& x0, double t, double h, RngStream& rng,
                                 const SimOptions& opt = {});
/// Gaussian steps of variance 2h; each step also kills with the bridge
/// crossing probabilities exp(-x1 x2/h) and exp(-(ℓ-x1)(ℓ-x2)/h).
SamplePath simulate_killed_bm(const Space& space, const Point& x0, double t, double h, RngStream& rng,
                              const SimOptions& opt = {});
SamplePath simulate_langevin_line(const Space& space, const Point& x0, double t, double h, RngStream& rng,
                                  const SimOptions& opt = {});
/// Euler-Maruyama for {x(1-x)}^l d²/dx² + l{x(1-x)}^{l-1}(1-2x) d/dx on (0,1),
/// states clamped to [h², 1-h²]. The returned path lives on Interval(1, Neumann).
SamplePath simulate_example51(double l, double x0, double t, double h, RngStream& rng, const SimOptions& opt = {});

struct Coefficients {
  double drift, diffusion;
};
/// Drift l{x(1-x)}^{l-1}(1-2x) and diffusion √2{x(1-x)}^{l/2} of the degenerate diffusion.
Coefficients example51_coefficients(double l, double x);

/// Dispatches on the space kind (circle/torus wrapped, Neumann reflected,
/// Dirichlet killed, confined line Langevin).
SamplePath simulate(const Space& space, const Point& x0, double t, double h, RngStream& rng,
                    const SimOptions& opt = {});

/// Killed Brownian motion sampled in two passes: a coarse skeleton with step
/// H and exact bridge kill tests, then (for survivors only) Brownian-bridge
/// refinement to step h with fine kill tests and rejection. Conditional on
/// survival the fine path has the same law as simulate_killed_bm.
struct KilledSkeleton {
  std::vector<double> points;  // coarse states up to the kill or the horizon
  bool survived = true;
  double coarse_step = 0.0;
  double horizon = 0.0;
};
KilledSkeleton killed_bm_skeleton(const Space& space, double x0, double t, double H, RngStream& rng);
SamplePath refine_killed_skeleton(const Space& space, const KilledSkeleton& skeleton, double h, RngStream& rng);

/// Weighted atoms on a space; weights are nonnegative and sum to 1.
struct EmpiricalMeasure {
  Space space;
  std::vector<double> points;  // flat, dim per atom
  std::vector<double> weights;
  double horizon = 0.0;

  static EmpiricalMeasure uniform(const Space& space, std::vector<double> points, double horizon = 0.0);
  static EmpiricalMeasure weighted(const Space& space, std::vector<double> points, std::vector<double> weights,
                                   double horizon = 0.0);

  int dim() const { return space.dimension(); }
  std::size_t size() const { return weights.size(); }
  Point point(std::size_t i) const;
  /// Integral of f against the measure.
  template <class F>
  double integrate(F&& f) const;
  /// Sorted (1-D) or lexicographically grouped atoms with equal points merged.
  EmpiricalMeasure merged() const;
  void validate() const;
};

/// μ_t = (1/t)∫_0^t δ_{X_s} ds with left-endpoint weights; killed paths are
/// cut at the lifetime and renormalized.
EmpiricalMeasure occupation_measure(const SamplePath& path);

/// μ_{t,N} = (1/N) Σ_{i=1}^N δ_{X_{it/N}}; requires t/(N h) to be an integer.
EmpiricalMeasure subsample_measure(const SamplePath& path, std::size_t N);

/// Cost of the coupling that sends each occupation atom to the subsample
/// atom closing its block: an upper bound on W_1(μ_{t,N}, μ_t).
double path_coupling_bound(const SamplePath& path, std::size_t N);

template <class F>
double EmpiricalMeasure::integrate(F&& f) const {
  double s = 0.0, c = 0.0;
  for (std::size_t i = 0; i < size(); ++i) {
    const double y = weights[i] * f(point(i)) - c;
    const double t = s + y;
    c = (t - s) - y;
    s = t;
  }
  return s;
}

}  // namespace ergolab
