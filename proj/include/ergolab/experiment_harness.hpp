#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "ergolab/model_spaces.hpp"
#include "ergolab/statistics.hpp"

namespace ergolab {

enum class Verdict { Pass, Fail, Inconclusive };
std::string to_string(Verdict v);
/// Fail dominates, then Inconclusive.
Verdict combine(Verdict a, Verdict b);

/// One row of the per-t series. `estimate` is the quantity compared with the
/// target (for instance t·E[W₂²]); ci_half is its 95% half-width.
struct SeriesRow {
  std::string series;     // label when a report carries more than one series
  double t = 0.0;
  std::size_t replicas = 0;
  double raw_mean = 0.0;  // mean of the per-replica statistic before scaling
  double estimate = 0.0;
  double ci_half = 0.0;
  bool ci_defined = false;
  double target = 0.0;    // NaN when there is no target
  double ratio = 0.0;     // estimate / target
  Verdict verdict = Verdict::Inconclusive;
  std::string note;
};

struct ExperimentReport {
  std::string kind;
  nlohmann::json config;
  std::string target_label;
  std::vector<SeriesRow> rows;
  std::optional<RateFit> fit;
  Verdict verdict = Verdict::Inconclusive;
  std::vector<std::string> flags;
  nlohmann::json diagnostics = nlohmann::json::object();
  std::size_t attempted = 0;
  std::size_t aborted = 0;
  double runtime_seconds = 0.0;  // not part of to_json (kept out of the reproducible report)

  nlohmann::json to_json() const;
  /// Columns t, estimate, ci_low, ci_high, target, ratio, verdict.
  std::string csv() const;
  /// Whitespace-separated copy of the CSV for gnuplot (`#` header).
  std::string dat() const;
};

/// Relative band check used by every limit-constant verdict.
Verdict band_verdict(double estimate, double ci_half, bool ci_defined, double target, double tolerance);

enum class Dynamics { Auto, Degenerate };
std::string to_string(Dynamics d);

struct MomentSpec {
  Space space = Space::circle(6.283185307179586);
  /// Auto: dispatch on the space. Degenerate: the diffusion on (0,1) with
  /// generator {x(1-x)}^l d²/dx² + l{x(1-x)}^{l-1}(1-2x) d/dx (space must be
  /// the Neumann interval of length 1).
  Dynamics dynamics = Dynamics::Auto;
  double l = 3.0;
  double p = 2.0;
  double q = 2.0;
  std::vector<double> t_list{200.0};
  std::size_t replicas = 400;
  double h = 1e-3;
  std::size_t n_max = 256;
  std::uint64_t seed = 20240607;
  /// Start point; stationary start when empty.
  std::optional<Point> x0;
  double tolerance = 0.15;
  double rate_tolerance = 0.15;
  double min_r_squared = 0.98;
};

/// E[W_p(μ_t, μ)^q] over replicas for each t. Rows carry t·(mean)^{2/q}; with
/// p = q = 2 and d ≤ 3 the target is the spectral limit Σ 2/λ_i². A rate fit
/// over t_list (≥ 3 points) is compared with the exponent of the t^{-1}-type
/// envelope on the same grid.
ExperimentReport mc_moment_experiment(const MomentSpec& spec);

struct QsdSpec {
  double ell = 3.141592653589793;
  /// Start point; ν = μ₀ (the squared ground state) when empty.
  std::optional<double> x0;
  std::vector<double> t_list{4.0, 6.0};
  /// Number of started paths; raised so that the expected survivor count at
  /// the largest t is at least min_survivors.
  std::size_t replicas = 100000;
  std::size_t min_survivors = 200;
  /// Survivors refined at step h for the per-path statistic.
  std::size_t path_survivors = 4000;
  double h = 1e-3;
  double coarse_step = 0.1;
  std::size_t bins = 16384;
  std::size_t n_max = 256;
  std::uint64_t seed = 20240607;
  double tolerance = 0.25;
  /// Raise replicas from the spectral survival estimate.
  bool presize = true;
};

/// Killed Brownian motion on (0, ℓ). Row pairs per t: "paths" is
/// t·E[W₂(μ_t, μ₀)² | τ > t] against Σ 2/(λ_i-λ_0)²; "mean" is
/// t²·W₂(E[μ_t | τ > t], μ₀)² against the limit built from ν's coefficients.
ExperimentReport qsd_experiment(const QsdSpec& spec);

/// Fraction of paths alive at each t and the fitted exponential rate.
struct DecayResult {
  std::vector<double> t;
  std::vector<double> survival;
  double rate = 0.0;
  double rate_se = 0.0;
  std::size_t paths = 0;
};
DecayResult survival_decay(double ell, std::optional<double> x0, const std::vector<double>& t_list,
                           std::size_t paths, double coarse_step, std::uint64_t seed);

struct LimitLawSpec {
  Space space = Space::circle(6.283185307179586);
  double t = 200.0;
  std::size_t replicas = 800;
  std::size_t n_modes = 64;
  double h = 1e-3;
  std::uint64_t seed = 20240607;
  double alpha = 0.01;
  /// Also accumulate ψ_i(t) = t^{-1/2}∫_0^t φ_i(X_s)ds, i ≤ n_modes, and report
  /// how close t·W₂² is to Ξ(t) = Σ ψ_i²/λ_i on the same paths. No verdict.
  bool xi_diagnostic = false;
};

/// Two-sample KS between t·W₂(μ_t,μ)² over replicas and draws of
/// Σ_{i≤n_modes} 2ξ_i²/λ_i².
ExperimentReport ks_limit_law_test(const LimitLawSpec& spec);

/// Draws of Σ_{i=1}^{n_modes} 2ξ_i²/λ_i² from stream `stream`.
std::vector<double> limit_law_draws(const Space& space, std::size_t n_modes, std::size_t count, std::uint64_t seed,
                                    std::uint64_t stream);

/// Synthetic-vs-synthetic KS at level alpha: number of passing trials.
std::size_t ks_null_calibration(const Space& space, std::size_t n_modes, std::size_t sample_size, std::size_t trials,
                                double alpha, std::uint64_t seed);

struct CltSpec {
  Space space = Space::circle(6.283185307179586);
  /// f = Σ a_i φ_i.
  std::vector<double> f_coeffs{0.0, 1.0};
  double t = 200.0;
  std::size_t replicas = 800;
  double h = 1e-3;
  std::uint64_t seed = 20240607;
};

/// Sample variance of √t(μ_t(f) - μ(f)) against 2 Σ a_i²/λ_i.
ExperimentReport clt_check(const CltSpec& spec);

struct LbSpec {
  Space space = Space::circle(6.283185307179586);
  double t = 10.0;
  std::vector<std::size_t> n_list{10, 100, 1000};
  std::size_t replicas = 200;
  double h = 1e-3;
  double p = 2.0;
  std::uint64_t seed = 20240607;
};

/// W_p(μ_{t,N}, μ) against 2^{-1/p}ψ^{-1}(1/(2N)) on every replica, and
/// W₁(μ_{t,N}, μ_t) against the path-coupling bound.
ExperimentReport lb_consistency_experiment(const LbSpec& spec);

struct BoundsAuditSpec {
  Space space = Space::circle(6.283185307179586);
  std::size_t pairs = 100;
  int cells = 256;
  double p = 2.0;
  std::uint64_t seed = 20240607;
};

/// Exact W_p^p against the gradient bound on random low-frequency density
/// pairs, plus the one-mode cosine perturbation with a = 0.1.
ExperimentReport bounds_audit(const BoundsAuditSpec& spec);

}  // namespace ergolab
