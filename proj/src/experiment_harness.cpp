#include "ergolab/experiment_harness.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <limits>
#include <numbers>
#include <sstream>

#include "ergolab/diffusion_sim.hpp"
#include "ergolab/envelopes.hpp"
#include "ergolab/errors.hpp"
#include "ergolab/parallel.hpp"
#include "ergolab/rng.hpp"
#include "ergolab/spectral_oracles.hpp"
#include "ergolab/transport_engines.hpp"

namespace ergolab {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

nlohmann::json number_or_null(double x) { return std::isfinite(x) ? nlohmann::json(x) : nlohmann::json(nullptr); }

// Stream id for replica r of grid entry j.
std::uint64_t stream_id(std::size_t j, std::size_t r) { return (std::uint64_t(j) << 40) + std::uint64_t(r); }

void require(bool ok, const char* what) {
  if (!ok) throw DomainError(what);
}

void check_t_list(const std::vector<double>& ts) {
  require(!ts.empty(), "t_list is empty");
  for (std::size_t i = 0; i < ts.size(); ++i) {
    require(ts[i] > 0.0 && std::isfinite(ts[i]), "t_list entries must be positive");
    if (i > 0) require(ts[i] > ts[i - 1], "t_list must be increasing");
  }
}

// Paths from the stationary law unless a start point is given.
SamplePath run_path(const Space& space, Dynamics dyn, double l, const std::optional<Point>& x0, double t, double h,
                    RngStream& rng) {
  if (dyn == Dynamics::Degenerate) {
    const double start = x0 ? (*x0)[0] : rng.uniform();
    return simulate_example51(l, start, t, h, rng);
  }
  SimOptions opt;
  Point start;
  if (x0) {
    start = *x0;
  } else {
    start = space.sample_invariant(rng);
    opt.burn_in = 0.0;
  }
  return simulate(space, start, t, h, rng, opt);
}

AnyMeasure reference_measure(const Space& space) {
  if (space.dimension() == 1) return SmoothMeasure::invariant(space);
  return DensityOnGrid::uniform(space);
}

double distance(const AnyMeasure& a, const AnyMeasure& ref, double p) {
  const Space& s = space_of(a);
  if (s.dimension() == 1) return wp_exact(a, ref, p).value;
  if (s.kind() == SpaceKind::Torus && s.dimension() == 2 && p == 2.0) return sinkhorn_torus(a, ref, p).value;
  throw UnsupportedError("no transport engine for this space and order");
}

// Growth envelope of (E W_p^q)^{2/q} used for rate comparisons.
double moment_envelope(const MomentSpec& spec, double t) {
  if (spec.dynamics == Dynamics::Degenerate) return example51_envelope(spec.l, spec.p, t);
  return rate_t5(spec.space.dimension(), t);
}

}  // namespace

std::string to_string(Verdict v) {
  switch (v) {
    case Verdict::Pass: return "pass";
    case Verdict::Fail: return "fail";
    case Verdict::Inconclusive: return "inconclusive";
  }
  return "inconclusive";
}

std::string to_string(Dynamics d) { return d == Dynamics::Degenerate ? "degenerate" : "auto"; }

Verdict combine(Verdict a, Verdict b) {
  if (a == Verdict::Fail || b == Verdict::Fail) return Verdict::Fail;
  if (a == Verdict::Inconclusive || b == Verdict::Inconclusive) return Verdict::Inconclusive;
  return Verdict::Pass;
}

Verdict band_verdict(double estimate, double ci_half, bool ci_defined, double target, double tolerance) {
  if (!ci_defined || !std::isfinite(estimate) || !std::isfinite(target)) return Verdict::Inconclusive;
  const double lo = target * (1.0 - tolerance), hi = target * (1.0 + tolerance);
  if (estimate < lo || estimate > hi) return Verdict::Fail;
  // the CI must overlap the band; implied by the estimate lying inside it
  (void)ci_half;
  return Verdict::Pass;
}

nlohmann::json ExperimentReport::to_json() const {
  nlohmann::json rs = nlohmann::json::array();
  for (const auto& r : rows) {
    nlohmann::json j{{"t", r.t},
                     {"replicas", r.replicas},
                     {"raw_mean", number_or_null(r.raw_mean)},
                     {"estimate", number_or_null(r.estimate)},
                     {"ci_half", r.ci_defined ? number_or_null(r.ci_half) : nlohmann::json(nullptr)},
                     {"ci_defined", r.ci_defined},
                     {"target", number_or_null(r.target)},
                     {"ratio", number_or_null(r.ratio)},
                     {"verdict", to_string(r.verdict)}};
    if (!r.series.empty()) j["series"] = r.series;
    if (!r.note.empty()) j["note"] = r.note;
    rs.push_back(std::move(j));
  }
  return {{"kind", kind},
          {"config", config},
          {"target", target_label},
          {"rows", rs},
          {"fit", fit ? fit->to_json() : nlohmann::json(nullptr)},
          {"verdict", to_string(verdict)},
          {"flags", flags},
          {"diagnostics", diagnostics},
          {"replicas", {{"attempted", attempted}, {"aborted", aborted}}}};
}

namespace {

std::string fmt(double x) {
  if (!std::isfinite(x)) return "nan";
  std::ostringstream o;
  o.precision(10);
  o << x;
  return o.str();
}

}  // namespace

std::string ExperimentReport::csv() const {
  std::ostringstream o;
  o << "t,estimate,ci_low,ci_high,target,ratio,verdict\n";
  for (const auto& r : rows) {
    const double lo = r.ci_defined ? r.estimate - r.ci_half : kNaN, hi = r.ci_defined ? r.estimate + r.ci_half : kNaN;
    o << fmt(r.t) << ',' << fmt(r.estimate) << ',' << fmt(lo) << ',' << fmt(hi) << ',' << fmt(r.target) << ','
      << fmt(r.ratio) << ',' << to_string(r.verdict) << '\n';
  }
  return o.str();
}

std::string ExperimentReport::dat() const {
  // one gnuplot data block per series, separated by two blank lines
  std::ostringstream o;
  std::vector<std::string> order;
  for (const auto& r : rows)
    if (std::find(order.begin(), order.end(), r.series) == order.end()) order.push_back(r.series);
  for (std::size_t b = 0; b < order.size(); ++b) {
    if (b > 0) o << "\n\n";
    o << "# " << kind << (order[b].empty() ? "" : " " + order[b]) << "\n# t estimate ci_low ci_high target ratio\n";
    for (const auto& r : rows) {
      if (r.series != order[b]) continue;
      const double lo = r.ci_defined ? r.estimate - r.ci_half : kNaN, hi = r.ci_defined ? r.estimate + r.ci_half : kNaN;
      o << fmt(r.t) << ' ' << fmt(r.estimate) << ' ' << fmt(lo) << ' ' << fmt(hi) << ' ' << fmt(r.target) << ' '
        << fmt(r.ratio) << '\n';
    }
  }
  return o.str();
}

// ------------------------------------------------------------ moments

ExperimentReport mc_moment_experiment(const MomentSpec& spec) {
  const auto t0 = Clock::now();
  check_t_list(spec.t_list);
  require(spec.replicas >= 1, "replicas must be at least 1");
  require(spec.h > 0.0, "h must be positive");
  require(spec.p >= 1.0, "p must be at least 1");
  require(spec.q > 0.0, "q must be positive");
  const Space& space = spec.space;
  if (space.boundary() == Boundary::Dirichlet) throw UnsupportedError("killed dynamics belong to the qsd experiment");
  if (spec.dynamics == Dynamics::Degenerate)
    require(space == Space::interval(1.0, Boundary::Neumann) && spec.l > 2.0,
            "the degenerate diffusion lives on the Neumann interval of length 1 with l > 2");
  const int d = space.dimension();
  const AnyMeasure ref = reference_measure(space);

  ExperimentReport rep;
  rep.kind = "moment";
  rep.config = {{"space", space.to_json()}, {"dynamics", to_string(spec.dynamics)}, {"p", spec.p}, {"q", spec.q},
                {"t_list", spec.t_list}, {"replicas", spec.replicas}, {"h", spec.h}, {"n_max", spec.n_max},
                {"seed", spec.seed}};
  if (spec.dynamics == Dynamics::Degenerate) rep.config["l"] = spec.l;
  if (spec.x0) rep.config["x0"] = *spec.x0;

  // limit constant Σ 2/λ_i² applies to p = q = 2 in d ≤ 3 for Brownian dynamics
  double target = kNaN, trunc_rel = 0.0;
  const bool has_target = spec.p == 2.0 && spec.q == 2.0 && d <= 3 && spec.dynamics == Dynamics::Auto &&
                          space.kind() != SpaceKind::ConfinedLine;
  if (has_target) {
    const auto basis = SpectralBasis::for_space(space, spec.n_max);
    const auto lim = limit_t4(basis);
    target = lim.midpoint();
    trunc_rel = 0.5 * lim.tail_bound / target;
    rep.target_label = "sum_i 2/lambda_i^2 (spectral series)";
    rep.diagnostics["target_bracket"] = {lim.lower(), lim.upper()};
  } else {
    rep.target_label = "none (rate fit and envelope consistency only)";
  }

  const std::size_t R = spec.replicas, T = spec.t_list.size();
  const std::size_t hcheck = std::min<std::size_t>(R, 50);
  std::vector<double> values(R * T, kNaN), coarse(hcheck, kNaN);
  std::vector<std::string> errors(R * T);
  parallel_for(R * T, [&](std::size_t idx) {
    const std::size_t j = idx / R, r = idx % R;
    const double t = spec.t_list[j];
    try {
      RngStream rng(spec.seed, stream_id(j, r));
      const auto path = run_path(space, spec.dynamics, spec.l, spec.x0, t, spec.h, rng);
      values[idx] = std::pow(distance(occupation_measure(path), ref, spec.p), spec.q);
      // h-check: the same path read at step 2h
      if (j == T - 1 && r < hcheck && grid_steps(t, 2.0 * spec.h) * 2 == grid_steps(t, spec.h)) {
        SamplePath half{path.space, 2.0 * spec.h, t, {}, true, t};
        for (std::size_t k = 0; k < path.size(); k += 2)
          for (int c = 0; c < path.dim(); ++c) half.states.push_back(path.states[k * path.dim() + c]);
        coarse[r] = std::pow(distance(occupation_measure(half), ref, spec.p), spec.q) - values[idx];
      }
    } catch (const std::exception& e) {
      errors[idx] = e.what();
    }
  });

  rep.attempted = R * T;
  for (const auto& e : errors)
    if (!e.empty()) ++rep.aborted;
  if (rep.aborted > 0) {
    nlohmann::json msgs = nlohmann::json::array();
    for (const auto& e : errors)
      if (!e.empty() && msgs.size() < 5) msgs.push_back(e);
    rep.diagnostics["abort_messages"] = msgs;
  }

  // discretization budget from the h-check at the largest t
  std::vector<double> dh;
  for (double v : coarse)
    if (std::isfinite(v)) dh.push_back(v);

  std::vector<double> tvals, scaled_means;
  Verdict verdict = Verdict::Pass;
  bool any_check = false;
  nlohmann::json budgets = nlohmann::json::array();
  for (std::size_t j = 0; j < T; ++j) {
    std::vector<double> ok;
    for (std::size_t r = 0; r < R; ++r)
      if (std::isfinite(values[j * R + r])) ok.push_back(values[j * R + r]);
    SeriesRow row;
    row.t = spec.t_list[j];
    row.replicas = ok.size();
    if (ok.empty()) {
      row.verdict = Verdict::Inconclusive;
      row.note = "no replica finished";
      rep.rows.push_back(row);
      verdict = combine(verdict, Verdict::Inconclusive);
      continue;
    }
    const auto st = summarize(ok);
    const double e = 2.0 / spec.q, t = row.t;
    row.raw_mean = st.mean;
    row.estimate = t * std::pow(st.mean, e);
    row.ci_defined = st.ci_defined();
    row.ci_half = row.ci_defined && st.mean > 0.0 ? t * e * std::pow(st.mean, e - 1.0) * st.ci_half : kNaN;
    row.target = target;
    row.ratio = std::isfinite(target) ? row.estimate / target : kNaN;
    tvals.push_back(t);
    scaled_means.push_back(std::pow(st.mean, e));

    const double mc_rel = row.ci_defined ? row.ci_half / row.estimate : kNaN;
    const double disc_rel = dh.empty() ? 0.0 : e * std::abs(summarize(dh).mean) / st.mean;
    const double total = mc_rel + trunc_rel + disc_rel;
    budgets.push_back({{"t", t}, {"mc", number_or_null(mc_rel)}, {"truncation", trunc_rel},
                       {"discretization", disc_rel}, {"total", number_or_null(total)}});
    if (std::isfinite(target)) {
      any_check = true;
      row.verdict = band_verdict(row.estimate, row.ci_half, row.ci_defined, target, spec.tolerance);
      if (row.verdict == Verdict::Pass && !(total < spec.tolerance)) {
        row.verdict = Verdict::Inconclusive;
        row.note = "error budget exceeds the tolerance";
      }
      verdict = combine(verdict, row.verdict);
    }
    if (j == T - 1 && st.n >= 10) {
      // batching into 10 groups: the mean of group means vs the CI
      std::vector<double> groups(10, 0.0), counts(10, 0.0);
      for (std::size_t i = 0; i < ok.size(); ++i) {
        groups[i % 10] += ok[i];
        counts[i % 10] += 1.0;
      }
      for (int g = 0; g < 10; ++g) groups[g] /= counts[g];
      const auto gs = summarize(groups);
      rep.diagnostics["batches"] = {{"mean_of_groups", gs.mean}, {"group_ci_half", gs.ci_half},
                                    {"shift", std::abs(gs.mean - st.mean)}, {"ci_half", st.ci_half},
                                    {"within_ci", std::abs(gs.mean - st.mean) < st.ci_half}};
    }
    rep.rows.push_back(row);
  }
  rep.diagnostics["error_budget"] = budgets;
  rep.diagnostics["h_check"] = {{"replicas", dh.size()}, {"mean_shift_at_2h", dh.empty() ? 0.0 : summarize(dh).mean}};

  if (R < 2) rep.flags.push_back("ci-undefined");

  // rate fit over t_list and envelope consistency
  if (tvals.size() >= 3 && R >= 2) {
    rep.fit = fit_rate(tvals, scaled_means);
    std::vector<double> env;
    for (double t : tvals) env.push_back(moment_envelope(spec, t));
    const double expected = fit_rate(tvals, env).exponent;
    rep.diagnostics["expected_exponent"] = expected;
    if (spec.dynamics == Dynamics::Auto && space.kind() != SpaceKind::ConfinedLine) {
      any_check = true;
      const bool ok = std::abs(rep.fit->exponent - expected) <= spec.rate_tolerance &&
                      rep.fit->r_squared >= spec.min_r_squared;
      if (!ok) rep.flags.push_back("rate-mismatch");
      verdict = combine(verdict, ok ? Verdict::Pass : Verdict::Fail);
    }
  }
  if (tvals.size() >= 2 && R >= 2) {
    // c fitted at the first t; later estimates minus their CI must stay below 1.15·c·envelope
    const double c = scaled_means[0] / moment_envelope(spec, tvals[0]);
    double worst = 0.0;
    for (std::size_t k = 0; k < tvals.size(); ++k) {
      const auto& row = rep.rows[k];
      const double lower = (row.estimate - (row.ci_defined ? row.ci_half : 0.0)) / row.t;
      worst = std::max(worst, lower / (c * moment_envelope(spec, tvals[k])));
    }
    const bool consistent = worst <= 1.15;
    rep.diagnostics["envelope_consistency"] = {{"c", c}, {"worst_ratio", worst}, {"consistent", consistent}};
    if (!consistent) {
      rep.flags.push_back("envelope-excess");
      verdict = combine(verdict, Verdict::Fail);
    }
    any_check = true;
  }

  if (rep.aborted * 100 > rep.attempted) {
    rep.flags.push_back("abort-rate");
    verdict = Verdict::Fail;
  }
  if (R < 2 || !any_check) verdict = combine(verdict, Verdict::Inconclusive);
  rep.verdict = verdict;
  rep.runtime_seconds = seconds_since(t0);
  return rep;
}

// ------------------------------------------------------------ limit law

std::vector<double> limit_law_draws(const Space& space, std::size_t n_modes, std::size_t count, std::uint64_t seed,
                                    std::uint64_t stream) {
  require(n_modes >= 1, "n_modes must be at least 1");
  const auto basis = SpectralBasis::for_space(space, std::max<std::size_t>(n_modes + 1, 2));
  RngStream rng(seed, stream);
  std::vector<double> out(count);
  for (auto& v : out) {
    double s = 0.0;
    for (std::size_t i = 1; i <= n_modes; ++i) {
      const double xi = rng.normal(), lam = basis.eigenvalue(i);
      s += 2.0 * xi * xi / (lam * lam);
    }
    v = s;
  }
  return out;
}

std::size_t ks_null_calibration(const Space& space, std::size_t n_modes, std::size_t sample_size, std::size_t trials,
                                double alpha, std::uint64_t seed) {
  std::size_t pass = 0;
  for (std::size_t k = 0; k < trials; ++k) {
    const auto a = limit_law_draws(space, n_modes, sample_size, seed, 2 * k);
    const auto b = limit_law_draws(space, n_modes, sample_size, seed, 2 * k + 1);
    if (ks_two_sample(a, b).p_value > alpha) ++pass;
  }
  return pass;
}

ExperimentReport ks_limit_law_test(const LimitLawSpec& spec) {
  const auto t0 = Clock::now();
  require(spec.replicas >= 2, "replicas must be at least 2");
  require(spec.t > 0.0 && spec.h > 0.0, "t and h must be positive");
  const Space& space = spec.space;
  if (space.boundary() == Boundary::Dirichlet || space.kind() == SpaceKind::ConfinedLine || space.dimension() > 3)
    throw UnsupportedError("the limit law needs a closed or Neumann space with d <= 3");
  const AnyMeasure ref = reference_measure(space);

  ExperimentReport rep;
  rep.kind = "limit-law";
  rep.config = {{"space", space.to_json()}, {"t", spec.t}, {"replicas", spec.replicas}, {"n_modes", spec.n_modes},
                {"h", spec.h}, {"seed", spec.seed}, {"alpha", spec.alpha},
                {"xi_diagnostic", spec.xi_diagnostic}};
  rep.target_label = "law of sum_{i<=n_modes} 2 xi_i^2/lambda_i^2";

  const auto basis = SpectralBasis::for_space(space, std::max<std::size_t>(spec.n_modes + 1, 256));
  std::vector<double> vals(spec.replicas, kNaN), xi(spec.replicas, kNaN);
  std::vector<char> failed(spec.replicas, 0);
  parallel_for(spec.replicas, [&](std::size_t r) {
    try {
      RngStream rng(spec.seed, stream_id(0, r));
      const auto path = run_path(space, Dynamics::Auto, 0.0, std::nullopt, spec.t, spec.h, rng);
      const auto occ = occupation_measure(path);
      const double w = distance(occ, ref, 2.0);
      vals[r] = spec.t * w * w;
      if (spec.xi_diagnostic) {
        double s = 0.0;
        for (std::size_t i = 1; i <= spec.n_modes; ++i) {
          const double psi = std::sqrt(spec.t) * occ.integrate([&](const Point& x) { return basis.eval(i, x); });
          s += psi * psi / basis.eigenvalue(i);
        }
        xi[r] = s;
      }
    } catch (const std::exception&) {
      failed[r] = 1;
    }
  });
  std::vector<double> ok;
  for (std::size_t r = 0; r < spec.replicas; ++r)
    if (!failed[r]) ok.push_back(vals[r]);
  rep.attempted = spec.replicas;
  rep.aborted = spec.replicas - ok.size();

  const auto synth = limit_law_draws(space, spec.n_modes, spec.replicas, spec.seed, std::uint64_t(1) << 50);
  const auto ks = ks_two_sample(ok, synth);
  double partial = 0.0;
  for (std::size_t i = 1; i <= spec.n_modes; ++i) partial += 2.0 / std::pow(basis.eigenvalue(i), 2);
  const auto full = limit_t4(basis);

  const auto st = summarize(ok);
  SeriesRow row;
  row.t = spec.t;
  row.replicas = ok.size();
  row.raw_mean = st.mean / spec.t;
  row.estimate = st.mean;
  row.ci_defined = st.ci_defined();
  row.ci_half = st.ci_half;
  row.target = partial;
  row.ratio = st.mean / partial;
  row.verdict = ks.p_value > spec.alpha ? Verdict::Pass : Verdict::Fail;
  row.note = "KS p-value " + fmt(ks.p_value);
  rep.rows.push_back(row);
  rep.diagnostics = {{"ks_statistic", ks.statistic}, {"p_value", ks.p_value},
                     {"synthetic_mean", summarize(synth).mean}, {"missing_mass", full.midpoint() - partial}};
  if (spec.xi_diagnostic) {
    std::vector<double> xs, gaps;
    for (std::size_t r = 0; r < spec.replicas; ++r)
      if (!failed[r]) {
        xs.push_back(xi[r]);
        gaps.push_back(std::abs(vals[r] - xi[r]));
      }
    const auto xst = summarize(xs), gst = summarize(gaps);
    rep.diagnostics["xi"] = {{"mean", xst.mean}, {"ci_half", xst.ci_half}, {"mean_abs_gap", gst.mean},
                             {"relative_gap", st.mean > 0.0 ? gst.mean / st.mean : kNaN}};
  }
  rep.verdict = row.verdict;
  if (rep.aborted * 100 > rep.attempted) {
    rep.flags.push_back("abort-rate");
    rep.verdict = Verdict::Fail;
  }
  rep.runtime_seconds = seconds_since(t0);
  return rep;
}

// ------------------------------------------------------------ CLT

ExperimentReport clt_check(const CltSpec& spec) {
  const auto t0 = Clock::now();
  require(spec.replicas >= 1, "replicas must be at least 1");
  require(!spec.f_coeffs.empty(), "f needs at least one coefficient");
  require(spec.t > 0.0 && spec.h > 0.0, "t and h must be positive");
  const Space& space = spec.space;
  if (space.boundary() == Boundary::Dirichlet || space.kind() == SpaceKind::ConfinedLine)
    throw UnsupportedError("the CLT check needs a closed or Neumann space");
  const auto basis = SpectralBasis::for_space(space, std::max<std::size_t>(spec.f_coeffs.size(), 2));
  std::vector<std::size_t> active;
  for (std::size_t i = 0; i < spec.f_coeffs.size(); ++i)
    if (spec.f_coeffs[i] != 0.0) active.push_back(i);
  auto f = [&](const Point& x) {
    double s = 0.0;
    for (std::size_t i : active) s += spec.f_coeffs[i] * basis.eval(i, x);
    return s;
  };
  // μ(φ_i) = 0 for i ≥ 1 and φ_0 is constant
  const double mu_f = spec.f_coeffs[0] * basis.eval(0, Point(space.dimension(), 0.0));
  const double target = 2.0 * variance_vf(basis, spec.f_coeffs);

  ExperimentReport rep;
  rep.kind = "clt";
  rep.config = {{"space", space.to_json()}, {"f_coeffs", spec.f_coeffs}, {"t", spec.t}, {"replicas", spec.replicas},
                {"h", spec.h}, {"seed", spec.seed}};
  rep.target_label = "2 V_f = 2 sum_i a_i^2/lambda_i";

  std::vector<double> vals(spec.replicas, kNaN);
  std::vector<char> failed(spec.replicas, 0);
  parallel_for(spec.replicas, [&](std::size_t r) {
    try {
      RngStream rng(spec.seed, stream_id(0, r));
      const auto path = run_path(space, Dynamics::Auto, 0.0, std::nullopt, spec.t, spec.h, rng);
      vals[r] = std::sqrt(spec.t) * (occupation_measure(path).integrate(f) - mu_f);
    } catch (const std::exception&) {
      failed[r] = 1;
    }
  });
  std::vector<double> ok;
  for (std::size_t r = 0; r < spec.replicas; ++r)
    if (!failed[r]) ok.push_back(vals[r]);
  rep.attempted = spec.replicas;
  rep.aborted = spec.replicas - ok.size();

  SeriesRow row;
  row.t = spec.t;
  row.replicas = ok.size();
  row.target = target;
  if (ok.size() >= 2) {
    const auto st = summarize(ok);
    const double se = variance_std_error(st);
    row.raw_mean = st.mean;
    row.estimate = st.variance;
    row.ci_defined = true;
    row.ci_half = 1.959963984540054 * se;
    row.ratio = target > 0.0 ? st.variance / target : kNaN;
    row.verdict = std::abs(st.variance - target) <= 3.0 * se ? Verdict::Pass : Verdict::Fail;
    rep.diagnostics = {{"variance_std_error", se}, {"z", se > 0.0 ? (st.variance - target) / se : 0.0},
                       {"mean", st.mean}};
  } else {
    row.verdict = Verdict::Inconclusive;
    rep.flags.push_back("ci-undefined");
  }
  rep.rows.push_back(row);
  rep.verdict = row.verdict;
  if (rep.aborted * 100 > rep.attempted) {
    rep.flags.push_back("abort-rate");
    rep.verdict = Verdict::Fail;
  }
  rep.runtime_seconds = seconds_since(t0);
  return rep;
}

// ------------------------------------------------------------ lower bound

ExperimentReport lb_consistency_experiment(const LbSpec& spec) {
  const auto t0 = Clock::now();
  require(spec.replicas >= 1, "replicas must be at least 1");
  require(!spec.n_list.empty(), "N list is empty");
  require(spec.p >= 1.0, "p must be at least 1");
  const Space& space = spec.space;
  if (space.dimension() != 1 || space.boundary() == Boundary::Dirichlet || space.kind() == SpaceKind::ConfinedLine)
    throw UnsupportedError("the lower-bound check runs on the circle or the Neumann interval");
  const std::size_t steps = grid_steps(spec.t, spec.h);
  for (std::size_t N : spec.n_list) require(N >= 1 && steps % N == 0, "t/(N h) must be an integer for every N");
  const AnyMeasure ref = reference_measure(space);

  ExperimentReport rep;
  rep.kind = "lb-consistency";
  rep.config = {{"space", space.to_json()}, {"t", spec.t}, {"n_list", spec.n_list}, {"replicas", spec.replicas},
                {"h", spec.h}, {"p", spec.p}, {"seed", spec.seed}};
  rep.target_label = "2^{-1/p} psi^{-1}(1/(2N))";

  const std::size_t R = spec.replicas, K = spec.n_list.size();
  std::vector<double> dist(R * K, kNaN), w1(R * K, kNaN), bound(R * K, kNaN);
  std::vector<char> failed(R, 0);
  parallel_for(R, [&](std::size_t r) {
    try {
      RngStream rng(spec.seed, stream_id(0, r));
      const auto path = run_path(space, Dynamics::Auto, 0.0, std::nullopt, spec.t, spec.h, rng);
      const AnyMeasure occ = occupation_measure(path);
      for (std::size_t k = 0; k < K; ++k) {
        const AnyMeasure sub = subsample_measure(path, spec.n_list[k]);
        dist[r * K + k] = wp_exact(sub, ref, spec.p).value;
        w1[r * K + k] = wp_exact(sub, occ, 1.0).value;
        bound[r * K + k] = path_coupling_bound(path, spec.n_list[k]);
      }
    } catch (const std::exception&) {
      failed[r] = 1;
    }
  });
  rep.attempted = R;
  for (char f : failed) rep.aborted += f;

  Verdict verdict = Verdict::Pass;
  nlohmann::json per_n = nlohmann::json::array();
  for (std::size_t k = 0; k < K; ++k) {
    const std::size_t N = spec.n_list[k];
    const double lb = lb101_bound(space, N, spec.p);
    std::vector<double> ds;
    std::size_t lb_viol = 0, coupling_viol = 0;
    double coupling_ratio = 0.0;
    for (std::size_t r = 0; r < R; ++r) {
      if (failed[r]) continue;
      const double v = dist[r * K + k];
      ds.push_back(v);
      if (v < lb) ++lb_viol;
      if (w1[r * K + k] > bound[r * K + k] * (1.0 + 1e-12) + 1e-12) ++coupling_viol;
      if (bound[r * K + k] > 0.0) coupling_ratio = std::max(coupling_ratio, w1[r * K + k] / bound[r * K + k]);
    }
    SeriesRow row;
    row.series = "N=" + std::to_string(N);
    row.t = spec.t;
    row.replicas = ds.size();
    if (!ds.empty()) {
      const auto st = summarize(ds);
      row.raw_mean = st.mean;
      row.estimate = st.mean;
      row.ci_defined = st.ci_defined();
      row.ci_half = st.ci_half;
      row.target = lb;
      row.ratio = st.mean / lb;
      row.verdict = (lb_viol == 0 && coupling_viol == 0) ? Verdict::Pass : Verdict::Fail;
      row.note = std::to_string(lb_viol) + " lower-bound violations";
    } else {
      row.verdict = Verdict::Inconclusive;
    }
    verdict = combine(verdict, row.verdict);
    per_n.push_back({{"N", N}, {"bound", lb}, {"violations", lb_viol}, {"coupling_violations", coupling_viol},
                     {"max_w1_over_coupling_bound", coupling_ratio},
                     {"min_distance", ds.empty() ? kNaN : *std::min_element(ds.begin(), ds.end())}});
    rep.rows.push_back(row);
  }
  rep.diagnostics["per_n"] = per_n;
  bool monotone = true;
  for (std::size_t k = 1; k < K; ++k)
    if (spec.n_list[k] > spec.n_list[k - 1] &&
        lb101_bound(space, spec.n_list[k], spec.p) >= lb101_bound(space, spec.n_list[k - 1], spec.p))
      monotone = false;
  rep.diagnostics["bound_monotone_in_N"] = monotone;
  if (rep.aborted * 100 > rep.attempted) {
    rep.flags.push_back("abort-rate");
    verdict = Verdict::Fail;
  }
  rep.verdict = verdict;
  rep.runtime_seconds = seconds_since(t0);
  return rep;
}

// ------------------------------------------------------------ upper bound audit

ExperimentReport bounds_audit(const BoundsAuditSpec& spec) {
  const auto t0 = Clock::now();
  const Space& space = spec.space;
  if (space.dimension() != 1 || space.boundary() == Boundary::Dirichlet || space.kind() == SpaceKind::ConfinedLine)
    throw UnsupportedError("the bound audit runs on the circle or the Neumann interval");
  require(spec.cells >= 8, "cells must be at least 8");
  require(spec.p >= 1.0, "p must be at least 1");
  const auto basis = SpectralBasis::for_space(space);
  const double L = space.extent();
  const double omega = (space.periodic() ? 2.0 : 1.0) * std::numbers::pi / L;

  ExperimentReport rep;
  rep.kind = "bounds-audit";
  rep.config = {{"space", space.to_json()}, {"pairs", spec.pairs}, {"cells", spec.cells}, {"p", spec.p},
                {"seed", spec.seed}};
  rep.target_label = "W_p^p <= gradient bound";

  // 1 + Σ_{k≤3} a_k cos(kωx) + b_k sin(kωx), |a_k|, |b_k| ≤ 0.15
  auto random_density = [&](RngStream& rng) {
    std::vector<double> a(4), b(4);
    for (int k = 1; k <= 3; ++k) {
      a[k] = 0.3 * (rng.uniform() - 0.5);
      b[k] = space.periodic() ? 0.3 * (rng.uniform() - 0.5) : 0.0;
    }
    return DensityOnGrid::from_function(space, spec.cells, [=](const Point& x) {
      double v = 1.0;
      for (int k = 1; k <= 3; ++k) v += a[k] * std::cos(k * omega * x[0]) + b[k] * std::sin(k * omega * x[0]);
      return v;
    });
  };
  std::vector<double> ratio(spec.pairs, kNaN);
  parallel_for(spec.pairs, [&](std::size_t i) {
    RngStream rng(spec.seed, stream_id(0, i));
    const auto f1 = random_density(rng), f2 = random_density(rng);
    const double exact = wp_exact(f1, f2, spec.p).power();
    const double ub = ta1_upper_bound(basis, f1, f2, spec.p);
    ratio[i] = ub > 0.0 ? exact / ub : (exact > 0.0 ? kNaN : 0.0);
  });
  std::size_t violations = 0;
  double worst = 0.0;
  for (double r : ratio) {
    if (!(r <= 1.0)) ++violations;
    if (std::isfinite(r)) worst = std::max(worst, r);
  }
  SeriesRow sandwich;
  sandwich.series = "random-pairs";
  sandwich.replicas = spec.pairs;
  sandwich.estimate = worst;
  sandwich.raw_mean = worst;
  sandwich.target = 1.0;
  sandwich.ratio = worst;
  sandwich.verdict = violations == 0 ? Verdict::Pass : Verdict::Fail;
  sandwich.note = std::to_string(violations) + " violations; estimate is the largest exact/bound ratio";
  rep.rows.push_back(sandwich);

  // f1 ≡ 1, f2 = 1 + a√2 cos(ωx): one-sided bound 4a²/ω² at p = 2
  const double a = 0.1;
  const int cells = std::max(spec.cells, 512);
  const auto one = DensityOnGrid::from_function(space, cells, [](const Point&) { return 1.0; });
  const auto pert = DensityOnGrid::from_function(
      space, cells, [&](const Point& x) { return 1.0 + a * std::numbers::sqrt2 * std::cos(omega * x[0]); });
  const auto cb = ta1_bound(basis, one, pert, 2.0);
  const double closed = 4.0 * a * a / (omega * omega);
  SeriesRow cosine;
  cosine.series = "cosine-a0.1";
  cosine.replicas = 1;
  cosine.estimate = cb.value;
  cosine.raw_mean = cb.one_sided;
  cosine.target = closed;
  cosine.ratio = cb.value / closed;
  cosine.verdict = cb.value <= closed * (1.0 + 1e-9) ? Verdict::Pass : Verdict::Fail;
  cosine.note = "returned bound vs one-sided closed form";
  rep.rows.push_back(cosine);
  rep.diagnostics = {{"violations", violations}, {"cosine", {{"symmetric", cb.symmetric}, {"one_sided", cb.one_sided},
                                                             {"mean_based", cb.mean_based}, {"closed_form", closed},
                                                             {"exact_w2_squared", wp_exact(one, pert, 2.0).power()}}}};
  rep.attempted = spec.pairs;
  rep.verdict = combine(sandwich.verdict, cosine.verdict);
  rep.runtime_seconds = seconds_since(t0);
  return rep;
}

}  // namespace ergolab
