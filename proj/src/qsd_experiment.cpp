#include <algorithm>
#include <chrono>
#include <cmath>
#include <limits>
#include <mutex>

#include "ergolab/diffusion_sim.hpp"
#include "ergolab/errors.hpp"
#include "ergolab/experiment_harness.hpp"
#include "ergolab/laws.hpp"
#include "ergolab/parallel.hpp"
#include "ergolab/rng.hpp"
#include "ergolab/spectral_oracles.hpp"
#include "ergolab/transport_engines.hpp"

namespace ergolab {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();
constexpr std::size_t kBlock = 8192;
constexpr int kGroups = 10;

std::size_t multiple_of(double t, double H, const char* what) {
  const double r = t / H;
  const auto n = static_cast<std::size_t>(std::llround(r));
  if (n == 0 || std::abs(r - double(n)) > 1e-9 * r) throw DomainError(what);
  return n;
}

// Composite Simpson weights on n intervals scaled by 24 so that they are
// integers; an odd n ends with the 3/8 rule on the last three intervals.
std::vector<std::uint64_t> simpson_weights(std::size_t n) {
  std::vector<std::uint64_t> w(n + 1, 0);
  if (n == 1) {
    w[0] = w[1] = 12;
    return w;
  }
  const std::size_t simpson = (n % 2 == 0) ? n : n - 3;
  for (std::size_t k = 0; k + 2 <= simpson; k += 2) {
    w[k] += 8;
    w[k + 1] += 32;
    w[k + 2] += 8;
  }
  if (simpson != n) {
    w[simpson] += 9;
    w[simpson + 1] += 27;
    w[simpson + 2] += 27;
    w[simpson + 3] += 9;
  }
  return w;
}

struct Start {
  std::optional<double> x0;
  SineSquaredLaw mu0;
  double draw(RngStream& rng) const { return x0 ? *x0 : mu0.sample(rng); }
};

KilledSkeleton replay(const Space& space, const Start& start, double t_max, double H, std::uint64_t seed,
                      std::size_t r) {
  RngStream rng(seed, r);
  const double x = start.draw(rng);
  return killed_bm_skeleton(space, x, t_max, H, rng);
}

// Survivor counts at every skeleton time k·H, k = 0..n.
std::vector<std::uint64_t> survival_counts(const Space& space, const Start& start, double t_max, double H,
                                           std::size_t paths, std::uint64_t seed) {
  const std::size_t n = multiple_of(t_max, H, "skeleton step must divide the horizon");
  std::vector<std::uint64_t> alive(n + 1, 0);
  std::mutex mu;
  const std::size_t blocks = (paths + kBlock - 1) / kBlock;
  parallel_for(blocks, [&](std::size_t b) {
    std::vector<std::uint64_t> local(n + 1, 0);
    for (std::size_t r = b * kBlock; r < std::min(paths, (b + 1) * kBlock); ++r) {
      const auto sk = replay(space, start, t_max, H, seed, r);
      for (std::size_t k = 0; k < sk.points.size(); ++k) ++local[k];
    }
    std::lock_guard lock(mu);
    for (std::size_t k = 0; k <= n; ++k) alive[k] += local[k];
  });
  return alive;
}

// Least-squares slope of log S against t, with its standard error.
void exp_fit(const std::vector<double>& t, const std::vector<double>& s, double& rate, double& se) {
  std::vector<double> x, y;
  for (std::size_t i = 0; i < t.size(); ++i)
    if (s[i] > 0.0) {
      x.push_back(t[i]);
      y.push_back(std::log(s[i]));
    }
  if (x.size() < 3) throw DomainError("decay fit needs three positive survival fractions");
  double mx = 0, my = 0;
  for (std::size_t i = 0; i < x.size(); ++i) mx += x[i], my += y[i];
  mx /= double(x.size());
  my /= double(x.size());
  double sxx = 0, sxy = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sxx += (x[i] - mx) * (x[i] - mx);
    sxy += (x[i] - mx) * (y[i] - my);
  }
  const double slope = sxy / sxx;
  double rss = 0;
  for (std::size_t i = 0; i < x.size(); ++i) rss += std::pow(y[i] - my - slope * (x[i] - mx), 2);
  rate = -slope;
  se = std::sqrt(rss / double(x.size() - 2) / sxx);
}

DensityOnGrid histogram_density(const Space& space, const std::vector<std::uint64_t>& counts, bool mirror) {
  const std::size_t n = counts.size();
  DensityOnGrid g{space, static_cast<int>(n), std::vector<double>(n)};
  long double total = 0;
  for (std::size_t i = 0; i < n; ++i) {
    const std::uint64_t c = mirror ? counts[i] + counts[n - 1 - i] : counts[i];
    g.values[i] = double(c);
    total += c;
  }
  if (total == 0) throw DomainError("empty histogram");
  for (double& v : g.values) v = double(v * (long double)n / total);
  return g;
}

}  // namespace

DecayResult survival_decay(double ell, std::optional<double> x0, const std::vector<double>& t_list,
                           std::size_t paths, double coarse_step, std::uint64_t seed) {
  if (!(ell > 0.0) || paths == 0 || t_list.size() < 3) throw DomainError("decay needs ell > 0, paths and three times");
  const Space space = Space::interval(ell, Boundary::Dirichlet);
  const Start start{x0, SineSquaredLaw(ell)};
  for (double t : t_list) multiple_of(t, coarse_step, "survival times must be multiples of the skeleton step");
  const double t_max = *std::max_element(t_list.begin(), t_list.end());
  const auto alive = survival_counts(space, start, t_max, coarse_step, paths, seed);
  DecayResult out;
  out.paths = paths;
  out.t = t_list;
  for (double t : t_list) out.survival.push_back(double(alive[multiple_of(t, coarse_step, "")]) / double(paths));
  exp_fit(out.t, out.survival, out.rate, out.rate_se);
  return out;
}

ExperimentReport qsd_experiment(const QsdSpec& spec) {
  const auto clock0 = std::chrono::steady_clock::now();
  if (!(spec.ell > 0.0)) throw DomainError("ell must be positive");
  if (spec.t_list.empty()) throw DomainError("t_list is empty");
  for (std::size_t i = 1; i < spec.t_list.size(); ++i)
    if (!(spec.t_list[i] > spec.t_list[i - 1])) throw DomainError("t_list must be increasing");
  if (spec.replicas == 0) throw DomainError("replicas must be at least 1");
  if (spec.bins < 16) throw DomainError("bins must be at least 16");
  if (spec.x0 && !(*spec.x0 > 0.0 && *spec.x0 < spec.ell)) throw DomainError("x0 must lie inside (0, ell)");
  const double H = spec.coarse_step;
  multiple_of(H, spec.h, "h must divide the skeleton step");
  const std::size_t T = spec.t_list.size();
  std::vector<std::size_t> nsteps(T);
  for (std::size_t j = 0; j < T; ++j)
    nsteps[j] = multiple_of(spec.t_list[j], H, "every t must be a multiple of the skeleton step");
  const double t_max = spec.t_list.back();

  const Space space = Space::interval(spec.ell, Boundary::Dirichlet);
  const Start start{spec.x0, SineSquaredLaw(spec.ell)};
  const bool symmetric = !spec.x0 || std::abs(*spec.x0 - 0.5 * spec.ell) < 1e-12 * spec.ell;

  // spectral targets and ν's coefficients
  const auto basis = SpectralBasis::for_space(space, spec.n_max);
  const std::size_t nm = basis.size();
  std::vector<double> nu, mu = project_1d(basis, [](double) { return 1.0; }, nm);
  if (spec.x0) {
    for (std::size_t i = 0; i < nm; ++i) nu.push_back(basis.eval1(i, *spec.x0));
  } else {
    nu = project_1d(basis, [&](double x) { return start.mu0.density(x) * spec.ell; }, nm);
  }
  const auto t2 = limit_t2(basis);
  const auto t1 = limit_t1(basis, nu, mu);

  // pre-size so that the expected survivor count at t_max reaches min_survivors
  double s_max = 0.0;
  for (std::size_t i = 0; i < nm; ++i) s_max += std::exp(-basis.eigenvalue(i) * t_max) * nu[i] * mu[i];
  std::size_t R = spec.replicas;
  ExperimentReport rep;
  if (spec.presize && s_max > 0.0) {
    const auto need = static_cast<std::size_t>(std::ceil(1.2 * double(spec.min_survivors) / s_max));
    if (need > R) {
      R = need;
      rep.flags.push_back("replicas-raised");
    }
  }

  rep.kind = "qsd";
  rep.config = {{"ell", spec.ell}, {"t_list", spec.t_list}, {"replicas", spec.replicas}, {"h", spec.h},
                {"coarse_step", H}, {"bins", spec.bins}, {"path_survivors", spec.path_survivors},
                {"min_survivors", spec.min_survivors}, {"n_max", spec.n_max}, {"seed", spec.seed},
                {"start", spec.x0 ? nlohmann::json(*spec.x0) : nlohmann::json("mu0")}};
  rep.target_label = "paths: sum_i 2/(lambda_i-lambda_0)^2; mean: spectral limit from nu's coefficients";

  // pass 1: skeletons, survivor lists, occupation histograms with Simpson time weights
  const std::size_t B = spec.bins, S = 2 * kGroups;  // sub-histogram s = r mod 20
  std::vector<std::vector<std::uint64_t>> hist(T * S, std::vector<std::uint64_t>(B, 0));
  std::vector<std::vector<std::size_t>> survivors(T);  // the first path_survivors ids
  std::vector<std::size_t> survivor_count(T, 0);
  std::vector<std::uint64_t> alive(nsteps.back() + 1, 0);
  std::vector<std::vector<std::uint64_t>> weights(T);
  for (std::size_t j = 0; j < T; ++j) weights[j] = simpson_weights(nsteps[j]);
  const double scale = double(B) / spec.ell;
  std::mutex mtx;
  // large runs use fewer, larger blocks so the per-block histogram merge stays cheap
  const std::size_t block = std::max(kBlock, (R + 511) / 512);
  const std::size_t blocks = (R + block - 1) / block;
  parallel_for(blocks, [&](std::size_t b) {
    std::vector<std::vector<std::uint64_t>> local(T * S, std::vector<std::uint64_t>(B, 0));
    std::vector<std::vector<std::size_t>> ids(T);
    std::vector<std::uint64_t> al(alive.size(), 0);
    std::vector<std::size_t> counts(T, 0);
    for (std::size_t r = b * block; r < std::min(R, (b + 1) * block); ++r) {
      const auto sk = replay(space, start, t_max, H, spec.seed, r);
      for (std::size_t k = 0; k < sk.points.size(); ++k) ++al[k];
      for (std::size_t j = 0; j < T; ++j) {
        if (sk.points.size() < nsteps[j] + 1) break;
        ++counts[j];
        if (ids[j].size() < spec.path_survivors) ids[j].push_back(r);
        auto& h = local[j * S + r % S];
        for (std::size_t k = 0; k <= nsteps[j]; ++k) {
          const auto bin = std::min(B - 1, static_cast<std::size_t>(sk.points[k] * scale));
          h[bin] += weights[j][k];
        }
      }
    }
    std::lock_guard lock(mtx);
    for (std::size_t i = 0; i < T * S; ++i)
      for (std::size_t k = 0; k < B; ++k) hist[i][k] += local[i][k];
    for (std::size_t j = 0; j < T; ++j) {
      survivor_count[j] += counts[j];
      auto& v = survivors[j];
      v.insert(v.end(), ids[j].begin(), ids[j].end());
      std::sort(v.begin(), v.end());
      if (v.size() > spec.path_survivors) v.resize(spec.path_survivors);
    }
    for (std::size_t k = 0; k < al.size(); ++k) alive[k] += al[k];
  });
  rep.attempted = R;

  const SmoothMeasure mu0{space, std::make_shared<SineSquaredLaw>(spec.ell)};
  Verdict verdict = Verdict::Pass;
  nlohmann::json per_t = nlohmann::json::array();
  std::vector<SeriesRow> path_rows, mean_rows;
  for (std::size_t j = 0; j < T; ++j) {
    const double t = spec.t_list[j];
    const std::size_t n_surv = survivor_count[j];
    const bool starved = n_surv < std::max<std::size_t>(50, spec.min_survivors);
    if (n_surv < 50) rep.flags.push_back("starved at t=" + std::to_string(t));

    // track (a): refined paths of the first survivors
    SeriesRow ra;
    ra.series = "paths";
    ra.t = t;
    ra.target = t2.midpoint();
    const std::size_t K = survivors[j].size();
    std::vector<double> vals(K, kNaN);
    std::vector<char> failed(K, 0);
    parallel_for(K, [&](std::size_t i) {
      const std::size_t r = survivors[j][i];
      try {
        auto sk = replay(space, start, t_max, H, spec.seed, r);
        sk.points.resize(nsteps[j] + 1);
        sk.horizon = t;
        sk.survived = true;
        RngStream rng = RngStream(spec.seed, r).split(1 + j);
        const auto path = refine_killed_skeleton(space, sk, spec.h, rng);
        const double w = wp_line(occupation_measure(path), mu0, 2.0).value;
        vals[i] = t * w * w;
      } catch (const std::exception&) {
        failed[i] = 1;
      }
    });
    std::vector<double> ok;
    for (std::size_t i = 0; i < K; ++i)
      if (!failed[i]) ok.push_back(vals[i]);
    rep.aborted += K - ok.size();
    ra.replicas = ok.size();
    if (ok.size() >= 2) {
      const auto st = summarize(ok);
      ra.raw_mean = st.mean / t;
      ra.estimate = st.mean;
      ra.ci_defined = true;
      ra.ci_half = st.ci_half;
      ra.ratio = st.mean / ra.target;
    }

    // track (b): survivor-averaged occupation measure, noise floor from split halves
    SeriesRow rb;
    rb.series = "mean";
    rb.t = t;
    rb.target = t1.value;
    rb.replicas = n_surv;
    double floor_w2 = kNaN;
    if (n_surv >= 2 * S) {
      auto sum_of = [&](auto pick) {
        std::vector<std::uint64_t> c(B, 0);
        for (std::size_t s = 0; s < S; ++s)
          if (pick(s))
            for (std::size_t k = 0; k < B; ++k) c[k] += hist[j * S + s][k];
        return c;
      };
      auto w2sq = [&](const std::vector<std::uint64_t>& c) {
        const double w = wp_line(histogram_density(space, c, symmetric), mu0, 2.0).value;
        return w * w;
      };
      auto w2sq_pair = [&](const std::vector<std::uint64_t>& a, const std::vector<std::uint64_t>& b) {
        const double w = wp_line(histogram_density(space, a, symmetric), histogram_density(space, b, symmetric), 2.0).value;
        return w * w;
      };
      const auto all = sum_of([](std::size_t) { return true; });
      const auto A = sum_of([](std::size_t s) { return s < kGroups; });
      const auto Bh = sum_of([](std::size_t s) { return s >= kGroups; });
      const double raw = w2sq(all);
      floor_w2 = w2sq_pair(A, Bh) / 4.0;
      const double est = raw - floor_w2;
      // group estimates (each debiased by its own halves) for the spread
      std::vector<double> groups;
      for (int g = 0; g < kGroups; ++g) {
        const auto ga = sum_of([&](std::size_t s) { return s == std::size_t(g); });
        const auto gb = sum_of([&](std::size_t s) { return s == std::size_t(g) + kGroups; });
        auto gall = ga;
        for (std::size_t k = 0; k < B; ++k) gall[k] += gb[k];
        groups.push_back(t * t * (w2sq(gall) - w2sq_pair(ga, gb) / 4.0));
      }
      const auto gs = summarize(groups);
      rb.raw_mean = raw;
      rb.estimate = t * t * est;
      rb.ci_defined = true;
      // the full-sample estimator is no noisier than the mean of the group estimates
      rb.ci_half = gs.ci_half;
      rb.ratio = rb.estimate / rb.target;
      per_t.push_back({{"t", t}, {"survivors", n_surv}, {"raw_w2_squared", raw}, {"noise_floor", floor_w2},
                       {"floor_fraction", floor_w2 / raw}, {"group_mean", gs.mean}, {"path_replicas", ra.replicas}});
    } else {
      per_t.push_back({{"t", t}, {"survivors", n_surv}});
    }

    for (SeriesRow* row : {&ra, &rb}) {
      if (starved) {
        row->verdict = Verdict::Inconclusive;
        row->note = "too few survivors (" + std::to_string(n_surv) + ")";
      } else {
        row->verdict = band_verdict(row->estimate, row->ci_half, row->ci_defined, row->target, spec.tolerance);
      }
      verdict = combine(verdict, row->verdict);
    }
    path_rows.push_back(ra);
    mean_rows.push_back(rb);
  }
  rep.rows = path_rows;
  rep.rows.insert(rep.rows.end(), mean_rows.begin(), mean_rows.end());

  // survival curve on integer times and its decay rate
  std::vector<double> ts, surv;
  for (std::size_t k = 0; k < alive.size(); ++k) {
    const double t = double(k) * H;
    if (t >= 1.0 - 1e-9 && std::abs(t - std::round(t)) < 1e-9) {
      ts.push_back(t);
      surv.push_back(double(alive[k]) / double(R));
    }
  }
  nlohmann::json decay{{"t", ts}, {"survival", surv}};
  if (ts.size() >= 3) {
    double rate, se;
    exp_fit(ts, surv, rate, se);
    decay["rate"] = rate;
    decay["rate_se"] = se;
    decay["lambda0"] = basis.eigenvalue(0);
  }
  rep.diagnostics = {{"per_t", per_t},
                     {"targets", {{"paths", t2.midpoint()}, {"paths_bracket", {t2.lower(), t2.upper()}},
                                  {"mean", t1.value}, {"mean_finiteness", t1.finiteness_diagnostic}}},
                     {"expected_survival_at_t_max", s_max},
                     {"paths_started", R},
                     {"symmetrized", symmetric},
                     {"decay", decay}};
  if (rep.aborted * 100 > rep.attempted) {
    rep.flags.push_back("abort-rate");
    verdict = Verdict::Fail;
  }
  rep.verdict = verdict;
  rep.runtime_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - clock0).count();
  return rep;
}

}  // namespace ergolab
