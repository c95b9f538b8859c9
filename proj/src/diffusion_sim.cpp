#include "ergolab/diffusion_sim.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

#include "ergolab/errors.hpp"
#include "ergolab/laws.hpp"

namespace ergolab {

namespace {

void check_step(double t, double h) {
  if (!(h > 0.0) || !std::isfinite(h)) throw DomainError("step h must be positive");
  if (!(t >= h) || !std::isfinite(t)) throw DomainError("horizon must be at least one step");
}

double wrap(double x, double L) {
  double r = std::fmod(x, L);
  if (r < 0.0) r += L;
  if (r >= L) r = 0.0;
  return r;
}

double fold(double x, double L) {
  double r = std::fmod(x, 2.0 * L);
  if (r < 0.0) r += 2.0 * L;
  if (r > L) r = 2.0 * L - r;
  return std::clamp(r, 0.0, L);
}

SamplePath make_path(const Space& space, double t, double h, std::size_t steps) {
  SamplePath p{space, h, t, {}, true, t};
  p.states.reserve((steps + 1) * static_cast<std::size_t>(space.dimension()));
  return p;
}

// Length of step k (from grid time k to k+1).
double step_length(double t, double h, std::size_t k, std::size_t steps) {
  return (k + 1 == steps) ? t - h * static_cast<double>(k) : h;
}

// Brownian bridge (variance 2 per unit time) crossing probability of the
// boundaries of (0, L) between x1 and x2 over time dt, one boundary at a time.
bool bridge_killed(double x1, double x2, double L, double dt, RngStream& rng) {
  const double a = x1 * x2, b = (L - x1) * (L - x2);
  // exp(-40) is below the resolution of the uniform draw; skip the exp call
  if (a < 40.0 * dt && rng.uniform() < std::exp(-a / dt)) return true;
  if (b < 40.0 * dt && rng.uniform() < std::exp(-b / dt)) return true;
  return false;
}

}  // namespace

std::size_t grid_steps(double t, double h) {
  const double r = t / h;
  const double n = std::round(r);
  if (std::abs(r - n) <= 1e-9 * std::max(1.0, r)) return static_cast<std::size_t>(std::max(1.0, n));
  return static_cast<std::size_t>(std::ceil(r));
}

double SamplePath::time(std::size_t k) const { return std::min(h * static_cast<double>(k), horizon); }

Point SamplePath::state(std::size_t k) const {
  const auto d = static_cast<std::size_t>(dim());
  return Point(states.begin() + k * d, states.begin() + (k + 1) * d);
}

SamplePath simulate_wrapped_bm(const Space& space, const Point& x0, double t, double h, RngStream& rng,
                               const SimOptions& opt) {
  if (!space.periodic()) throw UnsupportedError("wrapped Brownian motion needs a circle or torus");
  check_step(t, h);
  const Point start = space.canonical(x0);
  const std::size_t steps = grid_steps(t, h);
  SamplePath p = make_path(space, t, h, steps);
  const double L = space.extent();
  const std::size_t d = start.size();
  p.states.insert(p.states.end(), start.begin(), start.end());
  for (std::size_t k = 0; k < steps; ++k) {
    const double sd = opt.noise_scale * std::sqrt(2.0 * step_length(t, h, k, steps));
    const std::size_t base = p.states.size() - d;
    for (std::size_t j = 0; j < d; ++j) p.states.push_back(wrap(p.states[base + j] + sd * rng.normal(), L));
  }
  return p;
}

SamplePath simulate_reflected_bm(const Space& space, const Point& x0, double t, double h, RngStream& rng,
                                 const SimOptions& opt) {
  if (space.kind() != SpaceKind::Interval || space.boundary() != Boundary::Neumann)
    throw UnsupportedError("reflected Brownian motion needs a Neumann interval");
  check_step(t, h);
  double x = space.canonical(x0)[0];
  const std::size_t steps = grid_steps(t, h);
  SamplePath p = make_path(space, t, h, steps);
  const double L = space.extent();
  p.states.push_back(x);
  for (std::size_t k = 0; k < steps; ++k) {
    const double sd = opt.noise_scale * std::sqrt(2.0 * step_length(t, h, k, steps));
    x = fold(x + sd * rng.normal(), L);
    p.states.push_back(x);
  }
  return p;
}

SamplePath simulate_killed_bm(const Space& space, const Point& x0, double t, double h, RngStream& rng,
                              const SimOptions& opt) {
  if (space.kind() != SpaceKind::Interval || space.boundary() != Boundary::Dirichlet)
    throw UnsupportedError("killed Brownian motion needs a Dirichlet interval");
  check_step(t, h);
  double x = space.canonical(x0)[0];
  const double L = space.extent();
  if (!(x > 0.0 && x < L)) throw DomainError("killed Brownian motion cannot start on the boundary");
  const std::size_t steps = grid_steps(t, h);
  SamplePath p = make_path(space, t, h, steps);
  p.states.push_back(x);
  for (std::size_t k = 0; k < steps; ++k) {
    const double dt = step_length(t, h, k, steps);
    const double y = x + opt.noise_scale * std::sqrt(2.0 * dt) * rng.normal();
    if (!(y > 0.0 && y < L) || bridge_killed(x, y, L, dt, rng)) {
      p.survived = false;
      p.lifetime = h * static_cast<double>(k) + 0.5 * dt;
      return p;
    }
    x = y;
    p.states.push_back(x);
  }
  return p;
}

KilledSkeleton killed_bm_skeleton(const Space& space, double x0, double t, double H, RngStream& rng) {
  if (space.kind() != SpaceKind::Interval || space.boundary() != Boundary::Dirichlet)
    throw UnsupportedError("killed Brownian motion needs a Dirichlet interval");
  check_step(t, H);
  const double L = space.extent();
  if (!(x0 > 0.0 && x0 < L)) throw DomainError("killed Brownian motion cannot start on the boundary");
  const std::size_t steps = grid_steps(t, H);
  if (std::abs(double(steps) * H - t) > 1e-9 * t) throw DomainError("skeleton step must divide the horizon");
  KilledSkeleton s;
  s.coarse_step = H;
  s.horizon = t;
  s.points.reserve(steps + 1);
  s.points.push_back(x0);
  double x = x0;
  const double sd = std::sqrt(2.0 * H);
  for (std::size_t k = 0; k < steps; ++k) {
    const double y = x + sd * rng.normal();
    if (!(y > 0.0 && y < L) || bridge_killed(x, y, L, H, rng)) {
      s.survived = false;
      return s;
    }
    s.points.push_back(y);
    x = y;
  }
  return s;
}

SamplePath refine_killed_skeleton(const Space& space, const KilledSkeleton& sk, double h, RngStream& rng) {
  if (!sk.survived) throw DomainError("only surviving skeletons are refined");
  const double H = sk.coarse_step;
  const double ratio = H / h;
  const auto m = static_cast<std::size_t>(std::llround(ratio));
  if (m < 1 || std::abs(ratio - double(m)) > 1e-9 * ratio) throw DomainError("fine step must divide the skeleton step");
  const double L = space.extent();
  const std::size_t coarse = sk.points.size() - 1;
  SamplePath p = make_path(space, sk.horizon, h, coarse * m);
  p.states.push_back(sk.points[0]);
  std::vector<double> seg(m + 1);
  for (std::size_t j = 0; j < coarse; ++j) {
    const double a = sk.points[j], b = sk.points[j + 1];
    bool accepted = false;
    for (int attempt = 0; attempt < 1000000 && !accepted; ++attempt) {
      seg[0] = a;
      accepted = true;
      for (std::size_t k = 1; k <= m; ++k) {
        double y;
        if (k == m) {
          y = b;
        } else {
          const double remaining = H - double(k - 1) * h;
          const double mean = seg[k - 1] + (h / remaining) * (b - seg[k - 1]);
          const double var = 2.0 * h * (remaining - h) / remaining;
          y = mean + std::sqrt(var) * rng.normal();
        }
        if (!(y > 0.0 && y < L) || bridge_killed(seg[k - 1], y, L, h, rng)) {
          accepted = false;
          break;
        }
        seg[k] = y;
      }
    }
    if (!accepted) throw SimulationError("bridge refinement failed to find a surviving segment");
    p.states.insert(p.states.end(), seg.begin() + 1, seg.end());
  }
  return p;
}

SamplePath simulate_langevin_line(const Space& space, const Point& x0, double t, double h, RngStream& rng,
                                  const SimOptions& opt) {
  if (space.kind() != SpaceKind::ConfinedLine) throw UnsupportedError("Langevin simulator needs the confined line");
  check_step(t, h);
  const double theta = space.theta(), tau = space.tau();
  auto dV = [&](double x) { return 2.0 * theta * tau * x * std::pow(1.0 + theta * x * x, tau - 1.0); };
  auto d2V = [&](double x) {
    const double u = 1.0 + theta * x * x;
    return 2.0 * theta * tau * std::pow(u, tau - 1.0) + 4.0 * theta * theta * tau * (tau - 1.0) * x * x * std::pow(u, tau - 2.0);
  };
  const auto& law = static_cast<const ConfinedLineLaw&>(*space.invariant_law());
  const double span = 6.0 * std::sqrt(law.variance());
  double sup = 0.0;
  for (int i = 0; i <= 400; ++i) sup = std::max(sup, std::abs(d2V(-span + 2.0 * span * i / 400.0)));
  if (h * sup >= 0.5)
    throw SimulationError("step too large for the Langevin scheme: h*sup|V''| = " + std::to_string(h * sup));
  const double guard = opt.blowup_guard > 0.0 ? opt.blowup_guard : 100.0 * law.hi();

  double x = space.canonical(x0)[0];
  auto advance = [&](double dt) {
    x = x - dV(x) * dt + opt.noise_scale * std::sqrt(2.0 * dt) * rng.normal();
    if (!std::isfinite(x) || std::abs(x) > guard) throw SimulationError("Langevin path left the guard region; reduce h");
  };
  const double burn = opt.burn_in < 0.0 ? 10.0 : opt.burn_in;
  if (burn > 0.0) {
    const std::size_t nb = grid_steps(burn, h);
    for (std::size_t k = 0; k < nb; ++k) advance(step_length(burn, h, k, nb));
  }
  const std::size_t steps = grid_steps(t, h);
  SamplePath p = make_path(space, t, h, steps);
  p.states.push_back(x);
  for (std::size_t k = 0; k < steps; ++k) {
    advance(step_length(t, h, k, steps));
    p.states.push_back(x);
  }
  return p;
}

Coefficients example51_coefficients(double l, double x) {
  const double w = x * (1.0 - x);
  return {l * std::pow(w, l - 1.0) * (1.0 - 2.0 * x), std::sqrt(2.0) * std::pow(w, 0.5 * l)};
}

SamplePath simulate_example51(double l, double x0, double t, double h, RngStream& rng, const SimOptions& opt) {
  if (!(l > 2.0)) throw DomainError("example51 needs l > 2");
  if (!(x0 > 0.0 && x0 < 1.0)) throw DomainError("example51 needs x0 in (0,1)");
  check_step(t, h);
  const Space space = Space::interval(1.0, Boundary::Neumann);
  const double lo = h * h, hi = 1.0 - h * h;
  const std::size_t steps = grid_steps(t, h);
  SamplePath p = make_path(space, t, h, steps);
  double x = std::clamp(x0, lo, hi);
  p.states.push_back(x);
  for (std::size_t k = 0; k < steps; ++k) {
    const double dt = step_length(t, h, k, steps);
    const auto c = example51_coefficients(l, x);
    x = std::clamp(x + c.drift * dt + opt.noise_scale * c.diffusion * std::sqrt(dt) * rng.normal(), lo, hi);
    p.states.push_back(x);
  }
  return p;
}

SamplePath simulate(const Space& space, const Point& x0, double t, double h, RngStream& rng, const SimOptions& opt) {
  switch (space.kind()) {
    case SpaceKind::Circle:
    case SpaceKind::Torus: return simulate_wrapped_bm(space, x0, t, h, rng, opt);
    case SpaceKind::Interval:
      return space.boundary() == Boundary::Dirichlet ? simulate_killed_bm(space, x0, t, h, rng, opt)
                                                     : simulate_reflected_bm(space, x0, t, h, rng, opt);
    case SpaceKind::ConfinedLine: return simulate_langevin_line(space, x0, t, h, rng, opt);
  }
  throw UnsupportedError("unknown space kind");
}

// ------------------------------------------------------------ measures

EmpiricalMeasure EmpiricalMeasure::uniform(const Space& space, std::vector<double> points, double horizon) {
  const std::size_t n = points.size() / static_cast<std::size_t>(space.dimension());
  if (n == 0) throw DomainError("empirical measure needs at least one atom");
  std::vector<double> w(n, 1.0 / static_cast<double>(n));
  return weighted(space, std::move(points), std::move(w), horizon);
}

EmpiricalMeasure EmpiricalMeasure::weighted(const Space& space, std::vector<double> points, std::vector<double> weights,
                                            double horizon) {
  EmpiricalMeasure m{space, std::move(points), std::move(weights), horizon};
  m.validate();
  return m;
}

Point EmpiricalMeasure::point(std::size_t i) const {
  const auto d = static_cast<std::size_t>(dim());
  return Point(points.begin() + i * d, points.begin() + (i + 1) * d);
}

void EmpiricalMeasure::validate() const {
  const auto d = static_cast<std::size_t>(dim());
  if (weights.empty()) throw DomainError("empirical measure needs at least one atom");
  if (points.size() != weights.size() * d) throw DomainError("atom/weight count mismatch");
  double s = 0.0;
  for (double w : weights) {
    if (!(w >= 0.0)) throw DomainError("negative or NaN weight");
    s += w;
  }
  if (std::abs(s - 1.0) > 1e-12 * std::max<double>(1.0, double(weights.size()) / 1e3))
    throw DomainError("weights must sum to 1");
  for (std::size_t i = 0; i < size(); ++i) space.check_point(point(i));
}

EmpiricalMeasure EmpiricalMeasure::merged() const {
  const auto d = static_cast<std::size_t>(dim());
  std::vector<std::size_t> order(size());
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    return std::lexicographical_compare(points.begin() + a * d, points.begin() + (a + 1) * d, points.begin() + b * d,
                                        points.begin() + (b + 1) * d);
  });
  EmpiricalMeasure out{space, {}, {}, horizon};
  for (std::size_t idx : order) {
    const bool same = !out.weights.empty() &&
                      std::equal(points.begin() + idx * d, points.begin() + (idx + 1) * d, out.points.end() - d);
    if (same) {
      out.weights.back() += weights[idx];
    } else {
      out.points.insert(out.points.end(), points.begin() + idx * d, points.begin() + (idx + 1) * d);
      out.weights.push_back(weights[idx]);
    }
  }
  return out;
}

EmpiricalMeasure occupation_measure(const SamplePath& path) {
  const std::size_t n = path.size();
  const double T = path.survived ? path.horizon : path.lifetime;
  if (n == 0 || !(T > 0.0)) throw DomainError("occupation measure of an empty path");
  const auto d = static_cast<std::size_t>(path.dim());
  std::vector<double> w;
  std::size_t atoms;
  if (path.survived) {
    atoms = n - 1;  // the final state carries no time
    w.resize(atoms);
    for (std::size_t k = 0; k < atoms; ++k) w[k] = (path.time(k + 1) - path.time(k)) / T;
  } else {
    atoms = n;
    w.resize(atoms);
    for (std::size_t k = 0; k < atoms; ++k) {
      const double end = (k + 1 < n) ? path.time(k + 1) : T;
      w[k] = std::max(0.0, end - path.time(k)) / T;
    }
  }
  if (atoms == 0) throw DomainError("occupation measure of an empty path");
  // renormalize away rounding in the time grid
  const double s = std::accumulate(w.begin(), w.end(), 0.0);
  for (double& v : w) v /= s;
  std::vector<double> pts(path.states.begin(), path.states.begin() + atoms * d);
  return EmpiricalMeasure{path.space, std::move(pts), std::move(w), T};
}

namespace {

std::size_t block_length(const SamplePath& path, std::size_t N) {
  if (N == 0) throw DomainError("subsample needs N >= 1");
  if (!path.survived) throw DomainError("subsample needs a surviving path");
  const double r = path.horizon / (double(N) * path.h);
  const auto m = static_cast<std::size_t>(std::llround(r));
  if (m < 1 || std::abs(r - double(m)) > 1e-9 * r)
    throw DomainError("t/(N h) must be a positive integer for subsampling");
  if (m * N + 1 > path.size()) throw DomainError("path shorter than the subsample grid");
  return m;
}

}  // namespace

EmpiricalMeasure subsample_measure(const SamplePath& path, std::size_t N) {
  const std::size_t m = block_length(path, N);
  const auto d = static_cast<std::size_t>(path.dim());
  std::vector<double> pts;
  pts.reserve(N * d);
  for (std::size_t i = 1; i <= N; ++i) {
    const std::size_t k = i * m;
    pts.insert(pts.end(), path.states.begin() + k * d, path.states.begin() + (k + 1) * d);
  }
  return EmpiricalMeasure::uniform(path.space, std::move(pts), path.horizon);
}

double path_coupling_bound(const SamplePath& path, std::size_t N) {
  const std::size_t m = block_length(path, N);
  const EmpiricalMeasure occ = occupation_measure(path);
  double total = 0.0;
  for (std::size_t k = 0; k < occ.size(); ++k) {
    const std::size_t rep = (k / m + 1) * m;
    total += occ.weights[k] * path.space.metric(occ.point(k), path.state(rep));
  }
  return total;
}

}  // namespace ergolab
