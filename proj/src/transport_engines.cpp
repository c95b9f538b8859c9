#include "ergolab/transport_engines.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "ergolab/errors.hpp"
#include "ergolab/statistics.hpp"

namespace ergolab {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

std::size_t ipow(std::size_t b, int e) {
  std::size_t r = 1;
  for (int i = 0; i < e; ++i) r *= b;
  return r;
}

void require_uniform_mu(const Space& s) {
  if (s.kind() == SpaceKind::ConfinedLine) throw UnsupportedError("grid densities need a space with uniform invariant measure");
}

}  // namespace

// ------------------------------------------------------------ DensityOnGrid

DensityOnGrid DensityOnGrid::from_function(const Space& space, int cells, const std::function<double(const Point&)>& f) {
  require_uniform_mu(space);
  if (cells < 1) throw DomainError("grid needs at least one cell");
  DensityOnGrid g{space, cells, {}};
  const std::size_t n = ipow(std::size_t(cells), space.dimension());
  g.values.resize(n);
  double sum = 0.0;
  for (std::size_t m = 0; m < n; ++m) {
    const double v = f(g.midpoint(m));
    if (!(v >= 0.0) || !std::isfinite(v)) throw DomainError("density values must be finite and nonnegative");
    g.values[m] = v;
    sum += v;
  }
  if (!(sum > 0.0)) throw DomainError("density has zero mass");
  const double scale = double(n) / sum;
  for (double& v : g.values) v *= scale;
  return g;
}

DensityOnGrid DensityOnGrid::uniform(const Space& space) {
  require_uniform_mu(space);
  return DensityOnGrid{space, 1, std::vector<double>(1, 1.0)};
}

void DensityOnGrid::validate() const {
  require_uniform_mu(space);
  if (values.size() != ipow(std::size_t(cells), space.dimension())) throw DomainError("grid size mismatch");
  double s = 0.0;
  for (double v : values) {
    if (!(v >= 0.0) || !std::isfinite(v)) throw DomainError("density values must be finite and nonnegative");
    s += v;
  }
  if (std::abs(s / double(values.size()) - 1.0) > 1e-8) throw DomainError("density does not integrate to 1");
}

Point DensityOnGrid::midpoint(std::size_t index) const {
  const int d = space.dimension();
  Point x(d);
  const double w = cell_width();
  for (int j = 0; j < d; ++j) {
    x[j] = (double(index % std::size_t(cells)) + 0.5) * w;
    index /= std::size_t(cells);
  }
  return x;
}

double DensityOnGrid::at(const Point& x) const {
  const int d = space.dimension();
  std::size_t index = 0, stride = 1;
  for (int j = 0; j < d; ++j) {
    const int c = std::clamp(static_cast<int>(x[j] / cell_width()), 0, cells - 1);
    index += std::size_t(c) * stride;
    stride *= std::size_t(cells);
  }
  return values[index];
}

std::vector<double> DensityOnGrid::masses() const {
  if (space.dimension() != 1) throw UnsupportedError("cell masses are 1-D only");
  std::vector<double> m(values.size());
  for (std::size_t i = 0; i < m.size(); ++i) m[i] = values[i] / double(cells);
  return m;
}

// ------------------------------------------------------------ measures

const Space& space_of(const AnyMeasure& m) {
  return std::visit([](const auto& v) -> const Space& { return v.space; }, m);
}

double integrate(const AnyMeasure& m, const std::function<double(const Point&)>& f) {
  if (const auto* e = std::get_if<EmpiricalMeasure>(&m)) return e->integrate(f);
  if (const auto* g = std::get_if<DensityOnGrid>(&m)) {
    if (g->space.dimension() == 1) {
      // Gauss-Legendre inside each cell, so the piecewise-constant density is integrated as is
      const double w = g->cell_width();
      KahanSum s;
      for (std::size_t i = 0; i < g->size(); ++i)
        s.add(g->values[i] * gauss_legendre([&](double x) { return f(Point{x}); }, i * w, (i + 1) * w, 1));
      return s.value() / g->space.extent();
    }
    double s = 0.0;
    for (std::size_t i = 0; i < g->size(); ++i) s += g->values[i] * f(g->midpoint(i));
    return s / double(g->size());
  }
  const auto& sm = std::get<SmoothMeasure>(m);
  if (!sm.law) throw UnsupportedError("smooth measures are 1-D only");
  return gauss_legendre([&](double x) { return sm.law->density(x) * f(Point{x}); }, sm.law->lo(), sm.law->hi(), 256);
}

std::string to_string(DistanceMethod m) {
  switch (m) {
    case DistanceMethod::Exact1D: return "exact-1d";
    case DistanceMethod::CircleExact: return "circle-exact";
    case DistanceMethod::Sinkhorn: return "sinkhorn";
    case DistanceMethod::Bound: return "bound";
  }
  return "unknown";
}

double DistanceReport::power() const { return std::pow(value, p); }

nlohmann::json DistanceReport::to_json() const {
  nlohmann::json j{{"p", p}, {"value", value}, {"method", to_string(method)}, {"error_estimate", error_estimate}};
  if (divergence >= 0.0) j["divergence"] = divergence;
  return j;
}

// ------------------------------------------------------------ 1-D engines

namespace {

void check_p(double p) {
  if (!(p >= 1.0) || !std::isfinite(p)) throw DomainError("W_p needs p >= 1");
}

bool is_uniform_law(const SmoothMeasure& m) { return dynamic_cast<const UniformLaw*>(m.law.get()) != nullptr; }

// Piecewise-linear quantile in coordinates divided by `scale`; false when
// the measure is a genuinely smooth (non-uniform) law.
bool to_quantile(const AnyMeasure& m, double scale, PiecewiseQuantile& out) {
  if (const auto* e = std::get_if<EmpiricalMeasure>(&m)) {
    if (e->dim() != 1) throw UnsupportedError("1-D engine got a multi-dimensional measure");
    std::vector<std::size_t> order(e->size());
    std::iota(order.begin(), order.end(), 0);
    std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return e->points[a] < e->points[b]; });
    std::vector<double> x(order.size()), w(order.size());
    for (std::size_t i = 0; i < order.size(); ++i) {
      x[i] = e->points[order[i]] / scale;
      w[i] = e->weights[order[i]];
    }
    out = PiecewiseQuantile::from_atoms(x, w);
    return true;
  }
  if (const auto* g = std::get_if<DensityOnGrid>(&m)) {
    out = PiecewiseQuantile::from_cells(0.0, g->cell_width() / scale, g->masses());
    return true;
  }
  const auto& sm = std::get<SmoothMeasure>(m);
  if (is_uniform_law(sm)) {
    out = PiecewiseQuantile({{0.0, 1.0, sm.law->lo() / scale, sm.law->hi() / scale}});
    return true;
  }
  return false;
}

// ∫_0^1 |Q(u) - q_law(u)|^p du for a piecewise quantile against a smooth law.
double piecewise_vs_smooth(const PiecewiseQuantile& q, const SmoothLaw1D& law, double p) {
  double total = 0.0;
  double prev_u = -1.0, prev_y = 0.0;
  for (const auto& piece : q.pieces()) {
    if (piece.u1 <= piece.u0) continue;
    const double ya = (piece.u0 == prev_u) ? prev_y : law.quantile(piece.u0);
    const double yb = law.quantile(piece.u1);
    prev_u = piece.u1;
    prev_y = yb;
    if (piece.x0 == piece.x1) {
      total += law.partial_moment(ya, yb, piece.x0, p);
    } else {
      const double slope = (piece.x1 - piece.x0) / (piece.u1 - piece.u0);
      total += gauss_legendre(
          [&](double u) { return std::pow(std::abs(piece.x0 + (u - piece.u0) * slope - law.quantile(u)), p); },
          piece.u0, piece.u1);
    }
  }
  return total;
}

double smooth_vs_smooth(const SmoothLaw1D& a, const SmoothLaw1D& b, double p, int panels) {
  return gauss_legendre([&](double u) { return std::pow(std::abs(a.quantile(u) - b.quantile(u)), p); }, 0.0, 1.0,
                        panels);
}

}  // namespace

DistanceReport wp_line(const AnyMeasure& mu1, const AnyMeasure& mu2, double p) {
  check_p(p);
  const Space& s1 = space_of(mu1);
  const Space& s2 = space_of(mu2);
  if (s1 != s2) throw DomainError("measures live on different spaces");
  if (s1.kind() != SpaceKind::Interval && s1.kind() != SpaceKind::ConfinedLine)
    throw UnsupportedError("wp_line needs an interval or the confined line");
  DistanceReport r;
  r.p = p;
  r.method = DistanceMethod::Exact1D;
  PiecewiseQuantile q1, q2;
  const bool pw1 = to_quantile(mu1, 1.0, q1), pw2 = to_quantile(mu2, 1.0, q2);
  double cost;
  if (pw1 && pw2) {
    cost = quantile_cost(q1, q2, p);
    r.error_estimate = 0.0;
  } else if (pw1 || pw2) {
    const auto& law = *std::get<SmoothMeasure>(pw1 ? mu2 : mu1).law;
    cost = piecewise_vs_smooth(pw1 ? q1 : q2, law, p);
    r.error_estimate = 1e-12 * cost;
  } else {
    const auto& a = *std::get<SmoothMeasure>(mu1).law;
    const auto& b = *std::get<SmoothMeasure>(mu2).law;
    cost = smooth_vs_smooth(a, b, p, 512);
    r.error_estimate = std::abs(cost - smooth_vs_smooth(a, b, p, 256));
  }
  cost = std::max(cost, 0.0);
  r.value = std::pow(cost, 1.0 / p);
  if (r.error_estimate > 0.0 && r.value > 0.0) r.error_estimate = r.value * r.error_estimate / (p * cost);
  return r;
}

namespace {

bool is_uniform_quantile(const PiecewiseQuantile& q) {
  for (const auto& pc : q.pieces())
    if (std::abs(pc.x0 - pc.u0) > 1e-13 || std::abs(pc.x1 - pc.u1) > 1e-13) return false;
  return true;
}

bool is_step_quantile(const PiecewiseQuantile& q) {
  for (const auto& pc : q.pieces())
    if (pc.x0 != pc.x1) return false;
  return true;
}

// Shifts θ ∈ [a, b] with θ ≡ v - u (mod 1) for jump levels u of q1 and v of q2.
std::vector<double> breakpoints_in(const PiecewiseQuantile& q1, const PiecewiseQuantile& q2, double a, double b) {
  std::vector<double> v;
  for (const auto& pc : q2.pieces()) v.push_back(pc.u0);
  std::sort(v.begin(), v.end());
  std::vector<double> out;
  for (const auto& pc : q1.pieces()) {
    const double u = pc.u0;
    for (double wrap = std::floor(a + u) - 1.0; wrap <= b + u + 1.0; wrap += 1.0) {
      // v + wrap - u ∈ [a, b]
      auto it = std::lower_bound(v.begin(), v.end(), a + u - wrap);
      for (; it != v.end() && *it + wrap - u <= b; ++it) out.push_back(*it + wrap - u);
    }
  }
  return out;
}

template <class F>
double golden_min(F&& f, double a, double b, double tol, double& fmin) {
  const double g = (std::sqrt(5.0) - 1.0) / 2.0;
  double c = b - g * (b - a), d = a + g * (b - a);
  double fc = f(c), fd = f(d);
  while (b - a > tol) {
    if (fc <= fd) {
      b = d;
      d = c;
      fd = fc;
      c = b - g * (b - a);
      fc = f(c);
    } else {
      a = c;
      c = d;
      fc = fd;
      d = a + g * (b - a);
      fd = f(d);
    }
  }
  const double x = 0.5 * (a + b);
  fmin = std::min({f(x), fc, fd});
  return x;
}

// min over θ of ∫|Q(u) - u - θ|^p du: the cost against the uniform law.
double circle_cost_vs_uniform(const PiecewiseQuantile& q, double p, double tol) {
  double lo = kInf, hi = -kInf, mean = 0.0;
  for (const auto& pc : q.pieces()) {
    const double d0 = pc.x0 - pc.u0, d1 = pc.x1 - pc.u1;
    lo = std::min({lo, d0, d1});
    hi = std::max({hi, d0, d1});
    mean += 0.5 * (d0 + d1) * (pc.u1 - pc.u0);
  }
  auto cost = [&](double theta) {
    double c = 0.0;
    for (const auto& pc : q.pieces()) {
      const double len = pc.u1 - pc.u0;
      if (len <= 0.0) continue;
      const double d0 = pc.x0 - pc.u0 - theta, d1 = pc.x1 - pc.u1 - theta;
      c += abs_linear_power_integral(d0, (d1 - d0) / len, len, p);
    }
    return c;
  };
  if (p == 2.0) return cost(mean);
  if (hi - lo <= tol) return cost(0.5 * (lo + hi));
  double best;
  golden_min(cost, lo, hi, tol, best);
  return best;
}

// W₁ between two atomic measures on a circle of length L: min_c ∫|F1 - F2 - c| dx,
// attained at a length-weighted median of F1 - F2.
double circle_w1_atomic(const EmpiricalMeasure& a, const EmpiricalMeasure& b, double L) {
  std::vector<std::pair<double, double>> jumps;
  jumps.reserve(a.size() + b.size());
  for (std::size_t i = 0; i < a.size(); ++i) jumps.emplace_back(a.points[i], a.weights[i]);
  for (std::size_t i = 0; i < b.size(); ++i) jumps.emplace_back(b.points[i], -b.weights[i]);
  std::sort(jumps.begin(), jumps.end());
  std::vector<std::pair<double, double>> seg;  // (value of F1 - F2, length)
  double g = 0.0, x = 0.0;
  for (const auto& [pos, dw] : jumps) {
    if (pos > x) seg.emplace_back(g, pos - x);
    x = std::max(x, pos);
    g += dw;
  }
  seg.emplace_back(g, L - x);
  std::sort(seg.begin(), seg.end());
  double half = 0.0, acc = 0.0, c = 0.0;
  for (const auto& sg : seg) half += sg.second;
  half *= 0.5;
  for (const auto& sg : seg) {
    acc += sg.second;
    if (acc >= half) {
      c = sg.first;
      break;
    }
  }
  KahanSum w;
  for (const auto& [v, len] : seg) w.add(std::abs(v - c) * len);
  return w.value();
}

}  // namespace

DistanceReport wp_circle(const AnyMeasure& mu1, const AnyMeasure& mu2, double p, const CircleOptions& opt) {
  check_p(p);
  const Space& s1 = space_of(mu1);
  if (s1 != space_of(mu2)) throw DomainError("measures live on different spaces");
  if (!(s1.kind() == SpaceKind::Circle || (s1.kind() == SpaceKind::Torus && s1.dimension() == 1)))
    throw UnsupportedError("wp_circle needs a circle");
  const double L = s1.extent();
  if (p == 1.0) {
    const auto* e1 = std::get_if<EmpiricalMeasure>(&mu1);
    const auto* e2 = std::get_if<EmpiricalMeasure>(&mu2);
    if (e1 && e2) {
      DistanceReport r;
      r.p = 1.0;
      r.method = DistanceMethod::CircleExact;
      r.value = circle_w1_atomic(*e1, *e2, L);
      return r;
    }
  }
  PiecewiseQuantile q1, q2;
  to_quantile(mu1, L, q1);
  to_quantile(mu2, L, q2);
  DistanceReport r;
  r.p = p;
  r.method = DistanceMethod::CircleExact;
  double cost;
  const bool u1 = is_uniform_quantile(q1), u2 = is_uniform_quantile(q2);
  if (u1 && u2) {
    cost = 0.0;
  } else if (u1 || u2) {
    cost = circle_cost_vs_uniform(u2 ? q1 : q2, p, opt.golden_tol);
  } else {
    const double gap = std::min(q1.min_gap(), q2.min_gap());
    const int n = std::clamp(static_cast<int>(std::ceil(2.0 / (gap / 4.0))), 16, opt.max_grid);
    const double step = 2.0 / n;
    std::vector<double> vals(n + 1);
    for (int k = 0; k <= n; ++k) vals[k] = lifted_quantile_cost(q1, q2, -1.0 + k * step, p);
    // refine around the lowest few local minima of the scan
    std::vector<int> minima;
    for (int k = 0; k <= n; ++k) {
      const bool left = k == 0 || vals[k] <= vals[k - 1];
      const bool right = k == n || vals[k] <= vals[k + 1];
      if (left && right) minima.push_back(k);
    }
    std::sort(minima.begin(), minima.end(), [&](int a, int b) { return vals[a] < vals[b]; });
    if (minima.size() > 4) minima.resize(4);
    cost = *std::min_element(vals.begin(), vals.end());
    const bool atomic = is_step_quantile(q1) && is_step_quantile(q2);
    for (int k : minima) {
      const double a = -1.0 + std::max(0, k - 1) * step, b = -1.0 + std::min(n, k + 1) * step;
      double fmin;
      const double th0 =
          golden_min([&](double th) { return lifted_quantile_cost(q1, q2, th, p); }, a, b, opt.golden_tol, fmin);
      cost = std::min(cost, fmin);
      // two step quantiles give a cost piecewise linear in θ: its minimum sits
      // where a jump of one side meets a jump of the other, next to th0
      if (atomic) {
        const double w = 4.0 * opt.golden_tol;
        for (double th : breakpoints_in(q1, q2, std::max(a, th0 - w), std::min(b, th0 + w)))
          cost = std::min(cost, lifted_quantile_cost(q1, q2, th, p));
      }
    }
    // the cost is p·2^{p-1}-Lipschitz in θ; the golden bracket bounds the miss
    r.error_estimate = p * std::pow(2.0, p - 1.0) * opt.golden_tol;
  }
  cost = std::max(cost, 0.0);
  r.value = L * std::pow(cost, 1.0 / p);
  if (r.error_estimate > 0.0 && cost > 0.0) r.error_estimate = r.value * r.error_estimate / (p * cost);
  return r;
}

DistanceReport wp_exact(const AnyMeasure& mu1, const AnyMeasure& mu2, double p) {
  const Space& s = space_of(mu1);
  if (s.kind() == SpaceKind::Circle || (s.kind() == SpaceKind::Torus && s.dimension() == 1)) return wp_circle(mu1, mu2, p);
  return wp_line(mu1, mu2, p);
}

// ------------------------------------------------------------ TA1 / LB101 / dual

double mean_mp(double a, double b, double p) {
  if (!(a > 0.0 && b > 0.0)) return 0.0;
  const double x = (a - b) / b;
  if (p == 2.0) {
    if (std::abs(x) < 1e-8) return (1.0 - 0.5 * x) / b;
    return std::log1p(x) / (a - b);
  }
  const double lb = std::pow(b, 1.0 - p);
  if (std::abs(x) < 1e-8) return lb * (1.0 + 0.5 * (1.0 - p) * x);
  return lb * std::expm1((2.0 - p) * std::log1p(x)) / ((2.0 - p) * x);
}

TA1Bound ta1_bound(const SpectralBasis& basis, const DensityOnGrid& f1, const DensityOnGrid& f2, double p) {
  check_p(p);
  if (basis.flavor() == BasisFlavor::Dirichlet) throw UnsupportedError("TA1 bound needs a closed or Neumann basis");
  if (!basis.space() || *basis.space() != f1.space || f1.space != f2.space) throw DomainError("basis and densities disagree on the space");
  if (f1.cells != f2.cells) throw DomainError("densities must share the grid");
  f1.validate();
  f2.validate();
  const std::size_t m = f1.size();
  for (std::size_t k = 0; k < m; ++k)
    if (!(f1.values[k] > 0.0 || f2.values[k] > 0.0)) throw DomainError("TA1 needs f1 ∨ f2 > 0");
  const int d = f1.space.dimension();
  // avoid aliasing: keep modes the midpoint rule resolves
  const std::size_t modes = std::min(basis.size(), d == 1 ? std::size_t(f1.cells) : basis.size());
  std::vector<Point> mids(m);
  for (std::size_t k = 0; k < m; ++k) mids[k] = f1.midpoint(k);
  std::vector<double> g(m);
  double norm2 = 0.0;
  for (std::size_t k = 0; k < m; ++k) {
    g[k] = f2.values[k] - f1.values[k];
    norm2 += g[k] * g[k] / double(m);
  }
  std::vector<double> b(modes, 0.0);
  double captured = 0.0;
  for (std::size_t i = 0; i < modes; ++i) {
    double s = 0.0;
    for (std::size_t k = 0; k < m; ++k) s += g[k] * basis.eval(i, mids[k]);
    b[i] = s / double(m);
    captured += b[i] * b[i];
  }
  std::vector<Point> G(m, Point(d, 0.0));
  for (std::size_t i = 1; i < modes; ++i) {
    const double c = b[i] / basis.eigenvalue(i);
    if (c == 0.0) continue;
    for (std::size_t k = 0; k < m; ++k) {
      const Point grad = basis.gradient(i, mids[k]);
      for (int j = 0; j < d; ++j) G[k][j] += c * grad[j];
    }
  }
  TA1Bound out;
  const double pp = std::pow(p, p);
  double sym = 0.0, one = 0.0, mb = 0.0;
  for (std::size_t k = 0; k < m; ++k) {
    double n2 = 0.0;
    for (int j = 0; j < d; ++j) n2 += G[k][j] * G[k][j];
    const double gp = std::pow(std::sqrt(n2), p);
    const double a = f1.values[k], c = f2.values[k];
    sym += gp / std::pow(a + c, p - 1.0);
    if (gp > 0.0) {
      if (a > 0.0 || p == 1.0) one += gp / std::pow(a, p - 1.0);
      else out.one_sided_skipped = true;
      // M_p(a,b) = ∫_0^1 (a + s(b-a))^{1-p} ds multiplies the integrand; where one
      // density vanishes this is finite only for p < 2
      if (a > 0.0 && c > 0.0) mb += gp * mean_mp(a, c, p);
      else if (p < 2.0) mb += gp * std::pow(std::max(a, c), 1.0 - p) / (2.0 - p);
      else out.mean_based_skipped = true;
    }
  }
  out.symmetric = pp * std::pow(2.0, p - 1.0) * sym / double(m);
  out.one_sided = out.one_sided_skipped ? kInf : pp * one / double(m);
  out.mean_based = out.mean_based_skipped ? kInf : mb / double(m);
  out.value = std::min({out.symmetric, out.one_sided, out.mean_based});
  const double lam = basis.eigenvalue(modes - 1);
  out.tail_indicator = lam > 0.0 ? std::max(0.0, norm2 - captured) / (lam * lam) : 0.0;
  return out;
}

double ta1_upper_bound(const SpectralBasis& basis, const DensityOnGrid& f1, const DensityOnGrid& f2, double p) {
  return ta1_bound(basis, f1, f2, p).value;
}

double lb101_bound(const Space& space, std::size_t N, double p) {
  check_p(p);
  if (N == 0) throw DomainError("lb101 needs N >= 1");
  return std::pow(2.0, -1.0 / p) * psi_inverse(space, 1.0 / (2.0 * double(N)));
}

double w1_dual_lower(const AnyMeasure& mu1, const AnyMeasure& mu2, const std::vector<Witness>& witnesses) {
  const Space& s = space_of(mu1);
  if (s != space_of(mu2)) throw DomainError("measures live on different spaces");
  // Lipschitz check on a grid of the space
  std::vector<Point> grid;
  const int d = s.dimension();
  if (d == 1) {
    double lo = 0.0, hi = s.extent();
    if (s.kind() == SpaceKind::ConfinedLine) {
      lo = s.invariant_law()->lo();
      hi = s.invariant_law()->hi();
    }
    const int n = 2048;
    const double step = s.periodic() ? (hi - lo) / n : (hi - lo) / (n - 1);
    for (int i = 0; i < n; ++i) grid.push_back({lo + i * step});
  } else {
    const int n = d == 2 ? 128 : 16;
    const std::size_t total = ipow(std::size_t(n), d);
    for (std::size_t idx = 0; idx < total; ++idx) {
      Point x(d);
      std::size_t r = idx;
      for (int j = 0; j < d; ++j) {
        x[j] = double(r % std::size_t(n)) * s.extent() / n;
        r /= std::size_t(n);
      }
      grid.push_back(x);
    }
  }
  double best = 0.0;
  for (const auto& f : witnesses) {
    std::vector<double> fv(grid.size());
    for (std::size_t i = 0; i < grid.size(); ++i) fv[i] = f(grid[i]);
    const std::size_t n = grid.size();
    for (std::size_t i = 0; i < n; ++i) {
      for (std::size_t stride : {std::size_t(1), std::size_t(3), std::size_t(17), n / 2}) {
        if (stride == 0) continue;
        const std::size_t j = (i + stride) % n;
        if (!s.periodic() && d == 1 && i + stride >= n) continue;
        const double rho = s.metric(grid[i], grid[j]);
        if (std::abs(fv[i] - fv[j]) > rho * (1.0 + 1e-9) + 1e-12) throw DomainError("witness is not 1-Lipschitz");
      }
    }
    best = std::max(best, std::abs(integrate(mu1, f) - integrate(mu2, f)));
  }
  return best;
}

}  // namespace ergolab
