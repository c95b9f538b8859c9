#include <algorithm>
#include <cmath>
#include <limits>

#include "ergolab/errors.hpp"
#include "ergolab/transport_engines.hpp"

namespace ergolab {

namespace {

constexpr double kNegInf = -std::numeric_limits<double>::infinity();

// Histogram on the n×n node grid at cell midpoints; index i + n*j.
std::vector<double> to_histogram(const AnyMeasure& m, int n, bool& binned) {
  const Space& s = space_of(m);
  const double L = s.extent(), w = L / n;
  std::vector<double> a(std::size_t(n) * n, 0.0);
  if (const auto* e = std::get_if<EmpiricalMeasure>(&m)) {
    binned = true;
    for (std::size_t k = 0; k < e->size(); ++k) {
      const int i = std::clamp(static_cast<int>(e->points[2 * k] / w), 0, n - 1);
      const int j = std::clamp(static_cast<int>(e->points[2 * k + 1] / w), 0, n - 1);
      a[std::size_t(i) + std::size_t(n) * j] += e->weights[k];
    }
  } else if (const auto* g = std::get_if<DensityOnGrid>(&m)) {
    for (int j = 0; j < n; ++j)
      for (int i = 0; i < n; ++i) a[std::size_t(i) + std::size_t(n) * j] = g->at({(i + 0.5) * w, (j + 0.5) * w});
  } else {
    throw UnsupportedError("sinkhorn_torus takes empirical or grid measures");
  }
  double s2 = 0.0;
  for (double v : a) s2 += v;
  for (double& v : a) v /= s2;
  return a;
}

class Solver {
 public:
  Solver(int n, double L) : n_(n), cost_(std::size_t(n) * n) {
    const double w = L / n;
    for (int i = 0; i < n; ++i)
      for (int k = 0; k < n; ++k) {
        double d = std::abs(i - k) * w;
        d = std::min(d, L - d);
        cost_[std::size_t(i) * n + k] = d * d;
      }
  }

  double max_cost() const { return 2.0 * *std::max_element(cost_.begin(), cost_.end()); }

  // out = -ε LSE_{kl}[(pot_kl)/ε + log w_kl - C/ε], the c-transform of pot against weights w.
  void transform(const std::vector<double>& pot, const std::vector<double>& logw, double eps, std::vector<double>& out) {
    const int n = n_;
    const std::size_t N = std::size_t(n) * n;
    h_.resize(N);
    for (std::size_t q = 0; q < N; ++q) h_[q] = logw[q] == kNegInf ? kNegInf : pot[q] / eps + logw[q];
    // first over the second coordinate l: T[k + n*j] = LSE_l h[k + n*l] - C(j,l)/ε
    tmp_.resize(N);
    row_.resize(n);
    for (int k = 0; k < n; ++k) {
      for (int j = 0; j < n; ++j) {
        double mx = kNegInf;
        for (int l = 0; l < n; ++l) {
          row_[l] = h_[std::size_t(k) + std::size_t(n) * l] - cost_[std::size_t(j) * n + l] / eps;
          mx = std::max(mx, row_[l]);
        }
        double s = 0.0;
        if (mx != kNegInf)
          for (int l = 0; l < n; ++l) s += std::exp(row_[l] - mx);
        tmp_[std::size_t(k) + std::size_t(n) * j] = mx == kNegInf ? kNegInf : mx + std::log(s);
      }
    }
    out.resize(N);
    for (int j = 0; j < n; ++j) {
      for (int i = 0; i < n; ++i) {
        double mx = kNegInf;
        for (int k = 0; k < n; ++k) {
          row_[k] = tmp_[std::size_t(k) + std::size_t(n) * j] - cost_[std::size_t(i) * n + k] / eps;
          mx = std::max(mx, row_[k]);
        }
        double s = 0.0;
        for (int k = 0; k < n; ++k) s += std::exp(row_[k] - mx);
        out[std::size_t(i) + std::size_t(n) * j] = -eps * (mx + std::log(s));
      }
    }
  }

 private:
  int n_;
  std::vector<double> cost_, h_, tmp_, row_;
};

std::vector<double> logs(const std::vector<double>& a) {
  std::vector<double> l(a.size());
  for (std::size_t i = 0; i < a.size(); ++i) l[i] = a[i] > 0.0 ? std::log(a[i]) : kNegInf;
  return l;
}

double dot(const std::vector<double>& w, const std::vector<double>& f) {
  double s = 0.0;
  for (std::size_t i = 0; i < w.size(); ++i)
    if (w[i] > 0.0) s += w[i] * f[i];
  return s;
}

struct Schedule {
  std::vector<double> eps;
};

Schedule make_schedule(double L, double target) {
  Schedule s;
  for (double e = 0.25 * L * L; e > target; e *= 0.5) s.eps.push_back(e);
  s.eps.push_back(target);
  return s;
}

// Entropic OT between a and b; returns <f,a> + <g,b> and the final marginal violation.
double ot_entropic(Solver& solver, const std::vector<double>& a, const std::vector<double>& b, const Schedule& sch,
                   const SinkhornOptions& opt, double& violation, int& iters) {
  const auto la = logs(a), lb = logs(b);
  std::vector<double> f(a.size(), 0.0), g(b.size(), 0.0), gn;
  for (std::size_t stage = 0; stage < sch.eps.size(); ++stage) {
    const double eps = sch.eps[stage];
    const bool last = stage + 1 == sch.eps.size();
    const double tol = last ? opt.tolerance : std::max(opt.tolerance, 1e-4);
    for (;;) {
      if (++iters > opt.max_iter) throw ConvergenceError("Sinkhorn did not converge within max_iter");
      solver.transform(g, lb, eps, f);
      solver.transform(f, la, eps, gn);
      // column marginal of the plan (f, g) is b·exp((g - gn)/ε)
      violation = 0.0;
      for (std::size_t q = 0; q < b.size(); ++q)
        if (b[q] > 0.0) violation += b[q] * std::abs(std::expm1((g[q] - gn[q]) / eps));
      g.swap(gn);
      if (violation < tol) break;
    }
  }
  return dot(a, f) + dot(b, g);
}

// Symmetric problem OT(a, a) via the averaged fixed point.
double ot_symmetric(Solver& solver, const std::vector<double>& a, const Schedule& sch, const SinkhornOptions& opt,
                    double& violation, int& iters) {
  const auto la = logs(a);
  std::vector<double> f(a.size(), 0.0), t;
  for (std::size_t stage = 0; stage < sch.eps.size(); ++stage) {
    const double eps = sch.eps[stage];
    const bool last = stage + 1 == sch.eps.size();
    const double tol = last ? opt.tolerance : std::max(opt.tolerance, 1e-4);
    for (;;) {
      if (++iters > opt.max_iter) throw ConvergenceError("Sinkhorn did not converge within max_iter");
      solver.transform(f, la, eps, t);
      violation = 0.0;
      for (std::size_t q = 0; q < a.size(); ++q)
        if (a[q] > 0.0) violation += a[q] * std::abs(std::expm1((f[q] - t[q]) / eps));
      for (std::size_t q = 0; q < a.size(); ++q) f[q] = 0.5 * (f[q] + t[q]);
      if (violation < tol) break;
    }
  }
  return 2.0 * dot(a, f);
}

}  // namespace

DistanceReport sinkhorn_torus(const AnyMeasure& mu1, const AnyMeasure& mu2, double p, const SinkhornOptions& opt) {
  const Space& s = space_of(mu1);
  if (s != space_of(mu2)) throw DomainError("measures live on different spaces");
  if (s.kind() != SpaceKind::Torus || s.dimension() != 2) throw UnsupportedError("sinkhorn_torus needs the 2-torus");
  if (p != 2.0) throw UnsupportedError("sinkhorn_torus computes W_2 only");
  if (opt.grid < 2) throw DomainError("Sinkhorn grid needs at least 2 nodes per axis");
  const double L = s.extent();
  const double eps = opt.epsilon > 0.0 ? opt.epsilon : 5e-3 * L * L;
  bool binned = false;
  const auto a = to_histogram(mu1, opt.grid, binned);
  const auto b = to_histogram(mu2, opt.grid, binned);
  Solver solver(opt.grid, L);
  const Schedule sch = make_schedule(L, eps);
  double vab = 0.0, vaa = 0.0, vbb = 0.0;
  int iters = 0;
  const double ab = ot_entropic(solver, a, b, sch, opt, vab, iters);
  const double aa = ot_symmetric(solver, a, sch, opt, vaa, iters);
  const double bb = ot_symmetric(solver, b, sch, opt, vbb, iters);
  const double div = ab - 0.5 * aa - 0.5 * bb;
  DistanceReport r;
  r.p = 2.0;
  r.method = DistanceMethod::Sinkhorn;
  r.divergence = std::max(div, 0.0);
  r.value = std::sqrt(r.divergence);
  const double w = L / opt.grid;
  double err_div = eps * std::log(double(a.size())) + (vab + vaa + vbb) * solver.max_cost();
  if (binned) err_div += 2.0 * std::sqrt(0.5) * w * (r.value + w);
  r.error_estimate = std::sqrt(r.divergence + err_div) - r.value;
  return r;
}

}  // namespace ergolab
