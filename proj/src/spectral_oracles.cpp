#include "ergolab/spectral_oracles.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <string>
#include <tuple>

#include <boost/math/quadrature/exp_sinh.hpp>

#include "ergolab/errors.hpp"
#include "ergolab/laws.hpp"

namespace ergolab {

namespace {

constexpr double kPi = std::numbers::pi;
constexpr double kSqrt2 = std::numbers::sqrt2;

// Σ_{i≥n} g(gap_i) ≤ g(gap_lower(n)) + ∫_n^∞ g(gap_lower(x)) dx for decreasing g.
template <class G>
double tail_bound(const SpectralBasis& basis, G&& g, std::size_t n) {
  const double start = static_cast<double>(std::max<std::size_t>(n, 1));
  boost::math::quadrature::exp_sinh<double> integrator;
  const double integral = integrator.integrate(
      [&](double s) {
        const double v = g(basis.gap_lower(start + s));
        return std::isfinite(v) ? v : 0.0;
      },
      0.0, std::numeric_limits<double>::infinity());
  return g(basis.gap_lower(start)) + integral;
}

struct TorusMode {
  long norm2;
  std::vector<int> k;
  unsigned pattern;
};

}  // namespace

SpectralBasis SpectralBasis::for_space(const Space& space, std::size_t n_max) {
  if (n_max == 0) throw DomainError("basis needs at least one mode");
  SpectralBasis b;
  b.space_ = space;
  b.dim_ = space.dimension();
  b.lambda_.resize(n_max);
  const double L = space.extent();
  switch (space.kind()) {
    case SpaceKind::Circle: {
      b.flavor_ = BasisFlavor::Closed;
      b.omega_ = 2.0 * kPi / L;
      const double w2 = b.omega_ * b.omega_;
      for (std::size_t i = 0; i < n_max; ++i) {
        const double m = static_cast<double>((i + 1) / 2);
        b.lambda_[i] = w2 * m * m;
      }
      b.c1_ = w2 / 4.0;
      b.kappa_ = w2;
      break;
    }
    case SpaceKind::Interval: {
      b.omega_ = kPi / L;
      const double w2 = b.omega_ * b.omega_;
      if (space.boundary() == Boundary::Neumann) {
        b.flavor_ = BasisFlavor::Neumann;
        for (std::size_t i = 0; i < n_max; ++i) b.lambda_[i] = w2 * double(i) * double(i);
        b.c1_ = w2;
        b.kappa_ = w2;
      } else {
        b.flavor_ = BasisFlavor::Dirichlet;
        for (std::size_t i = 0; i < n_max; ++i) b.lambda_[i] = w2 * double(i + 1) * double(i + 1);
        b.c1_ = w2;
        b.kappa_ = 4.0 * w2;
      }
      break;
    }
    case SpaceKind::Torus: {
      b.flavor_ = BasisFlavor::Closed;
      b.omega_ = 2.0 * kPi / L;
      const double w2 = b.omega_ * b.omega_;
      const int d = b.dim_;
      // grow the radius until the enumerated shells hold n_max real modes
      std::vector<TorusMode> modes;
      for (long R2 = 1;; R2 *= 2) {
        modes.clear();
        const int R = static_cast<int>(std::floor(std::sqrt(double(R2))));
        std::vector<int> k(d, 0);
        std::size_t count = 0;
        for (;;) {
          long n2 = 0;
          int support = 0;
          for (int c : k) {
            n2 += long(c) * c;
            support += c != 0;
          }
          if (n2 <= R2) {
            // one real function per sign pattern on the support
            for (unsigned pat = 0; pat < (1u << d); ++pat) {
              bool ok = true;
              for (int j = 0; j < d; ++j)
                if (((pat >> j) & 1u) && k[j] == 0) ok = false;
              if (ok) modes.push_back({n2, k, pat});
            }
            count += std::size_t(1) << support;
          }
          int j = 0;
          while (j < d && ++k[j] > R) k[j++] = 0;
          if (j == d) break;
        }
        if (count >= n_max) break;
      }
      std::sort(modes.begin(), modes.end(), [](const TorusMode& a, const TorusMode& c) {
        return std::tie(a.norm2, a.k, a.pattern) < std::tie(c.norm2, c.k, c.pattern);
      });
      modes.resize(n_max);
      for (std::size_t i = 0; i < n_max; ++i) {
        b.lambda_[i] = w2 * double(modes[i].norm2);
        b.freq_.push_back(modes[i].k);
        b.pattern_.push_back(modes[i].pattern);
      }
      b.c1_ = w2 / 9.0;
      const double s = std::pow(2.0, 1.0 / d) + 1.0;
      b.kappa_ = w2 * d * s * s / 4.0;
      break;
    }
    case SpaceKind::ConfinedLine:
      throw UnsupportedError("no explicit eigenbasis on the confined line");
  }
  return b;
}

SpectralBasis SpectralBasis::synthetic(std::vector<double> eigenvalues, BasisFlavor flavor, int dimension) {
  if (eigenvalues.empty()) throw DomainError("synthetic basis needs eigenvalues");
  if (dimension < 1) throw DomainError("dimension must be >= 1");
  if (!std::is_sorted(eigenvalues.begin(), eigenvalues.end())) throw DomainError("eigenvalues must be nondecreasing");
  if (flavor != BasisFlavor::Dirichlet && eigenvalues[0] != 0.0) throw DomainError("closed/Neumann bases start at λ_0 = 0");
  if (flavor == BasisFlavor::Dirichlet && !(eigenvalues[0] > 0.0)) throw DomainError("Dirichlet bases start at λ_0 > 0");
  SpectralBasis b;
  b.flavor_ = flavor;
  b.dim_ = dimension;
  b.lambda_ = std::move(eigenvalues);
  double cmin = std::numeric_limits<double>::infinity(), cmax = 0.0, gmin = cmin;
  for (std::size_t i = 1; i < b.lambda_.size(); ++i) {
    const double scale = std::pow(double(i), 2.0 / dimension);
    cmin = std::min(cmin, b.lambda_[i] / scale);
    cmax = std::max(cmax, b.lambda_[i] / scale);
    gmin = std::min(gmin, (b.lambda_[i] - b.lambda_[0]) / scale);
  }
  if (b.lambda_.size() == 1) cmin = cmax = gmin = b.lambda_[0] > 0 ? b.lambda_[0] : 1.0;
  b.c1_ = cmin;
  b.kappa_ = cmax;
  b.gap_c_ = gmin;
  return b;
}

SpectralBasis SpectralBasis::with_modes(std::size_t n_max) const {
  if (space_) return for_space(*space_, n_max);
  if (n_max > lambda_.size()) throw DomainError("synthetic basis cannot be extended");
  return synthetic(std::vector<double>(lambda_.begin(), lambda_.begin() + n_max), flavor_, dim_);
}

void SpectralBasis::check_index(std::size_t i) const {
  if (i >= lambda_.size())
    throw DomainError("eigen index " + std::to_string(i) + " beyond truncation " + std::to_string(lambda_.size()));
}

double SpectralBasis::eigenvalue(std::size_t i) const {
  check_index(i);
  return lambda_[i];
}

double SpectralBasis::gap_lower(double x) const {
  x = std::max(x, 1.0);
  const double w2 = omega_ * omega_;
  if (!space_) return gap_c_ * std::pow(x, 2.0 / dim_);
  switch (space_->kind()) {
    case SpaceKind::Circle: return w2 * x * x / 4.0;
    case SpaceKind::Interval: return w2 * x * x;
    case SpaceKind::Torus: {
      const double r = std::pow(x, 1.0 / dim_) - 1.0;
      return w2 * std::max(1.0, r * r / 4.0);
    }
    case SpaceKind::ConfinedLine: break;
  }
  return 0.0;
}

double SpectralBasis::eval1(std::size_t i, double x) const {
  check_index(i);
  if (!space_) throw UnsupportedError("synthetic basis has no eigenfunctions");
  if (dim_ != 1) throw DomainError("eval1 needs a 1-D space");
  switch (space_->kind()) {
    case SpaceKind::Circle:
    case SpaceKind::Torus: {
      if (i == 0) return 1.0;
      const double m = double((i + 1) / 2);
      return (i % 2 == 1) ? kSqrt2 * std::cos(m * omega_ * x) : kSqrt2 * std::sin(m * omega_ * x);
    }
    case SpaceKind::Interval:
      if (flavor_ == BasisFlavor::Neumann) return i == 0 ? 1.0 : kSqrt2 * std::cos(double(i) * omega_ * x);
      return kSqrt2 * std::sin(double(i + 1) * omega_ * x);
    case SpaceKind::ConfinedLine: break;
  }
  return 0.0;
}

double SpectralBasis::derivative1(std::size_t i, double x) const {
  check_index(i);
  if (!space_) throw UnsupportedError("synthetic basis has no eigenfunctions");
  if (dim_ != 1) throw DomainError("derivative1 needs a 1-D space");
  switch (space_->kind()) {
    case SpaceKind::Circle:
    case SpaceKind::Torus: {
      if (i == 0) return 0.0;
      const double m = double((i + 1) / 2) * omega_;
      return (i % 2 == 1) ? -kSqrt2 * m * std::sin(m * x) : kSqrt2 * m * std::cos(m * x);
    }
    case SpaceKind::Interval:
      if (flavor_ == BasisFlavor::Neumann) {
        const double m = double(i) * omega_;
        return -kSqrt2 * m * std::sin(m * x);
      } else {
        const double m = double(i + 1) * omega_;
        return kSqrt2 * m * std::cos(m * x);
      }
    case SpaceKind::ConfinedLine: break;
  }
  return 0.0;
}

double SpectralBasis::eval(std::size_t i, const Point& x) const {
  check_index(i);
  if (!space_) throw UnsupportedError("synthetic basis has no eigenfunctions");
  if (static_cast<int>(x.size()) != dim_) throw DomainError("point dimension mismatch");
  if (space_->kind() != SpaceKind::Torus || dim_ == 1) return eval1(i, x[0]);
  double v = 1.0;
  for (int j = 0; j < dim_; ++j) {
    const int k = freq_[i][j];
    if (k == 0) continue;
    const double arg = k * omega_ * x[j];
    v *= ((pattern_[i] >> j) & 1u) ? kSqrt2 * std::sin(arg) : kSqrt2 * std::cos(arg);
  }
  return v;
}

Point SpectralBasis::gradient(std::size_t i, const Point& x) const {
  check_index(i);
  if (!space_) throw UnsupportedError("synthetic basis has no eigenfunctions");
  if (static_cast<int>(x.size()) != dim_) throw DomainError("point dimension mismatch");
  if (space_->kind() != SpaceKind::Torus || dim_ == 1) return {derivative1(i, x[0])};
  Point g(dim_, 0.0);
  std::vector<double> val(dim_, 1.0), der(dim_, 0.0);
  for (int j = 0; j < dim_; ++j) {
    const int k = freq_[i][j];
    if (k == 0) continue;
    const double m = k * omega_, arg = m * x[j];
    if ((pattern_[i] >> j) & 1u) {
      val[j] = kSqrt2 * std::sin(arg);
      der[j] = kSqrt2 * m * std::cos(arg);
    } else {
      val[j] = kSqrt2 * std::cos(arg);
      der[j] = -kSqrt2 * m * std::sin(arg);
    }
  }
  for (int j = 0; j < dim_; ++j) {
    double v = der[j];
    for (int l = 0; l < dim_; ++l)
      if (l != j) v *= val[l];
    g[j] = v;
  }
  return g;
}

std::pair<double, std::function<double(const Point&)>> SpectralBasis::eigenpair(std::size_t i) const {
  check_index(i);
  if (!space_) throw UnsupportedError("synthetic basis has no eigenfunctions");
  SpectralBasis copy = *this;
  return {lambda_[i], [copy, i](const Point& x) { return copy.eval(i, x); }};
}

std::pair<double, std::function<double(const Point&)>> eigenpair(const SpectralBasis& basis, std::size_t i) {
  return basis.eigenpair(i);
}

SeriesValue limit_t4(const SpectralBasis& basis, std::span<const double> drift_correction) {
  if (basis.flavor() == BasisFlavor::Dirichlet) throw UnsupportedError("limit_t4 needs a closed or Neumann basis");
  if (basis.dimension() >= 4) throw UnsupportedError("Σ 2/λ_i² diverges for dimension >= 4");
  SeriesValue out;
  const auto& lam = basis.eigenvalues();
  for (std::size_t i = 1; i < lam.size(); ++i) {
    const double v = i < drift_correction.size() ? drift_correction[i] : 0.0;
    out.truncated += 2.0 / (lam[i] * lam[i]) * (1.0 - v / lam[i]);
  }
  out.terms = lam.size() > 0 ? lam.size() - 1 : 0;
  // drift corrections only lower the terms (V ≥ 0), so the plain tail bounds them
  out.tail_bound = tail_bound(basis, [](double g) { return 2.0 / (g * g); }, lam.size());
  return out;
}

SeriesValue limit_t2(const SpectralBasis& basis) {
  if (basis.flavor() != BasisFlavor::Dirichlet) throw UnsupportedError("limit_t2 needs a Dirichlet basis");
  if (basis.dimension() >= 4) throw UnsupportedError("Σ 2/(λ_i-λ_0)² diverges for dimension >= 4");
  SeriesValue out;
  const auto& lam = basis.eigenvalues();
  for (std::size_t i = 1; i < lam.size(); ++i) {
    const double g = lam[i] - lam[0];
    out.truncated += 2.0 / (g * g);
  }
  out.terms = lam.size() - 1;
  out.tail_bound = tail_bound(basis, [](double g) { return 2.0 / (g * g); }, lam.size());
  return out;
}

Limit1Value limit_t1(const SpectralBasis& basis, std::span<const double> nu, std::span<const double> mu) {
  if (basis.flavor() != BasisFlavor::Dirichlet) throw UnsupportedError("limit_t1 needs a Dirichlet basis");
  if (nu.empty() || mu.empty()) throw DomainError("limit_t1 needs ground-state coefficients");
  if (!(nu[0] > 0.0)) throw DomainError("ν(φ_0) must be positive");
  if (!(mu[0] > 0.0)) throw DomainError("μ(φ_0) must be positive");
  const auto& lam = basis.eigenvalues();
  const std::size_t n = std::min({nu.size(), mu.size(), lam.size()});
  Limit1Value out;
  double sum = 0.0;
  for (std::size_t i = 1; i < n; ++i) {
    const double g = lam[i] - lam[0];
    const double num = nu[0] * mu[i] + mu[0] * nu[i];
    sum += num * num / (g * g * g);
    out.finiteness_diagnostic += nu[i] * nu[i] / (lam[i] * lam[i] * lam[i]);
  }
  const double scale = mu[0] * nu[0];
  out.value = sum / (scale * scale);
  return out;
}

double variance_vf(const SpectralBasis& basis, std::span<const double> f) {
  const auto& lam = basis.eigenvalues();
  if (f.size() > lam.size()) throw DomainError("more coefficients than basis modes");
  double s = 0.0;
  for (std::size_t i = 1; i < f.size(); ++i) {
    if (!(lam[i] > 0.0)) throw DomainError("zero eigenvalue beyond the ground state");
    s += f[i] * f[i] / lam[i];
  }
  return s;
}

double heat_kernel(const SpectralBasis& basis, double t, const Point& x, const Point& y) {
  if (!(t > 0.0)) throw DomainError("heat kernel needs t > 0");
  const std::size_t n = basis.size();
  const auto& lam = basis.eigenvalues();
  if (double(n) * std::exp(-lam[n - 1] * t) >= 1e-8) {
    std::size_t m = n;
    while (double(m) * std::exp(-(lam[0] + basis.gap_lower(double(m - 1))) * t) >= 1e-8) m = m + m / 4 + 1;
    throw TruncationError("heat kernel truncation too coarse for t=" + std::to_string(t), m);
  }
  double s = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double w = std::exp(-lam[i] * t);
    if (w == 0.0) break;
    s += w * (basis.eval(i, x) * basis.eval(i, y));
  }
  return s;
}

std::vector<double> project_1d(const SpectralBasis& basis, const std::function<double(double)>& g, std::size_t n,
                               int panels) {
  if (!basis.space() || basis.dimension() != 1) throw UnsupportedError("project_1d needs a 1-D space basis");
  n = std::min(n, basis.size());
  const double L = basis.space()->extent();
  std::vector<double> out(n);
  for (std::size_t i = 0; i < n; ++i)
    out[i] = gauss_legendre([&](double x) { return g(x) * basis.eval1(i, x); }, 0.0, L, panels) / L;
  return out;
}

}  // namespace ergolab
