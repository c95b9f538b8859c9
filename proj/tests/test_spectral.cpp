#include <doctest.h>

#include <cmath>
#include <numbers>

#include "ergolab/errors.hpp"
#include "ergolab/laws.hpp"
#include "ergolab/spectral_oracles.hpp"

using namespace ergolab;
using std::numbers::pi;

namespace {

// Σ_{k=from}^{to} f(k), summed from the small end for accuracy
template <class F>
double direct_sum(long from, long to, F&& f) {
  double s = 0.0;
  for (long k = to; k >= from; --k) s += f(double(k));
  return s;
}

}  // namespace

TEST_CASE("eigenpairs on the model spaces") {
  const auto circle = SpectralBasis::for_space(Space::circle(2 * pi));
  auto [l0, f0] = circle.eigenpair(0);
  CHECK(l0 == 0.0);
  CHECK(f0({1.234}) == 1.0);
  auto [l1, f1] = circle.eigenpair(1);
  CHECK(l1 == doctest::Approx(1.0));
  CHECK(f1({0.7}) == doctest::Approx(std::sqrt(2.0) * std::cos(0.7)));
  CHECK(circle.eval1(2, 0.7) == doctest::Approx(std::sqrt(2.0) * std::sin(0.7)));
  CHECK(circle.eigenvalue(3) == doctest::Approx(4.0));

  const auto dir = SpectralBasis::for_space(Space::interval(pi, Boundary::Dirichlet));
  auto [d0, g0] = dir.eigenpair(0);
  CHECK(d0 == doctest::Approx(1.0));
  CHECK(g0({0.4}) == doctest::Approx(std::sqrt(2.0) * std::sin(0.4)));
  CHECK(dir.eigenvalue(4) == doctest::Approx(25.0));

  const auto neu = SpectralBasis::for_space(Space::interval(pi, Boundary::Neumann));
  CHECK(neu.eigenvalue(3) == doctest::Approx(9.0));
  CHECK(neu.eval1(3, 0.2) == doctest::Approx(std::sqrt(2.0) * std::cos(0.6)));
  CHECK_THROWS_AS(neu.eigenpair(256), DomainError);
  CHECK_THROWS_AS(SpectralBasis::for_space(Space::confined_line(1, 1)), UnsupportedError);
}

TEST_CASE("torus ordering: by |k|², then frequency vector, cosine first") {
  const auto t = SpectralBasis::for_space(Space::torus(2, 2 * pi), 9);
  CHECK(t.eigenvalue(0) == 0.0);
  for (int i = 1; i <= 4; ++i) CHECK(t.eigenvalue(i) == doctest::Approx(1.0));
  for (int i = 5; i <= 8; ++i) CHECK(t.eigenvalue(i) == doctest::Approx(2.0));
  // k=(0,1): cos y, sin y; then k=(1,0): cos x, sin x
  CHECK(t.eval(1, {0.3, 0.5}) == doctest::Approx(std::sqrt(2.0) * std::cos(0.5)));
  CHECK(t.eval(2, {0.3, 0.5}) == doctest::Approx(std::sqrt(2.0) * std::sin(0.5)));
  CHECK(t.eval(3, {0.3, 0.5}) == doctest::Approx(std::sqrt(2.0) * std::cos(0.3)));
  CHECK(t.eval(5, {0.3, 0.5}) == doctest::Approx(2.0 * std::cos(0.3) * std::cos(0.5)));
}

TEST_CASE("orthonormality by quadrature") {
  const int n = 25;
  for (const Space& s : {Space::circle(2 * pi), Space::circle(1.0), Space::interval(pi, Boundary::Neumann),
                         Space::interval(2.0, Boundary::Dirichlet)}) {
    const auto b = SpectralBasis::for_space(s, n + 1);
    for (int i = 0; i <= n; ++i)
      for (int j = 0; j <= n; ++j) {
        const double ip = gauss_legendre([&](double x) { return b.eval1(i, x) * b.eval1(j, x); }, 0.0, s.extent(), 64) / s.extent();
        CHECK(std::abs(ip - (i == j ? 1.0 : 0.0)) < 1e-8);
      }
  }
  // 2-torus: the midpoint rule on a 64² grid is exact for these frequencies
  const auto t = SpectralBasis::for_space(Space::torus(2, 2 * pi), n + 1);
  const int m = 64;
  for (int i = 0; i <= n; ++i)
    for (int j = 0; j <= n; ++j) {
      double ip = 0.0;
      for (int a = 0; a < m; ++a)
        for (int c = 0; c < m; ++c) {
          const Point x{(a + 0.5) * 2 * pi / m, (c + 0.5) * 2 * pi / m};
          ip += t.eval(i, x) * t.eval(j, x);
        }
      ip /= m * m;
      CHECK(std::abs(ip - (i == j ? 1.0 : 0.0)) < 1e-8);
    }
}

TEST_CASE("eigenvalue growth sandwich holds for every index") {
  for (const Space& s : {Space::circle(2 * pi), Space::circle(3.0), Space::interval(pi, Boundary::Neumann),
                         Space::interval(pi, Boundary::Dirichlet), Space::torus(1, 2 * pi), Space::torus(2, 2 * pi),
                         Space::torus(3, 1.0), Space::torus(4, 2 * pi)}) {
    const auto b = SpectralBasis::for_space(s, 600);
    const double d = b.dimension();
    for (std::size_t i = 1; i < b.size(); ++i) {
      const double scale = std::pow(double(i), 2.0 / d);
      CHECK(b.eigenvalue(i) >= b.growth_lower() * scale * (1 - 1e-12));
      CHECK(b.eigenvalue(i) <= b.growth_upper() * scale * (1 + 1e-12));
      CHECK(b.eigenvalue(i) - b.eigenvalue(0) >= b.gap_lower(double(i)) * (1 - 1e-12));
      CHECK(b.eigenvalue(i) >= b.eigenvalue(i - 1));
    }
  }
  // circle: λ_i = ⌈i/2⌉² lies in [i²/4, i²]
  const auto c = SpectralBasis::for_space(Space::circle(2 * pi));
  CHECK(c.growth_lower() == doctest::Approx(0.25));
  CHECK(c.growth_upper() == doctest::Approx(1.0));
}

TEST_CASE("Neumann-type limit constant Σ 2/λ_i²") {
  const double circle_oracle = direct_sum(1, 1000000, [](double k) { return 4.0 / (k * k * k * k); });
  const auto c = limit_t4(SpectralBasis::for_space(Space::circle(2 * pi)));
  CHECK(c.lower() <= circle_oracle);
  CHECK(c.upper() >= circle_oracle);
  CHECK(c.midpoint() == doctest::Approx(2 * std::pow(pi, 4) / 45).epsilon(1e-6));

  const double neumann_oracle = direct_sum(1, 1000000, [](double k) { return 2.0 / (k * k * k * k); });
  const auto n = limit_t4(SpectralBasis::for_space(Space::interval(pi, Boundary::Neumann)));
  CHECK(n.lower() <= neumann_oracle);
  CHECK(n.upper() >= neumann_oracle);
  CHECK(n.midpoint() == doctest::Approx(std::pow(pi, 4) / 45).epsilon(1e-6));

  const auto single = limit_t4(SpectralBasis::synthetic({0.0, 2.0}, BasisFlavor::Closed));
  CHECK(single.truncated == doctest::Approx(0.5));
  CHECK(single.tail_bound > 0.0);

  CHECK_THROWS_AS(limit_t4(SpectralBasis::for_space(Space::interval(pi, Boundary::Dirichlet))), UnsupportedError);
  CHECK_THROWS_AS(limit_t4(SpectralBasis::for_space(Space::torus(4, 1.0), 50)), UnsupportedError);
}

TEST_CASE("limit brackets are monotone in the truncation") {
  const auto full = SpectralBasis::for_space(Space::circle(2 * pi), 4096);
  const double ref = limit_t4(full).truncated;
  double prev = 0.0;
  for (std::size_t n : {2, 4, 16, 64, 256, 1024}) {
    const auto v = limit_t4(full.with_modes(n));
    CHECK(v.truncated >= prev);
    CHECK(v.upper() >= ref);
    prev = v.truncated;
  }
  const auto t3 = SpectralBasis::for_space(Space::torus(3, 2 * pi), 1200);
  const double ref3 = limit_t4(t3).truncated;
  for (std::size_t n : {10, 100, 400}) CHECK(limit_t4(t3.with_modes(n)).upper() >= ref3);
}

TEST_CASE("drift correction slot lowers the terms") {
  const auto b = SpectralBasis::for_space(Space::circle(2 * pi));
  std::vector<double> v(256, 0.0);
  CHECK(limit_t4(b, v).truncated == limit_t4(b).truncated);
  v[1] = 0.5;  // halves the first term 2/λ_1² = 2
  CHECK(limit_t4(b, v).truncated == doctest::Approx(limit_t4(b).truncated - 1.0));
}

TEST_CASE("Dirichlet constant Σ 2/(λ_i - λ_0)²") {
  const double oracle = direct_sum(2, 1000000, [](double k) { return 2.0 / ((k * k - 1) * (k * k - 1)); });
  const auto v = limit_t2(SpectralBasis::for_space(Space::interval(pi, Boundary::Dirichlet)));
  CHECK(v.lower() <= oracle);
  CHECK(v.upper() >= oracle);
  CHECK(v.midpoint() == doctest::Approx(pi * pi / 6 - 11.0 / 8).epsilon(1e-6));
  CHECK(oracle == doctest::Approx(0.26993).epsilon(1e-5));

  CHECK(limit_t2(SpectralBasis::synthetic({1.0, 3.0}, BasisFlavor::Dirichlet)).truncated == doctest::Approx(0.5));
  CHECK_THROWS_AS(limit_t2(SpectralBasis::for_space(Space::circle(1.0))), UnsupportedError);
  const auto b = SpectralBasis::for_space(Space::interval(pi, Boundary::Dirichlet));
  double prev = 0.0;
  for (std::size_t n : {2, 3, 10, 50, 256}) {
    const double s = limit_t2(b.with_modes(n)).truncated;
    CHECK(s >= prev);
    prev = s;
  }
}

TEST_CASE("conditional-mean limit for ν = μ₀ on (0, π)") {
  // Independent oracle: closed-form coefficients, checked against a
  // 10⁴-point midpoint rule, then summed to 10⁵ terms.
  const double s2 = std::sqrt(2.0);
  auto nu_exact = [&](long k) {  // ∫ √2 sin(kx) · 2 sin²x/π dx
    if (k % 2 == 0) return 0.0;
    const double kk = double(k);
    return 2.0 * s2 / pi * (1.0 / kk - 0.5 * (1.0 / (kk + 2) + 1.0 / (kk - 2)));
  };
  auto mu_exact = [&](long k) { return k % 2 == 0 ? 0.0 : 2.0 * s2 / (double(k) * pi); };
  const int m = 10000;
  for (long k = 1; k <= 40; ++k) {
    double q = 0.0;
    for (int j = 0; j < m; ++j) {
      const double x = (j + 0.5) * pi / m;
      q += s2 * std::sin(k * x) * 2.0 * std::sin(x) * std::sin(x) / pi * (pi / m);
    }
    CHECK(q == doctest::Approx(nu_exact(k)).epsilon(1e-6).scale(1e-7));
  }
  const double nu0 = nu_exact(1), mu0 = mu_exact(1);
  double oracle = 0.0;
  for (long k = 100000; k >= 2; --k) {
    const double num = nu0 * mu_exact(k) + mu0 * nu_exact(k);
    const double gap = double(k) * k - 1.0;
    oracle += num * num / (gap * gap * gap);
  }
  oracle /= (mu0 * nu0) * (mu0 * nu0);

  const Space s = Space::interval(pi, Boundary::Dirichlet);
  const auto basis = SpectralBasis::for_space(s);
  const SineSquaredLaw mu0_law(pi);
  const auto nu = project_1d(basis, [&](double x) { return mu0_law.density(x) * pi; }, basis.size());
  const auto mu = project_1d(basis, [](double) { return 1.0; }, basis.size());
  const auto v = limit_t1(basis, nu, mu);
  CHECK(v.value == doctest::Approx(oracle).epsilon(1e-6));
  CHECK(v.value > 0.0);
  CHECK(std::isfinite(v.finiteness_diagnostic));
  MESSAGE("limit_t1(mu0) = " << v.value);

  // homogeneity and the trivial zero case
  std::vector<double> nu2(nu), mu2(mu);
  for (std::size_t i = 1; i < nu2.size(); ++i) {
    nu2[i] *= 3.0;
    mu2[i] *= 3.0;
  }
  CHECK(limit_t1(basis, nu2, mu2).value == doctest::Approx(9.0 * v.value).epsilon(1e-10));
  std::vector<double> z1(10, 0.0), z2(10, 0.0);
  z1[0] = 1.0;
  z2[0] = 0.5;
  CHECK(limit_t1(basis, z1, z2).value == 0.0);
  z1[0] = 0.0;
  CHECK_THROWS_AS(limit_t1(basis, z1, z2), DomainError);
}

TEST_CASE("asymptotic variance Σ a_i²/λ_i") {
  const auto b = SpectralBasis::for_space(Space::circle(2 * pi));
  CHECK(variance_vf(b, std::vector<double>{0.0, 1.0}) == doctest::Approx(1.0));
  CHECK(variance_vf(b, std::vector<double>{3.0}) == 0.0);
  CHECK(variance_vf(b, std::vector<double>{0.0, 1.0, 0.0, 1.0}) == doctest::Approx(1.25));
}

TEST_CASE("heat kernel") {
  const Space s = Space::circle(2 * pi);
  const auto b = SpectralBasis::for_space(s);
  CHECK(heat_kernel(b, 60.0, {0.1}, {2.0}) == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(heat_kernel(b, 0.3, {0.1}, {2.0}) == heat_kernel(b, 0.3, {2.0}, {0.1}));
  const double norm = gauss_legendre([&](double y) { return heat_kernel(b, 0.2, {1.0}, {y}); }, 0.0, 2 * pi, 64) / (2 * pi);
  CHECK(norm == doctest::Approx(1.0).epsilon(1e-6));
  const double ck = gauss_legendre([&](double z) { return heat_kernel(b, 0.05, {0.4}, {z}) * heat_kernel(b, 0.1, {z}, {2.5}); },
                                   0.0, 2 * pi, 128) / (2 * pi);
  CHECK(std::abs(ck - heat_kernel(b, 0.15, {0.4}, {2.5})) < 1e-6);
  // Neumann interval normalization
  const auto nb = SpectralBasis::for_space(Space::interval(pi, Boundary::Neumann));
  const double nn = gauss_legendre([&](double y) { return heat_kernel(nb, 0.1, {0.3}, {y}); }, 0.0, pi, 64) / pi;
  CHECK(nn == doctest::Approx(1.0).epsilon(1e-6));
  // too short a time for 256 modes
  try {
    heat_kernel(b, 1e-4, {0.0}, {0.0});
    FAIL("expected a truncation error");
  } catch (const TruncationError& e) {
    CHECK(e.required_modes() > b.size());
    const auto bigger = SpectralBasis::for_space(s, e.required_modes());
    CHECK_NOTHROW(heat_kernel(bigger, 1e-4, {0.0}, {0.0}));
  }
}

TEST_CASE("synthetic limit law has the constant as its mean") {
  const auto b = SpectralBasis::for_space(Space::circle(2 * pi), 65);
  const double target = limit_t4(b).truncated;
  RngStream rng(99, 1);
  const int n = 20000;
  double s = 0.0, s2 = 0.0;
  for (int r = 0; r < n; ++r) {
    double v = 0.0;
    for (std::size_t i = 1; i < b.size(); ++i) {
      const double xi = rng.normal();
      v += 2.0 * xi * xi / (b.eigenvalue(i) * b.eigenvalue(i));
    }
    s += v;
    s2 += v * v;
  }
  const double mean = s / n, se = std::sqrt((s2 / n - mean * mean) / n);
  CHECK(std::abs(mean - target) < 4 * se);
}
