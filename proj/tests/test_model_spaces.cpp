#include <doctest.h>

#include <cmath>
#include <numbers>

#include "ergolab/errors.hpp"
#include "ergolab/laws.hpp"
#include "ergolab/model_spaces.hpp"
#include "ergolab/statistics.hpp"

using namespace ergolab;
using std::numbers::pi;

TEST_CASE("circle metric wraps around") {
  const Space c = Space::circle(2 * pi);
  CHECK(c.metric({0.0}, {pi}) == doctest::Approx(pi));
  CHECK(c.metric({0.1}, {2 * pi - 0.1}) == doctest::Approx(0.2));
  CHECK(c.metric({1.3}, {1.3}) == 0.0);
}

TEST_CASE("torus metric minimizes over wraps") {
  const Space t = Space::torus(2, 2 * pi);
  CHECK(t.metric({0.0, 0.0}, {0.3, 2 * pi - 0.1}) == doctest::Approx(std::sqrt(0.09 + 0.01)));
}

TEST_CASE("torus in one dimension matches the circle") {
  const Space t = Space::torus(1, 5.0), c = Space::circle(5.0);
  RngStream rng(1, 2);
  for (int i = 0; i < 1000; ++i) {
    const double x = 5.0 * rng.uniform(), y = 5.0 * rng.uniform();
    CHECK(t.metric({x}, {y}) == c.metric({x}, {y}));
  }
}

TEST_CASE("metric axioms on sampled triples") {
  RngStream rng(7, 0);
  for (const Space& s : {Space::circle(2 * pi), Space::torus(3, 1.5), Space::interval(pi, Boundary::Neumann),
                         Space::confined_line(1.0, 1.0)}) {
    for (int i = 0; i < 10000; ++i) {
      const Point x = s.sample_invariant(rng), y = s.sample_invariant(rng), z = s.sample_invariant(rng);
      const double xy = s.metric(x, y), yz = s.metric(y, z), xz = s.metric(x, z);
      CHECK(xy >= 0.0);
      CHECK(xy == s.metric(y, x));
      // one ulp slack for the Euclidean combination of wrapped coordinates
      CHECK(xz <= (xy + yz) * (1 + 1e-15));
    }
  }
}

TEST_CASE("points outside the domain are rejected") {
  const Space c = Space::circle(1.0), i = Space::interval(1.0, Boundary::Dirichlet);
  CHECK_THROWS_AS(c.metric({1.5}, {0.0}), DomainError);
  CHECK_THROWS_AS(i.metric({-0.1}, {0.0}), DomainError);
  CHECK_THROWS_AS(c.metric({NAN}, {0.0}), DomainError);
  CHECK_THROWS_AS(c.metric({0.1, 0.2}, {0.0}), DomainError);
  CHECK(c.canonical({1.25})[0] == doctest::Approx(0.25));
  CHECK(c.canonical({-0.25})[0] == doctest::Approx(0.75));
  CHECK_THROWS_AS(Space::circle(0.0), DomainError);
  CHECK_THROWS_AS(Space::confined_line(1.0, 0.5), DomainError);
}

TEST_CASE("ball measure and its generalized inverse") {
  const Space c = Space::circle(2 * pi);
  CHECK(mu_ball(c, pi) == 1.0);
  CHECK(mu_ball(c, 0.5) == doctest::Approx(1.0 / (2 * pi)));
  const Space iv = Space::interval(pi, Boundary::Neumann);
  CHECK(mu_ball(iv, pi / 4) == doctest::Approx(0.5));
  CHECK(psi_inverse(c, 1.0 / 20.0) == doctest::Approx(pi / 20));
  CHECK(psi_inverse(c, 1.0) == doctest::Approx(pi));
  CHECK(psi_inverse(iv, 0.25) == doctest::Approx(pi / 8));
  CHECK_THROWS_AS(mu_ball(Space::confined_line(1, 1), 0.1), UnsupportedError);

  for (const Space& s : {c, iv, Space::torus(2, 1.0), Space::torus(3, 2.0)}) {
    double prev = 0.0;
    for (int k = 0; k <= 400; ++k) {
      const double r = s.extent() * k / 400.0;
      const double m = mu_ball(s, r);
      CHECK(m >= prev);
      prev = m;
      if (m < 1.0) CHECK(psi_inverse(s, m) >= r - 1e-12);
      CHECK(mu_ball(s, psi_inverse(s, m)) <= m + 1e-12);
    }
  }
}

TEST_CASE("circle sampling passes a chi-square uniformity test") {
  const Space c = Space::circle(2 * pi);
  RngStream rng(11, 3);
  std::vector<int> bins(20, 0);
  const int n = 100000;
  for (int i = 0; i < n; ++i) bins[std::min(19, int(c.sample_invariant(rng)[0] / (2 * pi) * 20))]++;
  double chi2 = 0.0;
  for (int b : bins) chi2 += (b - n / 20.0) * (b - n / 20.0) / (n / 20.0);
  CHECK(chi2 < chi_square_quantile(19, 0.99));
}

TEST_CASE("invariant sampling matches the CDF (KS at 1%)") {
  RngStream rng(5, 9);
  for (const Space& s : {Space::interval(pi, Boundary::Dirichlet), Space::confined_line(1.0, 1.0),
                         Space::confined_line(0.5, 2.0)}) {
    std::vector<double> xs(100000);
    for (double& x : xs) x = s.sample_invariant(rng)[0];
    const auto law = s.invariant_law();
    CHECK(ks_one_sample(xs, [&](double x) { return law->cdf(x); }).p_value > 0.01);
  }
}

TEST_CASE("confined line sample mean is near zero") {
  const Space s = Space::confined_line(1.0, 1.0);
  RngStream rng(3, 3);
  const int n = 100000;
  double m = 0.0;
  for (int i = 0; i < n; ++i) m += s.sample_invariant(rng)[0];
  m /= n;
  // θ=τ=1 gives density ∝ exp(-x²): variance 1/2
  CHECK(std::abs(m) < 3.0 * std::sqrt(0.5 / n));
}

TEST_CASE("invariant laws integrate to one") {
  for (const Space& s : {Space::circle(3.0), Space::interval(pi, Boundary::Neumann), Space::confined_line(1.0, 1.0),
                         Space::confined_line(2.0, 0.75)}) {
    const auto law = s.invariant_law();
    const double total = gauss_legendre([&](double x) { return law->density(x); }, law->lo(), law->hi(), 512);
    CHECK(total == doctest::Approx(1.0).epsilon(1e-8));
  }
  // Gibbs law with θ=τ=1 is N(0, 1/2) up to the e^{-1} factor
  const auto g = Space::confined_line(1.0, 1.0).invariant_law();
  CHECK(g->density(0.3) == doctest::Approx(std::exp(-0.09) / std::sqrt(pi)).epsilon(1e-10));
  CHECK(g->cdf(0.0) == doctest::Approx(0.5).epsilon(1e-12));
  CHECK(g->quantile(g->cdf(0.7)) == doctest::Approx(0.7).epsilon(1e-10));
}

TEST_CASE("sine-squared law") {
  const SineSquaredLaw law(pi);
  CHECK(law.cdf(pi / 2) == doctest::Approx(0.5));
  for (double u : {1e-9, 1e-4, 0.01, 0.3, 0.5, 0.77, 0.999, 1 - 1e-9}) CHECK(law.cdf(law.quantile(u)) == doctest::Approx(u).epsilon(1e-12));
  // (x-y)² moment over the whole support against direct quadrature
  const double direct = gauss_legendre([&](double y) { return (1.0 - y) * (1.0 - y) * law.density(y); }, 0.0, pi, 200);
  CHECK(law.partial_moment(0.0, pi, 1.0, 2.0) == doctest::Approx(direct).epsilon(1e-12));
}

TEST_CASE("space JSON round trip") {
  for (const Space& s : {Space::circle(6.2831853), Space::torus(2, 1.0), Space::interval(2.0, Boundary::Dirichlet),
                         Space::confined_line(1.0, 1.5)}) {
    CHECK(Space::from_json(s.to_json()) == s);
  }
  CHECK_THROWS_AS(Space::from_json(nlohmann::json{{"kind", "circle"}, {"circumference", 1.0}, {"extra", 1}}), SchemaError);
  CHECK_THROWS_AS(Space::from_json(nlohmann::json{{"kind", "sphere"}}), SchemaError);
}
