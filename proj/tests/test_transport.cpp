#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <numbers>

#include "ergolab/errors.hpp"
#include "ergolab/rng.hpp"
#include "ergolab/transport_engines.hpp"

using namespace ergolab;
using std::numbers::pi;

namespace {

EmpiricalMeasure random_atoms(const Space& s, std::size_t n, RngStream& rng, bool random_weights) {
  std::vector<double> pts, w;
  for (std::size_t i = 0; i < n; ++i) {
    pts.push_back(rng.uniform() * s.extent());
    w.push_back(random_weights ? 0.05 + rng.uniform() : 1.0);
  }
  double tot = 0.0;
  for (double v : w) tot += v;
  for (double& v : w) v /= tot;
  return EmpiricalMeasure::weighted(s, pts, w);
}

// 1 + Σ_{k≤3} a_k cos(kx) + b_k sin(kx) with |a_k|,|b_k| ≤ 0.15, rescaled to the space.
DensityOnGrid random_low_frequency(const Space& s, int cells, RngStream& rng) {
  std::vector<double> a(4), b(4);
  for (int k = 1; k <= 3; ++k) {
    a[k] = 0.3 * (rng.uniform() - 0.5);
    b[k] = s.periodic() ? 0.3 * (rng.uniform() - 0.5) : 0.0;
  }
  const double scale = (s.periodic() ? 2.0 : 1.0) * pi / s.extent();
  return DensityOnGrid::from_function(s, cells, [&](const Point& x) {
    double v = 1.0;
    for (int k = 1; k <= 3; ++k) v += a[k] * std::cos(k * scale * x[0]) + b[k] * std::sin(k * scale * x[0]);
    return v;
  });
}

}  // namespace

TEST_CASE("line engine: closed-form examples") {
  const Space iv = Space::interval(1.0, Boundary::Neumann);
  const auto d1 = EmpiricalMeasure::uniform(iv, {0.2});
  const auto d2 = EmpiricalMeasure::uniform(iv, {0.7});
  for (double p : {1.0, 2.0, 3.5}) CHECK(wp_line(d1, d2, p).value == doctest::Approx(0.5).epsilon(1e-12));

  const auto two = EmpiricalMeasure::uniform(iv, {0.0, 1.0});
  const auto unif = DensityOnGrid::uniform(iv);
  const auto r1 = wp_line(two, unif, 1.0);
  CHECK(r1.value == doctest::Approx(0.25).epsilon(1e-12));
  CHECK(r1.method == DistanceMethod::Exact1D);
  CHECK(wp_line(two, unif, 2.0).value == doctest::Approx(std::sqrt(1.0 / 12)).epsilon(1e-12));
  CHECK(wp_line(two, SmoothMeasure::invariant(iv), 2.0).value == doctest::Approx(std::sqrt(1.0 / 12)).epsilon(1e-9));

  // Dirac at the mean against the confined-line law: W_2² is the variance
  const Space line = Space::confined_line(1.0, 1.0);
  const auto law = std::static_pointer_cast<const ConfinedLineLaw>(line.invariant_law());
  const auto w2 = wp_line(EmpiricalMeasure::uniform(line, {0.0}), SmoothMeasure::invariant(line), 2.0);
  CHECK(w2.value * w2.value == doctest::Approx(law->variance()).epsilon(1e-8));

  CHECK_THROWS_AS(wp_line(d1, EmpiricalMeasure::uniform(Space::interval(2.0, Boundary::Neumann), {0.1}), 1.0), DomainError);
  CHECK_THROWS_AS(wp_line(d1, d2, 0.5), DomainError);
  CHECK_THROWS_AS(wp_line(EmpiricalMeasure::uniform(Space::circle(1.0), {0.1}),
                          EmpiricalMeasure::uniform(Space::circle(1.0), {0.2}), 1.0),
                  UnsupportedError);
}

TEST_CASE("circle engine: closed-form examples") {
  const Space c = Space::circle(2 * pi);
  const auto a = EmpiricalMeasure::uniform(c, {0.3});
  const auto b = EmpiricalMeasure::uniform(c, {2 * pi - 0.4});
  CHECK(wp_circle(a, b, 1.0).value == doctest::Approx(0.7).epsilon(1e-10));
  CHECK(wp_circle(a, b, 3.0).value == doctest::Approx(0.7).epsilon(1e-10));
  for (int N : {1, 3, 10, 50}) {
    std::vector<double> pts;
    for (int i = 0; i < N; ++i) pts.push_back(2 * pi * i / N);
    const auto eq = EmpiricalMeasure::uniform(c, pts);
    const auto r = wp_circle(eq, DensityOnGrid::uniform(c), 2.0);
    CHECK(r.power() == doctest::Approx(std::pow(pi / N, 2) / 3).epsilon(1e-10));
    CHECK(r.method == DistanceMethod::CircleExact);
    // general p: per-arc integral (L/(2N))^p/(p+1)
    const auto r3 = wp_circle(eq, SmoothMeasure::invariant(c), 3.0);
    CHECK(r3.power() == doctest::Approx(std::pow(pi / N, 3) / 4).epsilon(1e-9));
  }
}

TEST_CASE("circle engine: rotation invariance") {
  const Space c = Space::circle(2 * pi);
  RngStream rng(40, 0);
  for (int trial = 0; trial < 50; ++trial) {
    const auto m1 = random_atoms(c, 1 + trial % 7, rng, true);
    const auto m2 = random_atoms(c, 2 + trial % 5, rng, true);
    const double alpha = rng.uniform() * 2 * pi;
    auto rot = [&](EmpiricalMeasure m) {
      for (double& x : m.points) x = std::fmod(x + alpha, 2 * pi);
      return m;
    };
    for (double p : {1.0, 2.0, 3.0}) {
      const double v = wp_circle(m1, m2, p).value;
      CHECK(wp_circle(rot(m1), rot(m2), p).value == doctest::Approx(v).epsilon(1e-10));
    }
  }
}

TEST_CASE("exact engines satisfy the metric axioms and order monotonicity") {
  RngStream rng(41, 0);
  for (const Space& s : {Space::circle(2 * pi), Space::interval(pi, Boundary::Neumann)}) {
    for (int trial = 0; trial < 100; ++trial) {
      const auto a = random_atoms(s, 1 + trial % 9, rng, true);
      const auto b = random_atoms(s, 1 + trial % 4, rng, false);
      const auto c = random_atoms(s, 3, rng, true);
      for (double p : {1.0, 2.0, 4.0}) {
        const double ab = wp_exact(a, b, p).value, ba = wp_exact(b, a, p).value;
        CHECK(std::abs(ab - ba) <= 1e-12);
        CHECK(wp_exact(a, a, p).value <= 1e-12);
        CHECK(ab <= wp_exact(a, c, p).value + wp_exact(c, b, p).value + 1e-12);
      }
      const double w1 = wp_exact(a, b, 1.0).value, w2 = wp_exact(a, b, 2.0).value, w4 = wp_exact(a, b, 4.0).value;
      CHECK(w1 <= w2 + 1e-12);
      CHECK(w2 <= w4 + 1e-12);
    }
  }
}

TEST_CASE("report serialization") {
  const Space c = Space::circle(1.0);
  const auto r = wp_circle(EmpiricalMeasure::uniform(c, {0.1}), EmpiricalMeasure::uniform(c, {0.3}), 2.0);
  const auto j = r.to_json();
  CHECK(j.at("p").get<double>() == 2.0);
  CHECK(j.at("value").get<double>() == doctest::Approx(0.2));
  CHECK(j.at("method").get<std::string>() == "circle-exact");
  CHECK(j.at("error_estimate").get<double>() >= 0.0);
}

TEST_CASE("gradient upper bound: vanishing difference and the cosine closed form") {
  const Space c = Space::circle(2 * pi);
  const auto basis = SpectralBasis::for_space(c);
  const auto f1 = DensityOnGrid::from_function(c, 512, [](const Point&) { return 1.0; });
  CHECK(ta1_upper_bound(basis, f1, f1, 2.0) == doctest::Approx(0.0));
  const double a = 0.1;
  const auto f2 = DensityOnGrid::from_function(c, 512, [&](const Point& x) { return 1.0 + a * std::sqrt(2.0) * std::cos(x[0]); });
  const auto b = ta1_bound(basis, f1, f2, 2.0);
  CHECK(b.one_sided == doctest::Approx(0.04).epsilon(1e-6));
  CHECK(b.value <= 0.04 + 1e-9);
  CHECK(b.symmetric >= b.value);
  CHECK(b.tail_indicator < 1e-10);
  CHECK(wp_circle(f1, f2, 2.0).power() <= b.value);
  CHECK_THROWS_AS(ta1_bound(SpectralBasis::for_space(Space::interval(pi, Boundary::Dirichlet)), f1, f2, 2.0),
                  UnsupportedError);
}

TEST_CASE("gradient upper bound sandwich on random low-frequency pairs") {
  RngStream rng(42, 0);
  int violations = 0;
  for (const Space& s : {Space::circle(2 * pi), Space::interval(pi, Boundary::Neumann)}) {
    const auto basis = SpectralBasis::for_space(s);
    for (int trial = 0; trial < 100; ++trial) {
      const auto f1 = random_low_frequency(s, 256, rng);
      const auto f2 = random_low_frequency(s, 256, rng);
      for (double p : {1.0, 2.0}) {
        const double exact = wp_exact(f1, f2, p).power();
        if (exact > ta1_upper_bound(basis, f1, f2, p)) ++violations;
      }
      const double w1 = wp_exact(f1, f2, 1.0).value;
      const std::vector<Witness> wit{[&](const Point& x) { return s.extent() / pi * std::sin(pi * x[0] / s.extent() * (s.periodic() ? 2 : 1)) / (s.periodic() ? 2 : 1); },
                                     [&](const Point& x) { return s.metric1(x[0], 0.5); }};
      CHECK(w1_dual_lower(f1, f2, wit) <= w1 + 1e-12);
    }
  }
  CHECK(violations == 0);
}

TEST_CASE("mean M_p conventions") {
  CHECK(mean_mp(2.0, 2.0, 3.0) == doctest::Approx(0.25));
  CHECK(mean_mp(0.0, 0.0, 2.0) == 0.0);
  CHECK(mean_mp(1.0, 1.0 + 1e-12, 2.0) == doctest::Approx(1.0));
  // p = 2: (log b - log a)/(b - a)
  CHECK(mean_mp(1.0, 3.0, 2.0) == doctest::Approx(std::log(3.0) / 2.0));
  CHECK(mean_mp(1.0, 3.0, 2.0) == doctest::Approx(mean_mp(3.0, 1.0, 2.0)));
}

TEST_CASE("lower bound for N-atom measures") {
  const Space c = Space::circle(2 * pi);
  CHECK(lb101_bound(c, 10, 2.0) == doctest::Approx(std::pow(2.0, -0.5) * pi / 20).epsilon(1e-12));
  CHECK(lb101_bound(c, 10, 2.0) == doctest::Approx(0.1111).epsilon(1e-3));
  double prev = 1e9;
  for (std::size_t N = 1; N < 100000; N *= 3) {
    const double v = lb101_bound(c, N, 1.0);
    CHECK(v < prev);
    prev = v;
  }
  CHECK(prev < 1e-4);
  CHECK_THROWS_AS(lb101_bound(c, 0, 1.0), DomainError);
  CHECK_THROWS_AS(lb101_bound(Space::confined_line(1.0, 1.0), 5, 1.0), UnsupportedError);

  RngStream rng(43, 0);
  int violations = 0;
  for (const Space& s : {c, Space::interval(pi, Boundary::Neumann)}) {
    for (int trial = 0; trial < 1000; ++trial) {
      const std::size_t N = 1 + std::size_t(rng.uniform() * 60);
      const auto m = random_atoms(s, N, rng, trial % 2 == 0);
      const double p = trial % 3 == 0 ? 1.0 : 2.0;
      if (wp_exact(m, SmoothMeasure::invariant(s), p).value < lb101_bound(s, N, p)) ++violations;
    }
  }
  CHECK(violations == 0);
}

TEST_CASE("dual lower bound") {
  const Space iv = Space::interval(1.0, Boundary::Neumann);
  const auto d0 = EmpiricalMeasure::uniform(iv, {0.0});
  const auto dx = EmpiricalMeasure::uniform(iv, {0.37});
  const std::vector<Witness> id{[](const Point& x) { return x[0]; }};
  CHECK(w1_dual_lower(d0, dx, id) == doctest::Approx(wp_line(d0, dx, 1.0).value).epsilon(1e-12));
  CHECK(w1_dual_lower(dx, dx, id) == 0.0);
  const std::vector<Witness> steep{[](const Point& x) { return 2 * x[0]; }};
  CHECK_THROWS_AS(w1_dual_lower(d0, dx, steep), DomainError);
  // the identity is not 1-Lipschitz for the geodesic metric of a circle
  const Space c = Space::circle(1.0);
  CHECK_THROWS_AS(w1_dual_lower(EmpiricalMeasure::uniform(c, {0.1}), EmpiricalMeasure::uniform(c, {0.2}), id), DomainError);

  RngStream rng(44, 0);
  const Space c2 = Space::circle(2 * pi);
  const std::vector<Witness> wit{[](const Point& x) { return std::sin(x[0]); }, [](const Point& x) { return std::cos(x[0]); },
                                 [&](const Point& x) { return c2.metric1(x[0], 1.0); }};
  for (int trial = 0; trial < 1000; ++trial) {
    const auto a = random_atoms(c2, 1 + trial % 6, rng, true);
    const auto b = random_atoms(c2, 1 + trial % 5, rng, true);
    CHECK(w1_dual_lower(a, b, wit) <= wp_circle(a, b, 1.0).value + 1e-12);
  }
}

TEST_CASE("entropic engine on the 2-torus") {
  const Space t = Space::torus(2, 1.0);
  SinkhornOptions opt;
  opt.grid = 32;
  const double w = 1.0 / opt.grid;

  const auto g = DensityOnGrid::from_function(t, 32, [](const Point& x) { return 1.0 + 0.5 * std::cos(2 * pi * x[0]) * std::sin(2 * pi * x[1]); });
  const auto same = sinkhorn_torus(g, g, 2.0, opt);
  CHECK(same.value * same.value <= 1e-6);
  CHECK(same.method == DistanceMethod::Sinkhorn);

  const auto a = EmpiricalMeasure::uniform(t, {4.5 * w, 4.5 * w});
  const auto b = EmpiricalMeasure::uniform(t, {12.5 * w, 20.5 * w});
  const double d2 = std::pow(8 * w, 2) + std::pow(16 * w, 2);
  const auto r = sinkhorn_torus(a, b, 2.0, opt);
  const double eps = 5e-3;
  CHECK(std::abs(r.divergence - d2) <= 3 * eps);
  CHECK(r.error_estimate >= 0.0);

  CHECK_THROWS_AS(sinkhorn_torus(EmpiricalMeasure::uniform(Space::circle(1.0), {0.1}),
                                 EmpiricalMeasure::uniform(Space::circle(1.0), {0.1}), 2.0, opt),
                  UnsupportedError);
}

TEST_CASE("entropic engine reduces to the circle on a slice; ε-monotone") {
  const Space t = Space::torus(2, 1.0), c = Space::circle(1.0);
  const int n = 64;
  const double w = 1.0 / n;
  std::vector<double> p, x, w1, w2;
  for (int i = 0; i < n; ++i) {
    const double xi = (i + 0.5) * w;
    x.push_back(xi);
    p.insert(p.end(), {xi, 0.5 + 0.5 * w});
    w1.push_back(1 + 0.8 * std::cos(2 * pi * xi));
    w2.push_back(1 + 0.8 * std::cos(2 * pi * (xi - 0.25)));
  }
  double s1 = 0, s2 = 0;
  for (int i = 0; i < n; ++i) s1 += w1[i], s2 += w2[i];
  for (int i = 0; i < n; ++i) w1[i] /= s1, w2[i] /= s2;
  const auto exact = wp_circle(EmpiricalMeasure::weighted(c, x, w1), EmpiricalMeasure::weighted(c, x, w2), 2.0).value;
  const auto a = EmpiricalMeasure::weighted(t, p, w1), b = EmpiricalMeasure::weighted(t, p, w2);
  double prev = 1e9;
  for (double eps : {1e-2, 5e-3, 2e-3, 1e-3}) {
    SinkhornOptions opt;
    opt.grid = n;
    opt.epsilon = eps;
    const auto r = sinkhorn_torus(a, b, 2.0, opt);
    CHECK(r.divergence <= prev + 1e-8);
    prev = r.divergence;
    if (eps == 1e-3) CHECK(r.value == doctest::Approx(exact).epsilon(0.02));
  }
}

TEST_CASE("circle W1 matches the best cyclic assignment for equal-count atoms") {
  RngStream rng(45, 0);
  const Space c = Space::circle(2 * pi);
  for (int trial = 0; trial < 300; ++trial) {
    const std::size_t n = 1 + trial % 12;
    std::vector<double> x(n), y(n);
    for (auto& v : x) v = rng.uniform() * 2 * pi;
    for (auto& v : y) v = rng.uniform() * 2 * pi;
    std::sort(x.begin(), x.end());
    std::sort(y.begin(), y.end());
    double best = 1e300;
    for (std::size_t k = 0; k < n; ++k) {
      double s = 0.0;
      for (std::size_t i = 0; i < n; ++i) s += c.metric1(x[i], y[(i + k) % n]);
      best = std::min(best, s / double(n));
    }
    const auto a = EmpiricalMeasure::uniform(c, x), b = EmpiricalMeasure::uniform(c, y);
    CHECK(wp_circle(a, b, 1.0).value == doctest::Approx(best).epsilon(1e-12));
    // the cut scan agrees for p slightly above 1
    CHECK(wp_circle(a, b, 1.0 + 1e-9).value == doctest::Approx(best).epsilon(1e-6));
  }
}
