#include <doctest.h>

#include <cmath>
#include <numbers>

#include "ergolab/envelopes.hpp"
#include "ergolab/errors.hpp"

using namespace ergolab;
using std::numbers::e;
using std::numbers::pi;

TEST_CASE("xi_K cases") {
  CHECK(xi_k(0.5, 100.0) == doctest::Approx(0.01));
  CHECK(xi_k(1.0, e) == doctest::Approx(1.0 / e));
  CHECK(xi_k(1.5, 1024.0) == doctest::Approx(0.03125));
  CHECK_THROWS_AS(xi_k(1.0, 1.0), DomainError);
}

TEST_CASE("gamma_d cases") {
  CHECK(gamma_d(1, 100.0) == doctest::Approx(0.1));
  CHECK(gamma_d(4, e) == doctest::Approx(std::exp(-0.5)));
  CHECK(gamma_d(6, 16.0) == doctest::Approx(0.5));
  CHECK_THROWS_AS(gamma_d(4, 0.5), DomainError);
}

TEST_CASE("moment-rate envelope cases") {
  CHECK(rate_t5(3, 50.0) == doctest::Approx(0.02));
  CHECK(rate_t5(5, 8.0) == doctest::Approx(0.25));
  CHECK(rate_t5(4, e - 1) == doctest::Approx(1.0 / (e - 1)));
  CHECK(rate_t5(4, e - 1) == doctest::Approx(0.582).epsilon(1e-3));
}

TEST_CASE("renormalized d=4 constant") {
  CHECK(limit_t6_d4(8 * pi * pi) == doctest::Approx(1.0));
  CHECK(limit_t6_d4(std::pow(2 * pi, 4)) == doctest::Approx(2 * pi * pi));
  CHECK(limit_t6_d4(std::pow(2 * pi, 4)) == doctest::Approx(19.739).epsilon(1e-4));
  CHECK_THROWS_AS(limit_t6_d4(0.0), DomainError);
}

TEST_CASE("degenerate-diffusion rate table") {
  CHECK(example51_case(3, 2) == 1);
  CHECK(example51_envelope(3, 2, 10) == doctest::Approx(0.1));
  CHECK(example51_case(3, 2.5) == 2);
  CHECK(example51_envelope(3, 2.5, 10) == doctest::Approx(std::pow(std::log(12.0), 3) / 10));
  CHECK(example51_case(3, 3) == 3);
  CHECK(example51_envelope(3, 3, 10) == doctest::Approx(std::pow(std::log(12.0) / 10, 8.0 / 10)));
  CHECK(example51_case(5, 2) == 2);
  CHECK(example51_case(5, 3) == 3);
  CHECK(example51_case(6, 2) == 4);
  // (e-2)^{-4/5}·log(e)² evaluates to 1.3031
  CHECK(example51_envelope(6, 2, e - 2) == doctest::Approx(std::pow(e - 2, -0.8)));
  CHECK(example51_envelope(6, 2, e - 2) == doctest::Approx(1.3031).epsilon(1e-4));
  CHECK(example51_case(6, 4) == 5);
  CHECK(example51_envelope(6, 4, 16) == doctest::Approx(std::pow(16.0, -0.4)));
  CHECK(example51_envelope(6, 4, 16) == doctest::Approx(0.3299).epsilon(1e-3));
  CHECK_THROWS_AS(example51_envelope(2, 2, 1), DomainError);
  CHECK_THROWS_AS(example51_envelope(3, 1.5, 1), DomainError);
}

TEST_CASE("envelopes without a rising log factor are nonincreasing for t >= 3") {
  for (double t = 3.0; t < 1e5; t *= 1.1) {
    const double t2 = t * 1.1;
    for (double K : {0.3, 2.0}) CHECK(xi_k(K, t2) <= xi_k(K, t));
    for (int d : {1, 3, 4, 5, 8}) {
      CHECK(gamma_d(d, t2) <= gamma_d(d, t));
      CHECK(rate_t5(d, t2) <= rate_t5(d, t));
    }
    for (auto [l, p] : {std::pair{3.0, 2.0}, {3.0, 4.0}, {6.0, 2.0}, {6.0, 3.0}})
      CHECK(example51_envelope(l, p, t2) <= example51_envelope(l, p, t));
  }
}

// (log t)²/t peaks at t = e² and log(2+t)³/t near t = 10, so these two are
// nonincreasing only past their maximum.
TEST_CASE("log-corrected envelopes are nonincreasing past their maximum") {
  CHECK(xi_k(1.0, 5.0) < xi_k(1.0, 7.0));
  CHECK(example51_envelope(3, 2.5, 5.0) < example51_envelope(3, 2.5, 10.0));
  for (double t = 20.0; t < 1e5; t *= 1.1) {
    const double t2 = t * 1.1;
    CHECK(xi_k(1.0, t2) <= xi_k(1.0, t));
    CHECK(example51_envelope(3, 2.5, t2) <= example51_envelope(3, 2.5, t));
  }
}
