#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <atomic>
#include <cmath>
#include <vector>

#include "doctest.h"
#include "sblab/chebyshev.hpp"
#include "sblab/errors.hpp"
#include "sblab/parallel.hpp"
#include "sblab/quadrature.hpp"
#include "sblab/sampling.hpp"

using namespace sblab;

TEST_CASE("adaptive quadrature reproduces closed forms") {
  CHECK(integrate([](double x) { return x * x; }, 0.0, 1.0, 1e-12) ==
        doctest::Approx(1.0 / 3.0).epsilon(1e-12));
  CHECK(integrate([](double x) { return std::sin(x); }, 0.0, M_PI, 1e-12) ==
        doctest::Approx(2.0).epsilon(1e-11));
  CHECK(integrate([](double x) { return std::exp(x); }, 0.0, 1.0, 1e-12) ==
        doctest::Approx(std::exp(1.0) - 1.0).epsilon(1e-12));
  // Oscillatory integrand forces subdivision.
  double osc = integrate([](double x) { return std::sin(10.0 * x); }, 0.0, 10.0, 1e-11);
  CHECK(osc == doctest::Approx((1.0 - std::cos(100.0)) / 10.0).epsilon(1e-9));
  // Orientation: reversed limits flip the sign.
  CHECK(integrate([](double x) { return x; }, 1.0, 0.0, 1e-12) ==
        doctest::Approx(-0.5).epsilon(1e-12));
  // Near-singular but integrable derivative-blowup case.
  double s = integrate([](double x) { return 1.0 / std::sqrt(x + 1e-4); }, 0.0, 1.0, 1e-10);
  CHECK(s == doctest::Approx(2.0 * (std::sqrt(1.0 + 1e-4) - 1e-2)).epsilon(1e-8));
}

TEST_CASE("chebyshev interpolation accuracy") {
  auto f = [](double x) { return std::exp(x) * std::sin(2.0 * x); };
  ChebyshevSeries s = ChebyshevSeries::fit(f, -1.0, 2.0, 40);
  for (double x = -1.0; x <= 2.0; x += 0.03)
    CHECK(std::abs(s.eval(x) - f(x)) < 1e-12);

  // Polynomials are reproduced exactly up to roundoff.
  auto p = [](double x) { return ((x - 2.0) * x + 1.0) * x - 3.0; };
  ChebyshevSeries sp = ChebyshevSeries::fit(p, -2.0, 3.0, 8);
  for (double x = -2.0; x <= 3.0; x += 0.1)
    CHECK(std::abs(sp.eval(x) - p(x)) < 1e-12);

  // Trimming drops the numerically-zero tail of the polynomial fit.
  ChebyshevSeries hp = ChebyshevSeries::fit(p, -2.0, 3.0, 30).trimmed(1e-13);
  CHECK(hp.coeffs().size() <= 4);
  for (double x = -2.0; x <= 3.0; x += 0.1)
    CHECK(std::abs(hp.eval(x) - p(x)) < 1e-11);
}

TEST_CASE("chebyshev antiderivative") {
  ChebyshevSeries cube = ChebyshevSeries::fit_antiderivative(
      [](double x) { return 3.0 * x * x; }, 0.0, 2.0, 16, 1e-13);
  for (double x = 0.0; x <= 2.0; x += 0.05)
    CHECK(std::abs(cube.eval(x) - x * x * x) < 1e-11);

  ChebyshevSeries sine = ChebyshevSeries::fit_antiderivative(
      [](double x) { return std::cos(x); }, -1.0, 3.0, 32, 1e-13);
  for (double x = -1.0; x <= 3.0; x += 0.05)
    CHECK(std::abs(sine.eval(x) - (std::sin(x) - std::sin(-1.0))) < 1e-11);
}

TEST_CASE("chebyshev to_expr agrees with clenshaw evaluation") {
  auto f = [](double x) { return std::exp(0.5 * x); };
  ChebyshevSeries s =
      ChebyshevSeries::fit_antiderivative(f, 0.5, 2.0, 32, 1e-13).trimmed(1e-14);
  Expr e = s.to_expr("t");
  for (double x = 0.5; x <= 2.0; x += 0.025) {
    double clen = s.eval(x);
    double expr = e.eval({{"t", x}});
    CHECK(std::abs(expr - clen) < 1e-11 * (1.0 + std::abs(clen)));
    double exact = 2.0 * (std::exp(0.5 * x) - std::exp(0.25));
    CHECK(std::abs(expr - exact) < 1e-10);
  }
}

TEST_CASE("low-discrepancy sampling is deterministic and in range") {
  Box box = {{-1.0, 2.0}, {0.5, 0.75}, {-3.0, -1.0}};
  auto a = sample_box(box, 64, 42);
  auto b = sample_box(box, 64, 42);
  CHECK(a == b);  // bitwise reproducible
  auto c = sample_box(box, 64, 43);
  CHECK(a != c);
  REQUIRE(a.size() == 64);
  for (const auto& p : a) {
    REQUIRE(p.size() == 3);
    for (std::size_t d = 0; d < 3; ++d) {
      CHECK(p[d] >= box[d].lo);
      CHECK(p[d] <= box[d].hi);
    }
  }
  // Reasonable spread: each coordinate covers both halves of its interval.
  for (std::size_t d = 0; d < 3; ++d) {
    int low = 0;
    for (const auto& p : a)
      if (p[d] < box[d].lo + 0.5 * box[d].width()) ++low;
    CHECK(low > 16);
    CHECK(low < 48);
  }
  CHECK_THROWS_AS(sample_unit(13, 4, 1), NumericError);
  CHECK(sample_unit(12, 4, 1).size() == 4);
}

TEST_CASE("parallel loop matches serial and propagates exceptions") {
  const std::size_t n = 257;
  std::vector<double> serial(n), parallel(n);
  auto work = [](std::size_t i) {
    double x = 0.0;
    for (int k = 1; k <= 50; ++k) x += std::sin(static_cast<double>(i) * k) / k;
    return x;
  };
  for_each_index(Exec::Serial, n, [&](std::size_t i) { serial[i] = work(i); });
  for_each_index(Exec::Parallel, n, [&](std::size_t i) { parallel[i] = work(i); });
  CHECK(serial == parallel);  // bitwise identical slot writes

  auto thrower = [](std::size_t i) {
    if (i >= 100) throw DomainError("probe", static_cast<double>(i));
  };
  try {
    for_each_index(Exec::Parallel, n, thrower);
    CHECK(false);
  } catch (const DomainError& e) {
    CHECK(e.value == 100.0);  // lowest failing index wins
  }
}
