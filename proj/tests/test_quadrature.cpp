#include <doctest.h>

#include <cmath>
#include <stdexcept>
#include <vector>

#include "hdisp/quadrature.hpp"

using namespace hdisp;

TEST_CASE("Gauss-Legendre integrates polynomials of degree 2n-1 exactly") {
  for (int order : {1, 4, 16, 32}) {
    const auto& rule = gauss_legendre(order);
    for (int deg = 0; deg < 2 * order; ++deg) {
      double sum = 0.0;
      for (std::size_t i = 0; i < rule.size(); ++i) sum += rule.weights[i] * std::pow(rule.nodes[i], deg);
      const double exact = deg % 2 ? 0.0 : 2.0 / (deg + 1);
      CHECK(sum == doctest::Approx(exact).epsilon(1e-13).scale(1.0));
    }
  }
  CHECK_THROWS_AS(gauss_legendre(0), std::invalid_argument);
}

TEST_CASE("composite rules and doubling") {
  const auto rule = composite_gauss_legendre(0.0, kPi, 7);
  double s = 0.0;
  for (std::size_t i = 0; i < rule.size(); ++i) s += rule.weights[i] * std::sin(rule.nodes[i]);
  CHECK(s == doctest::Approx(2.0).epsilon(1e-15));

  const auto est = integrate_doubling([](double x) { return cplx(std::exp(-x * x), 0.0); }, -6.0,
                                      6.0, 2, 0.0, 1e-14);
  CHECK(est.value.real() == doctest::Approx(std::sqrt(kPi)).epsilon(1e-13));
  CHECK_THROWS_AS(integrate_doubling([](double x) { return cplx(std::sin(1e6 * x), 0.0); }, 0.0,
                                     1.0, 1, 0.0, 1e-14, 64),
                  NonconvergenceError);
}

TEST_CASE("equidistributed edges follow the cumulative resolution") {
  // resolution grows like x^2 on [0, 1]: panels crowd toward 1
  std::vector<double> cum(1025);
  for (std::size_t i = 0; i < cum.size(); ++i) {
    const double x = static_cast<double>(i) / 1024;
    cum[i] = 100.0 * x * x;
  }
  const auto edges = equidistributed_edges(0.0, 1.0, 4, cum);
  CHECK(edges.front() == 0.0);
  CHECK(edges.back() == 1.0);
  CHECK(edges.size() == 105);
  for (std::size_t i = 1; i < edges.size(); ++i) CHECK(edges[i] > edges[i - 1]);
  CHECK(edges[1] - edges[0] > edges.back() - edges[edges.size() - 2]);
}

TEST_CASE("inverse power tails") {
  for (int n : {1, 2, 3})
    for (int k : {2, 3, 5})
      for (long first : {0L, 10L, 1000L}) {
        double brute = 0.0;
        for (long m = first + 2000000; m >= first; --m) brute += std::pow(2.0 * m + n, -k);
        // remainder of the brute-force sum beyond 2e6 terms
        brute += std::pow(2.0 * (first + 2000001) + n - 1.0, 1.0 - k) / (2.0 * (k - 1));
        CHECK(inverse_power_tail(k, first, n) == doctest::Approx(brute).epsilon(1e-10));
      }
  // odd reciprocal squares sum to pi^2 / 8
  CHECK(inverse_power_tail(2, 0, 1) == doctest::Approx(kPi * kPi / 8.0).epsilon(1e-14));
}
