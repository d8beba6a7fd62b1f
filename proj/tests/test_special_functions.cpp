#include <doctest.h>

#include <cmath>
#include <stdexcept>

#include "hdisp/special_functions.hpp"

using namespace hdisp;

namespace {

double rel(double a, double b) { return std::abs(a - b) / std::abs(b); }

}  // namespace

TEST_CASE("series oracle small cases") {
  CHECK(laguerre_series(0, 3, 7.2) == 1.0);
  CHECK(laguerre_series(1, 2, 1.0) == doctest::Approx(2.0).epsilon(1e-15));
  CHECK(laguerre_series(2, 1, 0.0) == doctest::Approx(3.0).epsilon(1e-15));
  CHECK_THROWS_AS(laguerre_series(26, 1, 1.0), std::domain_error);
}

TEST_CASE("weighted recurrence against the series") {
  CHECK(weighted_laguerre(0, 1, 0.0) == 1.0);
  CHECK(rel(weighted_laguerre(5, 2, 3.7), laguerre_series(5, 1, 3.7) * std::exp(-1.85)) < 1e-12);
  double worst = 0.0;
  for (int d = 1; d <= 5; ++d)
    for (int m = 0; m <= 15; ++m)
      for (double tau : {0.1, 1.0, 3.0, 10.0})
        worst = std::max(worst, rel(weighted_laguerre(m, d, tau),
                                    laguerre_series(m, d - 1, tau) * std::exp(-0.5 * tau)));
  CHECK(worst < 1e-10);
}

TEST_CASE("weighted recurrence far past the double range of the bare polynomial") {
  // 60-digit reference values
  struct Case {
    int m, d;
    double tau, value;
  };
  for (const Case& c : {Case{400, 2, 1600.0, 0.022115570229762621032},
                        Case{400, 2, 1500.0, -0.0072725700274752354181},
                        Case{400, 2, 800.0, -0.019414530548158372292},
                        Case{1000, 1, 3000.0, 0.0050857666474989044939},
                        Case{100, 3, 50.5, -0.055414127961424094447}}) {
    CAPTURE(c.m);
    CAPTURE(c.tau);
    const double v = weighted_laguerre(c.m, c.d, c.tau);
    CHECK(std::isfinite(v));
    CHECK(std::abs(v) < 1.0);
    CHECK(rel(v, c.value) < 1e-9);
  }
  for (double tau : {1.0, 1e3, 4e6, 1e8}) CHECK(std::isfinite(weighted_laguerre(1000000, 2, tau)));
}

TEST_CASE("value at the origin is the binomial coefficient") {
  for (int d = 1; d <= 10; ++d)
    for (int m = 0; m + d <= 30; ++m) CHECK(weighted_laguerre(m, d, 0.0) == binomial(m + d - 1, m));
}

TEST_CASE("Euler operator") {
  CHECK(weighted_laguerre_euler(0, 3, 2, 1.1) == weighted_laguerre(3, 2, 1.1));
  CHECK(weighted_laguerre_euler(1, 0, 1, 2.0) == doctest::Approx(-std::exp(-1.0)).epsilon(1e-14));
  CHECK_THROWS_AS(weighted_laguerre_euler(3, 2, 2, 1.0), std::domain_error);
  CHECK_THROWS_AS(weighted_laguerre_euler(-1, 2, 2, 1.0), std::domain_error);

  // tau d/dtau by central differences, applied to the previous power
  const auto fd = [](auto&& f, double tau) {
    const double h = 1e-6 * tau;
    return tau * (f(tau + h) - f(tau - h)) / (2.0 * h);
  };
  CHECK(rel(weighted_laguerre_euler(1, 2, 2, 0.5),
            fd([](double x) { return weighted_laguerre(2, 2, x); }, 0.5)) < 1e-5);
  for (int d = 1; d <= 3; ++d)
    for (int alpha = 1; alpha <= d; ++alpha)
      for (int m : {0, 3, 17})
        for (double tau : {0.3, 2.5, 11.0}) {
          const double exact = weighted_laguerre_euler(alpha, m, d, tau);
          const double approx =
              fd([&](double x) { return weighted_laguerre_euler(alpha - 1, m, d, x); }, tau);
          CHECK(std::abs(exact - approx) <= 1e-5 * std::max(1.0, std::abs(exact)));
        }
}

TEST_CASE("growth proxies stay bounded in m") {
  for (int d = 1; d <= 3; ++d)
    for (int alpha = 0; alpha <= d; ++alpha) {
      const auto env = weighted_laguerre_euler_envelope(alpha, d, 512);
      double all = 0.0, ref = 0.0, all_r = 0.0, ref_r = 0.0;
      for (int m = 0; m <= 512; ++m) {
        const double quarter = env[m] / std::pow(2.0 * m + d, d - 0.25);
        const double whole = env[m] / std::pow(2.0 * m + d, d - 1.0);
        all = std::max(all, quarter);
        all_r = std::max(all_r, whole);
        if (m <= 64) ref = std::max(ref, quarter), ref_r = std::max(ref_r, whole);
      }
      CAPTURE(d);
      CAPTURE(alpha);
      CHECK(all <= 2.0 * ref);
      if (alpha <= d - 1) CHECK(all_r <= 2.0 * ref_r);
    }
}
