#include <doctest.h>

#include <cmath>
#include <stdexcept>
#include <vector>

#include "hdisp/dispersive.hpp"
#include "hdisp/sharpness.hpp"

using namespace hdisp;

namespace {

OscillatoryIntegrand gaussian_chirp() {
  OscillatoryIntegrand I;
  I.a = -7.0;
  I.b = 7.0;
  I.amplitude = [](double x) { return cplx(std::exp(-x * x), 0.0); };
  I.phase = [](double x) { return x * x; };
  I.phase_d1 = [](double x) { return 2.0 * x; };
  I.phase_d2 = [](double) { return 2.0; };
  return I;
}

}  // namespace

TEST_CASE("oscillatory integrals against a Gaussian chirp") {
  // int e^{i t x^2} e^{-x^2} dx = sqrt(pi / (1 - i t))
  const auto I = gaussian_chirp();
  for (double t : {0.0, 1.0, 10.0, 1e3, 1e5}) {
    const auto res = oscillatory_integral(I, t);
    const cplx exact = std::sqrt(kPi / cplx(1.0, -t));
    CAPTURE(t);
    CHECK(std::abs(res.value - exact) < 1e-10 * std::sqrt(kPi));
    CHECK(res.error <= 1e-11 * std::sqrt(kPi));
    // conjugate symmetry in t
    CHECK(std::abs(oscillatory_integral(I, -t).value - std::conj(res.value)) < 1e-11);
  }
  // the leading term is exact for a Gaussian up to the Taylor tail of 1/sqrt(1 - 1/(it))
  const CriticalPoint cp{0.0, 2.0, 2};
  const double t = 1e4;
  const cplx lead = stationary_phase_leading(I, cp, t);
  CHECK(std::abs(lead / oscillatory_integral(I, t).value - 1.0) < 1e-4);

  OscillatoryConfig tight;
  tight.max_panels = 64;
  CHECK_THROWS_AS(oscillatory_integral(I, 1e6, tight), NonconvergenceError);
  auto empty = I;
  empty.b = empty.a;
  CHECK_THROWS_AS(oscillatory_integral(empty, 1.0), std::invalid_argument);
}

TEST_CASE("critical points of the sharpness phases") {
  for (int n : {1, 2, 3}) {
    for (const PhaseSpec& spec : {PhaseSpec{PhaseFamily::frac_schrodinger, 0.5},
                                  PhaseSpec{PhaseFamily::frac_schrodinger, 0.3},
                                  PhaseSpec{PhaseFamily::frac_wave, 1.0},
                                  PhaseSpec{PhaseFamily::frac_wave, 1.6},
                                  PhaseSpec{PhaseFamily::fourth_order, 0.0}}) {
      const auto phi = builtin_phase(spec);
      const double s0 = critical_speed(phi, n, 1.0);
      CAPTURE(n);
      CAPTURE(phi.label);
      CHECK(closed_form_critical_point(spec, n, s0) == doctest::Approx(1.0).epsilon(1e-13));
      const auto I = sharpness_integrand(phi, n, s0);
      const auto cp = find_critical_point(I.phase_d1, I.phase_d2, 0.7, 1.3);
      CHECK(std::abs(cp.location - 1.0) < 1e-12);
      CHECK(cp.order == 2);
      // the closed form follows s off the reference speed too
      const double s = 1.1 * s0;
      const auto Js = sharpness_integrand(phi, n, s);
      CHECK(find_critical_point(Js.phase_d1, Js.phase_d2, 0.2, 5.0).location ==
            doctest::Approx(closed_form_critical_point(spec, n, s)).epsilon(1e-12));
    }
  }
  // closed-form speeds
  CHECK(critical_speed(builtin_phase({PhaseFamily::fourth_order, 0.0}), 2, 1.0) == 32.0 * 4 + 8);
  CHECK(critical_speed(builtin_phase({PhaseFamily::frac_schrodinger, 0.5}), 1, 1.0) ==
        doctest::Approx(0.5 * 2.0));

  const auto sq = [](double x) { return x * x - 4.0; };
  const auto two_x = [](double x) { return 2.0 * x; };
  CHECK_THROWS_AS(find_critical_point(sq, two_x, 3.0, 5.0), std::invalid_argument);
  CHECK(find_critical_point(sq, two_x, 0.0, 5.0).location == doctest::Approx(2.0));
  // a cubic zero has no curvature
  CHECK_THROWS_AS(find_critical_point([](double x) { return std::pow(x - 1.0, 3); },
                                      [](double x) { return 3.0 * std::pow(x - 1.0, 2); }, 0.0, 3.0),
                  std::domain_error);
}

TEST_CASE("stationary phase leading term") {
  const auto I = gaussian_chirp();
  const CriticalPoint cp{0.0, 2.0, 2};
  const double base = std::abs(stationary_phase_leading(I, cp, 100.0)) * 10.0;
  for (double t : {1.0, 37.0, 1e6}) CHECK(std::abs(stationary_phase_leading(I, cp, t)) * std::sqrt(t) == doctest::Approx(base));
  const CriticalPoint steeper{0.0, 4.0, 2};
  CHECK(std::abs(stationary_phase_leading(I, steeper, 50.0)) ==
        doctest::Approx(std::abs(stationary_phase_leading(I, cp, 50.0)) / std::sqrt(2.0)));
  CHECK_THROWS_AS(stationary_phase_leading(I, cp, 0.0), std::domain_error);
  CHECK_THROWS_AS(stationary_phase_leading(I, CriticalPoint{0.0, 0.0, 2}, 1.0), std::domain_error);
  CHECK_THROWS_AS(stationary_phase_leading(I, CriticalPoint{0.0, 2.0, 3}, 1.0), std::domain_error);
}

TEST_CASE("sharpness of the t^{-1/2} rate") {
  const std::vector<double> ts{1e3, 3e3, 1e4, 3e4, 1e5};
  const auto rep = sharpness_run({PhaseFamily::frac_schrodinger, 0.5}, 1, ts);
  CHECK(std::abs(rep.critical.location - 1.0) < 1e-10);
  double lo = INFINITY, hi = 0.0;
  for (const auto& row : rep.rows) {
    lo = std::min(lo, row.scaled);
    hi = std::max(hi, row.scaled);
    CHECK(row.leading_scaled == doctest::Approx(rep.rows.front().leading_scaled).epsilon(1e-12));
  }
  CHECK((hi - lo) / lo < 0.1);
  CHECK(std::abs(rep.rows.back().ratio - 1.0) < 0.02);

  // the first correction to the leading term is one power of t down, once
  // the ramps of the bump stop contributing (t >= 1e4 here)
  const auto tail = sharpness_run({PhaseFamily::frac_schrodinger, 0.5}, 1,
                                  {1e4, 3e4, 1e5, 3e5, 1e6});
  std::vector<double> x, y;
  for (const auto& row : tail.rows) {
    x.push_back(std::log(row.t));
    y.push_back(std::log(row.relative_error));
  }
  const auto fit = fit_line(x, y, "log t", 5);
  CHECK(fit.slope == doctest::Approx(-1.0).epsilon(0.02));

  // away from the critical speed nothing is stationary on D0 and the scaled
  // magnitude collapses
  const auto phi = builtin_phase({PhaseFamily::frac_schrodinger, 0.5});
  const auto off = sharpness_integrand(phi, 1, critical_speed(phi, 1, 2.0));
  for (double t : {1e3, 1e4}) {
    const double scaled = std::sqrt(t) * std::abs(oscillatory_integral(off, t).value);
    CHECK(scaled < 1e-3 * rep.rows.front().scaled);
  }

  CHECK_THROWS_AS(sharpness_run({PhaseFamily::fourth_order, 0.0}, 0, ts), std::invalid_argument);
}

TEST_CASE("van der Corput normalization") {
  const auto phi = builtin_phase({PhaseFamily::frac_schrodinger, 0.5});
  const auto I = sharpness_integrand(phi, 1, critical_speed(phi, 1, 1.0));
  // |Psi''| = 16 |phi''(4 lambda)| is smallest at the right end of D0
  const double delta = std::abs(I.phase_d2(1.3));
  const double v = vdc_bound_check(I, delta * (1.0 - 1e-9), {1e2, 1e3, 1e4});
  CHECK(v > 0.0);
  CHECK(v < 10.0);
  CHECK_THROWS_AS(vdc_bound_check(I, 2.0 * delta, {1e2}), std::domain_error);
  CHECK_THROWS_AS(vdc_bound_check(I, 0.0, {1e2}), std::domain_error);
}
