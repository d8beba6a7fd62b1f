#include <doctest.h>

#include <cmath>
#include <stdexcept>

#include "hdisp/phase.hpp"

using namespace hdisp;

TEST_CASE("built-in phase families") {
  const auto fourth = builtin_phase({PhaseFamily::fourth_order, 0.0});
  for (double r : {0.0, 0.3, 7.0}) {
    CHECK(fourth.value(r) == r * r + r);
    CHECK(fourth.d1(r) == 2.0 * r + 1.0);
    CHECK(fourth.d2(r) == 2.0);
  }
  CHECK(fourth.declared->m1 == 2.0);
  CHECK(fourth.declared->m2 == 1.0);
  CHECK(fourth.declared->alpha1 == 2.0);
  CHECK(fourth.declared->alpha2 == 2.0);

  const auto schr = builtin_phase({PhaseFamily::frac_schrodinger, 0.5});
  CHECK(schr.d2(1.0) == doctest::Approx(-0.25));
  CHECK(schr.value(9.0) == doctest::Approx(3.0));

  const auto wave = builtin_phase({PhaseFamily::frac_wave, 1.0});
  CHECK(wave.value(4.0) == doctest::Approx(2.0));
  for (double e : {wave.declared->m1, wave.declared->m2, wave.declared->alpha1, wave.declared->alpha2})
    CHECK(e == 0.5);

  CHECK_THROWS_AS(builtin_phase({PhaseFamily::frac_schrodinger, 1.0}), std::domain_error);
  CHECK_THROWS_AS(builtin_phase({PhaseFamily::frac_schrodinger, 0.0}), std::domain_error);
  CHECK_THROWS_AS(builtin_phase({PhaseFamily::frac_wave, 2.0}), std::domain_error);
  CHECK_NOTHROW(builtin_phase({PhaseFamily::frac_wave, 1.5}));

  for (auto f : {PhaseFamily::frac_schrodinger, PhaseFamily::frac_wave, PhaseFamily::fourth_order})
    CHECK(phase_family_from_string(to_string(f)) == f);
  CHECK_THROWS_AS(phase_family_from_string("klein_gordon"), std::invalid_argument);
}

TEST_CASE("hypothesis fits") {
  const auto fourth = check_hypotheses(builtin_phase({PhaseFamily::fourth_order, 0.0}));
  CHECK(fourth.m1.fitted == doctest::Approx(2.0).epsilon(0.05));
  // 2r+1 is not a power law on [1e-3, 1]: the fit drifts off 1, but the
  // derivative stays within a bounded factor of r^0
  CHECK(std::abs(fourth.m2.fitted - 1.0) < 0.15);
  CHECK(fourth.m2.residual >= 0.05);
  CHECK(fourth.m2.comparability_ratio <= 3.0);
  CHECK(fourth.alpha1.fitted == doctest::Approx(2.0).epsilon(1e-12));
  CHECK(fourth.pass());

  const auto schr = check_hypotheses(builtin_phase({PhaseFamily::frac_schrodinger, 0.75}));
  for (const auto* f : {&schr.m1, &schr.m2, &schr.alpha1, &schr.alpha2}) {
    CHECK(f->fitted == doctest::Approx(0.75).epsilon(1e-10));
    CHECK(f->residual < 1e-12);
    CHECK(f->matches_declared);
  }
  CHECK(schr.pass());

  // a declared exponent that the derivative does not follow
  auto wrong = builtin_phase({PhaseFamily::frac_schrodinger, 0.75});
  wrong.declared = PhaseExponents{0.5, 0.75, 0.75, 0.75};
  CHECK_FALSE(check_hypotheses(wrong).m1.pass);
  CHECK_FALSE(check_hypotheses(wrong).pass());

  // phi(r) = r: first derivative constant, second identically zero
  PhaseFunction linear{[](double r) { return r; }, [](double) { return 1.0; },
                       [](double) { return 0.0; }, "linear", std::nullopt};
  const auto lin = check_hypotheses(linear);
  CHECK(lin.m1.fitted == doctest::Approx(1.0));
  CHECK_FALSE(lin.m1.degenerate);
  CHECK(lin.alpha1.degenerate);
  CHECK(lin.alpha2.degenerate);
  CHECK_FALSE(lin.pass());

  CHECK_THROWS_AS(check_hypotheses(PhaseFunction{}), std::invalid_argument);
  HypothesisCheckConfig few;
  few.samples = 5;
  CHECK_THROWS_AS(check_hypotheses(builtin_phase({}), few), std::invalid_argument);
}

TEST_CASE("phases given by values only") {
  const auto ref = builtin_phase({PhaseFamily::frac_wave, 1.2});
  const auto fd = phase_from_values(ref.value, "sampled", ref.declared);
  for (double r : {1e-3, 0.2, 1.0, 40.0, 1e3}) {
    CHECK(fd.d1(r) == doctest::Approx(ref.d1(r)).epsilon(1e-8));
    CHECK(fd.d2(r) == doctest::Approx(ref.d2(r)).epsilon(1e-4));
  }
  CHECK(check_hypotheses(fd).pass());
}

TEST_CASE("phase variation") {
  const auto schr = builtin_phase({PhaseFamily::frac_schrodinger, 0.5});
  CHECK(phase_variation(schr, 1.0, 4.0) == doctest::Approx(1.0).epsilon(1e-14));
  // non-monotone phase: variation exceeds the net change
  PhaseFunction bump{[](double r) { return (r - 1.0) * (r - 1.0); }, nullptr, nullptr, "", {}};
  CHECK(phase_variation(bump, 0.0, 2.0, 2048) == doctest::Approx(2.0).epsilon(1e-12));
}
