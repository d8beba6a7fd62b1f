#include <doctest.h>

#include <omp.h>

#include <cmath>
#include <stdexcept>

#include "hdisp/dispersive.hpp"

using namespace hdisp;

namespace {

constexpr double kPhi0Sup = 1.0673056453927;  // ||phi_0||_inf on H^1

const PhaseFunction& schrodinger_half() {
  static const PhaseFunction phi = builtin_phase({PhaseFamily::frac_schrodinger, 0.5});
  return phi;
}

double max_rel(const Eigen::MatrixXcd& a, const Eigen::MatrixXcd& b) {
  return (a - b).cwiseAbs().maxCoeff() / b.cwiseAbs().maxCoeff();
}

}  // namespace

TEST_CASE("evolution at t = 0 is the identity") {
  const GroupParams g(1);
  const DyadicWindow w;
  const std::vector<double> r{0.0, 0.4, 1.1}, s{0.0, 0.7, 2.5};
  const auto evolved = evolve_kernel(schrodinger_half(), 0.0, 0, r, s, g);
  const BandFamily plain(1, {window_component(0, w)}, 1 << 14, 2.5);
  const auto base = evaluate_band_field(plain, r, s, g);
  CHECK(max_rel(evolved.values, base.values) < 1e-15);
}

TEST_CASE("the evolution multiplier is unimodular") {
  const DyadicWindow w;
  const BandFamily still(2, {window_component(1, w)}, 64, 3.0);
  const BandFamily moving(2, {window_component(1, w)}, 64, 3.0, OscillationLaw{},
                          Evolution{schrodinger_half(), 250.0});
  for (int m : {0, 5, 63}) {
    // the oscillating family uses more panels, so compare on its own nodes
    const auto cur = moving.open_mode(m);
    NodeBlock blk;
    cur->fill(0, cur->node_count(), blk);
    for (std::size_t k = 0; k < blk.size(); k += 11) {
      const double x = (2.0 * m + 2) * blk.lambda[k] / 4.0;
      CHECK(std::abs(blk.value[k]) == doctest::Approx(w(x)).epsilon(1e-14));
    }
    CHECK(moving.node_count(m) > still.node_count(m));
  }
}

TEST_CASE("evolved kernel converges under panel refinement") {
  // n = 1, j = 0, t = 100: the origin value against 4x the panels
  const GroupParams g(1);
  FieldOptions opt;
  opt.tail_tol = 1e-9;
  OscillationLaw fine;
  fine.refinement = 4;
  const auto a = evolve_kernel(schrodinger_half(), 100.0, 0, {0.0}, {0.0}, g, opt);
  const auto b = evolve_kernel(schrodinger_half(), 100.0, 0, {0.0}, {0.0}, g, opt, fine);
  CHECK(std::abs(a.values(0, 0) - b.values(0, 0)) < 1e-4 * std::abs(b.values(0, 0)));
  CHECK(a.quad_err < 1e-8 * std::abs(b.values(0, 0)));
}

TEST_CASE("time reversal conjugates the field") {
  const GroupParams g(1);
  const std::vector<double> r{0.0, 0.8}, s{0.0, 3.0, 9.0};
  const auto fwd = evolve_kernel(schrodinger_half(), 40.0, 0, r, s, g);
  const auto bwd = evolve_kernel(schrodinger_half(), -40.0, 0, r, s, g);
  CHECK(max_rel(bwd.values, fwd.values.conjugate()) < 1e-10);
}

TEST_CASE("evolved fields do not depend on the thread count") {
  const GroupParams g(1);
  const std::vector<double> r{0.0, 0.5, 1.0}, s{0.0, 2.0, 4.0, 6.0};
  const int saved = omp_get_max_threads();
  omp_set_num_threads(1);
  const auto one = evolve_kernel(schrodinger_half(), 10.0, 0, r, s, g);
  omp_set_num_threads(4);
  const auto four = evolve_kernel(schrodinger_half(), 10.0, 0, r, s, g);
  omp_set_num_threads(saved);
  CHECK((one.values - four.values).cwiseAbs().maxCoeff() == 0.0);
  CHECK(one.modes == four.modes);
}

TEST_CASE("sup norm at t = 0 follows the dilation identity") {
  const GroupParams g(1);
  SearchConfig cfg;
  cfg.tail_tol = 1e-9;
  cfg.coarse_r = 16;
  cfg.coarse_s = 17;
  for (int j : {0, 1, -1}) {
    const auto sup = sup_norm_phi_j(schrodinger_half(), 0.0, j, g, cfg);
    CAPTURE(j);
    CHECK(sup.value == doctest::Approx(std::pow(2.0, 4 * j) * kPhi0Sup).epsilon(1e-8));
    CHECK(sup.r == 0.0);
    CHECK(sup.s == 0.0);
    CHECK_FALSE(sup.boundary_hit);
  }
  // the unevolved field is even in s
  const auto f = evolve_kernel(schrodinger_half(), 0.0, 0, {0.3}, {-1.7, 1.7}, g);
  CHECK(f.values(0, 0) == f.values(0, 1));

  SearchConfig bad;
  bad.refine_points = 4;
  CHECK_THROWS_AS(sup_norm_phi_j(schrodinger_half(), 1.0, 0, g, bad), std::invalid_argument);
  CHECK_THROWS_AS(sup_norm({}, schrodinger_half(), 1.0, g), std::invalid_argument);
}

TEST_CASE("sup norms decay like t^{-1/2}") {
  const GroupParams g(1);
  const double s3 = sup_norm_phi_j(schrodinger_half(), 1e3, 0, g).value;
  const double s4 = sup_norm_phi_j(schrodinger_half(), 1e4, 0, g).value;
  CHECK(s4 / s3 == doctest::Approx(std::pow(10.0, -0.5)).epsilon(0.15));
  CHECK(s3 < kPhi0Sup);
}

TEST_CASE("sup norm of a sum is bounded by the sum of sup norms") {
  const GroupParams g(1);
  const DyadicWindow w;
  const double t = 10.0;
  const double a = sup_norm({window_component(0, w)}, schrodinger_half(), t, g).value;
  const double b = sup_norm({window_component(2, w)}, schrodinger_half(), t, g).value;
  const double ab =
      sup_norm({window_component(0, w), window_component(2, w)}, schrodinger_half(), t, g).value;
  CHECK(ab <= 1.1 * (a + b));
  CHECK(ab >= 0.99 * std::abs(a - b));
}

TEST_CASE("least-squares lines") {
  const std::vector<double> x{0, 1, 2, 3, 4, 5}, y{1, -1, -3, -5, -7, -9};
  const auto exact = fit_line(x, y, "x");
  CHECK(exact.slope == doctest::Approx(-2.0).epsilon(1e-14));
  CHECK(exact.intercept == doctest::Approx(1.0).epsilon(1e-14));
  CHECK(exact.rms < 1e-14);
  CHECK(exact.half_width < 1e-13);

  const std::vector<double> noisy{1.1, -1.0, -3.2, -4.9, -7.1, -8.8};
  const auto fit = fit_line(x, noisy, "x");
  CHECK(fit.half_width > 0.0);
  CHECK(std::abs(fit.slope + 2.0) < fit.half_width);
  CHECK(fit.residuals.size() == 6);

  CHECK_THROWS_AS(fit_line({0, 1, 2, 3, 4}, {0, 1, 2, 3, 4}, "x"), std::invalid_argument);
  CHECK_NOTHROW(fit_line({0, 1, 2, 3, 4}, {0, 1, 2, 3, 4}, "x", 5));
  CHECK_THROWS_AS(fit_line({1, 1, 1, 1, 1, 1}, y, "x"), std::invalid_argument);
  CHECK_THROWS_AS(fit_line(x, {1, 2}, "x"), std::invalid_argument);
}

TEST_CASE("dispersive ratio rejects degenerate input") {
  const GroupParams g(1);
  const DyadicWindow w;
  auto zero = window_component(0, w);
  zero.scale = 0.0;
  CHECK_THROWS_AS(dispersive_ratio(schrodinger_half(), {zero}, {100.0}, g), std::invalid_argument);
  auto undeclared = schrodinger_half();
  undeclared.declared.reset();
  CHECK_THROWS_AS(dispersive_ratio(undeclared, {window_component(0, w)}, {100.0}, g),
                  std::invalid_argument);
  CHECK_THROWS_AS(decay_fit(schrodinger_half(), 0, {0.0, 1, 2, 3, 4, 5}, g), std::invalid_argument);
}
