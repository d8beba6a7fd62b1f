#include <doctest.h>

#include <omp.h>

#include <algorithm>
#include <cmath>
#include <memory>
#include <random>

#include "hdisp/band_family.hpp"
#include "hdisp/grid_eval.hpp"
#include "hdisp/littlewood_paley.hpp"
#include "hdisp/quadrature.hpp"

using namespace hdisp;

namespace {

std::shared_ptr<SphericalCoefficients> random_source(int n, int modes, LambdaSymmetry sym,
                                                     double lo, double hi, unsigned seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  auto c = std::make_shared<SphericalCoefficients>();
  c->n = n;
  c->symmetry = sym;
  auto grids = std::make_shared<ModeGrids>(modes);
  c->values.resize(modes);
  for (int m = 0; m < modes; ++m) {
    // mode-dependent grids, including sizes that are not multiples of the chunk
    const double a = sym == LambdaSymmetry::none ? -hi : lo;
    const auto rule = composite_gauss_legendre(a, hi, 2 + m % 3, 7 + m % 5);
    (*grids)[m] = {rule.nodes, rule.weights};
    for (std::size_t k = 0; k < rule.size(); ++k) c->values[m].push_back({u(rng), u(rng)});
  }
  c->grids = grids;
  return c;
}

std::vector<double> linspace(double a, double b, int k) {
  std::vector<double> v(k);
  for (int i = 0; i < k; ++i) v[i] = a + (b - a) * i / (k - 1);
  return v;
}

double max_rel(const Eigen::MatrixXcd& a, const Eigen::MatrixXcd& b) {
  return (a - b).cwiseAbs().maxCoeff() / b.cwiseAbs().maxCoeff();
}

}  // namespace

TEST_CASE("GEMM mode evaluation matches the direct quadrature") {
  struct Case {
    int n;
    LambdaSymmetry sym;
    double lo, hi, r_max;
  };
  // the last case pushes 2|lambda|r^2 beyond the vectorized recurrence range
  for (const Case& k : {Case{1, LambdaSymmetry::even, 0.1, 3.0, 3.0},
                        Case{2, LambdaSymmetry::hermitian, 0.2, 5.0, 2.0},
                        Case{3, LambdaSymmetry::none, 0.0, 2.0, 2.5},
                        Case{1, LambdaSymmetry::even, 100.0, 200.0, 3.0}}) {
    const GroupParams g(k.n);
    const MaterializedSource src(random_source(k.n, 9, k.sym, k.lo, k.hi, 17u));
    const auto r = linspace(0.0, k.r_max, 11);
    // a non-uniform s-grid takes the direct trig path
    auto s = linspace(0.0, 6.0, 13);
    const auto s_odd = std::vector<double>{-1.0, 0.0, 0.3, 2.0, 5.5};
    const Eigen::MatrixXcd ref = evaluate_grid_reference(src, r, s, g, src.mode_count());
    const Eigen::MatrixXcd ref_odd = evaluate_grid_reference(src, r, s_odd, g, src.mode_count());
    EvalOptions small_chunks;
    small_chunks.chunk = 5;
    Eigen::MatrixXcd sum = Eigen::MatrixXcd::Zero(r.size(), s.size());
    Eigen::MatrixXcd sum_chunked = sum;
    Eigen::MatrixXcd sum_odd = Eigen::MatrixXcd::Zero(r.size(), s_odd.size());
    for (int m = 0; m < src.mode_count(); ++m) {
      sum += evaluate_mode(src, m, r, s, g);
      sum_chunked += evaluate_mode(src, m, r, s, g, small_chunks);
      sum_odd += evaluate_mode(src, m, r, s_odd, g);
    }
    CAPTURE(k.n);
    CAPTURE(k.lo);
    CHECK(max_rel(sum, ref) < 1e-12);
    CHECK(max_rel(sum_chunked, ref) < 1e-12);
    CHECK(max_rel(sum_odd, ref_odd) < 1e-12);
  }
}

TEST_CASE("mode sweeps are independent of the thread count") {
  const GroupParams g(2);
  const MaterializedSource src(random_source(2, 40, LambdaSymmetry::even, 0.1, 2.0, 3u));
  const auto r = linspace(0.0, 2.0, 7);
  const auto s = linspace(0.0, 4.0, 9);
  const int saved = omp_get_max_threads();
  std::vector<Eigen::MatrixXcd> results;
  for (int threads : {1, 3, 4}) {
    omp_set_num_threads(threads);
    ModeSweep sweep(src, r, s, g, EvalOptions{}, {4, 17});
    sweep.advance_to(25);
    sweep.advance_to(1000);  // clamps to the source
    CHECK(sweep.modes_done() == 40);
    CHECK(sweep.samples().size() == 2);
    results.push_back(sweep.partial_sum());
  }
  omp_set_num_threads(saved);
  CHECK((results[0] - results[1]).cwiseAbs().maxCoeff() == 0.0);
  CHECK((results[0] - results[2]).cwiseAbs().maxCoeff() == 0.0);
  CHECK(max_rel(results[0], evaluate_grid_reference(src, r, s, g, 40)) < 1e-12);
}

TEST_CASE("tail models on a series with a known tail") {
  // one node per mode, scaled so the field at the origin is (2m+1)^{-3}
  const GroupParams g(1);
  constexpr int kModes = 256;
  auto c = std::make_shared<SphericalCoefficients>();
  c->n = 1;
  c->symmetry = LambdaSymmetry::even;
  c->grids = std::make_shared<ModeGrids>(kModes, ModeGrid{{1.0}, {1.0}});
  for (int m = 0; m < kModes; ++m)
    c->values.push_back({std::pow(2.0 * m + 1, -3) / (2.0 * g.inversion_constant())});
  const MaterializedSource src(c);
  ModeSweep sweep(src, {0.0}, {0.0}, g, EvalOptions{}, tail_sample_modes(kModes));
  sweep.advance_to(128);
  const double head = sweep.partial_sum()(0, 0).real();
  CHECK(head == doctest::Approx(inverse_power_tail(3, 0, 1) - inverse_power_tail(3, 128, 1)).epsilon(1e-14));

  const double tail = inverse_power_tail(3, 128, 1);
  const auto ex = estimate_tail(sweep, TailPolicy::extrapolate);
  CHECK(std::abs(ex.correction(0, 0).real() - tail) < 1e-10 * tail);
  CHECK(ex.bound(0, 0) < 1e-8 * tail);
  const auto env = estimate_tail(sweep, TailPolicy::envelope);
  CHECK(env.correction(0, 0) == cplx{});
  CHECK(env.bound(0, 0) >= tail);
  CHECK(estimate_tail(sweep, TailPolicy::none).bound(0, 0) == 0.0);

  const auto modes = tail_sample_modes(256);
  CHECK(modes.front() == 4);
  CHECK(std::is_sorted(modes.begin(), modes.end()));
  CHECK(modes.back() <= 256);
}

TEST_CASE("band family coefficients agree with their materialization") {
  const GroupParams g(1);
  const DyadicWindow w;
  const BandFamily fam(1, {window_component(0, w)}, 12, 4.0);
  const auto mat = std::make_shared<SphericalCoefficients>(fam.materialize());
  CHECK_NOTHROW(mat->validate());
  CHECK(mat->m_max() == 11);
  for (int m = 0; m < 12; ++m) {
    CHECK(mat->grid(m).size() == fam.node_count(m));
    // window value on the band coordinate x = (2m+n)|lambda|
    const auto& gr = mat->grid(m);
    for (std::size_t k = 0; k < gr.size(); k += 7)
      CHECK(mat->values[m][k].real() == doctest::Approx(w((2.0 * m + 1) * gr.nodes[k])).epsilon(1e-14));
  }
  const MaterializedSource src(mat);
  const auto r = linspace(0.0, 1.5, 5);
  const auto s = linspace(0.0, 3.0, 5);
  Eigen::MatrixXcd a = Eigen::MatrixXcd::Zero(5, 5), b = a;
  for (int m = 0; m < 12; ++m) {
    a += evaluate_mode(fam, m, r, s, g);
    b += evaluate_mode(src, m, r, s, g);
  }
  CHECK(max_rel(a, b) < 1e-13);
}

TEST_CASE("band fields converge in the mode count and under panel refinement") {
  const GroupParams g(1);
  const DyadicWindow w;
  const BandFamily fam(1, {window_component(0, w)}, 1 << 14, 4.0);
  const auto r = linspace(0.0, 2.0, 6);
  const auto s = linspace(0.0, 4.0, 6);
  FieldOptions opt;
  opt.tail_tol = 1e-9;
  const auto f = evaluate_band_field(fam, r, s, g, opt);
  CHECK(f.quad_err <= 1e-12 * f.values.cwiseAbs().maxCoeff());
  CHECK(f.tail_bound <= 1e-9 * f.values.cwiseAbs().maxCoeff());

  // brute force: plain truncations at 2048 and 4096 modes, whose (2m+1)^{-2}
  // tails are removed by Richardson extrapolation
  FieldOptions plain;
  plain.tail = TailPolicy::none;
  plain.certify = false;
  plain.initial_modes = 2048;
  const auto b1 = evaluate_band_field(fam.with_mode_count(2048), r, s, g, plain);
  plain.initial_modes = 4096;
  const auto b2 = evaluate_band_field(fam.with_mode_count(4096), r, s, g, plain);
  const double t1 = inverse_power_tail(2, 2048, 1), t2 = inverse_power_tail(2, 4096, 1);
  const Eigen::MatrixXcd brute = b2.values + (b2.values - b1.values) * (t2 / (t1 - t2));
  CHECK(max_rel(b2.values, brute) > 1e-5);  // truncation alone is visibly off
  CHECK(max_rel(f.values, brute) < 1e-7);

  FieldOptions tiny = opt;
  tiny.tail_tol = 1e-15;
  CHECK_THROWS_AS(evaluate_band_field(fam.with_mode_count(64), r, s, g, tiny), NonconvergenceError);
}
