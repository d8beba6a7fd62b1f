// Serial per-point quadrature against the GEMM kernels, single mode and full
// mode sweeps, on the band family of phi_0.

#include <benchmark/benchmark.h>
#include <omp.h>

#include <vector>

#include "hdisp/band_family.hpp"
#include "hdisp/grid_eval.hpp"
#include "hdisp/littlewood_paley.hpp"

namespace {

using namespace hdisp;

std::vector<double> linspace(double a, double b, int k) {
  std::vector<double> v(k);
  for (int i = 0; i < k; ++i) v[i] = a + (b - a) * i / (k - 1);
  return v;
}

struct Fixture {
  GroupParams g{1};
  BandFamily fam;
  std::vector<double> r, s;
  explicit Fixture(int modes, int grid)
      : fam(1, {window_component(0, DyadicWindow{})}, modes, 4.0),
        r(linspace(0.0, 2.0, grid)),
        s(linspace(0.0, 4.0, grid)) {}
};

void BM_reference(benchmark::State& st) {
  const Fixture f(static_cast<int>(st.range(0)), static_cast<int>(st.range(1)));
  for (auto _ : st)
    benchmark::DoNotOptimize(evaluate_grid_reference(f.fam, f.r, f.s, f.g, f.fam.mode_count()));
  st.SetItemsProcessed(st.iterations() * st.range(0));
}

void BM_gemm_serial(benchmark::State& st) {
  const Fixture f(static_cast<int>(st.range(0)), static_cast<int>(st.range(1)));
  for (auto _ : st) {
    Eigen::MatrixXcd sum = Eigen::MatrixXcd::Zero(f.r.size(), f.s.size());
    for (int m = 0; m < f.fam.mode_count(); ++m) sum += evaluate_mode(f.fam, m, f.r, f.s, f.g);
    benchmark::DoNotOptimize(sum);
  }
  st.SetItemsProcessed(st.iterations() * st.range(0));
}

// range(2) is the OpenMP thread count
void BM_sweep(benchmark::State& st) {
  const Fixture f(static_cast<int>(st.range(0)), static_cast<int>(st.range(1)));
  const int saved = omp_get_max_threads();
  omp_set_num_threads(static_cast<int>(st.range(2)));
  for (auto _ : st) {
    ModeSweep sweep(f.fam, f.r, f.s, f.g, EvalOptions{});
    sweep.advance_to(f.fam.mode_count());
    benchmark::DoNotOptimize(sweep.partial_sum());
  }
  omp_set_num_threads(saved);
  st.SetItemsProcessed(st.iterations() * st.range(0));
}

}  // namespace

BENCHMARK(BM_reference)->Args({32, 16})->Unit(benchmark::kMillisecond);
BENCHMARK(BM_gemm_serial)->Args({32, 16})->Args({256, 32})->Unit(benchmark::kMillisecond);
BENCHMARK(BM_sweep)
    ->Args({32, 16, 1})
    ->Args({256, 32, 1})
    ->Args({256, 32, 4})
    ->Unit(benchmark::kMillisecond)
    ->UseRealTime();

BENCHMARK_MAIN();
