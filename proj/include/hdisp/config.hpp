#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "hdisp/phase.hpp"

namespace hdisp {

// count log-spaced points from lo to hi inclusive
struct LogRange {
  double lo = 1.0;
  double hi = 1.0;
  int count = 1;
  std::vector<double> values() const;
};

// A phase with the time at which its dyadic scan runs.
struct ScanTarget {
  PhaseSpec phase;
  double t = 0.0;
};

std::string describe(const PhaseSpec& p);
// "frac_schrodinger:0.5", "frac_wave:1", "fourth_order"
PhaseSpec parse_phase(const std::string& text);

struct ExperimentConfig {
  int n = 1;

  // verify-lemmas
  int oracle_m_max = 15;
  int oracle_d_max = 5;
  int growth_m = 512;
  int growth_ref_m = 64;
  int growth_d_max = 3;
  PhaseSpec vdc_phase{PhaseFamily::frac_schrodinger, 0.5};
  LogRange vdc_t{1e2, 1e5, 13};

  // partition-check
  int partition_points = 200;
  double partition_log2_lo = -20.0;
  double partition_log2_hi = 20.0;

  // kernel-eval
  std::vector<int> kernel_j{-2, -1, 0, 1, 2, 3};
  int kernel_grid = 10;
  double kernel_r_extent = 2.0;  // in units of 2^{-j}
  double kernel_s_extent = 2.0;  // in units of 4^{-j}
  int roundtrip_modes = 3;
  double determinism_t = 10.0;

  // decay-fit
  std::vector<PhaseSpec> decay_phases{{PhaseFamily::frac_schrodinger, 0.5},
                                      {PhaseFamily::frac_wave, 1.0},
                                      {PhaseFamily::fourth_order, 0.0}};
  int decay_j = 0;
  LogRange decay_t{1e2, 1e4, 6};
  std::vector<ScanTarget> scan_targets{{{PhaseFamily::frac_schrodinger, 0.5}, 1e3},
                                       {{PhaseFamily::fourth_order, 0.0}, 50.0}};
  std::vector<int> scan_j{-2, -1, 0, 1, 2};

  // sharpness
  std::vector<PhaseSpec> sharp_phases{{PhaseFamily::frac_schrodinger, 0.5},
                                      {PhaseFamily::frac_wave, 1.0},
                                      {PhaseFamily::fourth_order, 0.0}};
  std::vector<int> sharp_n{1, 2};
  LogRange sharp_t{1e3, 1e5, 9};

  // dispersive-ratio
  PhaseSpec ratio_phase{PhaseFamily::frac_schrodinger, 0.5};
  std::vector<int> ratio_components{0};
  LogRange ratio_t{1e2, 1e4, 6};

  // tolerances
  double quad_tol = 1e-9;       // relative, certified field values
  double tail_eps = 1e-4;       // relative m-tail during sup searches
  double transform_tol = 1e-9;  // absolute, forward transform doublings
  double osc_tol = 1e-11;       // relative, 1-D oscillatory integrals
  int sup_grid_r = 64;
  int sup_grid_s = 257;

  std::string out_dir = "hdisp_out";
  std::uint64_t seed = 20240607;

  // Throws ConfigError naming the first violated constraint.
  void validate() const;
  // Multiplies every tolerance by `factor`.
  void scale_tolerances(double factor);
};

// Defaults overridden by the keys present in an INI file; unknown keys are
// rejected. HDISP_OUT, when set, replaces the output directory.
ExperimentConfig load_config(const std::string& path);
ExperimentConfig default_config();
void apply_environment(ExperimentConfig& cfg);

}  // namespace hdisp
