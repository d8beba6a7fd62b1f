#pragma once

#include <string>
#include <vector>

#include "hdisp/band_family.hpp"
#include "hdisp/littlewood_paley.hpp"
#include "hdisp/phase.hpp"

namespace hdisp {

// U_t phi_j sampled on r x s, certified by panel doubling.
KernelField evolve_kernel(const PhaseFunction& phi, double t, int j, std::vector<double> r,
                          std::vector<double> s, const GroupParams& g,
                          const FieldOptions& opt = {}, const OscillationLaw& law = {},
                          const DyadicWindow& w = DyadicWindow());

// Search domain and strategy for sup |U_t u0|.
//   s in [0, |t| S + s_floor 4^{-j}],  S = margin * 4n * max_band |phi'(4^{j+1} x)|
//   r in [0, margin * sqrt(2n ln(1/gaussian_eps) / 4^j)]
// (u0 is real and even, so the field is even in s.)
struct SearchConfig {
  int coarse_r = 64;
  int coarse_s = 257;
  int candidates = 5;
  int refine_passes = 2;
  int refine_points = 5;  // per axis, odd
  double margin = 1.5;
  double gaussian_eps = 1e-6;
  double s_floor = 12.0;
  int max_enlargements = 2;
  int max_modes = 4096;
  int initial_modes = 16;
  double tail_tol = 1e-4;  // relative, during the search
  OscillationLaw law;
  EvalOptions eval;
};

struct SupResult {
  double value = 0.0;
  double r = 0.0, s = 0.0;
  double quad_err = 0.0;
  double tail_bound = 0.0;
  int modes = 0;
  double r_max = 0.0, s_max = 0.0;
  int enlargements = 0;
  bool boundary_hit = false;  // argmax still on the boundary after enlarging
};

SupResult sup_norm(const std::vector<BandComponent>& u0, const PhaseFunction& phi, double t,
                   const GroupParams& g, const SearchConfig& cfg = {});
SupResult sup_norm_phi_j(const PhaseFunction& phi, double t, int j, const GroupParams& g,
                         const SearchConfig& cfg = {}, const DyadicWindow& w = DyadicWindow());

struct DecayRow {
  double t = 0.0;
  int j = 0;
  SupResult sup;
};

struct DecayFitReport {
  std::string abscissa;  // "log t" or "j ln2"
  std::vector<double> x, y, residuals;
  double slope = 0.0;
  double intercept = 0.0;
  double half_width = 0.0;  // 95% confidence half-width of the slope
  double rms = 0.0;
  std::vector<DecayRow> rows;
};

// Ordinary least squares y = intercept + slope x.
DecayFitReport fit_line(std::vector<double> x, std::vector<double> y, std::string abscissa,
                        std::size_t min_points = 6);

DecayFitReport decay_fit(const PhaseFunction& phi, int j, const std::vector<double>& t_list,
                         const GroupParams& g, const SearchConfig& cfg = {});
// slope of ln(sup * t^{1/2}) against j ln 2 at fixed t; five scales suffice
DecayFitReport scale_fit(const PhaseFunction& phi, double t, const std::vector<int>& j_list,
                         const GroupParams& g, const SearchConfig& cfg = {});

struct RatioRow {
  double t = 0.0;
  double sup = 0.0;
  double ratio = 0.0;  // sup * t^{1/2} / ||u0||_B
};

struct DispersiveRatioReport {
  double besov = 0.0;
  double besov_error = 0.0;
  std::vector<RatioRow> rows;
};

// Besov norm of u0 in the space with regularity N - alpha1, p = r = 1.
// Throws std::invalid_argument on a zero datum.
DispersiveRatioReport dispersive_ratio(const PhaseFunction& phi, const std::vector<BandComponent>& u0,
                                       const std::vector<double>& t_list, const GroupParams& g,
                                       const SearchConfig& cfg = {}, const BesovGrid& grid = {},
                                       const DyadicWindow& w = DyadicWindow());

}  // namespace hdisp
