#pragma once

#include <limits>
#include <memory>
#include <optional>
#include <vector>

#include "hdisp/band_family.hpp"
#include "hdisp/spherical_fourier.hpp"

namespace hdisp {

// g(x) = h(x) / (h(x) + h(1-x)), h(x) = exp(-c/x) for x > 0: 0 for x <= 0,
// 1 for x >= 1, smooth in between.
double smooth_step(double x, double steepness = 1.0);

// Even window supported in 1/2 <= |tau| <= 4 whose dilates by powers of 4 sum
// to one away from the origin.
class DyadicWindow {
 public:
  static constexpr double kLower = 0.5;
  static constexpr double kUpper = 4.0;

  explicit DyadicWindow(double steepness = 1.0);

  double operator()(double tau) const;
  // Unnormalized bump before division by the sum of its dilates.
  double bump(double tau) const;
  // sum_{j=j_lo..j_hi} R*(4^{-j} tau)
  double partition_sum(double tau, int j_lo, int j_hi) const;
  // R*(4 tau) + R*(tau) + R*(tau / 4), equal to 1 on the support of R*.
  double tripled(double tau) const;
  double steepness() const { return steepness_; }

 private:
  double steepness_;
};

DyadicWindow build_window(double steepness = 1.0);

struct KernelOptions {
  double tol = 1e-8;       // relative tail tolerance for the coefficient truncation
  int calibration_modes = 32;
  double safety = 4.0;
  int max_stored_modes = 2048;
};

// The kernel of R*(4^{-j} L). Fields come from `family`; `coefficients` is an
// explicit truncation whose tail_bound follows the crude rule
//   K_n sum_{m > m_max} (2m+n)^{-2},
// K_n = safety * max_{m <= calibration} sup|mode m| (2m+n)^2.
struct LPKernel {
  int j = 0;
  int n = 1;
  DyadicWindow window;
  std::shared_ptr<const BandFamily> family;
  std::shared_ptr<const SphericalCoefficients> coefficients;
  double tail_constant = 0.0;
  int truncation_modes = 0;  // the m_max the rule asked for, before capping
};

BandComponent window_component(int j, const DyadicWindow& w);

// sup over H^n of the mode-m term of phi_j; attained at the origin.
double lp_mode_sup(int j, int m, const GroupParams& g, const DyadicWindow& w);

LPKernel kernel_phi_j(int j, const GroupParams& g, const DyadicWindow& w = DyadicWindow(),
                      const KernelOptions& opt = {});

// Delta_j on coefficients: c[m][k] * R*(4^{-j}(2m+n)|lambda_k|).
SphericalCoefficients project(const SphericalCoefficients& c, int j, const DyadicWindow& w);
// The tripled window R*_{j-1} + R*_j + R*_{j+1}.
SphericalCoefficients project_tilde(const SphericalCoefficients& c, int j,
                                    const DyadicWindow& w);

// Delta_j on one band component; nullopt when the supports do not meet.
std::optional<BandComponent> project(const BandComponent& c, int j, const DyadicWindow& w);
std::vector<BandComponent> project(const std::vector<BandComponent>& f, int j,
                                   const DyadicWindow& w);

// ||f||_2^2 for f given by band components, exact up to one 1-D quadrature:
//   2C sum_m binom(m+n-1,m) int |f^(m,lambda)|^2 |lambda|^n dlambda.
// `sigma` applies L^{sigma/2} first.
double band_l2_norm2(const std::vector<BandComponent>& f, const GroupParams& g,
                     double sigma = 0.0);

struct BesovSpec {
  double rho = 0.0;
  double p = 1.0;  // +inf allowed
  double r = 1.0;  // +inf allowed
  int j_lo = -4;
  int j_hi = 4;
};

// Block norms ||Delta_j f||_p are integrals over r in [0, R0 2^{-j}],
// s in [-S0 4^{-j}, S0 4^{-j}] with composite Simpson weights on nodes
// spaced h 2^{-j} (r) and h 4^{-j} (s). The same integral with spacing 2h
// gives the discretization error. p = inf takes the grid max instead.
struct BesovGrid {
  double r_extent = 8.0;
  double s_extent = 24.0;
  double step = 0.05;
  FieldOptions field;
};

struct BesovBlock {
  int j = 0;
  double norm = 0.0;
  double error = 0.0;
};

struct BesovReport {
  double value = 0.0;
  double error = 0.0;  // propagated from the block errors
  std::vector<BesovBlock> blocks;
};

// Throws std::domain_error when rho >= N/p and std::invalid_argument when f has
// spectral mass outside the j-range (unresolved tail).
BesovReport besov_norm(const std::vector<BandComponent>& f, const BesovSpec& spec,
                       const GroupParams& g, const BesovGrid& grid = {},
                       const DyadicWindow& w = DyadicWindow());

// p-norm of a sampled radial field over its grid; s-grid taken as [0, S] with
// the field even in s when `even_in_s`.
struct LpEstimate {
  double value = 0.0;
  double error = 0.0;
};
LpEstimate field_lp_norm(const KernelField& f, double p, const GroupParams& g, bool even_in_s);

}  // namespace hdisp
