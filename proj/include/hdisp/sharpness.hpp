#pragma once

#include <functional>
#include <vector>

#include "hdisp/common.hpp"
#include "hdisp/phase.hpp"

namespace hdisp {

// int_a^b e^{i t Psi(x)} psi(x) dx with psi vanishing at both ends.
struct OscillatoryIntegrand {
  std::function<cplx(double)> amplitude;
  std::function<double(double)> phase;
  std::function<double(double)> phase_d1;
  std::function<double(double)> phase_d2;
  double a = 0.0;
  double b = 1.0;
};

struct OscillatoryConfig {
  double rel_tol = 1e-11;    // against the L1 norm of the amplitude
  int min_panels = 16;
  double panels_per_period = 0.5;
  long max_panels = 1L << 24;
};

struct OscillatoryResult {
  cplx value;
  double error = 0.0;
  long panels = 0;
};

// Panels equidistributed in |t| times the variation of Psi, doubled until two
// levels agree. NonconvergenceError past max_panels.
OscillatoryResult oscillatory_integral(const OscillatoryIntegrand& I, double t,
                                       const OscillatoryConfig& cfg = {});

struct CriticalPoint {
  double location = 0.0;
  double second_derivative = 0.0;
  int order = 2;
};

// Safeguarded Newton on Psi' inside [lo, hi]. Throws std::invalid_argument
// without a sign change and std::domain_error when Psi'' vanishes there.
CriticalPoint find_critical_point(const std::function<double(double)>& d1,
                                  const std::function<double(double)>& d2, double lo, double hi);

// e^{i t Psi(x0)} psi(x0) sqrt(2 pi / (t |Psi''(x0)|)) e^{i sgn(t Psi'') pi/4}
cplx stationary_phase_leading(const OscillatoryIntegrand& I, const CriticalPoint& cp, double t);

// Mode-zero evolution of a datum with spectral profile Q on D0 = [0.7, 1.3]:
//   u(0, s, t) = int_{D0} e^{i t (phi(4 n lambda) - lambda s / t)} Q(lambda) lambda^n dlambda
// evaluated along s = t s0. Q is 1 on [0.9, 1.1].
struct SharpnessSetup {
  double d0_lo = 0.7;
  double d0_hi = 1.3;
  double plateau = 0.2;  // width of each smooth ramp of Q
};

double sharpness_bump(double lambda, const SharpnessSetup& setup = {});
// s making lambda critical: 4n phi'(4n lambda)
double critical_speed(const PhaseFunction& phi, int n, double lambda);
// Psi(lambda) = phi(4n lambda) - lambda s, amplitude Q(lambda) lambda^n
OscillatoryIntegrand sharpness_integrand(const PhaseFunction& phi, int n, double s,
                                         const SharpnessSetup& setup = {});
// Explicit critical point of Psi for the built-in families.
double closed_form_critical_point(const PhaseSpec& spec, int n, double s);

struct SharpnessRow {
  double t = 0.0;
  double magnitude = 0.0;       // |u(0, t s, t)|
  double scaled = 0.0;          // t^{1/2} |u|
  double leading_scaled = 0.0;  // t^{1/2} |leading term|
  double ratio = 0.0;           // |u| / |leading|
  double relative_error = 0.0;  // |u / leading - 1|
  double quad_err = 0.0;
};

struct SharpnessReport {
  double speed = 0.0;  // s0
  CriticalPoint critical;
  std::vector<SharpnessRow> rows;
};

SharpnessReport sharpness_run(const PhaseSpec& spec, int n, const std::vector<double>& t_list,
                              const OscillatoryConfig& cfg = {}, const SharpnessSetup& setup = {});

// max_t |I(t)| (t delta)^{1/2} / (||psi||_inf + ||psi'||_1). Throws
// std::domain_error when |Psi''| < delta somewhere on a sample of [a, b].
double vdc_bound_check(const OscillatoryIntegrand& I, double delta,
                       const std::vector<double>& t_list, const OscillatoryConfig& cfg = {});

}  // namespace hdisp
