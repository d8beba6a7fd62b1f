#include "hdisp/sharpness.hpp"

#include <algorithm>
#include <cmath>
#include <exception>
#include <stdexcept>
#include <string>

#include "hdisp/littlewood_paley.hpp"
#include "hdisp/quadrature.hpp"

namespace hdisp {

namespace {

constexpr int kVariationSamples = 4097;

cplx integrate_on(const OscillatoryIntegrand& I, double t, const std::vector<double>& edges,
                  double* l1 = nullptr) {
  const auto& rule = gauss_legendre(16);
  CompensatedComplexSum acc;
  CompensatedSum mass;
  for (std::size_t p = 0; p + 1 < edges.size(); ++p) {
    const double a = edges[p], b = edges[p + 1];
    const double mid = 0.5 * (a + b), half = 0.5 * (b - a);
    for (std::size_t q = 0; q < rule.size(); ++q) {
      const double x = mid + half * rule.nodes[q];
      const cplx amp = I.amplitude(x);
      if (amp == cplx{}) continue;
      const double w = half * rule.weights[q];
      acc += w * amp * std::polar(1.0, t * I.phase(x));
      mass += w * std::abs(amp);
    }
  }
  if (l1) *l1 = mass.value();
  return acc.value();
}

}  // namespace

OscillatoryResult oscillatory_integral(const OscillatoryIntegrand& I, double t,
                                       const OscillatoryConfig& cfg) {
  if (!(I.b > I.a)) throw std::invalid_argument("oscillatory_integral: empty interval");
  if (!(cfg.rel_tol > 0.0)) throw std::invalid_argument("oscillatory_integral: rel_tol must be > 0");
  std::vector<double> variation(kVariationSamples, 0.0);
  double prev = I.phase(I.a);
  for (int i = 1; i < kVariationSamples; ++i) {
    const double cur = I.phase(I.a + (I.b - I.a) * i / (kVariationSamples - 1));
    variation[i] = variation[i - 1] + std::abs(t) * std::abs(cur - prev);
    prev = cur;
  }
  const auto edges_at = [&](int level) {
    std::vector<double> cum(kVariationSamples);
    const double density = level * cfg.panels_per_period / (2.0 * kPi);
    for (int i = 0; i < kVariationSamples; ++i) cum[i] = density * variation[i];
    const double total = level * cfg.min_panels + cum.back();
    if (total > static_cast<double>(cfg.max_panels))
      throw NonconvergenceError("oscillatory_integral: panel budget exceeded at t = " +
                                std::to_string(t));
    return equidistributed_edges(I.a, I.b, level * cfg.min_panels, cum);
  };

  double l1 = 0.0;
  auto edges = edges_at(1);
  cplx coarse = integrate_on(I, t, edges, &l1);
  for (int level = 2;; level *= 2) {
    edges = edges_at(level);
    const cplx fine = integrate_on(I, t, edges);
    const double err = std::abs(fine - coarse);
    if (err <= cfg.rel_tol * l1)
      return {fine, err, static_cast<long>(edges.size()) - 1};
    coarse = fine;
  }
}

CriticalPoint find_critical_point(const std::function<double(double)>& d1,
                                  const std::function<double(double)>& d2, double lo, double hi) {
  if (!(hi > lo)) throw std::invalid_argument("find_critical_point: empty bracket");
  double flo = d1(lo), fhi = d1(hi);
  if (flo == 0.0) hi = lo;
  else if (fhi == 0.0) lo = hi;
  else if ((flo > 0) == (fhi > 0))
    throw std::invalid_argument("find_critical_point: no sign change of the derivative");
  const double scale = std::max(std::abs(flo), std::abs(fhi));
  const double width = hi - lo;
  double x = 0.5 * (lo + hi);
  for (int it = 0; it < 200 && hi > lo; ++it) {
    const double f = d1(x);
    if (std::abs(f) < 1e-14 * scale) break;
    if ((f > 0) == (flo > 0)) {
      lo = x;
      flo = f;
    } else {
      hi = x;
    }
    const double fp = d2(x);
    double next = fp != 0.0 ? x - f / fp : lo - 1.0;
    if (!(next > lo && next < hi)) next = 0.5 * (lo + hi);
    if (next == x) break;
    x = next;
  }
  CriticalPoint cp;
  cp.location = x;
  cp.second_derivative = d2(x);
  // curvature negligible against the slope scale of the bracket: a higher-order zero
  const double flat = 1e-8 * scale / (width > 0.0 ? width : 1.0);
  if (!(std::abs(cp.second_derivative) > flat) || !std::isfinite(cp.second_derivative))
    throw std::domain_error("find_critical_point: degenerate critical point");
  return cp;
}

cplx stationary_phase_leading(const OscillatoryIntegrand& I, const CriticalPoint& cp, double t) {
  if (cp.order != 2 || cp.second_derivative == 0.0)
    throw std::domain_error("stationary_phase_leading: degenerate critical point");
  if (t == 0.0) throw std::domain_error("stationary_phase_leading: t must be nonzero");
  const double x0 = cp.location;
  const double curv = t * cp.second_derivative;
  const double sign = curv > 0 ? 1.0 : -1.0;
  return std::polar(std::sqrt(2.0 * kPi / std::abs(curv)), t * I.phase(x0) + sign * kPi / 4.0) *
         I.amplitude(x0);
}

double sharpness_bump(double lambda, const SharpnessSetup& setup) {
  return smooth_step((lambda - setup.d0_lo) / setup.plateau) *
         smooth_step((setup.d0_hi - lambda) / setup.plateau);
}

double critical_speed(const PhaseFunction& phi, int n, double lambda) {
  return 4.0 * n * phi.d1(4.0 * n * lambda);
}

OscillatoryIntegrand sharpness_integrand(const PhaseFunction& phi, int n, double s,
                                         const SharpnessSetup& setup) {
  OscillatoryIntegrand I;
  I.a = setup.d0_lo;
  I.b = setup.d0_hi;
  I.amplitude = [setup, n](double l) { return cplx(sharpness_bump(l, setup) * std::pow(l, n), 0.0); };
  I.phase = [phi, n, s](double l) { return phi.value(4.0 * n * l) - l * s; };
  I.phase_d1 = [phi, n, s](double l) { return 4.0 * n * phi.d1(4.0 * n * l) - s; };
  I.phase_d2 = [phi, n](double l) { return 16.0 * n * n * phi.d2(4.0 * n * l); };
  return I;
}

double closed_form_critical_point(const PhaseSpec& spec, int n, double s) {
  const double a = spec.alpha;
  switch (spec.family) {
    case PhaseFamily::frac_schrodinger:
      return std::pow(s / (a * std::pow(4.0, a) * std::pow(n, a)), 1.0 / (a - 1.0));
    case PhaseFamily::frac_wave:
      return std::pow(2.0 * a * n / s, 2.0 / (2.0 - a)) / (4.0 * n);
    case PhaseFamily::fourth_order:
      return (s - 4.0 * n) / (32.0 * n * n);
  }
  throw std::invalid_argument("closed_form_critical_point: unknown family");
}

SharpnessReport sharpness_run(const PhaseSpec& spec, int n, const std::vector<double>& t_list,
                              const OscillatoryConfig& cfg, const SharpnessSetup& setup) {
  if (n < 1) throw std::invalid_argument("sharpness_run: n must be >= 1");
  const PhaseFunction phi = builtin_phase(spec);
  SharpnessReport rep;
  rep.speed = critical_speed(phi, n, 1.0);
  const auto I = sharpness_integrand(phi, n, rep.speed, setup);
  rep.critical = find_critical_point(I.phase_d1, I.phase_d2, setup.d0_lo, setup.d0_hi);
  rep.rows.resize(t_list.size());
  std::exception_ptr failure;
#pragma omp parallel for schedule(dynamic, 1)
  for (std::size_t i = 0; i < t_list.size(); ++i) {
    try {
      const double t = t_list[i];
      const auto res = oscillatory_integral(I, t, cfg);
      const cplx lead = stationary_phase_leading(I, rep.critical, t);
      auto& row = rep.rows[i];
      row.t = t;
      row.magnitude = std::abs(res.value);
      row.scaled = std::sqrt(std::abs(t)) * row.magnitude;
      row.leading_scaled = std::sqrt(std::abs(t)) * std::abs(lead);
      row.ratio = row.magnitude / std::abs(lead);
      row.relative_error = std::abs(res.value / lead - 1.0);
      row.quad_err = res.error;
    } catch (...) {
#pragma omp critical(hdisp_sharpness_failure)
      if (!failure) failure = std::current_exception();
    }
  }
  if (failure) std::rethrow_exception(failure);
  return rep;
}

double vdc_bound_check(const OscillatoryIntegrand& I, double delta,
                       const std::vector<double>& t_list, const OscillatoryConfig& cfg) {
  if (!(delta > 0.0)) throw std::domain_error("vdc_bound_check: delta must be > 0");
  constexpr int kSamples = 4097;
  double sup_amp = 0.0;
  for (int i = 0; i < kSamples; ++i) {
    const double x = I.a + (I.b - I.a) * i / (kSamples - 1);
    if (std::abs(I.phase_d2(x)) < delta)
      throw std::domain_error("vdc_bound_check: |phase''| falls below delta at x = " +
                              std::to_string(x));
    sup_amp = std::max(sup_amp, std::abs(I.amplitude(x)));
  }
  // ||psi'||_1 from a central-difference derivative
  const double h = 1e-6 * (I.b - I.a);
  const auto dpsi = [&](double x) {
    const double lo = std::max(I.a, x - h), hi = std::min(I.b, x + h);
    return cplx(std::abs((I.amplitude(hi) - I.amplitude(lo)) / (hi - lo)), 0.0);
  };
  const double var = integrate_doubling(dpsi, I.a, I.b, 64, 1e-12, 1e-9).value.real();
  double worst = 0.0;
  for (double t : t_list) {
    const auto res = oscillatory_integral(I, t, cfg);
    worst = std::max(worst, std::abs(res.value) * std::sqrt(std::abs(t) * delta) / (sup_amp + var));
  }
  return worst;
}

}  // namespace hdisp
