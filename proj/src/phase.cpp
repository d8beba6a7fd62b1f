#include "hdisp/phase.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>
#include <stdexcept>
#include <vector>

namespace hdisp {

std::string to_string(PhaseFamily f) {
  switch (f) {
    case PhaseFamily::frac_schrodinger: return "frac_schrodinger";
    case PhaseFamily::frac_wave: return "frac_wave";
    case PhaseFamily::fourth_order: return "fourth_order";
  }
  return "frac_schrodinger";
}

PhaseFamily phase_family_from_string(const std::string& s) {
  if (s == "frac_schrodinger") return PhaseFamily::frac_schrodinger;
  if (s == "frac_wave") return PhaseFamily::frac_wave;
  if (s == "fourth_order") return PhaseFamily::fourth_order;
  throw std::invalid_argument("unknown phase family '" + s + "'");
}

PhaseFunction builtin_phase(const PhaseSpec& spec) {
  PhaseFunction phi;
  const double a = spec.alpha;
  std::ostringstream label;
  switch (spec.family) {
    case PhaseFamily::frac_schrodinger: {
      if (!(a > 0.0 && a < 1.0))
        throw std::domain_error("frac_schrodinger: alpha must lie in (0, 1)");
      phi.value = [a](double r) { return std::pow(r, a); };
      phi.d1 = [a](double r) { return a * std::pow(r, a - 1.0); };
      phi.d2 = [a](double r) { return a * (a - 1.0) * std::pow(r, a - 2.0); };
      phi.declared = PhaseExponents{a, a, a, a};
      label << "frac_schrodinger(" << a << ")";
      break;
    }
    case PhaseFamily::frac_wave: {
      if (!(a > 0.0 && a < 2.0)) throw std::domain_error("frac_wave: alpha must lie in (0, 2)");
      const double h = 0.5 * a;
      phi.value = [h](double r) { return std::pow(r, h); };
      phi.d1 = [h](double r) { return h * std::pow(r, h - 1.0); };
      phi.d2 = [h](double r) { return h * (h - 1.0) * std::pow(r, h - 2.0); };
      phi.declared = PhaseExponents{h, h, h, h};
      label << "frac_wave(" << a << ")";
      break;
    }
    case PhaseFamily::fourth_order: {
      phi.value = [](double r) { return r * r + r; };
      phi.d1 = [](double r) { return 2.0 * r + 1.0; };
      phi.d2 = [](double) { return 2.0; };
      phi.declared = PhaseExponents{2.0, 1.0, 2.0, 2.0};
      label << "fourth_order";
      break;
    }
  }
  phi.label = label.str();
  return phi;
}

PhaseFunction phase_from_values(std::function<double(double)> value, std::string label,
                                std::optional<PhaseExponents> declared) {
  PhaseFunction phi;
  phi.value = value;
  phi.d1 = [value](double r) {
    const double h = 1e-5 * std::max(std::abs(r), 1e-300);
    return (value(r + h) - value(r - h)) / (2.0 * h);
  };
  phi.d2 = [value](double r) {
    const double h = 1e-5 * std::max(std::abs(r), 1e-300);
    return (value(r + h) - 2.0 * value(r) + value(r - h)) / (h * h);
  };
  phi.label = std::move(label);
  phi.declared = declared;
  return phi;
}

namespace {

ExponentFit fit_exponent(const std::function<double(double)>& deriv, int order, double lo,
                         double hi, std::optional<double> declared,
                         const HypothesisCheckConfig& cfg) {
  ExponentFit fit;
  fit.declared = declared;
  std::vector<double> x, y;
  const double llo = std::log(lo), lhi = std::log(hi);
  for (int i = 0; i < cfg.samples; ++i) {
    const double lr = llo + (lhi - llo) * i / (cfg.samples - 1);
    const double v = std::abs(deriv(std::exp(lr)));
    if (!(v > 0.0) || !std::isfinite(v)) {
      fit.degenerate = true;
      return fit;
    }
    x.push_back(lr);
    y.push_back(std::log(v));
  }
  const double n = static_cast<double>(x.size());
  double mx = 0.0, my = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) mx += x[i], my += y[i];
  mx /= n;
  my /= n;
  double sxx = 0.0, sxy = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sxx += (x[i] - mx) * (x[i] - mx);
    sxy += (x[i] - mx) * (y[i] - my);
  }
  const double slope = sxy / sxx;
  double ss = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double e = y[i] - (my + slope * (x[i] - mx));
    ss += e * e;
  }
  fit.fitted = slope + order;
  fit.residual = std::sqrt(ss / n);

  if (!declared) {
    fit.pass = fit.residual < cfg.residual_tolerance;
    return fit;
  }
  fit.matches_declared = std::abs(fit.fitted - *declared) <= cfg.slope_tolerance;
  double rmin = std::numeric_limits<double>::infinity(), rmax = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double ratio = std::exp(y[i] - (*declared - order) * x[i]);
    rmin = std::min(rmin, ratio);
    rmax = std::max(rmax, ratio);
  }
  fit.comparability_ratio = rmax / rmin;
  // A clean power law must reproduce the declared exponent; a non-homogeneous
  // derivative only has to stay within bounded ratio of the declared power.
  fit.pass = fit.residual < cfg.residual_tolerance
                 ? fit.matches_declared
                 : fit.comparability_ratio <= cfg.comparability_bound;
  return fit;
}

}  // namespace

HypothesisReport check_hypotheses(const PhaseFunction& phi, const HypothesisCheckConfig& cfg) {
  if (!phi.d1 || !phi.d2) throw std::invalid_argument("check_hypotheses: phase lacks derivatives");
  if (cfg.samples < 6) throw std::invalid_argument("check_hypotheses: need >= 6 samples");
  const auto decl = [&](double PhaseExponents::*field) -> std::optional<double> {
    if (phi.declared) return (*phi.declared).*field;
    return std::nullopt;
  };
  HypothesisReport rep;
  rep.m1 = fit_exponent(phi.d1, 1, 1.0, 1e3, decl(&PhaseExponents::m1), cfg);
  rep.alpha1 = fit_exponent(phi.d2, 2, 1.0, 1e3, decl(&PhaseExponents::alpha1), cfg);
  rep.m2 = fit_exponent(phi.d1, 1, 1e-3, 1.0, decl(&PhaseExponents::m2), cfg);
  rep.alpha2 = fit_exponent(phi.d2, 2, 1e-3, 1.0, decl(&PhaseExponents::alpha2), cfg);
  return rep;
}

double phase_variation(const PhaseFunction& phi, double a, double b, int samples) {
  double total = 0.0;
  double prev = phi.value(a);
  for (int i = 1; i <= samples; ++i) {
    const double cur = phi.value(a + (b - a) * i / samples);
    total += std::abs(cur - prev);
    prev = cur;
  }
  return total;
}

}  // namespace hdisp
