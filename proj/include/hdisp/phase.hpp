#pragma once

#include <functional>
#include <optional>
#include <string>

namespace hdisp {

struct PhaseExponents {
  double m1, m2, alpha1, alpha2;
};

// Smooth phi : (0, inf) -> R with its first two derivatives.
struct PhaseFunction {
  std::function<double(double)> value;
  std::function<double(double)> d1;
  std::function<double(double)> d2;
  std::string label;
  std::optional<PhaseExponents> declared;
};

enum class PhaseFamily { frac_schrodinger, frac_wave, fourth_order };

struct PhaseSpec {
  PhaseFamily family = PhaseFamily::frac_schrodinger;
  double alpha = 0.5;  // ignored for fourth_order
};

std::string to_string(PhaseFamily f);
PhaseFamily phase_family_from_string(const std::string& s);

// r^alpha (0<alpha<1), r^{alpha/2} (0<alpha<2), r^2 + r.
PhaseFunction builtin_phase(const PhaseSpec& spec);

// Phase from values only; derivatives by central differences with relative
// step 1e-5 (about five significant digits).
PhaseFunction phase_from_values(std::function<double(double)> value, std::string label,
                                std::optional<PhaseExponents> declared = std::nullopt);

struct ExponentFit {
  double fitted = 0.0;      // slope + 1 for phi', slope + 2 for phi''
  double residual = 0.0;    // RMS of the log-log residuals
  bool degenerate = false;  // derivative vanished somewhere on the sample
  std::optional<double> declared;
  // |fitted - declared| within the slope tolerance
  bool matches_declared = false;
  // max/min of |derivative| / r^{declared - k} over the range: finite and
  // below the comparability bound means "~ r^{declared-k}" holds there
  double comparability_ratio = 0.0;
  bool pass = false;
};

struct HypothesisReport {
  ExponentFit m1, alpha1;  // from |phi'|, |phi''| on [1, 1e3]
  ExponentFit m2, alpha2;  // from |phi'|, |phi''| on [1e-3, 1]
  bool pass() const { return m1.pass && alpha1.pass && m2.pass && alpha2.pass; }
};

struct HypothesisCheckConfig {
  int samples = 64;
  double slope_tolerance = 0.05;
  double residual_tolerance = 0.05;
  double comparability_bound = 10.0;
};

HypothesisReport check_hypotheses(const PhaseFunction& phi, const HypothesisCheckConfig& cfg = {});

// Sum of |phi(b_{i+1}) - phi(b_i)| over a fine partition of [a, b].
double phase_variation(const PhaseFunction& phi, double a, double b, int samples = 1024);

}  // namespace hdisp
