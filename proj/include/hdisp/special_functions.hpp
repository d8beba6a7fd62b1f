#pragma once

#include <span>
#include <vector>

namespace hdisp {

// Exact for arguments whose result fits in 53 bits.
double binomial(int n, int k);

// Alternating-sum definition of L_m^{(d)}(t). Only meant as a small-degree
// oracle; rejects m > 25.
double laguerre_series(int m, int d, double t);

// L_m^{(a)}(tau) * exp(log_weight), evaluated by the three-term recurrence with
// the weight carried through the iteration so neither factor overflows.
double scaled_laguerre(int m, double a, double tau, double log_weight);

// The same recurrence, storing degrees 0..out.size()-1.
void scaled_laguerre_sequence(double a, double tau, double log_weight,
                              std::span<double> out);

// L_m^{(d-1)}(tau) e^{-tau/2}; total for m >= 0, d >= 1, tau >= 0.
double weighted_laguerre(int m, int d, double tau);

// (tau d/dtau)^alpha applied to weighted_laguerre(m, d, .), 0 <= alpha <= d.
double weighted_laguerre_euler(int alpha, int m, int d, double tau);

// The Euler-operator image expands into terms
//   coef * tau^power * L_{m-degree_drop}^{(d-1+type_raise)}(tau) e^{-tau/2},
// with coefficients that do not depend on m.
struct EulerTerm {
  double coef;
  int power;
  int degree_drop;
  int type_raise;
};
std::vector<EulerTerm> euler_expansion(int alpha);

// max over a tau-grid of |(tau d/dtau)^alpha weighted_laguerre(m, d, tau)|
// for every m in [0, m_max], restricted per m to tau <= tau_cap(m).
// The grid is log-spaced on [tau_min, tau_cap(m_max)] with `points` nodes.
struct EulerEnvelopeGrid {
  double tau_min = 1e-3;
  int points = 20000;
  double cap_slope = 8.0;  // tau_cap(m) = cap_slope*m + cap_offset_per_d*d
  double cap_offset_per_d = 4.0;
};
std::vector<double> weighted_laguerre_euler_envelope(int alpha, int d, int m_max,
                                                     const EulerEnvelopeGrid& grid = {});

}  // namespace hdisp
