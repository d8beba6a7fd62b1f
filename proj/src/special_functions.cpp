#include "hdisp/special_functions.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <stdexcept>
#include <string>
#include <tuple>

#include <boost/multiprecision/cpp_bin_float.hpp>

namespace hdisp {

namespace {

// Rescale threshold for the log-weighted recurrence. 2^512 keeps both the
// carried values and their products far from the double range limits.
constexpr double kRescaleHigh = 0x1p512;
constexpr double kRescaleLow = 0x1p-512;
constexpr double kLogRescale = 512.0 * 0.69314718055994530942;

// Below this the plain exp(log_weight) start is representable with ample
// headroom; the weighted values never exceed binomial(m+a, m).
constexpr double kDirectStartLimit = -600.0;

double unscale(double p, double log_scale) {
  if (p == 0.0) return 0.0;
  if (log_scale > -700.0 && log_scale < 700.0) return p * std::exp(log_scale);
  return std::copysign(std::exp(log_scale + std::log(std::abs(p))), p);
}

}  // namespace

double binomial(int n, int k) {
  if (k < 0 || n < 0 || k > n) return 0.0;
  k = std::min(k, n - k);
  double r = 1.0;
  for (int i = 1; i <= k; ++i) r = r * (n - k + i) / i;
  return std::round(r);
}

double laguerre_series(int m, int d, double t) {
  if (m < 0) throw std::invalid_argument("laguerre_series: negative degree");
  if (m > 25)
    throw std::domain_error("laguerre_series: degree " + std::to_string(m) +
                            " outside the oracle range (m <= 25)");
  // 50 digits: the alternating sum cancels badly in double once t ~ 10
  using Real = boost::multiprecision::cpp_bin_float_50;
  Real sum = 0, tk_over_kfact = 1, binom = 1;  // binom = binomial(m+d, m-k), from k = m down
  std::vector<Real> terms(m + 1);
  for (int k = 0; k <= m; ++k) {
    if (k > 0) tk_over_kfact *= Real(t) / k;
    terms[k] = tk_over_kfact;
  }
  for (int k = m; k >= 0; --k) {
    if (k < m) binom = binom * (d + k + 1) / (m - k);
    sum += (k % 2 == 0 ? 1 : -1) * binom * terms[k];
  }
  return static_cast<double>(sum);
}

double scaled_laguerre(int m, double a, double tau, double log_weight) {
  if (m < 0) return 0.0;
  double scale = 0.0;
  double p0 = 1.0;
  if (log_weight > kDirectStartLimit)
    p0 = std::exp(log_weight);
  else
    scale = log_weight;
  if (m == 0) return unscale(p0, scale);
  double p1 = (a + 1.0 - tau) * p0;
  for (int k = 1; k < m; ++k) {
    const double p2 = ((2.0 * k + a + 1.0 - tau) * p1 - (k + a) * p0) / (k + 1.0);
    p0 = p1;
    p1 = p2;
    if (std::abs(p1) > kRescaleHigh) {
      p0 *= kRescaleLow;
      p1 *= kRescaleLow;
      scale += kLogRescale;
    }
  }
  return unscale(p1, scale);
}

void scaled_laguerre_sequence(double a, double tau, double log_weight,
                              std::span<double> out) {
  if (out.empty()) return;
  double scale = 0.0;
  double p0 = 1.0;
  if (log_weight > kDirectStartLimit)
    p0 = std::exp(log_weight);
  else
    scale = log_weight;
  out[0] = unscale(p0, scale);
  if (out.size() == 1) return;
  double p1 = (a + 1.0 - tau) * p0;
  out[1] = unscale(p1, scale);
  for (std::size_t k = 1; k + 1 < out.size(); ++k) {
    const double kd = static_cast<double>(k);
    const double p2 = ((2.0 * kd + a + 1.0 - tau) * p1 - (kd + a) * p0) / (kd + 1.0);
    p0 = p1;
    p1 = p2;
    if (std::abs(p1) > kRescaleHigh) {
      p0 *= kRescaleLow;
      p1 *= kRescaleLow;
      scale += kLogRescale;
    }
    out[k + 1] = unscale(p1, scale);
  }
}

double weighted_laguerre(int m, int d, double tau) {
  if (d < 1) throw std::invalid_argument("weighted_laguerre: type d must be >= 1");
  if (m < 0) throw std::invalid_argument("weighted_laguerre: negative degree");
  return scaled_laguerre(m, d - 1.0, tau, -0.5 * tau);
}

std::vector<EulerTerm> euler_expansion(int alpha) {
  if (alpha < 0) throw std::invalid_argument("euler_expansion: negative power");
  // key (power, degree_drop, type_raise) -> coefficient
  using Key = std::tuple<int, int, int>;
  std::map<Key, double> terms{{Key{0, 0, 0}, 1.0}};
  for (int step = 0; step < alpha; ++step) {
    std::map<Key, double> next;
    for (const auto& [key, c] : terms) {
      const auto [p, drop, raise] = key;
      // tau d/dtau [tau^p L_k^{(b)} e^{-tau/2}]
      //   = p tau^p L_k^{(b)} e^{-tau/2} - tau^{p+1} L_{k-1}^{(b+1)} e^{-tau/2}
      //     - (1/2) tau^{p+1} L_k^{(b)} e^{-tau/2}
      if (p > 0) next[Key{p, drop, raise}] += c * p;
      next[Key{p + 1, drop + 1, raise + 1}] -= c;
      next[Key{p + 1, drop, raise}] -= 0.5 * c;
    }
    terms = std::move(next);
  }
  std::vector<EulerTerm> out;
  out.reserve(terms.size());
  for (const auto& [key, c] : terms) {
    if (c == 0.0) continue;
    const auto [p, drop, raise] = key;
    out.push_back({c, p, drop, raise});
  }
  return out;
}

double weighted_laguerre_euler(int alpha, int m, int d, double tau) {
  if (d < 1) throw std::invalid_argument("weighted_laguerre_euler: type d must be >= 1");
  if (alpha < 0 || alpha > d)
    throw std::domain_error("weighted_laguerre_euler: alpha " + std::to_string(alpha) +
                            " outside [0, " + std::to_string(d) + "]");
  if (m < 0) throw std::invalid_argument("weighted_laguerre_euler: negative degree");
  if (alpha == 0) return weighted_laguerre(m, d, tau);
  if (tau == 0.0) return 0.0;  // every term carries a positive power of tau
  const double log_tau = std::log(tau);
  double sum = 0.0;
  for (const auto& term : euler_expansion(alpha)) {
    const int k = m - term.degree_drop;
    if (k < 0) continue;
    const double a = d - 1.0 + term.type_raise;
    sum += term.coef * scaled_laguerre(k, a, tau, term.power * log_tau - 0.5 * tau);
  }
  return sum;
}

std::vector<double> weighted_laguerre_euler_envelope(int alpha, int d, int m_max,
                                                     const EulerEnvelopeGrid& grid) {
  if (alpha < 0 || alpha > d)
    throw std::domain_error("weighted_laguerre_euler_envelope: alpha outside [0, d]");
  if (m_max < 0) throw std::invalid_argument("weighted_laguerre_euler_envelope: m_max < 0");
  if (grid.points < 2 || !(grid.tau_min > 0.0))
    throw std::invalid_argument("weighted_laguerre_euler_envelope: bad tau grid");

  const auto cap = [&](int m) { return grid.cap_slope * m + grid.cap_offset_per_d * d; };
  const double tau_hi = cap(m_max);
  const auto terms = euler_expansion(alpha);
  std::vector<double> envelope(static_cast<std::size_t>(m_max) + 1, 0.0);
  std::vector<double> seq(static_cast<std::size_t>(m_max) + 1);
  std::vector<double> value(static_cast<std::size_t>(m_max) + 1);

  const double log_lo = std::log(grid.tau_min);
  const double log_hi = std::log(tau_hi);
  for (int i = 0; i < grid.points; ++i) {
    const double log_tau = log_lo + (log_hi - log_lo) * i / (grid.points - 1);
    const double tau = std::exp(log_tau);
    std::fill(value.begin(), value.end(), 0.0);
    for (const auto& term : terms) {
      const double a = d - 1.0 + term.type_raise;
      scaled_laguerre_sequence(a, tau, term.power * log_tau - 0.5 * tau, seq);
      for (int m = term.degree_drop; m <= m_max; ++m)
        value[m] += term.coef * seq[m - term.degree_drop];
    }
    // first degree whose cap reaches this tau
    const int m_first = std::max(0, static_cast<int>(std::ceil((tau - grid.cap_offset_per_d * d) /
                                                                grid.cap_slope)));
    for (int m = m_first; m <= m_max; ++m)
      if (tau <= cap(m)) envelope[m] = std::max(envelope[m], std::abs(value[m]));
  }
  return envelope;
}

}  // namespace hdisp
