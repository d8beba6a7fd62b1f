#include "hdisp/quadrature.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <mutex>
#include <stdexcept>
#include <string>

namespace hdisp {

namespace {

QuadratureRule compute_gauss_legendre(int order) {
  QuadratureRule rule;
  rule.nodes.resize(order);
  rule.weights.resize(order);
  const int half = (order + 1) / 2;
  for (int i = 0; i < half; ++i) {
    double x = std::cos(kPi * (i + 0.75) / (order + 0.5));
    double dp = 0.0;
    for (int it = 0; it < 100; ++it) {
      double p0 = 1.0, p1 = x;
      for (int k = 2; k <= order; ++k) {
        const double p2 = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
        p0 = p1;
        p1 = p2;
      }
      dp = order * (x * p1 - p0) / (x * x - 1.0);
      const double dx = p1 / dp;
      x -= dx;
      if (std::abs(dx) < 1e-16) break;
    }
    // recompute derivative at the converged node for the weight
    double p0 = 1.0, p1 = x;
    for (int k = 2; k <= order; ++k) {
      const double p2 = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
      p0 = p1;
      p1 = p2;
    }
    dp = order * (x * p1 - p0) / (x * x - 1.0);
    const double w = 2.0 / ((1.0 - x * x) * dp * dp);
    rule.nodes[i] = -x;
    rule.nodes[order - 1 - i] = x;
    rule.weights[i] = w;
    rule.weights[order - 1 - i] = w;
  }
  if (order % 2 == 1) rule.nodes[order / 2] = 0.0;
  return rule;
}

}  // namespace

const QuadratureRule& gauss_legendre(int order) {
  if (order < 1 || order > 256)
    throw std::invalid_argument("gauss_legendre: order must be in [1, 256]");
  static const QuadratureRule gl16 = compute_gauss_legendre(16);
  if (order == 16) return gl16;
  static std::mutex mu;
  static std::map<int, QuadratureRule> cache;
  std::lock_guard lock(mu);
  auto it = cache.find(order);
  if (it == cache.end()) it = cache.emplace(order, compute_gauss_legendre(order)).first;
  return it->second;
}

QuadratureRule composite_gauss_legendre(std::span<const double> edges, int order) {
  if (edges.size() < 2) throw std::invalid_argument("composite_gauss_legendre: need >= 2 edges");
  const auto& base = gauss_legendre(order);
  QuadratureRule out;
  const std::size_t panels = edges.size() - 1;
  out.nodes.reserve(panels * base.size());
  out.weights.reserve(panels * base.size());
  for (std::size_t p = 0; p < panels; ++p) {
    const double a = edges[p], b = edges[p + 1];
    if (!(b > a)) throw std::invalid_argument("composite_gauss_legendre: edges not increasing");
    const double mid = 0.5 * (a + b), half = 0.5 * (b - a);
    for (std::size_t q = 0; q < base.size(); ++q) {
      out.nodes.push_back(mid + half * base.nodes[q]);
      out.weights.push_back(half * base.weights[q]);
    }
  }
  return out;
}

QuadratureRule composite_gauss_legendre(double a, double b, int panels, int order) {
  if (panels < 1) throw std::invalid_argument("composite_gauss_legendre: panels < 1");
  std::vector<double> edges(panels + 1);
  for (int p = 0; p <= panels; ++p) edges[p] = a + (b - a) * p / panels;
  edges.back() = b;
  return composite_gauss_legendre(edges, order);
}

std::vector<double> equidistributed_edges(double a, double b, int panels_uniform,
                                          std::span<const double> cumulative) {
  const std::size_t samples = cumulative.size();
  if (samples < 2) throw std::invalid_argument("equidistributed_edges: need >= 2 samples");
  if (panels_uniform < 1) throw std::invalid_argument("equidistributed_edges: panels_uniform < 1");
  std::vector<double> res(samples);
  for (std::size_t i = 0; i < samples; ++i)
    res[i] = panels_uniform * static_cast<double>(i) / (samples - 1) + cumulative[i];
  const double total = res.back();
  const long panels = static_cast<long>(std::ceil(total - 1e-9));
  std::vector<double> edges;
  edges.reserve(panels + 1);
  edges.push_back(a);
  const double step_x = (b - a) / (samples - 1);
  std::size_t i = 0;
  for (long p = 1; p < panels; ++p) {
    const double target = total * p / panels;
    while (i + 1 < samples && res[i + 1] < target) ++i;
    const double lo = res[i], hi = res[i + 1];
    const double frac = hi > lo ? (target - lo) / (hi - lo) : 0.0;
    const double x = a + step_x * (i + frac);
    if (x > edges.back()) edges.push_back(x);
  }
  edges.push_back(b);
  return edges;
}

IntegralEstimate integrate_doubling(const std::function<cplx(double)>& f, double a,
                                    double b, int initial_panels, double abs_tol,
                                    double rel_tol, int max_panels) {
  if (!(b > a)) return {cplx{}, 0.0, 0};
  int panels = std::max(1, initial_panels);
  const auto eval = [&](int p) {
    const auto rule = composite_gauss_legendre(a, b, p);
    CompensatedComplexSum acc;
    for (std::size_t k = 0; k < rule.size(); ++k) acc += rule.weights[k] * f(rule.nodes[k]);
    return acc.value();
  };
  cplx prev = eval(panels);
  while (true) {
    if (2L * panels > max_panels)
      throw NonconvergenceError("integrate_doubling: panel budget of " +
                                std::to_string(max_panels) + " exceeded");
    panels *= 2;
    const cplx cur = eval(panels);
    const double err = std::abs(cur - prev);
    if (err <= std::max(abs_tol, rel_tol * std::abs(cur))) return {cur, err, panels};
    prev = cur;
  }
}

double inverse_power_tail(int k, long m_first, int n) {
  if (k < 2) throw std::invalid_argument("inverse_power_tail: k must be >= 2");
  if (m_first < 0) m_first = 0;
  const auto f = [&](double m) { return std::pow(2.0 * m + n, -k); };
  // direct part, then Euler-Maclaurin from A onwards
  constexpr long kDirect = 64;
  double direct = 0.0;
  for (long m = m_first + kDirect - 1; m >= m_first; --m) direct += f(static_cast<double>(m));
  const double A = static_cast<double>(m_first + kDirect);
  const double u = 2.0 * A + n;
  const double integral = std::pow(u, 1.0 - k) / (2.0 * (k - 1));
  // derivatives of (2m+n)^{-k}: f^{(q)} = (-2)^q k(k+1)...(k+q-1) u^{-k-q}
  const auto deriv = [&](int q) {
    double c = 1.0;
    for (int i = 0; i < q; ++i) c *= -2.0 * (k + i);
    return c * std::pow(u, -k - q);
  };
  const double em = integral + 0.5 * f(A) - (1.0 / 12.0) * deriv(1) +
                    (1.0 / 720.0) * deriv(3) - (1.0 / 30240.0) * deriv(5);
  return direct + em;
}

}  // namespace hdisp
