#pragma once

#include <functional>
#include <span>
#include <vector>

#include "hdisp/common.hpp"

namespace hdisp {

struct QuadratureRule {
  std::vector<double> nodes;
  std::vector<double> weights;
  std::size_t size() const { return nodes.size(); }
};

// Gauss-Legendre rule on [-1, 1]; the order-16 rule is cached.
const QuadratureRule& gauss_legendre(int order);

// Composite rule with the given panel edges (strictly increasing).
QuadratureRule composite_gauss_legendre(std::span<const double> edges, int order = 16);
QuadratureRule composite_gauss_legendre(double a, double b, int panels, int order = 16);

// Panel edges on [a, b] that split `resolution` into equal increments, where
// resolution(x) = panels_uniform*(x-a)/(b-a) + cumulative(x) and `cumulative`
// is sampled on a uniform grid over [a, b] (nondecreasing, starting at 0).
// Each panel then spans at most one unit of resolution.
std::vector<double> equidistributed_edges(double a, double b, int panels_uniform,
                                          std::span<const double> cumulative);

struct IntegralEstimate {
  cplx value;
  double error;  // |finest - previous level|
  int panels;
};

// Composite GL with panel doubling until two successive levels agree to
// max(abs_tol, rel_tol*|value|). Throws NonconvergenceError past max_panels.
IntegralEstimate integrate_doubling(const std::function<cplx(double)>& f, double a,
                                    double b, int initial_panels, double abs_tol,
                                    double rel_tol, int max_panels = 1 << 20);

// sum_{m >= m_first} (2m + n)^{-k} for k >= 2.
double inverse_power_tail(int k, long m_first, int n);

}  // namespace hdisp
