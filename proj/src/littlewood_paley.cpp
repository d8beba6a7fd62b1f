#include "hdisp/littlewood_paley.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

#include "hdisp/quadrature.hpp"
#include "hdisp/special_functions.hpp"

namespace hdisp {

double smooth_step(double x, double steepness) {
  if (x <= 0.0) return 0.0;
  if (x >= 1.0) return 1.0;
  const double a = std::exp(-steepness / x);
  const double b = std::exp(-steepness / (1.0 - x));
  return a / (a + b);
}

DyadicWindow::DyadicWindow(double steepness) : steepness_(steepness) {
  if (!(steepness > 0.0)) throw std::invalid_argument("DyadicWindow: steepness must be > 0");
}

double DyadicWindow::bump(double tau) const {
  const double t = std::abs(tau);
  if (t <= kLower || t >= kUpper) return 0.0;
  return smooth_step((t - 0.5) / 0.5, steepness_) * smooth_step((4.0 - t) / 2.0, steepness_);
}

double DyadicWindow::operator()(double tau) const {
  const double t = std::abs(tau);
  const double w = bump(t);
  if (w == 0.0) return 0.0;
  // only the neighbouring dilates can overlap the support
  return w / (bump(0.25 * t) + w + bump(4.0 * t));
}

double DyadicWindow::partition_sum(double tau, int j_lo, int j_hi) const {
  double sum = 0.0;
  for (int j = j_lo; j <= j_hi; ++j) sum += (*this)(std::ldexp(tau, -2 * j));
  return sum;
}

double DyadicWindow::tripled(double tau) const {
  return (*this)(4.0 * tau) + (*this)(tau) + (*this)(0.25 * tau);
}

DyadicWindow build_window(double steepness) { return DyadicWindow(steepness); }

BandComponent window_component(int j, const DyadicWindow& w) {
  BandComponent c;
  c.j = j;
  c.profile = [w](double x) { return w(x); };
  c.x_lo = DyadicWindow::kLower;
  c.x_hi = DyadicWindow::kUpper;
  return c;
}

namespace {

double window_moment(const DyadicWindow& w, int power) {
  const auto est = integrate_doubling(
      [&](double x) { return cplx(w(x) * std::pow(x, power), 0.0); }, DyadicWindow::kLower,
      DyadicWindow::kUpper, 32, 1e-15, 1e-14);
  return est.value.real();
}

// sum_m binom(m+n-1, m) (2m+n)^{-power}; the multiplicity is a polynomial in
// mu = 2m+n, which reduces the sum to pure inverse-power tails.
double mode_weight_sum(int n, int power) {
  std::vector<double> poly{1.0};  // coefficients in mu, ascending
  for (int i = 1; i < n; ++i) {
    // multiply by ((mu - n)/2 + i) / i
    const double c0 = (i - 0.5 * n) / i, c1 = 0.5 / i;
    std::vector<double> next(poly.size() + 1, 0.0);
    for (std::size_t k = 0; k < poly.size(); ++k) {
      next[k] += c0 * poly[k];
      next[k + 1] += c1 * poly[k];
    }
    poly = std::move(next);
  }
  double sum = 0.0;
  for (std::size_t k = 0; k < poly.size(); ++k)
    if (poly[k] != 0.0) sum += poly[k] * inverse_power_tail(power - static_cast<int>(k), 0, n);
  return sum;
}

}  // namespace

double lp_mode_sup(int j, int m, const GroupParams& g, const DyadicWindow& w) {
  const int n = g.n();
  const double mu = 2.0 * m + n;
  const double scale = std::ldexp(1.0, 2 * j) / mu;
  return g.inversion_constant() * g.mode_multiplicity(m) * std::pow(scale, n + 1) * 2.0 *
         window_moment(w, n);
}

LPKernel kernel_phi_j(int j, const GroupParams& g, const DyadicWindow& w,
                      const KernelOptions& opt) {
  if (!(opt.tol > 0.0)) throw std::invalid_argument("kernel_phi_j: tol must be > 0");
  if (opt.max_stored_modes < 1) throw std::invalid_argument("kernel_phi_j: max_stored_modes < 1");
  const int n = g.n();
  LPKernel k;
  k.j = j;
  k.n = n;
  k.window = w;

  double kn = 0.0;
  for (int m = 0; m <= opt.calibration_modes; ++m)
    kn = std::max(kn, lp_mode_sup(j, m, g, w) * std::pow(2.0 * m + n, 2));
  kn *= opt.safety;
  k.tail_constant = kn;

  const double sup_est = g.inversion_constant() * std::pow(std::ldexp(1.0, 2 * j), n + 1) *
                         2.0 * window_moment(w, n) * mode_weight_sum(n, n + 1);
  const double target = opt.tol * sup_est;
  long hi = 1;
  while (kn * inverse_power_tail(2, hi + 1, n) >= target && hi < (1L << 40)) hi *= 2;
  long lo = hi / 2;
  while (hi - lo > 1) {
    const long mid = lo + (hi - lo) / 2;
    (kn * inverse_power_tail(2, mid + 1, n) < target ? hi : lo) = mid;
  }
  k.truncation_modes = static_cast<int>(std::min<long>(hi, std::numeric_limits<int>::max()));

  const int stored = std::min(k.truncation_modes + 1, opt.max_stored_modes);
  k.family = std::make_shared<const BandFamily>(n, std::vector{window_component(j, w)}, stored,
                                                0.0);
  auto coeffs = std::make_shared<SphericalCoefficients>(k.family->materialize());
  coeffs->tail_bound = kn * inverse_power_tail(2, stored, n);
  k.coefficients = std::move(coeffs);
  return k;
}

SphericalCoefficients project(const SphericalCoefficients& c, int j, const DyadicWindow& w) {
  SphericalCoefficients out = c;
  for (int m = 0; m <= c.m_max(); ++m) {
    const double mu = 2.0 * m + c.n;
    const auto& nodes = c.grid(m).nodes;
    for (std::size_t k = 0; k < nodes.size(); ++k)
      out.values[m][k] *= w(std::ldexp(mu * std::abs(nodes[k]), -2 * j));
  }
  return out;
}

SphericalCoefficients project_tilde(const SphericalCoefficients& c, int j,
                                    const DyadicWindow& w) {
  SphericalCoefficients out = c;
  for (int m = 0; m <= c.m_max(); ++m) {
    const double mu = 2.0 * m + c.n;
    const auto& nodes = c.grid(m).nodes;
    for (std::size_t k = 0; k < nodes.size(); ++k)
      out.values[m][k] *= w.tripled(std::ldexp(mu * std::abs(nodes[k]), -2 * j));
  }
  return out;
}

std::optional<BandComponent> project(const BandComponent& c, int j, const DyadicWindow& w) {
  // in the frame of c the window of scale j reads R*(4^{c.j - j} x)
  const int shift = 2 * (c.j - j);
  const double lo = std::max(c.x_lo, std::ldexp(DyadicWindow::kLower, -shift));
  const double hi = std::min(c.x_hi, std::ldexp(DyadicWindow::kUpper, -shift));
  if (!(hi > lo)) return std::nullopt;
  BandComponent out = c;
  out.x_lo = lo;
  out.x_hi = hi;
  out.profile = [prof = c.profile, w, shift](double x) {
    return prof(x) * w(std::ldexp(x, shift));
  };
  return out;
}

std::vector<BandComponent> project(const std::vector<BandComponent>& f, int j,
                                   const DyadicWindow& w) {
  std::vector<BandComponent> out;
  for (const auto& c : f)
    if (auto p = project(c, j, w)) out.push_back(std::move(*p));
  return out;
}

double band_l2_norm2(const std::vector<BandComponent>& f, const GroupParams& g, double sigma) {
  if (f.empty()) return 0.0;
  const int n = g.n();
  int j0 = f.front().j;
  for (const auto& c : f) j0 = std::min(j0, c.j);
  double a = std::numeric_limits<double>::infinity(), b = 0.0;
  for (const auto& c : f) {
    a = std::min(a, std::ldexp(c.x_lo, 2 * (c.j - j0)));
    b = std::max(b, std::ldexp(c.x_hi, 2 * (c.j - j0)));
  }
  const auto integrand = [&](double x) {
    double v = 0.0;
    for (const auto& c : f) {
      const double xc = std::ldexp(x, -2 * (c.j - j0));
      if (xc > c.x_lo && xc < c.x_hi) v += c.scale * c.profile(xc);
    }
    const double spectral = 4.0 * std::ldexp(x, 2 * j0);
    return cplx(v * v * std::pow(x, n) * std::pow(spectral, sigma), 0.0);
  };
  const int panels = 32 * std::max(1, static_cast<int>(std::ceil(std::log2(b / a))));
  const auto est = integrate_doubling(integrand, a, b, panels, 0.0, 1e-13);
  return 2.0 * g.inversion_constant() * std::pow(std::ldexp(1.0, 2 * j0), n + 1) *
         mode_weight_sum(n, n + 1) * est.value.real();
}

namespace {

// composite Simpson weights on a uniform grid of `count` (odd) nodes
std::vector<double> simpson_weights(std::size_t count, double h) {
  std::vector<double> w(count);
  for (std::size_t i = 0; i < count; ++i)
    w[i] = (i == 0 || i + 1 == count) ? h / 3.0 : (i % 2 ? 4.0 * h / 3.0 : 2.0 * h / 3.0);
  return w;
}

double lp_integral(const KernelField& f, double p, const GroupParams& g, bool even_in_s,
                   std::size_t stride) {
  const std::size_t R = (f.r.size() - 1) / stride + 1;
  const std::size_t S = (f.s.size() - 1) / stride + 1;
  const double hr = (f.r.back() - f.r.front()) / (R - 1);
  const double hs = (f.s.back() - f.s.front()) / (S - 1);
  const auto wr = simpson_weights(R, hr);
  const auto ws = simpson_weights(S, hs);
  const int n = g.n();
  if (std::isinf(p)) {
    double mx = 0.0;
    for (std::size_t i = 0; i < R; ++i)
      for (std::size_t l = 0; l < S; ++l)
        mx = std::max(mx, std::abs(f.values(i * stride, l * stride)));
    return mx;
  }
  CompensatedSum acc;
  for (std::size_t i = 0; i < R; ++i) {
    const double radial = g.sphere_measure() * std::pow(f.r[i * stride], 2 * n - 1) * wr[i];
    for (std::size_t l = 0; l < S; ++l)
      acc += radial * ws[l] * std::pow(std::abs(f.values(i * stride, l * stride)), p);
  }
  const double total = (even_in_s ? 2.0 : 1.0) * acc.value();
  return std::pow(total, 1.0 / p);
}

std::vector<double> uniform_nodes(double a, double b, std::size_t count) {
  std::vector<double> x(count);
  for (std::size_t i = 0; i < count; ++i) x[i] = a + (b - a) * i / (count - 1);
  return x;
}

}  // namespace

LpEstimate field_lp_norm(const KernelField& f, double p, const GroupParams& g, bool even_in_s) {
  if (!(p >= 1.0)) throw std::domain_error("field_lp_norm: p must be >= 1");
  for (const auto* v : {&f.r, &f.s})
    if (v->size() < 5 || (v->size() - 1) % 4 != 0)
      throw std::invalid_argument("field_lp_norm: grid sizes must be 4k+1, k >= 1");
  const double fine = lp_integral(f, p, g, even_in_s, 1);
  const double coarse = lp_integral(f, p, g, even_in_s, 2);
  return {fine, std::abs(fine - coarse) + f.quad_err + f.tail_bound};
}

BesovReport besov_norm(const std::vector<BandComponent>& f, const BesovSpec& spec,
                       const GroupParams& g, const BesovGrid& grid, const DyadicWindow& w) {
  if (!(spec.p >= 1.0) || !(spec.r >= 1.0))
    throw std::domain_error("besov_norm: p and r must lie in [1, inf]");
  if (spec.j_hi < spec.j_lo) throw std::invalid_argument("besov_norm: empty j-range");
  const double N = g.homogeneous_dimension();
  if (!(spec.rho < N / spec.p))
    throw std::domain_error("besov_norm: rho must be below N/p");
  // the dilates j_lo..j_hi sum to one exactly on [4^{j_lo}, 2*4^{j_hi}]
  const double cover_lo = std::ldexp(1.0, 2 * spec.j_lo);
  const double cover_hi = std::ldexp(2.0, 2 * spec.j_hi);
  for (const auto& c : f) {
    const double lo = std::ldexp(c.x_lo, 2 * c.j), hi = std::ldexp(c.x_hi, 2 * c.j);
    if (lo < cover_lo * (1.0 - 1e-14) || hi > cover_hi * (1.0 + 1e-14))
      throw std::invalid_argument("besov_norm: spectral support not resolved by the j-range");
  }
  if (grid.step <= 0.0 || grid.r_extent <= 0.0 || grid.s_extent <= 0.0)
    throw std::invalid_argument("besov_norm: invalid grid");

  BesovReport rep;
  std::vector<double> terms, terms_hi;
  for (int j = spec.j_lo; j <= spec.j_hi; ++j) {
    auto parts = project(f, j, w);
    BesovBlock blk{j, 0.0, 0.0};
    if (!parts.empty()) {
      const double rs = std::ldexp(1.0, -j), ss = std::ldexp(1.0, -2 * j);
      std::size_t nr = static_cast<std::size_t>(std::ceil(grid.r_extent / grid.step / 4.0)) * 4 + 1;
      std::size_t ns = static_cast<std::size_t>(std::ceil(grid.s_extent / grid.step / 4.0)) * 4 + 1;
      auto r = uniform_nodes(0.0, grid.r_extent * rs, nr);
      auto s = uniform_nodes(0.0, grid.s_extent * ss, ns);
      const BandFamily fam(g.n(), parts, 1 << 14, grid.s_extent * ss);
      const auto field = evaluate_band_field(fam, std::move(r), std::move(s), g, grid.field);
      const auto est = field_lp_norm(field, spec.p, g, true);
      blk.norm = est.value;
      blk.error = est.error;
    }
    rep.blocks.push_back(blk);
    terms.push_back(blk.norm * std::pow(2.0, j * spec.rho));
    terms_hi.push_back((blk.norm + blk.error) * std::pow(2.0, j * spec.rho));
  }
  const auto combine = [&](const std::vector<double>& t) {
    if (std::isinf(spec.r)) return *std::max_element(t.begin(), t.end());
    double s = 0.0;
    for (double v : t) s += std::pow(v, spec.r);
    return std::pow(s, 1.0 / spec.r);
  };
  rep.value = combine(terms);
  rep.error = combine(terms_hi) - rep.value;
  return rep;
}

}  // namespace hdisp
