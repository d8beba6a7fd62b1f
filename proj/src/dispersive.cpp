#include "hdisp/dispersive.hpp"

#include <algorithm>
#include <cmath>
#include <iostream>
#include <limits>
#include <set>
#include <stdexcept>

#include <boost/math/distributions/students_t.hpp>

namespace hdisp {

namespace {

std::vector<double> linspace(double a, double b, int count) {
  std::vector<double> x(count);
  for (int i = 0; i < count; ++i) x[i] = count == 1 ? a : a + (b - a) * i / (count - 1);
  return x;
}

double max_abs_derivative(const PhaseFunction& phi, const std::vector<BandComponent>& u0) {
  double mx = 0.0;
  for (const auto& c : u0) {
    const double band4 = 4.0 * std::ldexp(1.0, 2 * c.j);
    for (int i = 0; i <= 1024; ++i) {
      const double x = c.x_lo + (c.x_hi - c.x_lo) * i / 1024.0;
      mx = std::max(mx, std::abs(phi.d1(band4 * x)));
    }
  }
  return mx;
}

struct Candidate {
  double value;
  double r, s;
};

// Local maxima of |F| over the 8-neighbourhood, best first.
std::vector<Candidate> local_maxima(const Eigen::MatrixXd& a, const std::vector<double>& r,
                                    const std::vector<double>& s, int count) {
  std::vector<Candidate> out;
  const Eigen::Index R = a.rows(), S = a.cols();
  for (Eigen::Index i = 0; i < R; ++i)
    for (Eigen::Index l = 0; l < S; ++l) {
      bool peak = true;
      for (Eigen::Index di = -1; di <= 1 && peak; ++di)
        for (Eigen::Index dl = -1; dl <= 1 && peak; ++dl) {
          const Eigen::Index ii = i + di, ll = l + dl;
          if ((di || dl) && ii >= 0 && ii < R && ll >= 0 && ll < S && a(ii, ll) > a(i, l))
            peak = false;
        }
      if (peak) out.push_back({a(i, l), r[i], s[l]});
    }
  std::stable_sort(out.begin(), out.end(),
                   [](const Candidate& x, const Candidate& y) { return x.value > y.value; });
  if (static_cast<int>(out.size()) > count) out.resize(count);
  return out;
}

}  // namespace

KernelField evolve_kernel(const PhaseFunction& phi, double t, int j, std::vector<double> r,
                          std::vector<double> s, const GroupParams& g, const FieldOptions& opt,
                          const OscillationLaw& law, const DyadicWindow& w) {
  double s_ext = 0.0;
  for (double v : s) s_ext = std::max(s_ext, std::abs(v));
  const BandFamily fam(g.n(), {window_component(j, w)}, 1 << 14, s_ext, law,
                       Evolution{phi, t});
  auto field = evaluate_band_field(fam, std::move(r), std::move(s), g, opt);
  field.j = j;
  return field;
}

SupResult sup_norm(const std::vector<BandComponent>& u0, const PhaseFunction& phi, double t,
                   const GroupParams& g, const SearchConfig& cfg) {
  if (u0.empty()) throw std::invalid_argument("sup_norm: empty datum");
  if (cfg.coarse_r < 3 || cfg.coarse_s < 3 || cfg.refine_points < 3 || cfg.refine_points % 2 == 0)
    throw std::invalid_argument("sup_norm: grid sizes must be >= 3 and refine_points odd");
  const int n = g.n();
  int j_min = u0.front().j;
  for (const auto& c : u0) j_min = std::min(j_min, c.j);

  SupResult res;
  res.r_max = cfg.margin * std::sqrt(2.0 * n * std::log(1.0 / cfg.gaussian_eps) /
                                     std::ldexp(1.0, 2 * j_min));
  const double S = t != 0.0 ? cfg.margin * 4.0 * n * max_abs_derivative(phi, u0) : 0.0;
  res.s_max = std::abs(t) * S + cfg.s_floor * std::ldexp(1.0, -2 * j_min);

  FieldOptions fopt;
  fopt.tail = t == 0.0 ? TailPolicy::extrapolate : TailPolicy::envelope;
  fopt.tail_tol = cfg.tail_tol;
  fopt.initial_modes = cfg.initial_modes;
  fopt.certify = false;
  fopt.eval = cfg.eval;
  const std::optional<Evolution> evo =
      t != 0.0 ? std::optional<Evolution>(Evolution{phi, t}) : std::nullopt;

  std::vector<Candidate> cands;
  double hr = 0.0, hs = 0.0;
  while (true) {
    const auto r = linspace(0.0, res.r_max, cfg.coarse_r);
    const auto s = linspace(0.0, res.s_max, cfg.coarse_s);
    hr = r[1] - r[0];
    hs = s[1] - s[0];
    const BandFamily fam(n, u0, cfg.max_modes, res.s_max, cfg.law, evo);
    const auto field = evaluate_band_field(fam, r, s, g, fopt);
    const Eigen::MatrixXd mag = field.values.cwiseAbs();
    Eigen::Index bi = 0, bl = 0;
    mag.maxCoeff(&bi, &bl);
    const bool at_r = bi == mag.rows() - 1, at_s = bl == mag.cols() - 1;
    if ((at_r || at_s) && res.enlargements < cfg.max_enlargements) {
      std::cerr << "sup_norm: argmax on the search boundary (" << (at_r ? "r" : "s")
                << "), enlarging the domain\n";
      if (at_r) res.r_max *= 2.0;
      if (at_s) res.s_max *= 2.0;
      ++res.enlargements;
      continue;
    }
    res.boundary_hit = at_r || at_s;
    if (res.boundary_hit)
      std::cerr << "sup_norm: argmax remains on the search boundary after "
                << res.enlargements << " enlargements\n";
    cands = local_maxima(mag, r, s, cfg.candidates);
    break;
  }

  const BandFamily fam(n, u0, cfg.max_modes, res.s_max, cfg.law, evo);
  const int half = cfg.refine_points / 2;
  for (int pass = 1; pass <= cfg.refine_passes; ++pass) {
    hr *= 0.5;
    hs *= 0.5;
    std::set<double> rset, sset;
    for (const auto& c : cands)
      for (int k = -half; k <= half; ++k) {
        rset.insert(std::clamp(c.r + k * hr, 0.0, res.r_max));
        sset.insert(std::clamp(c.s + k * hs, 0.0, res.s_max));
      }
    const std::vector<double> r(rset.begin(), rset.end()), s(sset.begin(), sset.end());
    const auto field = evaluate_band_field(fam, r, s, g, fopt);
    for (auto& c : cands) {
      for (std::size_t i = 0; i < r.size(); ++i) {
        if (std::abs(r[i] - c.r) > half * hr * (1 + 1e-12)) continue;
        for (std::size_t l = 0; l < s.size(); ++l) {
          if (std::abs(s[l] - c.s) > half * hs * (1 + 1e-12)) continue;
          const double v = std::abs(field.values(i, l));
          if (v > c.value) c = {v, r[i], s[l]};
        }
      }
    }
  }
  const auto best = *std::max_element(
      cands.begin(), cands.end(),
      [](const Candidate& a, const Candidate& b) { return a.value < b.value; });

  FieldOptions copt = fopt;
  copt.certify = true;
  const auto point = evaluate_band_field(fam, {best.r}, {best.s}, g, copt);
  res.value = std::abs(point.values(0, 0));
  res.r = best.r;
  res.s = best.s;
  res.quad_err = point.quad_err;
  res.tail_bound = point.tail_bound;
  res.modes = point.modes;
  return res;
}

SupResult sup_norm_phi_j(const PhaseFunction& phi, double t, int j, const GroupParams& g,
                         const SearchConfig& cfg, const DyadicWindow& w) {
  return sup_norm({window_component(j, w)}, phi, t, g, cfg);
}

DecayFitReport fit_line(std::vector<double> x, std::vector<double> y, std::string abscissa,
                         std::size_t min_points) {
  if (x.size() != y.size()) throw std::invalid_argument("fit_line: size mismatch");
  if (x.size() < std::max<std::size_t>(min_points, 3))
    throw std::invalid_argument("fit_line: need at least " + std::to_string(min_points) + " points");
  DecayFitReport rep;
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
  if (!(sxx > 0.0)) throw std::invalid_argument("fit_line: abscissae coincide");
  rep.slope = sxy / sxx;
  rep.intercept = my - rep.slope * mx;
  double ss = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double e = y[i] - (rep.intercept + rep.slope * x[i]);
    rep.residuals.push_back(e);
    ss += e * e;
  }
  rep.rms = std::sqrt(ss / n);
  const double se = std::sqrt(ss / (n - 2.0) / sxx);
  const boost::math::students_t dist(n - 2.0);
  rep.half_width = boost::math::quantile(boost::math::complement(dist, 0.025)) * se;
  rep.x = std::move(x);
  rep.y = std::move(y);
  rep.abscissa = std::move(abscissa);
  return rep;
}

DecayFitReport decay_fit(const PhaseFunction& phi, int j, const std::vector<double>& t_list,
                         const GroupParams& g, const SearchConfig& cfg) {
  std::vector<DecayRow> rows;
  std::vector<double> x, y;
  for (double t : t_list) {
    if (!(t > 0.0)) throw std::invalid_argument("decay_fit: times must be positive");
    DecayRow row{t, j, sup_norm_phi_j(phi, t, j, g, cfg)};
    x.push_back(std::log(t));
    y.push_back(std::log(row.sup.value));
    rows.push_back(row);
  }
  auto rep = fit_line(std::move(x), std::move(y), "log t");
  rep.rows = std::move(rows);
  return rep;
}

DecayFitReport scale_fit(const PhaseFunction& phi, double t, const std::vector<int>& j_list,
                         const GroupParams& g, const SearchConfig& cfg) {
  std::vector<DecayRow> rows;
  std::vector<double> x, y;
  for (int j : j_list) {
    DecayRow row{t, j, sup_norm_phi_j(phi, t, j, g, cfg)};
    x.push_back(j * std::log(2.0));
    y.push_back(std::log(row.sup.value * std::sqrt(std::abs(t))));
    rows.push_back(row);
  }
  auto rep = fit_line(std::move(x), std::move(y), "j ln2", 5);
  rep.rows = std::move(rows);
  return rep;
}

DispersiveRatioReport dispersive_ratio(const PhaseFunction& phi, const std::vector<BandComponent>& u0,
                                       const std::vector<double>& t_list, const GroupParams& g,
                                       const SearchConfig& cfg, const BesovGrid& grid,
                                       const DyadicWindow& w) {
  bool zero = true;
  for (const auto& c : u0)
    if (c.scale != 0.0) zero = false;
  if (zero) throw std::invalid_argument("dispersive_ratio: zero initial datum");
  if (!phi.declared) throw std::invalid_argument("dispersive_ratio: phase needs declared exponents");
  int j_lo = u0.front().j, j_hi = u0.front().j;
  for (const auto& c : u0) {
    j_lo = std::min(j_lo, c.j);
    j_hi = std::max(j_hi, c.j);
  }
  BesovSpec spec;
  spec.rho = g.homogeneous_dimension() - phi.declared->alpha1;
  spec.p = 1.0;
  spec.r = 1.0;
  spec.j_lo = j_lo - 1;
  spec.j_hi = j_hi + 1;
  const auto besov = besov_norm(u0, spec, g, grid, w);
  if (!(besov.value > 0.0)) throw std::invalid_argument("dispersive_ratio: zero initial datum");

  DispersiveRatioReport rep;
  rep.besov = besov.value;
  rep.besov_error = besov.error;
  for (double t : t_list) {
    const auto sup = sup_norm(u0, phi, t, g, cfg);
    rep.rows.push_back({t, sup.value, sup.value * std::sqrt(std::abs(t)) / besov.value});
  }
  return rep;
}

}  // namespace hdisp
