#include "hdisp/spherical_fourier.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include <Eigen/Dense>

#include "hdisp/quadrature.hpp"
#include "hdisp/special_functions.hpp"

namespace hdisp {

GroupParams::GroupParams(int n) : n_(n) {
  if (n < 1) throw std::invalid_argument("GroupParams: n must be >= 1");
  sphere_measure_ = 2.0 * std::pow(kPi, n) / std::tgamma(static_cast<double>(n));
  inversion_constant_ = std::pow(2.0, n - 1) / std::pow(kPi, n + 1);
}

double GroupParams::mode_multiplicity(int m) const { return binomial(m + n_ - 1, m); }

double eigenvalue(int m, double lambda, const GroupParams& g) {
  if (m < 0) throw std::invalid_argument("eigenvalue: negative mode");
  return 4.0 * (2.0 * m + g.n()) * std::abs(lambda);
}

std::string to_string(LambdaSymmetry s) {
  switch (s) {
    case LambdaSymmetry::none: return "none";
    case LambdaSymmetry::even: return "even";
    case LambdaSymmetry::hermitian: return "hermitian";
  }
  return "none";
}

LambdaSymmetry lambda_symmetry_from_string(const std::string& s) {
  if (s == "none") return LambdaSymmetry::none;
  if (s == "even") return LambdaSymmetry::even;
  if (s == "hermitian") return LambdaSymmetry::hermitian;
  throw std::invalid_argument("unknown lambda symmetry '" + s + "'");
}

void SphericalCoefficients::validate() const {
  if (n < 1) throw std::invalid_argument("coefficients: n must be >= 1");
  if (!grids) throw std::invalid_argument("coefficients: missing grids");
  if (grids->size() != values.size())
    throw std::invalid_argument("coefficients: grid count differs from mode count");
  if (!(tail_bound >= 0.0) || !std::isfinite(tail_bound))
    throw std::invalid_argument("coefficients: tail_bound must be finite and >= 0");
  for (std::size_t m = 0; m < values.size(); ++m) {
    const auto& gr = (*grids)[m];
    if (gr.nodes.size() != gr.weights.size() || gr.nodes.size() != values[m].size())
      throw std::invalid_argument("coefficients: size mismatch at mode " + std::to_string(m));
    for (std::size_t k = 0; k < gr.size(); ++k) {
      if (k > 0 && !(gr.nodes[k] > gr.nodes[k - 1]))
        throw std::invalid_argument("coefficients: nodes not strictly increasing at mode " +
                                    std::to_string(m));
      if (symmetry != LambdaSymmetry::none && !(gr.nodes[k] > 0.0))
        throw std::invalid_argument("coefficients: symmetric storage needs positive nodes");
      if (!std::isfinite(values[m][k].real()) || !std::isfinite(values[m][k].imag()))
        throw std::invalid_argument("coefficients: non-finite value at mode " +
                                    std::to_string(m));
    }
  }
}

SphericalCoefficients zero_coefficients(int n, LambdaSymmetry symmetry,
                                        std::shared_ptr<const ModeGrids> grids) {
  SphericalCoefficients c;
  c.n = n;
  c.symmetry = symmetry;
  c.values.resize(grids->size());
  for (std::size_t m = 0; m < grids->size(); ++m) c.values[m].assign((*grids)[m].size(), cplx{});
  c.grids = std::move(grids);
  return c;
}

namespace {

// contribution of the node pair (+lambda, -lambda) or of the single node
cplx spectral_kernel(LambdaSymmetry sym, double lambda, double s, cplx c) {
  switch (sym) {
    case LambdaSymmetry::none: return std::polar(1.0, -lambda * s) * c;
    case LambdaSymmetry::even: return 2.0 * std::cos(lambda * s) * c;
    case LambdaSymmetry::hermitian: return 2.0 * (std::polar(1.0, -lambda * s) * c).real();
  }
  return {};
}

double max_abs_node(const ModeGrids& grids) {
  double out = 0.0;
  for (const auto& gr : grids)
    for (double x : gr.nodes) out = std::max(out, std::abs(x));
  return out;
}

}  // namespace

SphericalCoefficients forward_transform(const RadialProfile& f,
                                        std::shared_ptr<const ModeGrids> grids,
                                        LambdaSymmetry symmetry, const GroupParams& g,
                                        const TransformQuadrature& quad,
                                        TransformReport* report) {
  if (!grids || grids->empty()) throw std::invalid_argument("forward_transform: no mode grids");
  if (!(f.radius_r > 0.0) || !(f.radius_s > 0.0))
    throw std::invalid_argument("forward_transform: profile needs positive decay radii");
  SphericalCoefficients out = zero_coefficients(g.n(), symmetry, grids);
  out.validate();

  const int n = g.n();
  const int m_max = out.m_max();
  const double lambda_max = max_abs_node(*grids);

  // flatten (m, k) into columns
  struct Column {
    int m;
    std::size_t k;
    double lambda;
  };
  std::vector<Column> cols;
  for (int m = 0; m <= m_max; ++m)
    for (std::size_t k = 0; k < (*grids)[m].size(); ++k)
      cols.push_back({m, k, (*grids)[m].nodes[k]});
  const Eigen::Index ncol = static_cast<Eigen::Index>(cols.size());

  int panels_s = std::max(quad.min_panels_s,
                          2 * static_cast<int>(std::ceil(2.0 * f.radius_s * lambda_max / (2.0 * kPi))));
  int panels_r = std::max(quad.min_panels_r, 2 * (m_max + 1));

  std::vector<cplx> prev;
  double err = std::numeric_limits<double>::infinity();
  for (int level = 0; level <= quad.max_doublings; ++level) {
    const auto rr = composite_gauss_legendre(0.0, f.radius_r, panels_r, quad.order);
    const auto ss = composite_gauss_legendre(-f.radius_s, f.radius_s, panels_s, quad.order);
    const Eigen::Index nr = static_cast<Eigen::Index>(rr.size());
    const Eigen::Index ns = static_cast<Eigen::Index>(ss.size());

    Eigen::MatrixXcd samples(nr, ns);
#pragma omp parallel for schedule(static)
    for (Eigen::Index i = 0; i < nr; ++i)
      for (Eigen::Index l = 0; l < ns; ++l)
        samples(i, l) = ss.weights[l] * f.eval(rr.nodes[i], ss.nodes[l]);

    Eigen::MatrixXcd phase(ns, ncol);
#pragma omp parallel for schedule(static)
    for (Eigen::Index c = 0; c < ncol; ++c)
      for (Eigen::Index l = 0; l < ns; ++l) phase(l, c) = std::polar(1.0, cols[c].lambda * ss.nodes[l]);

    const Eigen::MatrixXcd s_integrals = samples * phase;  // nr x ncol

    std::vector<cplx> cur(cols.size());
#pragma omp parallel for schedule(static)
    for (Eigen::Index c = 0; c < ncol; ++c) {
      const auto& col = cols[c];
      const double lam = std::abs(col.lambda);
      CompensatedComplexSum acc;
      for (Eigen::Index i = 0; i < nr; ++i) {
        const double r = rr.nodes[i];
        const double radial = rr.weights[i] * std::pow(r, 2 * n - 1) *
                              weighted_laguerre(col.m, n, 2.0 * lam * r * r);
        acc += radial * s_integrals(i, c);
      }
      cur[c] = acc.value() * (g.sphere_measure() / g.mode_multiplicity(col.m));
    }

    if (level > 0) {
      err = 0.0;
      for (std::size_t c = 0; c < cur.size(); ++c) err = std::max(err, std::abs(cur[c] - prev[c]));
    }
    prev = std::move(cur);
    if (level > 0 && err <= quad.abs_tol) break;
    if (level == quad.max_doublings)
      throw NonconvergenceError("forward_transform: coefficient change " + std::to_string(err) +
                                " above tolerance after " + std::to_string(level) +
                                " doublings");
    panels_r *= 2;
    panels_s *= 2;
  }

  for (std::size_t c = 0; c < cols.size(); ++c) out.values[cols[c].m][cols[c].k] = prev[c];
  out.tail_bound = 0.0;
  if (report) *report = {err, panels_r, panels_s};
  return out;
}

cplx reconstruct_point(const SphericalCoefficients& c, const GroupParams& g, double r,
                       double s) {
  const int n = g.n();
  CompensatedComplexSum total;
  for (int m = 0; m <= c.m_max(); ++m) {
    const auto& gr = c.grid(m);
    cplx mode{};
    for (std::size_t k = 0; k < gr.size(); ++k) {
      const double lam = std::abs(gr.nodes[k]);
      const double radial = gr.weights[k] * std::pow(lam, n) *
                            weighted_laguerre(m, n, 2.0 * lam * r * r);
      mode += radial * spectral_kernel(c.symmetry, gr.nodes[k], s, c.values[m][k]);
    }
    total += mode;
  }
  return g.inversion_constant() * total.value();
}

RadialProfile inverse_transform(std::shared_ptr<const SphericalCoefficients> c,
                                const GroupParams& g, const InverseOptions& opt) {
  if (!c) throw std::invalid_argument("inverse_transform: null coefficients");
  c->validate();
  if (c->n != g.n()) throw std::invalid_argument("inverse_transform: group dimension mismatch");

  double lam_max = 0.0, lam_min_pos = std::numeric_limits<double>::infinity();
  double widest_gap = 0.0;
  for (const auto& gr : *c->grids) {
    for (std::size_t k = 0; k < gr.size(); ++k) {
      const double a = std::abs(gr.nodes[k]);
      lam_max = std::max(lam_max, a);
      if (a > 0.0) lam_min_pos = std::min(lam_min_pos, a);
      if (k > 0) widest_gap = std::max(widest_gap, gr.nodes[k] - gr.nodes[k - 1]);
    }
  }
  RadialProfile p;
  const GroupParams group = g;
  p.eval = [c, group](double r, double s) { return reconstruct_point(*c, group, r, s); };
  const double lam_floor = std::max(lam_min_pos, 1e-3 * lam_max);
  // beyond the Laguerre turning point 4m+2n the weighted functions decay like e^{-tau/2}
  p.radius_r = lam_max > 0.0 ? std::sqrt((4.0 * c->m_max() + 2.0 * g.n() + 80.0) / (2.0 * lam_floor))
                             : 1.0;
  p.radius_s = opt.radius_s > 0.0 ? opt.radius_s
               : widest_gap > 0.0 ? 0.5 * kPi / widest_gap
                                  : 1.0;
  p.tail_bound = c->tail_bound;
  return p;
}

SphericalCoefficients apply_multiplier(const SphericalCoefficients& c, const Multiplier& h,
                                       const GroupParams& g) {
  if (!h.symbol) throw std::invalid_argument("apply_multiplier: empty symbol");
  SphericalCoefficients out = c;
  double sup = 0.0;
  for (int m = 0; m <= c.m_max(); ++m) {
    const auto& gr = c.grid(m);
    for (std::size_t k = 0; k < gr.size(); ++k) {
      const cplx hv = h.symbol(eigenvalue(m, gr.nodes[k], g));
      sup = std::max(sup, std::abs(hv));
      out.values[m][k] = hv * c.values[m][k];
    }
  }
  out.tail_bound = c.tail_bound * (h.unimodular ? 1.0 : sup);
  return out;
}

bool same_grids(const SphericalCoefficients& a, const SphericalCoefficients& b) {
  if (a.grids == b.grids) return true;
  if (!a.grids || !b.grids) return false;
  return *a.grids == *b.grids;
}

SphericalCoefficients convolve(const SphericalCoefficients& f, const SphericalCoefficients& h) {
  if (f.n != h.n) throw GridMismatchError("convolve: group dimensions differ");
  if (f.values.size() != h.values.size()) throw GridMismatchError("convolve: m_max differs");
  if (f.symmetry != h.symmetry) throw GridMismatchError("convolve: lambda symmetries differ");
  if (!same_grids(f, h)) throw GridMismatchError("convolve: lambda grids differ");
  SphericalCoefficients out = f;
  double max_f = 0.0, max_h = 0.0;
  for (std::size_t m = 0; m < f.values.size(); ++m)
    for (std::size_t k = 0; k < f.values[m].size(); ++k) {
      max_f = std::max(max_f, std::abs(f.values[m][k]));
      max_h = std::max(max_h, std::abs(h.values[m][k]));
      out.values[m][k] = f.values[m][k] * h.values[m][k];
    }
  out.tail_bound = f.tail_bound * max_h + h.tail_bound * max_f;
  return out;
}

double weighted_coefficient_norm2(const SphericalCoefficients& c, const GroupParams& g) {
  CompensatedSum total;
  for (int m = 0; m <= c.m_max(); ++m) {
    const auto& gr = c.grid(m);
    CompensatedSum mode;
    for (std::size_t k = 0; k < gr.size(); ++k)
      mode += gr.weights[k] * std::norm(c.values[m][k]) * std::pow(std::abs(gr.nodes[k]), g.n());
    total += g.mode_multiplicity(m) * mode.value();
  }
  return total.value();
}

double plancherel_norm2(const SphericalCoefficients& c, const GroupParams& g) {
  const double sym = c.symmetry == LambdaSymmetry::none ? 1.0 : 2.0;
  return sym * g.inversion_constant() * weighted_coefficient_norm2(c, g);
}

nlohmann::json to_json(const SphericalCoefficients& c) {
  nlohmann::json modes = nlohmann::json::array();
  for (int m = 0; m <= c.m_max(); ++m) {
    const auto& gr = c.grid(m);
    std::vector<double> re(gr.size()), im(gr.size());
    for (std::size_t k = 0; k < gr.size(); ++k) {
      re[k] = c.values[m][k].real();
      im[k] = c.values[m][k].imag();
    }
    modes.push_back({{"m", m}, {"nodes", gr.nodes}, {"weights", gr.weights}, {"re", re}, {"im", im}});
  }
  return {{"n", c.n},
          {"m_max", c.m_max()},
          {"lambda_symmetry", to_string(c.symmetry)},
          {"modes", modes},
          {"tail_bound", c.tail_bound}};
}

SphericalCoefficients coefficients_from_json(const nlohmann::json& j) {
  SphericalCoefficients c;
  c.n = j.at("n").get<int>();
  c.symmetry = lambda_symmetry_from_string(j.value("lambda_symmetry", std::string("none")));
  c.tail_bound = j.at("tail_bound").get<double>();
  const int m_max = j.at("m_max").get<int>();
  const auto& modes = j.at("modes");
  if (static_cast<int>(modes.size()) != m_max + 1)
    throw std::invalid_argument("coefficients json: mode count differs from m_max+1");
  auto grids = std::make_shared<ModeGrids>(modes.size());
  c.values.resize(modes.size());
  for (const auto& mode : modes) {
    const int m = mode.at("m").get<int>();
    if (m < 0 || m > m_max) throw std::invalid_argument("coefficients json: bad mode index");
    auto& gr = (*grids)[m];
    gr.nodes = mode.at("nodes").get<std::vector<double>>();
    gr.weights = mode.at("weights").get<std::vector<double>>();
    const auto re = mode.at("re").get<std::vector<double>>();
    const auto im = mode.at("im").get<std::vector<double>>();
    if (re.size() != gr.nodes.size() || im.size() != gr.nodes.size())
      throw std::invalid_argument("coefficients json: value length mismatch");
    c.values[m].resize(re.size());
    for (std::size_t k = 0; k < re.size(); ++k) c.values[m][k] = {re[k], im[k]};
  }
  c.grids = std::move(grids);
  c.validate();
  return c;
}

}  // namespace hdisp
