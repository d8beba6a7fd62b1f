#include "hdisp/band_family.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

#include "hdisp/quadrature.hpp"

namespace hdisp {

namespace {

constexpr int kOrder = 16;
constexpr int kPhaseSamples = 4097;

class BandCursor final : public ModeCursor {
 public:
  BandCursor(const BandFamily& fam, int m, std::vector<std::vector<double>> edges)
      : fam_(fam), m_(m), edges_(std::move(edges)) {
    offsets_.push_back(0);
    for (const auto& e : edges_) offsets_.push_back(offsets_.back() + (e.size() - 1) * kOrder);
  }

  std::size_t node_count() const override { return offsets_.back(); }

  void fill(std::size_t begin, std::size_t count, NodeBlock& out) const override {
    out.resize(count);
    const auto& rule = gauss_legendre(kOrder);
    const double mu = 2.0 * m_ + fam_.n();
    const auto& evo = fam_.evolution();
    std::size_t part = 0;
    for (std::size_t i = 0; i < count; ++i) {
      const std::size_t idx = begin + i;
      while (idx >= offsets_[part + 1]) ++part;
      const auto& comp = fam_.parts()[part];
      const std::size_t local = idx - offsets_[part];
      const std::size_t panel = local / kOrder, q = local % kOrder;
      const double a = edges_[part][panel], b = edges_[part][panel + 1];
      const double x = 0.5 * (a + b) + 0.5 * (b - a) * rule.nodes[q];
      const double wx = 0.5 * (b - a) * rule.weights[q];
      const double band = std::ldexp(1.0, 2 * comp.j);
      out.lambda[i] = band * x / mu;
      out.weight[i] = band * wx / mu;
      cplx v = comp.scale * comp.profile(x);
      if (evo && evo->t != 0.0 && v != cplx{}) v *= std::polar(1.0, evo->t * evo->phase.value(4.0 * band * x));
      out.value[i] = v;
    }
  }

 private:
  const BandFamily& fam_;
  int m_;
  std::vector<std::vector<double>> edges_;
  std::vector<std::size_t> offsets_;
};

}  // namespace

BandFamily::BandFamily(int n, std::vector<BandComponent> parts, int mode_count, double s_extent,
                       OscillationLaw law, std::optional<Evolution> evolution)
    : n_(n), modes_(mode_count), s_extent_(std::abs(s_extent)), law_(law),
      evolution_(std::move(evolution)) {
  if (n < 1) throw std::invalid_argument("BandFamily: n must be >= 1");
  if (mode_count < 1) throw std::invalid_argument("BandFamily: mode_count must be >= 1");
  if (law.min_panels < 1 || law.refinement < 1 || !(law.panels_per_period > 0.0))
    throw std::invalid_argument("BandFamily: invalid oscillation law");
  for (const auto& c : parts) {
    if (!c.profile) throw std::invalid_argument("BandFamily: component without profile");
    if (!(c.x_lo > 0.0 && c.x_hi > c.x_lo))
      throw std::invalid_argument("BandFamily: component band must satisfy 0 < x_lo < x_hi");
  }
  std::stable_sort(parts.begin(), parts.end(),
                   [](const BandComponent& a, const BandComponent& b) { return a.j < b.j; });
  parts_ = std::make_shared<const std::vector<BandComponent>>(std::move(parts));
  if (evolution_ && !evolution_->phase.value)
    throw std::invalid_argument("BandFamily: evolution without phase");
  build_phase_tables();
}

void BandFamily::build_phase_tables() {
  auto tables = std::make_shared<std::vector<PhaseTable>>();
  for (const auto& c : *parts_) {
    PhaseTable tab;
    tab.cumulative.assign(kPhaseSamples, 0.0);
    if (evolution_ && evolution_->t != 0.0) {
      const double band4 = 4.0 * std::ldexp(1.0, 2 * c.j);
      const auto& phi = evolution_->phase.value;
      double prev = phi(band4 * c.x_lo);
      for (int i = 1; i < kPhaseSamples; ++i) {
        const double x = c.x_lo + (c.x_hi - c.x_lo) * i / (kPhaseSamples - 1);
        const double cur = phi(band4 * x);
        tab.cumulative[i] = tab.cumulative[i - 1] + std::abs(evolution_->t) * std::abs(cur - prev);
        prev = cur;
      }
    }
    tables->push_back(std::move(tab));
  }
  tables_ = std::move(tables);
}

std::vector<double> BandFamily::panel_edges(int m, std::size_t part) const {
  const auto& c = (*parts_)[part];
  const auto& tab = (*tables_)[part];
  const double mu = 2.0 * m + n_;
  const double band = std::ldexp(1.0, 2 * c.j);
  const double density = law_.refinement * law_.panels_per_period / (2.0 * kPi);
  std::vector<double> cumulative(kPhaseSamples);
  for (int i = 0; i < kPhaseSamples; ++i) {
    const double dx = (c.x_hi - c.x_lo) * i / (kPhaseSamples - 1);
    cumulative[i] = density * (tab.cumulative[i] + s_extent_ * band * dx / mu);
  }
  const double total = law_.refinement * law_.min_panels + cumulative.back();
  if (total > static_cast<double>(law_.max_panels))
    throw NonconvergenceError("band quadrature: " + std::to_string(static_cast<long>(total)) +
                              " panels needed on mode " + std::to_string(m) +
                              ", budget is " + std::to_string(law_.max_panels));
  return equidistributed_edges(c.x_lo, c.x_hi, law_.refinement * law_.min_panels, cumulative);
}

std::unique_ptr<ModeCursor> BandFamily::open_mode(int m) const {
  if (m < 0 || m >= modes_) throw std::out_of_range("BandFamily: mode out of range");
  std::vector<std::vector<double>> edges;
  edges.reserve(parts_->size());
  for (std::size_t p = 0; p < parts_->size(); ++p) edges.push_back(panel_edges(m, p));
  return std::make_unique<BandCursor>(*this, m, std::move(edges));
}

std::size_t BandFamily::node_count(int m) const { return open_mode(m)->node_count(); }

BandFamily BandFamily::refined(int factor) const {
  BandFamily out = *this;
  out.law_.refinement *= factor;
  out.law_.max_panels *= factor;
  return out;
}

BandFamily BandFamily::with_mode_count(int modes) const {
  if (modes < 1) throw std::invalid_argument("BandFamily: mode_count must be >= 1");
  BandFamily out = *this;
  out.modes_ = modes;
  return out;
}

BandFamily BandFamily::with_s_extent(double s_extent) const {
  BandFamily out = *this;
  out.s_extent_ = std::abs(s_extent);
  return out;
}

SphericalCoefficients BandFamily::materialize() const {
  for (std::size_t p = 1; p < parts_->size(); ++p) {
    const auto& a = (*parts_)[p - 1];
    const auto& b = (*parts_)[p];
    if (std::ldexp(a.x_hi, 2 * a.j) > std::ldexp(b.x_lo, 2 * b.j))
      throw std::invalid_argument("BandFamily::materialize: overlapping components");
  }
  auto grids = std::make_shared<ModeGrids>(modes_);
  SphericalCoefficients c;
  c.n = n_;
  c.symmetry = LambdaSymmetry::even;
  c.values.resize(modes_);
  NodeBlock blk;
  for (int m = 0; m < modes_; ++m) {
    const auto cur = open_mode(m);
    cur->fill(0, cur->node_count(), blk);
    (*grids)[m].nodes = blk.lambda;
    (*grids)[m].weights = blk.weight;
    c.values[m] = blk.value;
  }
  c.grids = std::move(grids);
  return c;
}

KernelField evaluate_band_field(const BandFamily& fam, std::vector<double> r,
                                std::vector<double> s, const GroupParams& g,
                                const FieldOptions& opt) {
  if (r.empty() || s.empty()) throw std::invalid_argument("evaluate_band_field: empty grid");
  const int cap = fam.mode_count();
  const auto samples = tail_sample_modes(cap);
  ModeSweep sweep(fam, r, s, g, opt.eval, samples);
  int M = std::min(std::max(opt.initial_modes, 1), cap);

  Eigen::MatrixXcd field;
  double tail = 0.0;
  while (true) {
    sweep.advance_to(M);
    const TailEstimate est = estimate_tail(sweep, opt.tail);
    field = sweep.partial_sum() + est.correction;
    tail = est.bound.size() ? est.bound.maxCoeff() : 0.0;
    const double scale = field.cwiseAbs().maxCoeff();
    if (opt.tail == TailPolicy::none || tail <= opt.tail_tol * scale) break;
    if (M >= cap)
      throw NonconvergenceError("mode tail " + std::to_string(tail) + " above tolerance " +
                                std::to_string(opt.tail_tol * scale) + " at " +
                                std::to_string(M) + " modes");
    M = std::min(2 * M, cap);
  }

  KernelField out;
  out.t = fam.t();
  out.j = fam.parts().empty() ? 0 : fam.parts().front().j;
  out.tail_bound = tail;
  out.modes = M;
  if (opt.certify) {
    const BandFamily fine = fam.refined(2);
    ModeSweep check(fine, r, s, g, opt.eval);
    check.advance_to(M);
    const Eigen::MatrixXcd delta = check.partial_sum() - sweep.partial_sum();
    out.quad_err = delta.cwiseAbs().maxCoeff();
  }
  out.values = std::move(field);
  out.r = std::move(r);
  out.s = std::move(s);
  return out;
}

}  // namespace hdisp
