#pragma once

#include <functional>
#include <memory>
#include <optional>
#include <vector>

#include <Eigen/Dense>

#include "hdisp/grid_eval.hpp"
#include "hdisp/phase.hpp"
#include "hdisp/spherical_fourier.hpp"

namespace hdisp {

// A symbol supported in one dyadic band, written in the band coordinate
// x = 4^{-j}(2m+n)|lambda|. On mode m it sits on lambda in 4^j [x_lo, x_hi]/(2m+n).
struct BandComponent {
  int j = 0;
  std::function<double(double)> profile;
  double x_lo = 0.5;
  double x_hi = 4.0;
  double scale = 1.0;
};

// Symbol multiplied by e^{i t phi(b)}, b = 4(2m+n)|lambda| = 4^{j+1} x.
struct Evolution {
  PhaseFunction phase;
  double t = 0.0;
};

// Panels per mode and component:
//   refinement * (min_panels + panels_per_period * V / 2pi)
// with V the total variation over the band of
//   t phi(4^{j+1} x) - 4^j x s / (2m+n),  |s| <= s_extent.
// Order-16 panels spanning at most 4 pi of phase are accurate to ~1e-15.
struct OscillationLaw {
  double panels_per_period = 0.5;
  int min_panels = 32;
  long max_panels = 1L << 22;  // per mode and component
  int refinement = 1;
};

// Coefficients of a finite sum of band components, optionally evolved, for
// every mode m < mode_count. Nodes are generated on demand so that a mode with
// millions of oscillatory nodes never has to be stored. Symbols depend on
// |lambda| only, so the source is even in lambda.
class BandFamily final : public CoefficientSource {
 public:
  BandFamily(int n, std::vector<BandComponent> parts, int mode_count, double s_extent,
             OscillationLaw law = {}, std::optional<Evolution> evolution = std::nullopt);

  int n() const override { return n_; }
  LambdaSymmetry symmetry() const override { return LambdaSymmetry::even; }
  int mode_count() const override { return modes_; }
  bool infinite_mode_sum() const override { return true; }
  std::unique_ptr<ModeCursor> open_mode(int m) const override;

  std::size_t node_count(int m) const;
  double s_extent() const { return s_extent_; }
  double t() const { return evolution_ ? evolution_->t : 0.0; }
  const OscillationLaw& law() const { return law_; }
  const std::vector<BandComponent>& parts() const { return *parts_; }
  const std::optional<Evolution>& evolution() const { return evolution_; }

  BandFamily refined(int factor) const;
  BandFamily with_mode_count(int modes) const;
  BandFamily with_s_extent(double s_extent) const;

  // Explicit coefficients for modes < mode_count(); components must occupy
  // disjoint lambda-ranges.
  SphericalCoefficients materialize() const;

 private:
  struct PhaseTable {
    std::vector<double> cumulative;  // |t| * variation of phi(4^{j+1} x) from x_lo
  };
  std::vector<double> panel_edges(int m, std::size_t part) const;
  void build_phase_tables();

  int n_;
  std::shared_ptr<const std::vector<BandComponent>> parts_;
  int modes_;
  double s_extent_;
  OscillationLaw law_;
  std::optional<Evolution> evolution_;
  std::shared_ptr<const std::vector<PhaseTable>> tables_;
};

// Sampled radial kernel on a tensor grid.
struct KernelField {
  std::vector<double> r, s;
  Eigen::MatrixXcd values;
  double t = 0.0;
  int j = 0;
  double quad_err = 0.0;    // max change under panel doubling
  double tail_bound = 0.0;  // max bound on the discarded modes
  int modes = 0;
};

struct FieldOptions {
  TailPolicy tail = TailPolicy::extrapolate;
  // tail bound accepted once below tail_tol * max |field|
  double tail_tol = 1e-7;
  int initial_modes = 32;
  bool certify = true;
  EvalOptions eval;
};

// Sum over modes with the mode count doubled until the tail estimate is below
// tolerance (NonconvergenceError past fam.mode_count()). With certify set the
// field is recomputed with doubled panel counts and the change is quad_err.
KernelField evaluate_band_field(const BandFamily& fam, std::vector<double> r,
                                std::vector<double> s, const GroupParams& g,
                                const FieldOptions& opt = {});

}  // namespace hdisp
