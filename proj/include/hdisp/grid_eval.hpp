#pragma once

#include <map>
#include <memory>
#include <span>
#include <vector>

#include <Eigen/Dense>

#include "hdisp/common.hpp"
#include "hdisp/spherical_fourier.hpp"

namespace hdisp {

// A contiguous run of quadrature nodes of one mode.
struct NodeBlock {
  std::vector<double> lambda;
  std::vector<double> weight;
  std::vector<cplx> value;
  std::size_t size() const { return lambda.size(); }
  void resize(std::size_t k) {
    lambda.resize(k);
    weight.resize(k);
    value.resize(k);
  }
};

class ModeCursor {
 public:
  virtual ~ModeCursor() = default;
  virtual std::size_t node_count() const = 0;
  // Writes nodes [begin, begin+count) into out (resized to count).
  virtual void fill(std::size_t begin, std::size_t count, NodeBlock& out) const = 0;
};

// Frequency-side data consumed by the grid evaluators. Sources are immutable
// and may be read from several threads at once.
class CoefficientSource {
 public:
  virtual ~CoefficientSource() = default;
  virtual int n() const = 0;
  virtual LambdaSymmetry symmetry() const = 0;
  // Modes the source can produce; families with a genuinely infinite m-sum
  // report their configured truncation.
  virtual int mode_count() const = 0;
  virtual bool infinite_mode_sum() const = 0;
  virtual std::unique_ptr<ModeCursor> open_mode(int m) const = 0;
};

class MaterializedSource final : public CoefficientSource {
 public:
  explicit MaterializedSource(std::shared_ptr<const SphericalCoefficients> c);
  int n() const override { return c_->n; }
  LambdaSymmetry symmetry() const override { return c_->symmetry; }
  int mode_count() const override { return c_->m_max() + 1; }
  bool infinite_mode_sum() const override { return false; }
  std::unique_ptr<ModeCursor> open_mode(int m) const override;

 private:
  std::shared_ptr<const SphericalCoefficients> c_;
};

struct EvalOptions {
  std::size_t chunk = 1024;  // nodes per GEMM chunk
  int mode_batch = 0;        // modes evaluated concurrently; 0 picks 4 per thread
};

// Field of a single mode on the tensor grid r x s, inversion constant included.
Eigen::MatrixXcd evaluate_mode(const CoefficientSource& src, int m, std::span<const double> r,
                               std::span<const double> s, const GroupParams& g,
                               const EvalOptions& opt = {});

// Direct per-point quadrature, one mode at a time; the slow oracle for the
// GEMM path. Sums modes [0, m_end) with compensated accumulation.
Eigen::MatrixXcd evaluate_grid_reference(const CoefficientSource& src, std::span<const double> r,
                                         std::span<const double> s, const GroupParams& g,
                                         int m_end);

// Ascending-m accumulation of per-mode fields. Modes are computed in parallel
// batches and merged in order, so the result does not depend on the number of
// threads.
class ModeSweep {
 public:
  ModeSweep(const CoefficientSource& src, std::vector<double> r, std::vector<double> s,
            const GroupParams& g, EvalOptions opt, std::vector<int> sample_modes = {});

  void advance_to(int m_end);
  int modes_done() const { return done_; }
  Eigen::MatrixXcd partial_sum() const;
  const std::map<int, Eigen::MatrixXcd>& samples() const { return samples_; }
  const std::vector<double>& r() const { return r_; }
  const std::vector<double>& s() const { return s_; }
  int n() const { return g_.n(); }

 private:
  void accumulate(const Eigen::MatrixXcd& f);

  const CoefficientSource& src_;
  std::vector<double> r_, s_;
  GroupParams g_;
  EvalOptions opt_;
  std::vector<int> sample_modes_;
  int done_ = 0;
  Eigen::MatrixXd sum_re_, comp_re_, sum_im_, comp_im_;
  std::map<int, Eigen::MatrixXcd> samples_;
};

// How the discarded modes m >= M are accounted for.
//   none:        band-limited data, nothing discarded
//   extrapolate: fit F_m ~ sum_{q=2..5} a_q (2m+n)^{-q} on the sampled modes of
//                [M/2, M), add the fitted tail, and report its distance to the
//                same fit on [M/4, M/2) as the error
//   envelope:    no correction; bound 4 * max_{sampled m in [M/2,M)} |F_m|(2m+n)^2
//                * sum_{m >= M} (2m+n)^{-2}
enum class TailPolicy { none, extrapolate, envelope };

struct TailEstimate {
  Eigen::MatrixXcd correction;  // added to the partial sum
  Eigen::MatrixXd bound;        // per-point error of (partial sum + correction)
};

// Mode indices kept by ModeSweep for the tail estimators: eight per octave
// from m = 4 up to m_cap.
std::vector<int> tail_sample_modes(int m_cap);

TailEstimate estimate_tail(const ModeSweep& sweep, TailPolicy policy);

}  // namespace hdisp
