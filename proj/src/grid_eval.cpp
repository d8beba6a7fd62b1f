#include "hdisp/grid_eval.hpp"

#include <omp.h>

#include <algorithm>
#include <cmath>
#include <exception>
#include <set>
#include <stdexcept>

#include "hdisp/quadrature.hpp"
#include "hdisp/special_functions.hpp"

namespace hdisp {

namespace {

using RowMatrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

// Beyond this the plain exp(-tau/2) start of the recurrence leaves too little
// headroom; those entries go through the rescaling scalar path.
constexpr double kVectorTauLimit = 1200.0;

class MaterializedCursor final : public ModeCursor {
 public:
  MaterializedCursor(const SphericalCoefficients& c, int m) : c_(c), m_(m) {}
  std::size_t node_count() const override { return c_.grid(m_).size(); }
  void fill(std::size_t begin, std::size_t count, NodeBlock& out) const override {
    const auto& gr = c_.grid(m_);
    out.resize(count);
    for (std::size_t k = 0; k < count; ++k) {
      out.lambda[k] = gr.nodes[begin + k];
      out.weight[k] = gr.weights[begin + k];
      out.value[k] = c_.values[m_][begin + k];
    }
  }

 private:
  const SphericalCoefficients& c_;
  int m_;
};

bool uniform_spacing(std::span<const double> s, double& s0, double& ds) {
  if (s.size() < 3) return false;
  s0 = s[0];
  ds = (s.back() - s[0]) / static_cast<double>(s.size() - 1);
  const double scale = std::max(std::abs(s[0]), std::abs(s.back()));
  for (std::size_t l = 0; l < s.size(); ++l)
    if (std::abs(s[l] - (s0 + ds * static_cast<double>(l))) > 1e-13 * std::max(scale, 1.0))
      return false;
  return true;
}

// cos/sin(lambda_k s_l) written into rows [0, K) of `cos_out` and `sin_out`
// (column-major, so each s-column is contiguous in k). Uniform grids advance a
// rotation over all k at once, reseeded every 32 columns.
void trig_tables(std::span<const double> lambda, std::span<const double> s, bool uniform,
                 double s0, double ds, double* cos_out, double* sin_out, Eigen::Index ld,
                 std::vector<double>& zr, std::vector<double>& zi, std::vector<double>& wr,
                 std::vector<double>& wi) {
  const std::size_t K = lambda.size();
  const Eigen::Index S = static_cast<Eigen::Index>(s.size());
  if (!uniform) {
    for (Eigen::Index l = 0; l < S; ++l)
      for (std::size_t k = 0; k < K; ++k) {
        const double arg = lambda[k] * s[l];
        cos_out[l * ld + k] = std::cos(arg);
        if (sin_out) sin_out[l * ld + k] = std::sin(arg);
      }
    return;
  }
  zr.resize(K);
  zi.resize(K);
  wr.resize(K);
  wi.resize(K);
  for (std::size_t k = 0; k < K; ++k) {
    wr[k] = std::cos(lambda[k] * ds);
    wi[k] = std::sin(lambda[k] * ds);
  }
  double* pr = zr.data();
  double* pi = zi.data();
  const double* qr = wr.data();
  const double* qi = wi.data();
  for (Eigen::Index l = 0; l < S; ++l) {
    if (l % 32 == 0) {
      const double sl = s0 + ds * static_cast<double>(l);
      for (std::size_t k = 0; k < K; ++k) {
        pr[k] = std::cos(lambda[k] * sl);
        pi[k] = std::sin(lambda[k] * sl);
      }
    } else {
#pragma omp simd
      for (std::size_t k = 0; k < K; ++k) {
        const double re = pr[k] * qr[k] - pi[k] * qi[k];
        pi[k] = pr[k] * qi[k] + pi[k] * qr[k];
        pr[k] = re;
      }
    }
    std::copy(pr, pr + K, cos_out + l * ld);
    if (sin_out) std::copy(pi, pi + K, sin_out + l * ld);
  }
}

// out[k] = L_m^{(a)}(tau_k) e^{-tau_k/2}; recurrence run in lockstep across k.
void weighted_laguerre_row(int m, double a, const std::vector<double>& tau,
                           std::vector<double>& p0, std::vector<double>& p1,
                           std::vector<double>& out) {
  const std::size_t K = tau.size();
  p0.resize(K);
  p1.resize(K);
  out.resize(K);
  bool any_far = false;
  // Eigen-owned storage keeps the packet/scalar split of exp() independent of
  // where the heap put p0; otherwise results drift by an ulp between threads
  thread_local Eigen::ArrayXd start;
  start.resize(static_cast<Eigen::Index>(K));
  for (std::size_t k = 0; k < K; ++k) {
    any_far = any_far || tau[k] > kVectorTauLimit;
    start(static_cast<Eigen::Index>(k)) = -0.5 * std::min(tau[k], kVectorTauLimit);
  }
  start = start.exp();
  std::copy(start.data(), start.data() + K, p0.begin());
  if (m == 0) {
    std::copy(p0.begin(), p0.end(), out.begin());
  } else {
    for (std::size_t k = 0; k < K; ++k) p1[k] = (a + 1.0 - std::min(tau[k], kVectorTauLimit)) * p0[k];
    double* q0 = p0.data();
    double* q1 = p1.data();
    const double* tk = tau.data();
    for (int j = 1; j < m; ++j) {
      const double c1 = 2.0 * j + a + 1.0, c2 = j + a, inv = 1.0 / (j + 1.0);
#pragma omp simd
      for (std::size_t k = 0; k < K; ++k) q0[k] = ((c1 - tk[k]) * q1[k] - c2 * q0[k]) * inv;
      std::swap(q0, q1);
    }
    std::copy(q1, q1 + K, out.begin());
  }
  if (any_far)
    for (std::size_t k = 0; k < K; ++k)
      if (tau[k] > kVectorTauLimit) out[k] = scaled_laguerre(m, a, tau[k], -0.5 * tau[k]);
}

}  // namespace

MaterializedSource::MaterializedSource(std::shared_ptr<const SphericalCoefficients> c)
    : c_(std::move(c)) {
  if (!c_) throw std::invalid_argument("MaterializedSource: null coefficients");
  c_->validate();
}

std::unique_ptr<ModeCursor> MaterializedSource::open_mode(int m) const {
  if (m < 0 || m > c_->m_max()) throw std::out_of_range("MaterializedSource: mode out of range");
  return std::make_unique<MaterializedCursor>(*c_, m);
}

Eigen::MatrixXcd evaluate_mode(const CoefficientSource& src, int m, std::span<const double> r,
                               std::span<const double> s, const GroupParams& g,
                               const EvalOptions& opt) {
  if (src.n() != g.n()) throw std::invalid_argument("evaluate_mode: group dimension mismatch");
  const int n = g.n();
  const double a = n - 1.0;
  const auto sym = src.symmetry();
  const Eigen::Index R = static_cast<Eigen::Index>(r.size());
  const Eigen::Index S = static_cast<Eigen::Index>(s.size());
  const auto cursor = src.open_mode(m);
  const std::size_t total = cursor->node_count();
  const std::size_t chunk = std::max<std::size_t>(opt.chunk, 16);

  double s0 = 0.0, ds = 0.0;
  const bool uniform = uniform_spacing(s, s0, ds);
  const bool want_sin = sym != LambdaSymmetry::even;
  const Eigen::Index acc_rows = sym == LambdaSymmetry::hermitian ? R : 2 * R;

  Eigen::MatrixXd acc = Eigen::MatrixXd::Zero(acc_rows, S);
  NodeBlock blk;
  RowMatrix lhs;
  Eigen::MatrixXd rhs;
  std::vector<double> tau, p0, p1, w, zr, zi, wr, wi;
  std::vector<double> amp_re, amp_im, lam_abs;

  for (std::size_t begin = 0; begin < total; begin += chunk) {
    const std::size_t cnt = std::min(chunk, total - begin);
    cursor->fill(begin, cnt, blk);
    const Eigen::Index K = static_cast<Eigen::Index>(cnt);
    amp_re.resize(cnt);
    amp_im.resize(cnt);
    lam_abs.resize(cnt);
    for (std::size_t k = 0; k < cnt; ++k) {
      lam_abs[k] = std::abs(blk.lambda[k]);
      const cplx amp = blk.weight[k] * std::pow(lam_abs[k], n) * blk.value[k];
      amp_re[k] = amp.real();
      amp_im[k] = amp.imag();
    }

    // rhs rows: [cos] for even, [cos; sin] otherwise
    rhs.resize(want_sin ? 2 * K : K, S);
    trig_tables(blk.lambda, s, uniform, s0, ds, rhs.data(), want_sin ? rhs.data() + K : nullptr,
                rhs.rows(), zr, zi, wr, wi);
    switch (sym) {
      case LambdaSymmetry::even: lhs.resize(2 * R, K); break;
      case LambdaSymmetry::hermitian: lhs.resize(R, 2 * K); break;
      case LambdaSymmetry::none: lhs.resize(2 * R, 2 * K); break;
    }

    tau.resize(cnt);
    for (Eigen::Index i = 0; i < R; ++i) {
      const double r2 = r[i] * r[i];
      for (std::size_t k = 0; k < cnt; ++k) tau[k] = 2.0 * lam_abs[k] * r2;
      weighted_laguerre_row(m, a, tau, p0, p1, w);
      const Eigen::Map<const Eigen::RowVectorXd> wv(w.data(), K), re(amp_re.data(), K),
          im(amp_im.data(), K);
      switch (sym) {
        case LambdaSymmetry::even:
          lhs.row(i) = wv.cwiseProduct(re);
          lhs.row(R + i) = wv.cwiseProduct(im);
          break;
        case LambdaSymmetry::hermitian:
          lhs.row(i).head(K) = wv.cwiseProduct(re);
          lhs.row(i).tail(K) = wv.cwiseProduct(im);
          break;
        case LambdaSymmetry::none:
          lhs.row(i).head(K) = wv.cwiseProduct(re);
          lhs.row(i).tail(K) = wv.cwiseProduct(im);
          lhs.row(R + i).head(K) = wv.cwiseProduct(im);
          lhs.row(R + i).tail(K) = -wv.cwiseProduct(re);
          break;
      }
    }
    acc.noalias() += lhs * rhs;
  }

  // the folded symmetric halves contribute twice
  const double C = g.inversion_constant() * (sym == LambdaSymmetry::none ? 1.0 : 2.0);
  Eigen::MatrixXcd out(R, S);
  for (Eigen::Index i = 0; i < R; ++i)
    for (Eigen::Index l = 0; l < S; ++l)
      out(i, l) = sym == LambdaSymmetry::hermitian ? cplx(C * acc(i, l), 0.0)
                                                  : cplx(C * acc(i, l), C * acc(R + i, l));
  return out;
}

Eigen::MatrixXcd evaluate_grid_reference(const CoefficientSource& src, std::span<const double> r,
                                         std::span<const double> s, const GroupParams& g,
                                         int m_end) {
  if (src.n() != g.n()) throw std::invalid_argument("evaluate_grid_reference: dimension mismatch");
  const int n = g.n();
  const auto sym = src.symmetry();
  const Eigen::Index R = static_cast<Eigen::Index>(r.size());
  const Eigen::Index S = static_cast<Eigen::Index>(s.size());
  std::vector<CompensatedComplexSum> acc(static_cast<std::size_t>(R * S));
  NodeBlock blk;
  for (int m = 0; m < m_end; ++m) {
    const auto cursor = src.open_mode(m);
    cursor->fill(0, cursor->node_count(), blk);
    for (Eigen::Index i = 0; i < R; ++i) {
      for (Eigen::Index l = 0; l < S; ++l) {
        cplx mode{};
        for (std::size_t k = 0; k < blk.size(); ++k) {
          const double lam = std::abs(blk.lambda[k]);
          const double radial =
              blk.weight[k] * std::pow(lam, n) * weighted_laguerre(m, n, 2.0 * lam * r[i] * r[i]);
          const cplx c = blk.value[k];
          cplx kern;
          switch (sym) {
            case LambdaSymmetry::none: kern = std::exp(cplx(0.0, -blk.lambda[k] * s[l])) * c; break;
            case LambdaSymmetry::even: kern = 2.0 * std::cos(blk.lambda[k] * s[l]) * c; break;
            case LambdaSymmetry::hermitian:
              kern = 2.0 * (std::exp(cplx(0.0, -blk.lambda[k] * s[l])) * c).real();
              break;
          }
          mode += radial * kern;
        }
        acc[i * S + l] += g.inversion_constant() * mode;
      }
    }
  }
  Eigen::MatrixXcd out(R, S);
  for (Eigen::Index i = 0; i < R; ++i)
    for (Eigen::Index l = 0; l < S; ++l) out(i, l) = acc[i * S + l].value();
  return out;
}

ModeSweep::ModeSweep(const CoefficientSource& src, std::vector<double> r, std::vector<double> s,
                     const GroupParams& g, EvalOptions opt, std::vector<int> sample_modes)
    : src_(src), r_(std::move(r)), s_(std::move(s)), g_(g), opt_(opt),
      sample_modes_(std::move(sample_modes)) {
  std::sort(sample_modes_.begin(), sample_modes_.end());
  const Eigen::Index R = static_cast<Eigen::Index>(r_.size());
  const Eigen::Index S = static_cast<Eigen::Index>(s_.size());
  sum_re_ = Eigen::MatrixXd::Zero(R, S);
  comp_re_ = Eigen::MatrixXd::Zero(R, S);
  sum_im_ = Eigen::MatrixXd::Zero(R, S);
  comp_im_ = Eigen::MatrixXd::Zero(R, S);
}

void ModeSweep::accumulate(const Eigen::MatrixXcd& f) {
  const auto neumaier = [](double& sum, double& comp, double x) {
    const double t = sum + x;
    if (std::abs(sum) >= std::abs(x))
      comp += (sum - t) + x;
    else
      comp += (x - t) + sum;
    sum = t;
  };
  for (Eigen::Index l = 0; l < f.cols(); ++l)
    for (Eigen::Index i = 0; i < f.rows(); ++i) {
      neumaier(sum_re_(i, l), comp_re_(i, l), f(i, l).real());
      neumaier(sum_im_(i, l), comp_im_(i, l), f(i, l).imag());
    }
}

void ModeSweep::advance_to(int m_end) {
  m_end = std::min(m_end, src_.mode_count());
  const int batch = opt_.mode_batch > 0 ? opt_.mode_batch : 4 * omp_get_max_threads();
  while (done_ < m_end) {
    const int cnt = std::min(batch, m_end - done_);
    std::vector<Eigen::MatrixXcd> fields(cnt);
    std::exception_ptr failure;
#pragma omp parallel for schedule(dynamic, 1)
    for (int b = 0; b < cnt; ++b) {
      try {
        fields[b] = evaluate_mode(src_, done_ + b, r_, s_, g_, opt_);
      } catch (...) {
#pragma omp critical(hdisp_sweep_failure)
        if (!failure) failure = std::current_exception();
      }
    }
    if (failure) std::rethrow_exception(failure);
    for (int b = 0; b < cnt; ++b) {
      const int m = done_ + b;
      accumulate(fields[b]);
      if (std::binary_search(sample_modes_.begin(), sample_modes_.end(), m))
        samples_[m] = std::move(fields[b]);
    }
    done_ += cnt;
  }
}

Eigen::MatrixXcd ModeSweep::partial_sum() const {
  Eigen::MatrixXcd out(sum_re_.rows(), sum_re_.cols());
  for (Eigen::Index l = 0; l < out.cols(); ++l)
    for (Eigen::Index i = 0; i < out.rows(); ++i)
      out(i, l) = cplx(sum_re_(i, l) + comp_re_(i, l), sum_im_(i, l) + comp_im_(i, l));
  return out;
}

std::vector<int> tail_sample_modes(int m_cap) {
  std::set<int> modes;
  for (int q = 0;; ++q) {
    const long m = std::lround(4.0 * std::exp2(q / 8.0));
    if (m > m_cap) break;
    modes.insert(static_cast<int>(m));
  }
  return {modes.begin(), modes.end()};
}

namespace {

// weights w with  sum_{m >= M} F_m  ~=  sum_s w_s F_{m_s}  under the model
// F_m = sum_{q=2..5} b_q (mu_ref/mu)^q,  mu = 2m+n.
Eigen::VectorXd extrapolation_weights(const std::vector<int>& modes, int M, int n) {
  constexpr int kTerms = 4;
  const double mu_ref = 2.0 * M + n;
  Eigen::MatrixXd X(static_cast<Eigen::Index>(modes.size()), kTerms);
  for (std::size_t i = 0; i < modes.size(); ++i) {
    const double u = mu_ref / (2.0 * modes[i] + n);
    for (int q = 0; q < kTerms; ++q) X(static_cast<Eigen::Index>(i), q) = std::pow(u, q + 2);
  }
  Eigen::VectorXd h(kTerms);
  for (int q = 0; q < kTerms; ++q) h(q) = std::pow(mu_ref, q + 2) * inverse_power_tail(q + 2, M, n);
  const Eigen::MatrixXd pinv = X.completeOrthogonalDecomposition().pseudoInverse();
  return pinv.transpose() * h;
}

}  // namespace

TailEstimate estimate_tail(const ModeSweep& sweep, TailPolicy policy) {
  const Eigen::Index R = static_cast<Eigen::Index>(sweep.r().size());
  const Eigen::Index S = static_cast<Eigen::Index>(sweep.s().size());
  TailEstimate out{Eigen::MatrixXcd::Zero(R, S), Eigen::MatrixXd::Zero(R, S)};
  const int M = sweep.modes_done();
  if (policy == TailPolicy::none || M == 0) return out;
  const int n = sweep.n();

  std::vector<int> upper, lower;
  for (const auto& [m, f] : sweep.samples()) {
    if (m >= M / 2 && m < M) upper.push_back(m);
    if (m >= M / 4 && m < M / 2) lower.push_back(m);
  }

  if (policy == TailPolicy::extrapolate && upper.size() >= 5 && lower.size() >= 5) {
    const Eigen::VectorXd wu = extrapolation_weights(upper, M, n);
    const Eigen::VectorXd wl = extrapolation_weights(lower, M, n);
    Eigen::MatrixXcd tu = Eigen::MatrixXcd::Zero(R, S), tl = Eigen::MatrixXcd::Zero(R, S);
    for (std::size_t i = 0; i < upper.size(); ++i)
      tu += wu(static_cast<Eigen::Index>(i)) * sweep.samples().at(upper[i]);
    for (std::size_t i = 0; i < lower.size(); ++i)
      tl += wl(static_cast<Eigen::Index>(i)) * sweep.samples().at(lower[i]);
    out.correction = tu;
    out.bound = (tu - tl).cwiseAbs();
    return out;
  }

  if (upper.empty()) {
    out.bound.setConstant(std::numeric_limits<double>::infinity());
    return out;
  }
  const double h2 = inverse_power_tail(2, M, n);
  for (int m : upper) {
    const double mu2 = std::pow(2.0 * m + n, 2);
    out.bound = out.bound.cwiseMax(sweep.samples().at(m).cwiseAbs() * (4.0 * mu2 * h2));
  }
  return out;
}

}  // namespace hdisp
