#pragma once

#include <functional>
#include <memory>
#include <span>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "hdisp/common.hpp"

namespace hdisp {

class GroupParams {
 public:
  explicit GroupParams(int n);

  int n() const { return n_; }
  int homogeneous_dimension() const { return 2 * n_ + 2; }
  // surface measure of the unit sphere in R^{2n}
  double sphere_measure() const { return sphere_measure_; }
  // constant in front of the inversion sum, 2^{n-1}/pi^{n+1}
  double inversion_constant() const { return inversion_constant_; }
  // binomial(m+n-1, m): multiplicity of Laguerre mode m
  double mode_multiplicity(int m) const;

 private:
  int n_;
  double sphere_measure_;
  double inversion_constant_;
};

// 4(2m+n)|lambda|
double eigenvalue(int m, double lambda, const GroupParams& g);

// How the stored lambda-nodes represent the full line.
//   none:      nodes cover the signed line explicitly
//   even:      nodes are positive; c(-lambda) = c(lambda)
//   hermitian: nodes are positive; c(-lambda) = conj(c(lambda))
enum class LambdaSymmetry { none, even, hermitian };

std::string to_string(LambdaSymmetry s);
LambdaSymmetry lambda_symmetry_from_string(const std::string& s);

struct ModeGrid {
  std::vector<double> nodes;
  std::vector<double> weights;
  std::size_t size() const { return nodes.size(); }
  bool operator==(const ModeGrid&) const = default;
};

using ModeGrids = std::vector<ModeGrid>;

struct SphericalCoefficients {
  int n = 1;
  LambdaSymmetry symmetry = LambdaSymmetry::none;
  std::shared_ptr<const ModeGrids> grids;
  std::vector<std::vector<cplx>> values;
  double tail_bound = 0.0;

  int m_max() const { return static_cast<int>(values.size()) - 1; }
  const ModeGrid& grid(int m) const { return (*grids)[m]; }
  // Throws std::invalid_argument on shape, ordering, or finiteness violations.
  void validate() const;
};

SphericalCoefficients zero_coefficients(int n, LambdaSymmetry symmetry,
                                        std::shared_ptr<const ModeGrids> grids);

struct Multiplier {
  std::function<cplx(double)> symbol;
  bool unimodular = false;
};

// Radial function on H^n given as (|z|, s) -> value. Outside |r| <= radius_r,
// |s| <= radius_s it is treated as zero.
struct RadialProfile {
  std::function<cplx(double, double)> eval;
  double radius_r = 0.0;
  double radius_s = 0.0;
  double tail_bound = 0.0;
};

struct TransformQuadrature {
  double abs_tol = 1e-9;  // per coefficient, between successive doublings
  int order = 16;
  int min_panels_r = 8;
  int min_panels_s = 8;
  int max_doublings = 6;
};

struct TransformReport {
  double error_estimate = 0.0;
  int panels_r = 0;
  int panels_s = 0;
};

// c[m][k] = binom(m+n-1,m)^{-1} * int int e^{i lambda_k s} f(r,s)
//           L_m^{(n-1)}(2|lambda_k| r^2) e^{-|lambda_k| r^2} |S^{2n-1}| r^{2n-1} dr ds
SphericalCoefficients forward_transform(const RadialProfile& f,
                                        std::shared_ptr<const ModeGrids> grids,
                                        LambdaSymmetry symmetry, const GroupParams& g,
                                        const TransformQuadrature& quad = {},
                                        TransformReport* report = nullptr);

// Pointwise reconstruction with ascending-m compensated summation.
cplx reconstruct_point(const SphericalCoefficients& c, const GroupParams& g, double r,
                       double s);

struct InverseOptions {
  double radius_s = 0.0;  // 0: half the aliasing radius of the coarsest mode grid
};
RadialProfile inverse_transform(std::shared_ptr<const SphericalCoefficients> c,
                                const GroupParams& g, const InverseOptions& opt = {});

SphericalCoefficients apply_multiplier(const SphericalCoefficients& c, const Multiplier& h,
                                       const GroupParams& g);

// Pointwise product; both sets must live on identical grids.
SphericalCoefficients convolve(const SphericalCoefficients& f, const SphericalCoefficients& h);

// Sum_m binom(m+n-1,m) Sum_k w_k |c[m][k]|^2 |lambda_k|^n over the stored nodes.
double weighted_coefficient_norm2(const SphericalCoefficients& c, const GroupParams& g);

// ||f||_2^2 of the reconstructed function (stored nodes extended by symmetry).
double plancherel_norm2(const SphericalCoefficients& c, const GroupParams& g);

bool same_grids(const SphericalCoefficients& a, const SphericalCoefficients& b);

nlohmann::json to_json(const SphericalCoefficients& c);
SphericalCoefficients coefficients_from_json(const nlohmann::json& j);

}  // namespace hdisp
