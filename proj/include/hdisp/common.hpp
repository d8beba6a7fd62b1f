#pragma once

#include <cmath>
#include <complex>
#include <stdexcept>
#include <string>

namespace hdisp {

using cplx = std::complex<double>;

inline constexpr double kPi = 3.14159265358979323846264338327950288;

// Raised when refinement runs out of levels or the panel budget is exhausted
// before two successive estimates agree.
class NonconvergenceError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class GridMismatchError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

class ConfigError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

// Neumaier's variant of Kahan summation: stays exact-ish when an addend is
// larger in magnitude than the running sum.
class CompensatedSum {
 public:
  void add(double x) {
    const double t = sum_ + x;
    if (std::abs(sum_) >= std::abs(x))
      comp_ += (sum_ - t) + x;
    else
      comp_ += (x - t) + sum_;
    sum_ = t;
  }
  CompensatedSum& operator+=(double x) {
    add(x);
    return *this;
  }
  double value() const { return sum_ + comp_; }

 private:
  double sum_ = 0.0;
  double comp_ = 0.0;
};

class CompensatedComplexSum {
 public:
  CompensatedComplexSum& operator+=(cplx x) {
    re_.add(x.real());
    im_.add(x.imag());
    return *this;
  }
  cplx value() const { return {re_.value(), im_.value()}; }

 private:
  CompensatedSum re_, im_;
};

}  // namespace hdisp
