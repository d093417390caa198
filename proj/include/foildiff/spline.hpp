#pragma once

#include <algorithm>
#include <cmath>
#include <vector>

#include "foildiff/common.hpp"

namespace foildiff {

// Natural cubic spline through (t_i, v_i) with strictly increasing knots.
class CubicSpline {
 public:
  CubicSpline() = default;

  CubicSpline(std::vector<double> t, std::vector<double> v) : t_(std::move(t)), a_(std::move(v)) {
    const std::size_t n = t_.size();
    if (n != a_.size() || n < 2) {
      fail(ErrorCode::DegenerateProfile, "spline needs at least 2 knots");
    }
    std::vector<double> h(n - 1);
    for (std::size_t i = 0; i + 1 < n; ++i) {
      h[i] = t_[i + 1] - t_[i];
      if (h[i] <= 0.0) {
        fail(ErrorCode::DegenerateProfile, "spline knots must be strictly increasing");
      }
    }

    // Tridiagonal system for second-derivative coefficients, natural ends.
    c_.assign(n, 0.0);
    if (n > 2) {
      std::vector<double> diag(n - 2), rhs(n - 2), upper(n - 2);
      for (std::size_t i = 0; i + 2 < n; ++i) {
        diag[i] = 2.0 * (h[i] + h[i + 1]);
        upper[i] = h[i + 1];
        rhs[i] = 3.0 * ((a_[i + 2] - a_[i + 1]) / h[i + 1] - (a_[i + 1] - a_[i]) / h[i]);
      }
      // Thomas algorithm; sub-diagonal equals h[i+1] by symmetry.
      for (std::size_t i = 1; i + 2 < n; ++i) {
        const double w = h[i] / diag[i - 1];
        diag[i] -= w * upper[i - 1];
        rhs[i] -= w * rhs[i - 1];
      }
      c_[n - 2] = rhs[n - 3] / diag[n - 3];
      for (std::size_t i = n - 3; i >= 1; --i) {
        c_[i] = (rhs[i - 1] - upper[i - 1] * c_[i + 1]) / diag[i - 1];
        if (i == 1) break;
      }
    }

    b_.assign(n - 1, 0.0);
    d_.assign(n - 1, 0.0);
    for (std::size_t i = 0; i + 1 < n; ++i) {
      b_[i] = (a_[i + 1] - a_[i]) / h[i] - h[i] / 3.0 * (2.0 * c_[i] + c_[i + 1]);
      d_[i] = (c_[i + 1] - c_[i]) / (3.0 * h[i]);
    }
  }

  // Evaluates at t, clamped to the knot range.
  double operator()(double t) const {
    const std::size_t i = segment(t);
    const double dt = t - t_[i];
    return a_[i] + dt * (b_[i] + dt * (c_[i] + dt * d_[i]));
  }

  double front() const { return t_.front(); }
  double back() const { return t_.back(); }
  std::size_t segments() const { return t_.size() - 1; }
  double knot(std::size_t i) const { return t_[i]; }
  double value(std::size_t i) const { return a_[i]; }

 private:
  std::size_t segment(double t) const {
    if (t <= t_.front()) return 0;
    if (t >= t_.back()) return t_.size() - 2;
    const auto it = std::upper_bound(t_.begin(), t_.end(), t);
    return std::size_t(it - t_.begin()) - 1;
  }

  std::vector<double> t_, a_, b_, c_, d_;
};

}  // namespace foildiff
