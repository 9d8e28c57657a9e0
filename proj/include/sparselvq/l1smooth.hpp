#pragma once

// Differentiable surrogates of |x|, the vector l1 norm and the max-column-sum
// matrix norm, with closed-form gradients.

#include "sparselvq/types.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <utility>

namespace sparselvq {

/// Smoothing parameter of |x|_alpha. Larger values approach |x| more closely.
struct SmoothingParam {
  double alpha = 5.0;

  static SmoothingParam checked(double alpha) {
    if (!(alpha > 0.0) || !std::isfinite(alpha)) {
      throw Error(ErrorCode::InvalidConfig, "alpha must be finite and > 0");
    }
    return SmoothingParam{alpha};
  }
};

/// |x|_a = (1/a) ln(2 + e^{-ax} + e^{ax}), evaluated as
/// |x| + (2/a) ln(1 + e^{-a|x|}) so that e^{a|x|} is never formed.
inline double abs_smooth(double x, double alpha) {
  const double ax = std::abs(x);
  return ax + (2.0 / alpha) * std::log1p(std::exp(-alpha * ax));
}

inline double abs_smooth_grad(double x, double alpha) {
  return std::tanh(0.5 * alpha * x);
}

/// Worst-case gap between |x|_alpha and |x| (attained at x = 0).
inline double abs_smooth_bound(double alpha) {
  return 2.0 * std::numbers::ln2 / alpha;
}

inline double l1_smooth(const VecRef& v, double alpha) {
  double s = 0.0;
  for (Eigen::Index i = 0; i < v.size(); ++i) s += abs_smooth(v[i], alpha);
  return s;
}

inline Vector l1_smooth_grad(const VecRef& v, double alpha) {
  return v.unaryExpr([alpha](double x) { return abs_smooth_grad(x, alpha); });
}

inline double l1_exact(const VecRef& v) { return v.cwiseAbs().sum(); }

/// max(x, y) = (x + y + |x - y|) / 2 with the absolute value smoothed.
inline double smooth_max(double x, double y, double alpha) {
  return 0.5 * (x + y + abs_smooth(x - y, alpha));
}

/// Partial derivatives of smooth_max with respect to (x, y).
inline std::pair<double, double> smooth_max_grad(double x, double y, double alpha) {
  const double t = abs_smooth_grad(x - y, alpha);
  return {0.5 * (1.0 + t), 0.5 * (1.0 - t)};
}

namespace detail {

inline Vector smooth_column_sums(const Matrix& om, double alpha) {
  Vector sums = Vector::Zero(om.cols());
  for (Eigen::Index j = 0; j < om.cols(); ++j) {
    for (Eigen::Index i = 0; i < om.rows(); ++i) sums[j] += abs_smooth(om(i, j), alpha);
  }
  return sums;
}

}  // namespace detail

/// Smooth surrogate of max_j sum_i |om_ij|. Column sums use abs_smooth; the
/// max is the nested recursion max(c_0, max(c_1, ..., max(c_{n-2}, c_{n-1}))),
/// i.e. column 0 is the outermost argument. smooth_max is not associative,
/// so this order is part of the contract.
inline double matrix_l1_smooth(const Matrix& om, double alpha) {
  if (om.cols() == 0) return 0.0;
  const Vector sums = detail::smooth_column_sums(om, alpha);
  double acc = sums[sums.size() - 1];
  for (Eigen::Index j = sums.size() - 2; j >= 0; --j) acc = smooth_max(sums[j], acc, alpha);
  return acc;
}

/// Exact gradient of matrix_l1_smooth, by reverse accumulation through the
/// max recursion and the smoothed absolute values.
inline Matrix matrix_l1_smooth_grad(const Matrix& om, double alpha) {
  const Eigen::Index n = om.cols();
  Matrix grad = Matrix::Zero(om.rows(), n);
  if (n == 0) return grad;
  // One exponential per entry serves both |x|_a and tanh(a x / 2):
  // with e = exp(-a|x|), tanh(a x / 2) = sign(x) (1 - e) / (1 + e).
  Matrix slope(om.rows(), n);
  Vector sums = Vector::Zero(n);
  for (Eigen::Index j = 0; j < n; ++j) {
    for (Eigen::Index i = 0; i < om.rows(); ++i) {
      const double x = om(i, j);
      const double e = std::exp(-alpha * std::abs(x));
      sums[j] += std::abs(x) + (2.0 / alpha) * std::log1p(e);
      slope(i, j) = std::copysign((1.0 - e) / (1.0 + e), x);
    }
  }

  // Forward: acc[j] = smooth_max(sums[j], acc[j + 1]), acc[n - 1] = sums[n - 1].
  Vector acc(n);
  acc[n - 1] = sums[n - 1];
  for (Eigen::Index j = n - 2; j >= 0; --j) acc[j] = smooth_max(sums[j], acc[j + 1], alpha);

  Vector dsum(n);
  double carry = 1.0;
  for (Eigen::Index j = 0; j + 1 < n; ++j) {
    const auto [dx, dy] = smooth_max_grad(sums[j], acc[j + 1], alpha);
    dsum[j] = carry * dx;
    carry *= dy;
  }
  dsum[n - 1] = carry;

  for (Eigen::Index j = 0; j < n; ++j) grad.col(j) = dsum[j] * slope.col(j);
  return grad;
}

/// An alternative closed form 0.5 tanh(a W_st / 2) - T / 2 together with its
/// auxiliary quantity W-bar_st (partial column sum minus the largest other
/// column sum). Kept only to be compared against matrix_l1_smooth_grad; it
/// is not used for training. For a single-column matrix the max over the
/// remaining columns is empty and is taken as 0.
inline Matrix matrix_l1_smooth_grad_closed_form(const Matrix& om, double alpha) {
  const Eigen::Index m = om.rows();
  const Eigen::Index n = om.cols();
  const Vector sums = detail::smooth_column_sums(om, alpha);
  Matrix grad(m, n);
  for (Eigen::Index t = 0; t < n; ++t) {
    double other_max = 0.0;
    bool any = false;
    for (Eigen::Index j = 0; j < n; ++j) {
      if (j == t) continue;
      other_max = any ? std::max(other_max, sums[j]) : sums[j];
      any = true;
    }
    for (Eigen::Index s = 0; s < m; ++s) {
      const double w = om(s, t);
      const double partial = sums[t] - abs_smooth(w, alpha);
      const double wbar = partial - other_max;
      const double q = 1.0 + std::exp(alpha * w);
      const double num = std::exp(-alpha * (w + wbar)) * (std::exp(2.0 * alpha * w) - 1.0) *
                         (std::exp(2.0 * alpha * wbar) - std::exp(2.0 * alpha * w) / std::pow(q, 4));
      const double den = 2.0 + std::exp(-alpha * (w - wbar)) + std::exp(alpha * (w + wbar)) +
                         std::exp(alpha * (w - wbar)) / (q * q);
      grad(s, t) = 0.5 * std::tanh(0.5 * alpha * w) - 0.5 * (num / den);
    }
  }
  return grad;
}

struct ClosedFormComparison {
  double max_abs_diff = 0.0;
  double max_rel_diff = 0.0;
  bool finite = true;
};

/// Compares the alternative closed form against the fold gradient. Differences
/// are reported, never reconciled.
inline ClosedFormComparison compare_closed_form(const Matrix& om, double alpha) {
  const Matrix exact = matrix_l1_smooth_grad(om, alpha);
  const Matrix closed = matrix_l1_smooth_grad_closed_form(om, alpha);
  ClosedFormComparison out;
  out.finite = closed.allFinite();
  for (Eigen::Index k = 0; k < exact.size(); ++k) {
    const double d = std::abs(exact.data()[k] - closed.data()[k]);
    const double scale = std::max(std::abs(exact.data()[k]), 1e-12);
    out.max_abs_diff = std::max(out.max_abs_diff, d);
    out.max_rel_diff = std::max(out.max_rel_diff, d / scale);
  }
  return out;
}

/// Max absolute column sum, the operator norm induced by the vector l1 norm.
inline double matrix_l1_exact(const Matrix& om) {
  if (om.size() == 0) return 0.0;
  return om.cwiseAbs().colwise().sum().maxCoeff();
}

struct SandwichResult {
  double lower = 0.0;   ///< ||Omega||_1^2 / m
  double middle = 0.0;  ///< ||Omega^T Omega||_1
  double upper = 0.0;   ///< n ||Omega||_1^2
  bool holds = false;
};

/// Evaluates (1/m)||W||_1^2 <= ||W^T W||_1 <= n ||W||_1^2 with exact norms.
/// Comparisons allow a relative slack of 1e-12 for rounding in W^T W.
inline SandwichResult sandwich_check(const Matrix& om) {
  const double norm = matrix_l1_exact(om);
  const Matrix lambda = om.transpose() * om;
  SandwichResult r;
  r.lower = om.rows() > 0 ? norm * norm / static_cast<double>(om.rows()) : 0.0;
  r.middle = matrix_l1_exact(lambda);
  r.upper = static_cast<double>(om.cols()) * norm * norm;
  constexpr double slack = 1e-12;
  r.holds = r.lower <= r.middle * (1.0 + slack) && r.middle <= r.upper * (1.0 + slack);
  return r;
}

}  // namespace sparselvq
