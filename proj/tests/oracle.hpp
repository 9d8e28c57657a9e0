#pragma once

// Test-only numerical oracles: central finite differences and error
// measures. Nothing here calls into the analytic gradient code.

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <functional>
#include <random>

namespace oracle {

inline double central_diff(const std::function<double(double)>& f, double x, double h = 1e-6) {
  return (f(x + h) - f(x - h)) / (2.0 * h);
}

inline Eigen::VectorXd fd_gradient(const std::function<double(const Eigen::VectorXd&)>& f, Eigen::VectorXd x,
                                   double h = 1e-6) {
  Eigen::VectorXd g(x.size());
  for (Eigen::Index i = 0; i < x.size(); ++i) {
    const double keep = x[i];
    x[i] = keep + h;
    const double up = f(x);
    x[i] = keep - h;
    const double down = f(x);
    x[i] = keep;
    g[i] = (up - down) / (2.0 * h);
  }
  return g;
}

inline Eigen::MatrixXd fd_gradient(const std::function<double(const Eigen::MatrixXd&)>& f, Eigen::MatrixXd x,
                                   double h = 1e-6) {
  Eigen::MatrixXd g(x.rows(), x.cols());
  for (Eigen::Index k = 0; k < x.size(); ++k) {
    const double keep = x.data()[k];
    x.data()[k] = keep + h;
    const double up = f(x);
    x.data()[k] = keep - h;
    const double down = f(x);
    x.data()[k] = keep;
    g.data()[k] = (up - down) / (2.0 * h);
  }
  return g;
}

/// |a - b| / max(|a|, |b|, floor), on the Frobenius norm for arrays.
template <class A, class B>
double rel_err(const A& a, const B& b, double floor = 1e-8) {
  const double diff = (a - b).norm();
  return diff / std::max({a.norm(), b.norm(), floor});
}

inline double rel_err(double a, double b, double floor = 1e-8) {
  return std::abs(a - b) / std::max({std::abs(a), std::abs(b), floor});
}

inline Eigen::VectorXd random_vector(std::mt19937_64& rng, Eigen::Index n, double lo = -1.0, double hi = 1.0) {
  std::uniform_real_distribution<double> u(lo, hi);
  Eigen::VectorXd v(n);
  for (Eigen::Index i = 0; i < n; ++i) v[i] = u(rng);
  return v;
}

inline Eigen::MatrixXd random_matrix(std::mt19937_64& rng, Eigen::Index m, Eigen::Index n, double lo = -1.0,
                                     double hi = 1.0) {
  std::uniform_real_distribution<double> u(lo, hi);
  Eigen::MatrixXd a(m, n);
  for (Eigen::Index k = 0; k < a.size(); ++k) a.data()[k] = u(rng);
  return a;
}

/// (1/alpha) ln(2 + e^{-alpha x} + e^{alpha x}) evaluated literally; only
/// valid while e^{alpha |x|} stays finite.
inline double abs_smooth_literal(double x, double alpha) {
  return std::log(2.0 + std::exp(-alpha * x) + std::exp(alpha * x)) / alpha;
}

}  // namespace oracle
