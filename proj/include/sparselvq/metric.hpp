#pragma once

// Adaptive dissimilarities: the diagonal relevance metric
//   d(v, w) = sum_i lambda_i^2 (v_i - w_i)^2
// and the full matrix metric
//   d(v, w) = |Omega (v - w)|^2,  Lambda = Omega^T Omega,
// together with their gradients and the normalization steps applied after
// every parameter update.

#include "sparselvq/types.hpp"

#include <cmath>

namespace sparselvq {

/// Relevance weights lambda_i; lambda_i^2 are the diagonal entries of the
/// metric. Kept nonnegative with sum of squares 1 during training.
struct RelevanceProfile {
  Vector lambda;

  static RelevanceProfile uniform(Eigen::Index n) {
    return RelevanceProfile{Vector::Constant(n, 1.0 / std::sqrt(static_cast<double>(n)))};
  }
  Eigen::Index size() const { return lambda.size(); }
};

/// m x n projection defining Lambda = Omega^T Omega.
struct OmegaMatrix {
  Matrix omega;

  Eigen::Index rows() const { return omega.rows(); }
  Eigen::Index cols() const { return omega.cols(); }
  Matrix lambda() const { return omega.transpose() * omega; }
};

inline double squared_euclidean(const VecRef& v, const VecRef& w) {
  require_same_dim(v.size(), w.size(), "squared_euclidean");
  return (v - w).squaredNorm();
}

inline Vector grad_proto_euclidean(const VecRef& v, const VecRef& w) {
  require_same_dim(v.size(), w.size(), "grad_proto_euclidean");
  return -2.0 * (v - w);
}

inline double d_lambda(const VecRef& v, const VecRef& w, const RelevanceProfile& rel) {
  require_same_dim(v.size(), w.size(), "d_lambda");
  require_same_dim(v.size(), rel.size(), "d_lambda");
  return (rel.lambda.array().square() * (v - w).array().square()).sum();
}

inline double d_omega(const VecRef& v, const VecRef& w, const OmegaMatrix& om) {
  require_same_dim(v.size(), w.size(), "d_omega");
  require_same_dim(v.size(), om.cols(), "d_omega");
  return (om.omega * (v - w)).squaredNorm();
}

/// d d_lambda / d w = -2 diag(lambda^2) (v - w)
inline Vector grad_proto_lambda(const VecRef& v, const VecRef& w, const RelevanceProfile& rel) {
  require_same_dim(v.size(), w.size(), "grad_proto_lambda");
  require_same_dim(v.size(), rel.size(), "grad_proto_lambda");
  return (-2.0 * rel.lambda.array().square() * (v - w).array()).matrix();
}

/// d d_omega / d w = -2 Omega^T Omega (v - w)
inline Vector grad_proto_omega(const VecRef& v, const VecRef& w, const OmegaMatrix& om) {
  require_same_dim(v.size(), w.size(), "grad_proto_omega");
  require_same_dim(v.size(), om.cols(), "grad_proto_omega");
  return -2.0 * (om.omega.transpose() * (om.omega * (v - w)));
}

/// Component j: 2 lambda_j (v_j - w_j)^2
inline Vector grad_lambda(const VecRef& v, const VecRef& w, const RelevanceProfile& rel) {
  require_same_dim(v.size(), w.size(), "grad_lambda");
  require_same_dim(v.size(), rel.size(), "grad_lambda");
  return (2.0 * rel.lambda.array() * (v - w).array().square()).matrix();
}

/// Entry (r, c): 2 [Omega (v - w)]_r (v - w)_c
inline Matrix grad_omega(const VecRef& v, const VecRef& w, const OmegaMatrix& om) {
  require_same_dim(v.size(), w.size(), "grad_omega");
  require_same_dim(v.size(), om.cols(), "grad_omega");
  const Vector diff = v - w;
  return 2.0 * (om.omega * diff) * diff.transpose();
}

inline RelevanceProfile normalize_lambda(const RelevanceProfile& rel) {
  const double norm = rel.lambda.norm();
  if (!(norm > 0.0)) throw Error(ErrorCode::AllZeroParameters, "relevance profile is all zero");
  return RelevanceProfile{rel.lambda / norm};
}

inline OmegaMatrix normalize_omega(const OmegaMatrix& om) {
  const double norm = om.omega.norm();
  if (!(norm > 0.0)) throw Error(ErrorCode::AllZeroParameters, "omega matrix is all zero");
  return OmegaMatrix{om.omega / norm};
}

/// Projects onto lambda_i >= 0. Applied before normalize_lambda.
inline RelevanceProfile clamp_lambda(const RelevanceProfile& rel) {
  RelevanceProfile out{rel.lambda.cwiseMax(0.0)};
  if (!(out.lambda.array() > 0.0).any()) {
    throw Error(ErrorCode::AllZeroParameters, "clamping removed every relevance weight");
  }
  return out;
}

/// Relevance profile induced by a matrix metric: sqrt(Lambda_ii), i.e. the
/// column norms of Omega.
inline RelevanceProfile profile_of(const OmegaMatrix& om) {
  return RelevanceProfile{om.omega.colwise().norm().transpose()};
}

}  // namespace sparselvq
