#include "oracle.hpp"

#include "sparselvq/metric.hpp"

#include <gtest/gtest.h>

#include <random>

using namespace sparselvq;

namespace {

RelevanceProfile random_profile(std::mt19937_64& rng, Eigen::Index n) {
  return RelevanceProfile{oracle::random_vector(rng, n, 0.0, 1.0)};
}

}  // namespace

TEST(DLambda, CoincidentPointsAndMaskedDimension) {
  Vector v(2), w(2);
  v << 1.0, 2.0;
  EXPECT_EQ(d_lambda(v, v, RelevanceProfile::uniform(2)), 0.0);

  Vector lam(2);
  lam << 1.0, 0.0;
  v << 0.0, 5.0;
  w << 0.0, 0.0;
  EXPECT_EQ(d_lambda(v, w, RelevanceProfile{lam}), 0.0);
}

TEST(DLambda, EqualsExplicitQuadraticForm) {
  std::mt19937_64 rng(1);
  for (int k = 0; k < 100; ++k) {
    const Vector v = oracle::random_vector(rng, 6), w = oracle::random_vector(rng, 6);
    const RelevanceProfile rel = random_profile(rng, 6);
    const Matrix lambda = rel.lambda.array().square().matrix().asDiagonal();
    const double expected = (v - w).transpose() * lambda * (v - w);
    EXPECT_NEAR(d_lambda(v, w, rel), expected, 1e-12);
  }
}

TEST(DLambda, UniformProfileIsScaledEuclidean) {
  std::mt19937_64 rng(2);
  const Vector v = oracle::random_vector(rng, 9), w = oracle::random_vector(rng, 9);
  EXPECT_NEAR(9.0 * d_lambda(v, w, RelevanceProfile::uniform(9)), (v - w).squaredNorm(), 1e-12);
}

TEST(DLambda, DimensionMismatch) {
  try {
    d_lambda(Vector::Zero(3), Vector::Zero(4), RelevanceProfile::uniform(3));
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::DimensionMismatch);
  }
  EXPECT_THROW(d_omega(Vector::Zero(3), Vector::Zero(3), OmegaMatrix{Matrix::Identity(2, 2)}), Error);
  EXPECT_THROW(grad_omega(Vector::Zero(3), Vector::Zero(2), OmegaMatrix{Matrix::Identity(3, 3)}), Error);
}

TEST(DOmega, IdentityIsSquaredEuclidean) {
  std::mt19937_64 rng(3);
  const Vector v = oracle::random_vector(rng, 5), w = oracle::random_vector(rng, 5);
  EXPECT_NEAR(d_omega(v, w, OmegaMatrix{Matrix::Identity(5, 5)}), (v - w).squaredNorm(), 1e-14);
  EXPECT_EQ(d_omega(v, v, OmegaMatrix{Matrix::Identity(5, 5)}), 0.0);
}

TEST(DOmega, EqualsBilinearFormOfLambda) {
  std::mt19937_64 rng(4);
  for (int k = 0; k < 100; ++k) {
    const OmegaMatrix om{oracle::random_matrix(rng, 3, 5)};
    const Vector v = oracle::random_vector(rng, 5), w = oracle::random_vector(rng, 5);
    const Matrix lambda = om.omega.transpose() * om.omega;
    const double expected = (v - w).transpose() * lambda * (v - w);
    EXPECT_NEAR(d_omega(v, w, om), expected, 1e-12);
  }
}

TEST(DOmega, DiagonalOmegaMatchesRelevanceMetric) {
  std::mt19937_64 rng(5);
  for (int k = 0; k < 100; ++k) {
    const Eigen::Index n = 1 + k % 8;
    const RelevanceProfile rel{oracle::random_vector(rng, n)};
    const OmegaMatrix om{rel.lambda.asDiagonal()};
    const Vector v = oracle::random_vector(rng, n), w = oracle::random_vector(rng, n);
    EXPECT_NEAR(d_omega(v, w, om), d_lambda(v, w, rel), 1e-12);
  }
}

TEST(GradProto, TrivialCases) {
  std::mt19937_64 rng(6);
  const Vector v = oracle::random_vector(rng, 4), w = oracle::random_vector(rng, 4);
  EXPECT_TRUE(grad_proto_lambda(v, v, random_profile(rng, 4)).isZero());
  EXPECT_TRUE(grad_proto_omega(v, v, OmegaMatrix{oracle::random_matrix(rng, 2, 4)}).isZero());
  EXPECT_TRUE(grad_proto_omega(v, w, OmegaMatrix{Matrix::Identity(4, 4)}).isApprox(-2.0 * (v - w)));
  EXPECT_TRUE(grad_proto_lambda(v, w, RelevanceProfile{Vector::Ones(4)}).isApprox(-2.0 * (v - w)));
}

TEST(GradProto, MatchFiniteDifferences) {
  std::mt19937_64 rng(7);
  for (int k = 0; k < 100; ++k) {
    const Vector v = oracle::random_vector(rng, 6), w = oracle::random_vector(rng, 6);
    const RelevanceProfile rel = random_profile(rng, 6);
    const OmegaMatrix om{oracle::random_matrix(rng, 3, 6)};
    const Vector fd_l = oracle::fd_gradient([&](const Eigen::VectorXd& x) { return d_lambda(v, x, rel); }, w);
    const Vector fd_o = oracle::fd_gradient([&](const Eigen::VectorXd& x) { return d_omega(v, x, om); }, w);
    EXPECT_LT(oracle::rel_err(grad_proto_lambda(v, w, rel), fd_l), 1e-5);
    EXPECT_LT(oracle::rel_err(grad_proto_omega(v, w, om), fd_o), 1e-5);
  }
}

TEST(GradLambda, TrivialCases) {
  std::mt19937_64 rng(8);
  const Vector v = oracle::random_vector(rng, 4), w = oracle::random_vector(rng, 4);
  EXPECT_TRUE(grad_lambda(v, v, random_profile(rng, 4)).isZero());
  RelevanceProfile rel = random_profile(rng, 4);
  rel.lambda[2] = 0.0;
  EXPECT_EQ(grad_lambda(v, w, rel)[2], 0.0);
}

TEST(GradLambda, MatchesFiniteDifferences) {
  std::mt19937_64 rng(9);
  for (int k = 0; k < 100; ++k) {
    const Vector v = oracle::random_vector(rng, 6), w = oracle::random_vector(rng, 6);
    const RelevanceProfile rel = random_profile(rng, 6);
    const Vector fd = oracle::fd_gradient(
        [&](const Eigen::VectorXd& lam) { return d_lambda(v, w, RelevanceProfile{lam}); }, rel.lambda);
    EXPECT_LT(oracle::rel_err(grad_lambda(v, w, rel), fd), 1e-5);
  }
}

TEST(GradOmega, TrivialCases) {
  std::mt19937_64 rng(10);
  const Vector v = oracle::random_vector(rng, 4);
  EXPECT_TRUE(grad_omega(v, v, OmegaMatrix{oracle::random_matrix(rng, 2, 4)}).isZero());

  Matrix a(1, 1);
  a << 0.7;
  Vector x(1), zero = Vector::Zero(1);
  x << 1.5;
  EXPECT_NEAR(grad_omega(x, zero, OmegaMatrix{a})(0, 0), 2.0 * 0.7 * 1.5 * 1.5, 1e-15);
}

TEST(GradOmega, MatchesFiniteDifferences) {
  std::mt19937_64 rng(11);
  for (int k = 0; k < 100; ++k) {
    const Vector v = oracle::random_vector(rng, 5), w = oracle::random_vector(rng, 5);
    const OmegaMatrix om{oracle::random_matrix(rng, 3, 5)};
    const Matrix fd = oracle::fd_gradient(
        [&](const Eigen::MatrixXd& m) { return d_omega(v, w, OmegaMatrix{m}); }, om.omega);
    EXPECT_LT(oracle::rel_err(grad_omega(v, w, om), fd), 1e-5);
  }
}

TEST(Normalize, ThreeFourFive) {
  Vector lam(2);
  lam << 3.0, 4.0;
  const auto r = normalize_lambda(RelevanceProfile{lam});
  EXPECT_NEAR(r.lambda[0], 0.6, 1e-15);
  EXPECT_NEAR(r.lambda[1], 0.8, 1e-15);
}

TEST(Normalize, IdempotentAndScaleInvariant) {
  std::mt19937_64 rng(12);
  std::uniform_real_distribution<double> scale(0.01, 100.0);
  for (int k = 0; k < 100; ++k) {
    const RelevanceProfile rel = random_profile(rng, 7);
    const auto once = normalize_lambda(rel);
    EXPECT_NEAR(once.lambda.squaredNorm(), 1.0, 1e-12);
    EXPECT_LT((normalize_lambda(once).lambda - once.lambda).cwiseAbs().maxCoeff(), 1e-12);
    const double c = scale(rng);
    EXPECT_LT((normalize_lambda(RelevanceProfile{c * rel.lambda}).lambda - once.lambda).cwiseAbs().maxCoeff(), 1e-12);

    const OmegaMatrix om{oracle::random_matrix(rng, 3, 5)};
    const auto on = normalize_omega(om);
    EXPECT_NEAR(on.omega.norm(), 1.0, 1e-12);
    EXPECT_LT((normalize_omega(on).omega - on.omega).cwiseAbs().maxCoeff(), 1e-12);
    EXPECT_LT((normalize_omega(OmegaMatrix{c * om.omega}).omega - on.omega).cwiseAbs().maxCoeff(), 1e-12);
  }
}

TEST(Normalize, AllZeroRejected) {
  try {
    normalize_lambda(RelevanceProfile{Vector::Zero(3)});
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::AllZeroParameters);
  }
  EXPECT_THROW(normalize_omega(OmegaMatrix{Matrix::Zero(2, 3)}), Error);
}

TEST(Clamp, Examples) {
  Vector lam(2);
  lam << 0.5, -0.1;
  const auto r = clamp_lambda(RelevanceProfile{lam});
  EXPECT_EQ(r.lambda[0], 0.5);
  EXPECT_EQ(r.lambda[1], 0.0);

  lam << -0.5, -0.1;
  try {
    clamp_lambda(RelevanceProfile{lam});
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::AllZeroParameters);
  }
}

TEST(Clamp, ComponentwiseMax) {
  std::mt19937_64 rng(13);
  for (int k = 0; k < 100; ++k) {
    Vector lam = oracle::random_vector(rng, 8);
    lam[0] = 0.25;  // keep one positive entry
    const auto r = clamp_lambda(RelevanceProfile{lam});
    for (Eigen::Index i = 0; i < lam.size(); ++i) EXPECT_EQ(r.lambda[i], std::max(lam[i], 0.0));
  }
}

TEST(ProfileOf, ColumnNormsOfOmega) {
  std::mt19937_64 rng(14);
  const OmegaMatrix om = normalize_omega(OmegaMatrix{oracle::random_matrix(rng, 3, 4)});
  const auto rel = profile_of(om);
  const Matrix lambda = om.lambda();
  for (Eigen::Index j = 0; j < 4; ++j) EXPECT_NEAR(rel.lambda[j] * rel.lambda[j], lambda(j, j), 1e-14);
  EXPECT_NEAR(rel.lambda.squaredNorm(), 1.0, 1e-12);
}
