#include "oracle.hpp"

#include "sparselvq/glvq.hpp"
#include "sparselvq/metric.hpp"

#include <gtest/gtest.h>

#include <limits>
#include <random>

using namespace sparselvq;

namespace {

auto euclid = [](const VecRef& v, const VecRef& w) { return squared_euclidean(v, w); };

PrototypeSet random_prototypes(std::mt19937_64& rng, int classes, int per_class, Eigen::Index n) {
  PrototypeSet p;
  p.vectors = oracle::random_matrix(rng, classes * per_class, n);
  for (int c = 0; c < classes; ++c) {
    for (int k = 0; k < per_class; ++k) p.labels.push_back(c);
  }
  return p;
}

// Exhaustive scan written independently of find_winners.
std::pair<Eigen::Index, Eigen::Index> brute_winners(const Vector& v, int label, const PrototypeSet& p) {
  Eigen::Index plus = -1, minus = -1;
  double dp = std::numeric_limits<double>::max(), dm = std::numeric_limits<double>::max();
  for (Eigen::Index k = 0; k < p.size(); ++k) {
    const double d = (v - p.vectors.row(k).transpose()).squaredNorm();
    if (p.labels[static_cast<std::size_t>(k)] == label) {
      if (d < dp) dp = d, plus = k;
    } else if (d < dm) {
      dm = d, minus = k;
    }
  }
  return {plus, minus};
}

LabeledDataset one_sample(const Vector& v, int label, int classes) {
  LabeledDataset ds;
  ds.features = v.transpose();
  ds.labels = {label};
  ds.num_classes = classes;
  return ds;
}

}  // namespace

TEST(ClassifierMu, Examples) {
  EXPECT_EQ(classifier_mu(1.0, 3.0), -0.5);
  EXPECT_EQ(classifier_mu(3.0, 1.0), 0.5);
  EXPECT_EQ(classifier_mu(2.0, 2.0), 0.0);
  EXPECT_EQ(classifier_mu(0.0, 0.0), 0.0);
}

TEST(ClassifierMu, BoundedInMinusOneOne) {
  std::mt19937_64 rng(1);
  std::uniform_real_distribution<double> u(0.0, 10.0);
  for (int k = 0; k < 1000; ++k) {
    const double a = u(rng), b = u(rng);
    const double mu = classifier_mu(a, b);
    EXPECT_GE(mu, -1.0);
    EXPECT_LE(mu, 1.0);
    EXPECT_EQ(mu < 0.0, a < b);
  }
}

TEST(FindWinners, MatchesExhaustiveScan) {
  std::mt19937_64 rng(2);
  for (int k = 0; k < 200; ++k) {
    const PrototypeSet p = random_prototypes(rng, 3, 2, 4);
    const Vector v = oracle::random_vector(rng, 4);
    const int label = k % 3;
    const auto w = find_winners(v, label, p, euclid);
    const auto [plus, minus] = brute_winners(v, label, p);
    EXPECT_EQ(w.idx_plus, plus);
    EXPECT_EQ(w.idx_minus, minus);
    EXPECT_EQ(p.label(w.idx_plus), label);
    EXPECT_NE(p.label(w.idx_minus), label);
    EXPECT_DOUBLE_EQ(w.d_plus, (v - p.prototype(plus)).squaredNorm());
  }
}

TEST(FindWinners, TiesGoToLowestIndex) {
  PrototypeSet p;
  p.vectors = RowMatrix(4, 1);
  p.vectors << 1.0, -1.0, 1.0, -1.0;
  p.labels = {0, 0, 1, 1};
  const auto w = find_winners(Vector::Zero(1), 0, p, euclid);
  EXPECT_EQ(w.idx_plus, 0);
  EXPECT_EQ(w.idx_minus, 2);
}

TEST(FindWinners, MissingClassesRaise) {
  PrototypeSet p;
  p.vectors = RowMatrix::Zero(2, 2);
  p.labels = {0, 0};
  try {
    find_winners(Vector::Zero(2), 0, p, euclid);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::NoOtherClassPrototype);
  }
  try {
    find_winners(Vector::Zero(2), 1, p, euclid);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::NoSameClassPrototype);
  }
}

TEST(Cost, SingleSampleExamples) {
  PrototypeSet p;
  p.vectors = RowMatrix(2, 1);
  p.vectors << 1.0, 3.0;
  p.labels = {0, 1};
  Vector v(1);
  v << 0.0;  // d+ = 1, d- = 9, mu = -0.8
  EXPECT_NEAR(cost(one_sample(v, 0, 2), p, euclid, TransferFn::identity()), -0.4, 1e-15);
  EXPECT_NEAR(cost(one_sample(v, 1, 2), p, euclid, TransferFn::identity()), 0.4, 1e-15);
  const double s = 1.0 / (1.0 + std::exp(0.8 * 2.0));
  EXPECT_NEAR(cost(one_sample(v, 0, 2), p, euclid, TransferFn::sigmoid(2.0)), 0.5 * s, 1e-15);
}

TEST(Xi, Examples) {
  // d+ = 1, d- = 1: 2 * 1 / 4 = 0.5.
  const auto xi = xi_factors(1.0, 1.0, TransferFn::identity(), 0.0);
  EXPECT_DOUBLE_EQ(xi.plus, 0.5);
  EXPECT_DOUBLE_EQ(xi.minus, -0.5);
  const auto xi2 = xi_factors(1.0, 3.0, TransferFn::identity(), -0.5);
  EXPECT_DOUBLE_EQ(xi2.plus, 6.0 / 16.0);
  EXPECT_DOUBLE_EQ(xi2.minus, -2.0 / 16.0);
}

TEST(Xi, DegenerateDistancesRaise) {
  try {
    xi_factors(0.0, 0.0, TransferFn::identity(), 0.0);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::DegenerateDistances);
  }
}

TEST(Xi, SignsAndFiniteDifferences) {
  // xi are derivatives of f(mu), not of f(mu) / 2.
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> u(0.1, 5.0);
  for (const auto& f : {TransferFn::identity(), TransferFn::sigmoid(3.0)}) {
    for (int k = 0; k < 100; ++k) {
      const double dp = u(rng), dm = u(rng);
      const auto xi = xi_factors(dp, dm, f, classifier_mu(dp, dm));
      EXPECT_GE(xi.plus, 0.0);
      EXPECT_LE(xi.minus, 0.0);
      const double fd_p = oracle::central_diff([&](double x) { return f(classifier_mu(x, dm)); }, dp);
      const double fd_m = oracle::central_diff([&](double x) { return f(classifier_mu(dp, x)); }, dm);
      EXPECT_LT(oracle::rel_err(xi.plus, fd_p), 1e-5);
      EXPECT_LT(oracle::rel_err(xi.minus, fd_m), 1e-5);
    }
  }
}

TEST(PrototypeGradient, MatchesFiniteDifferencesOfHalfTransfer) {
  // The update direction xi * dd/dw equals 2 * d/dw [f(mu) / 2] for the two
  // winners, over relevance and matrix metrics.
  std::mt19937_64 rng(4);
  for (int k = 0; k < 100; ++k) {
    const PrototypeSet p = random_prototypes(rng, 3, 2, 5);
    const Vector v = oracle::random_vector(rng, 5);
    const int label = k % 3;
    const RelevanceProfile rel{oracle::random_vector(rng, 5, 0.2, 1.0)};
    const OmegaMatrix om{oracle::random_matrix(rng, 3, 5)};
    const TransferFn f = k % 2 == 0 ? TransferFn::identity() : TransferFn::sigmoid(2.0);

    auto check = [&](auto dist, auto grad_proto) {
      const auto w = find_winners(v, label, p, dist);
      const double mu = classifier_mu(w.d_plus, w.d_minus);
      const auto xi = xi_factors(w.d_plus, w.d_minus, f, mu);
      for (const auto& [idx, factor] : {std::pair{w.idx_plus, xi.plus}, std::pair{w.idx_minus, xi.minus}}) {
        const Vector analytic = factor * grad_proto(v, p.prototype(idx));
        // Winners are fixed while perturbing, as in the local cost.
        auto half_cost = [&](const Eigen::VectorXd& x) {
          const double dp = idx == w.idx_plus ? dist(v, x) : w.d_plus;
          const double dm = idx == w.idx_minus ? dist(v, x) : w.d_minus;
          return 0.5 * f(classifier_mu(dp, dm));
        };
        const Vector fd = oracle::fd_gradient(half_cost, Vector(p.prototype(idx)));
        EXPECT_LT(oracle::rel_err(analytic, 2.0 * fd), 1e-5);
      }
    };
    check([&](const VecRef& a, const VecRef& b) { return d_lambda(a, b, rel); },
          [&](const VecRef& a, const VecRef& b) { return grad_proto_lambda(a, b, rel); });
    check([&](const VecRef& a, const VecRef& b) { return d_omega(a, b, om); },
          [&](const VecRef& a, const VecRef& b) { return grad_proto_omega(a, b, om); });
  }
}

TEST(Update, TouchesOnlyTheTwoWinners) {
  std::mt19937_64 rng(5);
  const PrototypeSet p = random_prototypes(rng, 3, 2, 4);
  const Vector v = oracle::random_vector(rng, 4);
  const auto w = find_winners(v, 1, p, euclid);
  const auto xi = xi_factors(w.d_plus, w.d_minus, TransferFn::identity(), classifier_mu(w.d_plus, w.d_minus));
  const Vector gp = grad_proto_euclidean(v, p.prototype(w.idx_plus));
  const Vector gm = grad_proto_euclidean(v, p.prototype(w.idx_minus));
  const PrototypeSet q = update_prototypes(p, w, xi, gp, gm, 0.1);
  for (Eigen::Index k = 0; k < p.size(); ++k) {
    if (k == w.idx_plus || k == w.idx_minus) {
      EXPECT_GT((q.vectors.row(k) - p.vectors.row(k)).norm(), 0.0);
    } else {
      EXPECT_EQ(q.vectors.row(k), p.vectors.row(k));
    }
  }
  // Attract the correct winner, repel the wrong one.
  EXPECT_LT((v - q.prototype(w.idx_plus)).squaredNorm(), w.d_plus);
  EXPECT_GT((v - q.prototype(w.idx_minus)).squaredNorm(), w.d_minus);
  EXPECT_EQ(q.labels, p.labels);
}

TEST(Update, SmallStepLowersSampleCost) {
  std::mt19937_64 rng(6);
  int decreased = 0;
  for (int k = 0; k < 100; ++k) {
    const PrototypeSet p = random_prototypes(rng, 2, 1, 3);
    const Vector v = oracle::random_vector(rng, 3);
    const auto ds = one_sample(v, 0, 2);
    const auto w = find_winners(v, 0, p, euclid);
    const auto xi = xi_factors(w.d_plus, w.d_minus, TransferFn::identity(), classifier_mu(w.d_plus, w.d_minus));
    const PrototypeSet q = update_prototypes(p, w, xi, grad_proto_euclidean(v, p.prototype(w.idx_plus)),
                                             grad_proto_euclidean(v, p.prototype(w.idx_minus)), 1e-3);
    if (cost(ds, q, euclid, TransferFn::identity()) < cost(ds, p, euclid, TransferFn::identity())) ++decreased;
  }
  EXPECT_EQ(decreased, 100);
}

TEST(InitPrototypes, ClassMeansAndLabels) {
  LabeledDataset ds;
  ds.features = RowMatrix(4, 2);
  ds.features << 0, 0, 2, 2, 10, 10, 12, 12;
  ds.labels = {0, 0, 1, 1};
  ds.num_classes = 2;
  const auto p = init_prototypes(ds, 2, 7);
  ASSERT_EQ(p.size(), 4);
  EXPECT_EQ(p.labels, (std::vector<int>{0, 0, 1, 1}));
  EXPECT_NEAR(p.vectors(0, 0), 1.0, 0.2);
  EXPECT_NEAR(p.vectors(3, 1), 11.0, 0.2);
  EXPECT_NO_THROW(validate(p, 2));
}

TEST(InitPrototypes, AbsentClassRaises) {
  LabeledDataset ds;
  ds.features = RowMatrix::Zero(2, 2);
  ds.labels = {0, 0};
  ds.num_classes = 2;
  try {
    init_prototypes(ds, 1, 0);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::ClassTooSmall);
  }
}

TEST(Validate, RejectsClassWithoutPrototype) {
  PrototypeSet p;
  p.vectors = RowMatrix::Zero(2, 2);
  p.labels = {0, 0};
  EXPECT_THROW(validate(p, 2), Error);
  p.labels = {0, 1};
  EXPECT_NO_THROW(validate(p, 2));
  p.vectors(0, 0) = std::numeric_limits<double>::quiet_NaN();
  EXPECT_THROW(validate(p, 2), Error);
}
