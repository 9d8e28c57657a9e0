#pragma once

// Generalized LVQ: cost, classifier function, winner search and prototype
// updates for an arbitrary differentiable dissimilarity.

#include "sparselvq/dataset.hpp"
#include "sparselvq/types.hpp"

#include <cmath>
#include <limits>
#include <random>
#include <utility>
#include <vector>

namespace sparselvq {

struct PrototypeSet {
  RowMatrix vectors;        // M x n
  std::vector<int> labels;  // M entries

  Eigen::Index size() const { return vectors.rows(); }
  Eigen::Index dims() const { return vectors.cols(); }
  auto prototype(Eigen::Index k) const { return vectors.row(k).transpose(); }
  int label(Eigen::Index k) const { return labels[static_cast<std::size_t>(k)]; }
};

/// Checks M >= C, that every class in [0, num_classes) owns a prototype and
/// that every entry is finite.
inline void validate(const PrototypeSet& protos, int num_classes) {
  if (static_cast<std::size_t>(protos.size()) != protos.labels.size()) {
    throw Error(ErrorCode::DimensionMismatch, "prototype rows and labels differ in count");
  }
  std::vector<int> owned(static_cast<std::size_t>(num_classes), 0);
  for (int y : protos.labels) {
    if (y < 0 || y >= num_classes) throw Error(ErrorCode::IndexOutOfRange, "prototype label outside [0, C)");
    ++owned[static_cast<std::size_t>(y)];
  }
  for (int c = 0; c < num_classes; ++c) {
    if (owned[static_cast<std::size_t>(c)] == 0) {
      throw Error(ErrorCode::NoSameClassPrototype, "class " + std::to_string(c) + " owns no prototype");
    }
  }
  if (!protos.vectors.allFinite()) throw Error(ErrorCode::NonFiniteValue, "prototype entries must be finite");
}

/// Class means plus N(0, (0.01 * std_j)^2) jitter per dimension; prototypes
/// are ordered by class, `per_class` each. Every class must be present.
inline PrototypeSet init_prototypes(const LabeledDataset& data, int per_class, std::uint64_t seed) {
  if (per_class < 1) throw Error(ErrorCode::InvalidConfig, "prototypes per class must be >= 1");
  const auto counts = data.class_counts();
  for (std::size_t c = 0; c < counts.size(); ++c) {
    if (counts[c] == 0) {
      throw Error(ErrorCode::ClassTooSmall, "class " + std::to_string(c) + " absent from training data",
                  std::nullopt, c);
    }
  }
  const Eigen::Index n = data.dims();
  RowMatrix means = RowMatrix::Zero(data.num_classes, n);
  for (Eigen::Index i = 0; i < data.size(); ++i) means.row(data.labels[static_cast<std::size_t>(i)]) += data.features.row(i);
  for (int c = 0; c < data.num_classes; ++c) means.row(c) /= static_cast<double>(counts[static_cast<std::size_t>(c)]);

  const Eigen::RowVectorXd mean_all = data.features.colwise().mean();
  const Eigen::RowVectorXd stddev =
      ((data.features.rowwise() - mean_all).array().square().colwise().sum() / static_cast<double>(data.size()))
          .sqrt();

  std::mt19937_64 rng(seed);
  std::normal_distribution<double> gauss(0.0, 1.0);
  PrototypeSet protos;
  protos.vectors.resize(static_cast<Eigen::Index>(data.num_classes) * per_class, n);
  Eigen::Index row = 0;
  for (int c = 0; c < data.num_classes; ++c) {
    for (int k = 0; k < per_class; ++k, ++row) {
      for (Eigen::Index j = 0; j < n; ++j) protos.vectors(row, j) = means(c, j) + 0.01 * stddev[j] * gauss(rng);
      protos.labels.push_back(c);
    }
  }
  return protos;
}

/// Monotone transfer f applied to the classifier function.
struct TransferFn {
  enum class Kind { Identity, Sigmoid };
  Kind kind = Kind::Identity;
  double slope = 1.0;

  static TransferFn identity() { return {}; }
  static TransferFn sigmoid(double slope) {
    if (!(slope > 0.0) || !std::isfinite(slope)) throw Error(ErrorCode::InvalidConfig, "sigmoid slope must be > 0");
    return {Kind::Sigmoid, slope};
  }

  double operator()(double mu) const {
    if (kind == Kind::Identity) return mu;
    return 1.0 / (1.0 + std::exp(-slope * mu));
  }
  double derivative(double mu) const {
    if (kind == Kind::Identity) return 1.0;
    const double s = (*this)(mu);
    return slope * s * (1.0 - s);
  }
};

struct WinnerPair {
  Eigen::Index idx_plus = -1;
  Eigen::Index idx_minus = -1;
  double d_plus = 0.0;
  double d_minus = 0.0;
};

/// Closest same-class and closest other-class prototypes under `dist`.
/// Ties go to the lowest prototype index.
template <class Dist>
WinnerPair find_winners(const VecRef& sample, int label, const PrototypeSet& protos, Dist&& dist) {
  WinnerPair w;
  w.d_plus = std::numeric_limits<double>::infinity();
  w.d_minus = std::numeric_limits<double>::infinity();
  for (Eigen::Index k = 0; k < protos.size(); ++k) {
    const double d = dist(sample, protos.prototype(k));
    if (protos.label(k) == label) {
      if (w.idx_plus < 0 || d < w.d_plus) {
        w.idx_plus = k;
        w.d_plus = d;
      }
    } else if (w.idx_minus < 0 || d < w.d_minus) {
      w.idx_minus = k;
      w.d_minus = d;
    }
  }
  if (w.idx_plus < 0) throw Error(ErrorCode::NoSameClassPrototype, "no prototype for class " + std::to_string(label));
  if (w.idx_minus < 0) throw Error(ErrorCode::NoOtherClassPrototype, "no prototype of another class");
  return w;
}

/// (d+ - d-) / (d+ + d-); negative means correctly classified. Defined as 0
/// when both distances vanish.
inline double classifier_mu(double d_plus, double d_minus) {
  const double denom = d_plus + d_minus;
  if (denom == 0.0) return 0.0;
  return (d_plus - d_minus) / denom;
}

template <class Dist>
double cost(const LabeledDataset& data, const PrototypeSet& protos, Dist&& dist, const TransferFn& f) {
  double sum = 0.0;
  for (Eigen::Index i = 0; i < data.size(); ++i) {
    const auto w = find_winners(data.sample(i), data.labels[static_cast<std::size_t>(i)], protos, dist);
    sum += f(classifier_mu(w.d_plus, w.d_minus));
  }
  return 0.5 * sum;
}

struct XiFactors {
  double plus = 0.0;   // >= 0
  double minus = 0.0;  // <= 0
};

/// Derivatives of f(mu) with respect to d+ and d-:
///   xi+ =  f'(mu) 2 d- / (d+ + d-)^2,   xi- = -f'(mu) 2 d+ / (d+ + d-)^2.
inline XiFactors xi_factors(double d_plus, double d_minus, const TransferFn& f, double mu) {
  const double denom = d_plus + d_minus;
  if (!(denom > 0.0)) throw Error(ErrorCode::DegenerateDistances, "d+ + d- must be positive");
  const double scale = f.derivative(mu) * 2.0 / (denom * denom);
  return {scale * d_minus, -scale * d_plus};
}

/// In-place stochastic step on the two winners:
///   w+ -= rate xi+ dd+/dw+,  w- -= rate xi- dd-/dw-.
inline void apply_prototype_update(PrototypeSet& protos, const WinnerPair& winners, const XiFactors& xi,
                                   const VecRef& grad_plus, const VecRef& grad_minus, double rate) {
  protos.vectors.row(winners.idx_plus) -= (rate * xi.plus) * grad_plus.transpose();
  protos.vectors.row(winners.idx_minus) -= (rate * xi.minus) * grad_minus.transpose();
}

inline PrototypeSet update_prototypes(const PrototypeSet& protos, const WinnerPair& winners, const XiFactors& xi,
                                      const VecRef& grad_plus, const VecRef& grad_minus, double rate) {
  PrototypeSet out = protos;
  apply_prototype_update(out, winners, xi, grad_plus, grad_minus, rate);
  return out;
}

}  // namespace sparselvq
