#pragma once

// Stochastic gradient training for GLVQ, GRLVQ and GMLVQ with an optional
// smoothed l1 penalty on the metric parameters, and the regularization path
// driver that ramps the penalty weight linearly.

#include "sparselvq/dataset.hpp"
#include "sparselvq/glvq.hpp"
#include "sparselvq/l1smooth.hpp"
#include "sparselvq/metric.hpp"
#include "sparselvq/types.hpp"

#include <cmath>
#include <functional>
#include <numeric>
#include <optional>
#include <random>
#include <sstream>
#include <string>
#include <vector>

namespace sparselvq {

enum class ModelKind { Glvq, Grlvq, Gmlvq };

inline const char* to_string(ModelKind kind) {
  switch (kind) {
    case ModelKind::Glvq: return "glvq";
    case ModelKind::Grlvq: return "grlvq";
    case ModelKind::Gmlvq: return "gmlvq";
  }
  return "unknown";
}

inline ModelKind parse_model_kind(const std::string& s) {
  if (s == "glvq") return ModelKind::Glvq;
  if (s == "grlvq") return ModelKind::Grlvq;
  if (s == "gmlvq") return ModelKind::Gmlvq;
  throw Error(ErrorCode::InvalidConfig, "unknown model kind '" + s + "'");
}

struct TrainConfig {
  std::size_t epochs = 100;
  double rate_proto = 1e-2;
  double rate_metric = 1e-3;
  /// Both rates are scaled by 1 / (1 + t * decay), t = epochs completed.
  double decay = 1e-3;
  SmoothingParam alpha{5.0};
  std::uint64_t seed = 0;
  TransferFn transfer = TransferFn::identity();
  ModelKind model_kind = ModelKind::Grlvq;
  Eigen::Index omega_rows = 0;  // gmlvq only; 0 means m = n
  int prototypes_per_class = 1;
  double sparsity_threshold = 1e-4;
};

/// Zero rates are accepted and freeze the corresponding parameters.
inline void validate(const TrainConfig& cfg) {
  if (cfg.epochs < 1) throw Error(ErrorCode::InvalidConfig, "epochs must be >= 1");
  if (!(cfg.rate_proto >= 0.0) || !(cfg.rate_metric >= 0.0) || !std::isfinite(cfg.rate_proto) ||
      !std::isfinite(cfg.rate_metric)) {
    throw Error(ErrorCode::InvalidConfig, "learning rates must be finite and >= 0");
  }
  if (!(cfg.decay >= 0.0)) throw Error(ErrorCode::InvalidConfig, "decay must be >= 0");
  SmoothingParam::checked(cfg.alpha.alpha);
  if (cfg.omega_rows < 0) throw Error(ErrorCode::InvalidConfig, "omega_rows must be >= 0");
  if (cfg.prototypes_per_class < 1) throw Error(ErrorCode::InvalidConfig, "prototypes per class must be >= 1");
  if (!(cfg.sparsity_threshold > 0.0)) throw Error(ErrorCode::InvalidConfig, "sparsity threshold must be > 0");
}

struct PathSchedule {
  double reg_weight_start = 0.0;
  double reg_weight_end = 1.0;
  std::size_t steps = 20;
  std::size_t epochs_per_step = 10;
};

inline void validate(const PathSchedule& s) {
  if (!(s.reg_weight_start >= 0.0) || !(s.reg_weight_end >= s.reg_weight_start) || !std::isfinite(s.reg_weight_end)) {
    throw Error(ErrorCode::InvalidConfig, "need 0 <= reg_weight_start <= reg_weight_end");
  }
  if (s.steps < 1) throw Error(ErrorCode::InvalidConfig, "steps must be >= 1");
  if (s.epochs_per_step < 1) throw Error(ErrorCode::InvalidConfig, "epochs_per_step must be >= 1");
}

/// Weight of each path step: start + (end - start) k / (steps - 1).
inline std::vector<double> schedule_weights(const PathSchedule& s) {
  std::vector<double> out;
  for (std::size_t k = 0; k < s.steps; ++k) {
    if (s.steps == 1) {
      out.push_back(s.reg_weight_start);
    } else {
      const double t = static_cast<double>(k) / static_cast<double>(s.steps - 1);
      out.push_back(s.reg_weight_start + (s.reg_weight_end - s.reg_weight_start) * t);
    }
  }
  return out;
}

/// Prototypes plus the metric parameters relevant to `kind`.
struct Model {
  ModelKind kind = ModelKind::Grlvq;
  PrototypeSet protos;
  RelevanceProfile rel;  // grlvq
  OmegaMatrix omega;     // gmlvq
  int num_classes = 0;
  std::size_t epochs_done = 0;

  Eigen::Index dims() const { return protos.dims(); }

  double distance(const VecRef& v, const VecRef& w) const {
    switch (kind) {
      case ModelKind::Glvq: return squared_euclidean(v, w);
      case ModelKind::Grlvq: return d_lambda(v, w, rel);
      case ModelKind::Gmlvq: return d_omega(v, w, omega);
    }
    return 0.0;
  }

  Vector grad_proto(const VecRef& v, const VecRef& w) const {
    switch (kind) {
      case ModelKind::Glvq: return grad_proto_euclidean(v, w);
      case ModelKind::Grlvq: return grad_proto_lambda(v, w, rel);
      case ModelKind::Gmlvq: return grad_proto_omega(v, w, omega);
    }
    return {};
  }

  /// lambda for grlvq, sqrt(diag(Omega^T Omega)) for gmlvq, uniform for glvq.
  RelevanceProfile profile() const {
    switch (kind) {
      case ModelKind::Glvq: return RelevanceProfile::uniform(dims());
      case ModelKind::Grlvq: return rel;
      case ModelKind::Gmlvq: return profile_of(omega);
    }
    return {};
  }

  /// Smoothed l1 penalty of the metric parameters (0 for glvq).
  double reg_term(double alpha) const {
    switch (kind) {
      case ModelKind::Glvq: return 0.0;
      case ModelKind::Grlvq: return l1_smooth(rel.lambda, alpha);
      case ModelKind::Gmlvq: return matrix_l1_smooth(omega.omega, alpha);
    }
    return 0.0;
  }

  double exact_l1() const {
    switch (kind) {
      case ModelKind::Glvq: return 0.0;
      case ModelKind::Grlvq: return l1_exact(rel.lambda);
      case ModelKind::Gmlvq: return matrix_l1_exact(omega.omega);
    }
    return 0.0;
  }

  /// Rows mapped so that the model distance becomes squared Euclidean:
  /// x for glvq, lambda * x for grlvq, Omega x for gmlvq.
  RowMatrix embed(const RowMatrix& rows) const {
    switch (kind) {
      case ModelKind::Glvq: return rows;
      case ModelKind::Grlvq: return rows * rel.lambda.asDiagonal();
      case ModelKind::Gmlvq: return rows * omega.omega.transpose();
    }
    return rows;
  }

  /// |sum of squared metric parameters - 1|.
  double normalization_error() const {
    switch (kind) {
      case ModelKind::Glvq: return 0.0;
      case ModelKind::Grlvq: return std::abs(rel.lambda.squaredNorm() - 1.0);
      case ModelKind::Gmlvq: return std::abs(omega.omega.squaredNorm() - 1.0);
    }
    return 0.0;
  }
};

/// Prototypes from class means; lambda uniform 1/sqrt(n); Omega with 1/sqrt(n)
/// on the diagonal plus N(0, 1e-6) jitter, then Frobenius-normalized.
inline Model init_model(const LabeledDataset& train, const TrainConfig& cfg) {
  validate(cfg);
  validate(train);
  const Eigen::Index n = train.dims();
  Model model;
  model.kind = cfg.model_kind;
  model.num_classes = train.num_classes;
  model.protos = init_prototypes(train, cfg.prototypes_per_class, cfg.seed);
  if (cfg.model_kind == ModelKind::Grlvq) model.rel = RelevanceProfile::uniform(n);
  if (cfg.model_kind == ModelKind::Gmlvq) {
    const Eigen::Index m = cfg.omega_rows == 0 ? n : cfg.omega_rows;
    if (m > n) throw Error(ErrorCode::InvalidConfig, "omega_rows must not exceed the data dimension");
    std::mt19937_64 rng(cfg.seed ^ 0x5851f42d4c957f2dULL);
    std::normal_distribution<double> gauss(0.0, 1.0);
    Matrix om(m, n);
    for (Eigen::Index i = 0; i < m; ++i) {
      for (Eigen::Index j = 0; j < n; ++j) om(i, j) = (i == j ? 1.0 / std::sqrt(static_cast<double>(n)) : 0.0) + 1e-3 * gauss(rng);
    }
    model.omega = normalize_omega(OmegaMatrix{om});
  }
  return model;
}

/// Index of the nearest prototype over all classes; ties go to the lowest index.
inline Eigen::Index nearest_prototype(const Model& model, const VecRef& v) {
  Eigen::Index best = 0;
  double best_d = model.distance(v, model.protos.prototype(0));
  for (Eigen::Index k = 1; k < model.protos.size(); ++k) {
    const double d = model.distance(v, model.protos.prototype(k));
    if (d < best_d) {
      best_d = d;
      best = k;
    }
  }
  return best;
}

inline int predict(const Model& model, const VecRef& v) {
  return model.protos.label(nearest_prototype(model, v));
}

/// Predicted labels for every row, computed in the embedded space.
inline std::vector<int> predict_all(const Model& model, const LabeledDataset& data) {
  require_same_dim(model.dims(), data.dims(), "predict (model dims vs data dims)");
  const RowMatrix x = model.embed(data.features);
  const RowMatrix w = model.embed(model.protos.vectors);
  std::vector<int> out(static_cast<std::size_t>(data.size()));
  for (Eigen::Index i = 0; i < x.rows(); ++i) {
    Eigen::Index best = 0;
    double best_d = (x.row(i) - w.row(0)).squaredNorm();
    for (Eigen::Index k = 1; k < w.rows(); ++k) {
      const double d = (x.row(i) - w.row(k)).squaredNorm();
      if (d < best_d) {
        best_d = d;
        best = k;
      }
    }
    out[static_cast<std::size_t>(i)] = model.protos.label(best);
  }
  return out;
}

inline double evaluate(const Model& model, const LabeledDataset& data) {
  require_same_dim(model.dims(), data.dims(), "evaluate (model dims vs data dims)");
  if (data.size() == 0) return 0.0;
  const auto predicted = predict_all(model, data);
  std::size_t hits = 0;
  for (std::size_t i = 0; i < predicted.size(); ++i) hits += predicted[i] == data.labels[i] ? 1 : 0;
  return static_cast<double>(hits) / static_cast<double>(data.size());
}

/// confusion[true][predicted]
inline std::vector<std::vector<std::size_t>> confusion_matrix(const Model& model, const LabeledDataset& data) {
  require_same_dim(model.dims(), data.dims(), "confusion_matrix (model dims vs data dims)");
  const auto c = static_cast<std::size_t>(std::max(model.num_classes, data.num_classes));
  std::vector<std::vector<std::size_t>> out(c, std::vector<std::size_t>(c, 0));
  const auto predicted = predict_all(model, data);
  for (std::size_t i = 0; i < predicted.size(); ++i) {
    ++out[static_cast<std::size_t>(data.labels[i])][static_cast<std::size_t>(predicted[i])];
  }
  return out;
}

/// Fraction of dimensions with lambda_i^2 < threshold.
inline double sparsity_of(const RelevanceProfile& rel, double threshold = 1e-4) {
  if (!(threshold > 0.0)) throw Error(ErrorCode::InvalidConfig, "sparsity threshold must be > 0");
  if (rel.size() == 0) return 0.0;
  const auto small = (rel.lambda.array().square() < threshold).count();
  return static_cast<double>(small) / static_cast<double>(rel.size());
}

/// GLVQ cost of the model on `data`, evaluated in the embedded space.
inline double model_cost(const Model& model, const LabeledDataset& data, const TransferFn& f) {
  require_same_dim(model.dims(), data.dims(), "model_cost (model dims vs data dims)");
  LabeledDataset embedded;
  embedded.features = model.embed(data.features);
  embedded.labels = data.labels;
  embedded.num_classes = data.num_classes;
  const PrototypeSet protos{model.embed(model.protos.vectors), model.protos.labels};
  return cost(embedded, protos, [](const VecRef& v, const VecRef& w) { return (v - w).squaredNorm(); }, f);
}

struct DataSplits {
  LabeledDataset train;
  std::optional<LabeledDataset> test;
};

struct EpochMetrics {
  std::size_t epoch = 0;  // 1-based, counted over the model's lifetime
  double train_accuracy = 0.0;
  std::optional<double> test_accuracy;
  double cost = 0.0;      // 0.5 sum f(mu) on the training set
  double reg_term = 0.0;  // smoothed l1 of the metric parameters
  double objective = 0.0; // cost + reg_weight * reg_term
  double exact_l1 = 0.0;
  double sparsity = 0.0;
  double reg_weight = 0.0;
  double normalization_error = 0.0;
  bool metric_degenerate = false;  // gmlvq with m = n and det(Lambda) < 1e-12
};

inline EpochMetrics measure(const Model& model, const DataSplits& data, const TrainConfig& cfg, double reg_weight) {
  EpochMetrics m;
  m.epoch = model.epochs_done;
  m.train_accuracy = evaluate(model, data.train);
  if (data.test && data.test->size() > 0) m.test_accuracy = evaluate(model, *data.test);
  m.cost = model_cost(model, data.train, cfg.transfer);
  m.reg_term = model.reg_term(cfg.alpha.alpha);
  m.objective = m.cost + reg_weight * m.reg_term;
  m.exact_l1 = model.exact_l1();
  m.sparsity = sparsity_of(model.profile(), cfg.sparsity_threshold);
  m.reg_weight = reg_weight;
  m.normalization_error = model.normalization_error();
  if (model.kind == ModelKind::Gmlvq && model.omega.rows() == model.omega.cols()) {
    const double det = model.omega.omega.determinant();
    m.metric_degenerate = det * det < 1e-12;
  }
  return m;
}

namespace detail {

inline void check_finite_update(const Model& model, const WinnerPair& w, std::size_t step, Eigen::Index sample,
                                const XiFactors& xi) {
  bool ok = model.protos.vectors.row(w.idx_plus).allFinite() && model.protos.vectors.row(w.idx_minus).allFinite();
  if (model.kind == ModelKind::Grlvq) ok = ok && model.rel.lambda.allFinite();
  if (model.kind == ModelKind::Gmlvq) ok = ok && model.omega.omega.allFinite();
  if (ok) return;
  std::ostringstream msg;
  msg << "non-finite parameters after step " << step << " (epoch " << model.epochs_done + 1 << ", sample " << sample
      << "): d+=" << w.d_plus << " d-=" << w.d_minus << " xi+=" << xi.plus << " xi-=" << xi.minus
      << " w+=" << w.idx_plus << " w-=" << w.idx_minus;
  throw Error(ErrorCode::NonFiniteUpdate, msg.str());
}

/// Clamp then normalize. If the step drove every weight to <= 0, the closest
/// point of the nonnegative unit sphere is the unit vector at the largest entry.
inline Vector project_profile(const Vector& stepped) {
  if ((stepped.array() > 0.0).any()) return normalize_lambda(clamp_lambda(RelevanceProfile{stepped})).lambda;
  Eigen::Index top = 0;
  stepped.maxCoeff(&top);
  Vector out = Vector::Zero(stepped.size());
  out[top] = 1.0;
  return out;
}

}  // namespace detail

/// One pass over a seeded permutation of the training set. For each sample:
/// winners under the current metric, then prototype and metric steps from
/// gradients taken at the pre-step parameters, then clamp (lambda) and
/// normalization. Metrics are measured after the pass.
inline EpochMetrics train_epoch(Model& model, const DataSplits& data, const TrainConfig& cfg, double reg_weight) {
  const LabeledDataset& train = data.train;
  require_same_dim(model.dims(), train.dims(), "train_epoch (model dims vs data dims)");
  const double schedule = 1.0 / (1.0 + static_cast<double>(model.epochs_done) * cfg.decay);
  const double rate_p = cfg.rate_proto * schedule;
  const double rate_m = cfg.rate_metric * schedule;
  const double alpha = cfg.alpha.alpha;

  std::vector<Eigen::Index> order(static_cast<std::size_t>(train.size()));
  std::iota(order.begin(), order.end(), Eigen::Index{0});
  std::seed_seq seq{static_cast<std::uint32_t>(cfg.seed), static_cast<std::uint32_t>(cfg.seed >> 32),
                    static_cast<std::uint32_t>(model.epochs_done)};
  std::mt19937_64 rng(seq);
  std::shuffle(order.begin(), order.end(), rng);

  auto dist = [&model](const VecRef& v, const VecRef& w) { return model.distance(v, w); };
  std::size_t step = 0;
  for (const Eigen::Index i : order) {
    ++step;
    const auto v = train.sample(i);
    const WinnerPair w = find_winners(v, train.labels[static_cast<std::size_t>(i)], model.protos, dist);
    if (!(w.d_plus + w.d_minus > 0.0)) continue;  // no gradient information
    const double mu = classifier_mu(w.d_plus, w.d_minus);
    const XiFactors xi = xi_factors(w.d_plus, w.d_minus, cfg.transfer, mu);
    const Vector w_plus = model.protos.prototype(w.idx_plus);
    const Vector w_minus = model.protos.prototype(w.idx_minus);
    const Vector grad_plus = model.grad_proto(v, w_plus);
    const Vector grad_minus = model.grad_proto(v, w_minus);

    if (rate_m > 0.0) {
      if (model.kind == ModelKind::Grlvq) {
        Vector g = xi.plus * grad_lambda(v, w_plus, model.rel) + xi.minus * grad_lambda(v, w_minus, model.rel);
        if (reg_weight != 0.0) g += reg_weight * l1_smooth_grad(model.rel.lambda, alpha);
        Vector stepped = model.rel.lambda - rate_m * g;
        if (!stepped.allFinite()) {
          model.rel.lambda = std::move(stepped);
          detail::check_finite_update(model, w, step, i, xi);
        }
        model.rel.lambda = detail::project_profile(stepped);
      } else if (model.kind == ModelKind::Gmlvq) {
        Matrix g = xi.plus * grad_omega(v, w_plus, model.omega) + xi.minus * grad_omega(v, w_minus, model.omega);
        if (reg_weight != 0.0) g += reg_weight * matrix_l1_smooth_grad(model.omega.omega, alpha);
        model.omega.omega -= rate_m * g;
        detail::check_finite_update(model, w, step, i, xi);
        model.omega = normalize_omega(model.omega);
      }
    }
    if (rate_p > 0.0) apply_prototype_update(model.protos, w, xi, grad_plus, grad_minus, rate_p);
    detail::check_finite_update(model, w, step, i, xi);
  }
  ++model.epochs_done;
  return measure(model, data, cfg, reg_weight);
}

using EpochCallback = std::function<void(const EpochMetrics&)>;

/// cfg.epochs epochs at a fixed penalty weight.
inline std::vector<EpochMetrics> train(Model& model, const DataSplits& data, const TrainConfig& cfg,
                                       double reg_weight = 0.0, const EpochCallback& on_epoch = {}) {
  validate(cfg);
  std::vector<EpochMetrics> out;
  out.reserve(cfg.epochs);
  for (std::size_t e = 0; e < cfg.epochs; ++e) {
    out.push_back(train_epoch(model, data, cfg, reg_weight));
    if (on_epoch) on_epoch(out.back());
  }
  return out;
}

struct PathStep {
  double reg_weight = 0.0;
  EpochMetrics metrics;  // after the last epoch of the step
  Model snapshot;
};

struct PathResult {
  std::vector<EpochMetrics> epochs;
  std::vector<PathStep> steps;
};

/// Continues training `model` through the schedule: for every weight of
/// schedule_weights(), epochs_per_step epochs, then a snapshot. Pretraining,
/// if wanted, is a prior call to train() with weight 0.
inline PathResult run_path(Model& model, const DataSplits& data, const TrainConfig& cfg, const PathSchedule& schedule,
                           const EpochCallback& on_epoch = {}) {
  validate(cfg);
  validate(schedule);
  PathResult result;
  for (const double weight : schedule_weights(schedule)) {
    for (std::size_t e = 0; e < schedule.epochs_per_step; ++e) {
      result.epochs.push_back(train_epoch(model, data, cfg, weight));
      if (on_epoch) on_epoch(result.epochs.back());
    }
    result.steps.push_back(PathStep{weight, result.epochs.back(), model});
  }
  return result;
}

}  // namespace sparselvq
