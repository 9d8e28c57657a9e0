#pragma once

// JSON and CSV encodings of models, configurations and run metrics.
// nlohmann::json writes doubles in shortest round-trip form.

#include "sparselvq/dataset.hpp"
#include "sparselvq/glvq.hpp"
#include "sparselvq/metric.hpp"
#include "sparselvq/trainer.hpp"

#include <nlohmann/json.hpp>

#include <fstream>
#include <string>
#include <vector>

namespace sparselvq {

using json = nlohmann::json;

namespace detail {

inline json matrix_to_json(const auto& m) {
  json rows = json::array();
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    json row = json::array();
    for (Eigen::Index j = 0; j < m.cols(); ++j) row.push_back(m(i, j));
    rows.push_back(std::move(row));
  }
  return rows;
}

template <class M>
M matrix_from_json(const json& j, const char* what) {
  if (!j.is_array()) throw Error(ErrorCode::Io, std::string(what) + ": expected array of rows");
  const auto rows = static_cast<Eigen::Index>(j.size());
  const auto cols = rows > 0 ? static_cast<Eigen::Index>(j.front().size()) : Eigen::Index{0};
  M m(rows, cols);
  for (Eigen::Index i = 0; i < rows; ++i) {
    const auto& row = j[static_cast<std::size_t>(i)];
    if (static_cast<Eigen::Index>(row.size()) != cols) throw Error(ErrorCode::Io, std::string(what) + ": ragged rows");
    for (Eigen::Index k = 0; k < cols; ++k) m(i, k) = row[static_cast<std::size_t>(k)].get<double>();
  }
  return m;
}

}  // namespace detail

inline json to_json(const PrototypeSet& p) {
  return json{{"labels", p.labels}, {"vectors", detail::matrix_to_json(p.vectors)}};
}

inline PrototypeSet prototypes_from_json(const json& j) {
  PrototypeSet p;
  p.labels = j.at("labels").get<std::vector<int>>();
  p.vectors = detail::matrix_from_json<RowMatrix>(j.at("vectors"), "prototype vectors");
  if (static_cast<std::size_t>(p.vectors.rows()) != p.labels.size()) {
    throw Error(ErrorCode::Io, "prototype labels and vectors differ in count");
  }
  return p;
}

inline json to_json(const RelevanceProfile& r) {
  return json(std::vector<double>(r.lambda.data(), r.lambda.data() + r.lambda.size()));
}

inline RelevanceProfile profile_from_json(const json& j) {
  const auto v = j.get<std::vector<double>>();
  return RelevanceProfile{Eigen::Map<const Vector>(v.data(), static_cast<Eigen::Index>(v.size()))};
}

inline json to_json(const OmegaMatrix& om) { return detail::matrix_to_json(om.omega); }

inline OmegaMatrix omega_from_json(const json& j) { return OmegaMatrix{detail::matrix_from_json<Matrix>(j, "omega")}; }

inline json to_json(const Model& m) {
  json j{{"kind", to_string(m.kind)},
         {"num_classes", m.num_classes},
         {"epochs_done", m.epochs_done},
         {"prototypes", to_json(m.protos)}};
  if (m.kind == ModelKind::Grlvq) j["lambda"] = to_json(m.rel);
  if (m.kind == ModelKind::Gmlvq) j["omega"] = to_json(m.omega);
  return j;
}

inline Model model_from_json(const json& j) {
  Model m;
  m.kind = parse_model_kind(j.at("kind").get<std::string>());
  m.num_classes = j.at("num_classes").get<int>();
  m.epochs_done = j.value("epochs_done", std::size_t{0});
  m.protos = prototypes_from_json(j.at("prototypes"));
  if (m.kind == ModelKind::Grlvq) {
    m.rel = profile_from_json(j.at("lambda"));
    require_same_dim(m.rel.size(), m.dims(), "model lambda vs prototypes");
  }
  if (m.kind == ModelKind::Gmlvq) {
    m.omega = omega_from_json(j.at("omega"));
    require_same_dim(m.omega.cols(), m.dims(), "model omega vs prototypes");
  }
  validate(m.protos, m.num_classes);
  return m;
}

inline json to_json(const TrainConfig& c) {
  return json{{"epochs", c.epochs},
              {"rate_proto", c.rate_proto},
              {"rate_metric", c.rate_metric},
              {"decay", c.decay},
              {"alpha", c.alpha.alpha},
              {"seed", c.seed},
              {"transfer", c.transfer.kind == TransferFn::Kind::Identity ? "identity" : "sigmoid"},
              {"sigmoid_slope", c.transfer.slope},
              {"model", to_string(c.model_kind)},
              {"omega_rows", c.omega_rows},
              {"prototypes_per_class", c.prototypes_per_class},
              {"sparsity_threshold", c.sparsity_threshold}};
}

inline TrainConfig train_config_from_json(const json& j) {
  TrainConfig c;
  c.epochs = j.at("epochs").get<std::size_t>();
  c.rate_proto = j.at("rate_proto").get<double>();
  c.rate_metric = j.at("rate_metric").get<double>();
  c.decay = j.at("decay").get<double>();
  c.alpha = SmoothingParam::checked(j.at("alpha").get<double>());
  c.seed = j.at("seed").get<std::uint64_t>();
  const auto transfer = j.at("transfer").get<std::string>();
  c.transfer = transfer == "sigmoid" ? TransferFn::sigmoid(j.at("sigmoid_slope").get<double>()) : TransferFn::identity();
  c.model_kind = parse_model_kind(j.at("model").get<std::string>());
  c.omega_rows = j.at("omega_rows").get<Eigen::Index>();
  c.prototypes_per_class = j.at("prototypes_per_class").get<int>();
  c.sparsity_threshold = j.at("sparsity_threshold").get<double>();
  return c;
}

inline json to_json(const PathSchedule& s) {
  return json{{"reg_start", s.reg_weight_start},
              {"reg_end", s.reg_weight_end},
              {"reg_steps", s.steps},
              {"epochs_per_step", s.epochs_per_step}};
}

inline PathSchedule schedule_from_json(const json& j) {
  PathSchedule s;
  s.reg_weight_start = j.at("reg_start").get<double>();
  s.reg_weight_end = j.at("reg_end").get<double>();
  s.steps = j.at("reg_steps").get<std::size_t>();
  s.epochs_per_step = j.at("epochs_per_step").get<std::size_t>();
  return s;
}

inline json to_json(const EpochMetrics& m) {
  return json{{"epoch", m.epoch},
              {"train_accuracy", m.train_accuracy},
              {"test_accuracy", m.test_accuracy ? json(*m.test_accuracy) : json(nullptr)},
              {"cost", m.cost},
              {"reg_term", m.reg_term},
              {"objective", m.objective},
              {"exact_l1", m.exact_l1},
              {"sparsity", m.sparsity},
              {"reg_weight", m.reg_weight},
              {"normalization_error", m.normalization_error},
              {"metric_degenerate", m.metric_degenerate}};
}

inline void write_json(const json& j, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(ErrorCode::Io, "cannot write " + path);
  out << j.dump(2) << '\n';
  if (!out) throw Error(ErrorCode::Io, "write failed for " + path);
}

inline json read_json(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::Io, "cannot open " + path);
  try {
    return json::parse(in);
  } catch (const json::exception& e) {
    throw Error(ErrorCode::Io, path + ": " + e.what());
  }
}

/// dim_index,dim_name,lambda,lambda_sq
inline void write_profile_csv(const RelevanceProfile& rel, const std::vector<std::string>& dim_names,
                              const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(ErrorCode::Io, "cannot write " + path);
  out << "dim_index,dim_name,lambda,lambda_sq\n";
  for (Eigen::Index i = 0; i < rel.size(); ++i) {
    const auto k = static_cast<std::size_t>(i);
    out << i << ',' << (k < dim_names.size() ? dim_names[k] : "d" + std::to_string(i)) << ','
        << detail::format_double(rel.lambda[i]) << ',' << detail::format_double(rel.lambda[i] * rel.lambda[i]) << '\n';
  }
}

/// reg_weight,train_acc,test_acc,sparsity; one row per path step.
inline void write_path_csv(const std::vector<PathStep>& steps, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(ErrorCode::Io, "cannot write " + path);
  out << "reg_weight,train_acc,test_acc,sparsity\n";
  for (const auto& s : steps) {
    out << detail::format_double(s.reg_weight) << ',' << detail::format_double(s.metrics.train_accuracy) << ','
        << (s.metrics.test_accuracy ? detail::format_double(*s.metrics.test_accuracy) : std::string()) << ','
        << detail::format_double(s.metrics.sparsity) << '\n';
  }
}

}  // namespace sparselvq
