#pragma once

// Command-line front end: synth | train | path | eval.
// Exit codes: 0 success, 1 runtime failure, 2 usage error.

#include "sparselvq/sparselvq.hpp"

#include <CLI11.hpp>

#include <chrono>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <numeric>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

namespace sparselvq::cli {

inline constexpr const char* kToolVersion = "0.1.0";

struct DataSpec {
  std::string path;
  std::string label_col = "label";
  std::string test_path;  // empty: split `path`
  bool normalize = false;
  std::string bands;      // empty: keep all columns
};

/// Everything needed to re-execute a train or path run.
struct RunManifest {
  std::string command;
  TrainConfig config;
  PathSchedule schedule;
  std::size_t pretrain_epochs = 0;
  DataSpec data;
  SplitSpec split;
  std::string out;
  std::string tool_version = kToolVersion;
  std::string timestamp;
};

class UsageError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

inline json to_json(const RunManifest& m) {
  json j{{"command", m.command},
         {"config", sparselvq::to_json(m.config)},
         {"data",
          {{"path", m.data.path},
           {"label_col", m.data.label_col},
           {"test_path", m.data.test_path},
           {"normalize", m.data.normalize},
           {"bands", m.data.bands}}},
         {"split", {{"train_fraction", m.split.train_fraction}, {"stratified", m.split.stratified}, {"seed", m.split.seed}}},
         {"out", m.out},
         {"tool_version", m.tool_version},
         {"timestamp", m.timestamp}};
  if (m.command == "path") {
    j["schedule"] = sparselvq::to_json(m.schedule);
    j["pretrain_epochs"] = m.pretrain_epochs;
  }
  return j;
}

inline RunManifest manifest_from_json(const json& j) {
  RunManifest m;
  m.command = j.at("command").get<std::string>();
  m.config = train_config_from_json(j.at("config"));
  const auto& d = j.at("data");
  m.data.path = d.at("path").get<std::string>();
  m.data.label_col = d.at("label_col").get<std::string>();
  m.data.test_path = d.value("test_path", std::string());
  m.data.normalize = d.value("normalize", false);
  m.data.bands = d.value("bands", std::string());
  const auto& s = j.at("split");
  m.split.train_fraction = s.at("train_fraction").get<double>();
  m.split.stratified = s.at("stratified").get<bool>();
  m.split.seed = s.at("seed").get<std::uint64_t>();
  m.out = j.value("out", std::string());
  m.tool_version = j.value("tool_version", std::string(kToolVersion));
  m.timestamp = j.value("timestamp", std::string());
  if (m.command == "path") {
    m.schedule = schedule_from_json(j.at("schedule"));
    m.pretrain_epochs = j.value("pretrain_epochs", std::size_t{0});
  }
  return m;
}

inline std::string utc_timestamp() {
  const std::time_t now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&now, &tm);
  std::ostringstream os;
  os << std::put_time(&tm, "%Y-%m-%dT%H:%M:%SZ");
  return os.str();
}

inline LabeledDataset load_prepared(const std::string& path, const DataSpec& spec) {
  LabeledDataset ds = load_csv(path, spec.label_col);
  if (spec.normalize) ds = l2_normalize(ds);
  if (!spec.bands.empty()) ds = select_bands(ds, parse_band_list(spec.bands));
  return ds;
}

inline DataSplits prepare_splits(const RunManifest& m) {
  LabeledDataset all = load_prepared(m.data.path, m.data);
  if (!m.data.test_path.empty()) {
    LabeledDataset test = load_prepared(m.data.test_path, m.data);
    require_same_dim(all.dims(), test.dims(), "train vs test data");
    return DataSplits{std::move(all), std::move(test)};
  }
  auto [train, test] = split(all, m.split);
  return DataSplits{std::move(train), std::move(test)};
}

/// Runs a train or path manifest into m.out.
inline int execute_run(RunManifest m, std::ostream& out, std::ostream& err) {
  namespace fs = std::filesystem;
  if (m.out.empty()) throw UsageError("--out is required");
  if (m.data.path.empty()) throw UsageError("--data is required");
  validate(m.config);
  if (m.command == "path") validate(m.schedule);
  m.timestamp = utc_timestamp();
  m.tool_version = kToolVersion;

  fs::create_directories(m.out);
  const fs::path dir(m.out);
  write_json(to_json(m), (dir / "manifest.json").string());

  const DataSplits data = prepare_splits(m);
  write_json(metadata_json(data.train), (dir / "dataset_meta.json").string());

  std::ofstream metrics((dir / "metrics.jsonl").string(), std::ios::binary);
  if (!metrics) throw Error(ErrorCode::Io, "cannot write metrics.jsonl");
  bool warned = false;
  auto on_epoch = [&](const EpochMetrics& e) {
    metrics << sparselvq::to_json(e).dump() << '\n';
    if (e.metric_degenerate && !warned) {
      err << "warning: det(Omega^T Omega) below 1e-12 at epoch " << e.epoch << '\n';
      warned = true;
    }
  };

  Model model = init_model(data.train, m.config);
  if (m.command == "train") {
    train(model, data, m.config, 0.0, on_epoch);
  } else {
    if (m.pretrain_epochs > 0) {
      TrainConfig pre = m.config;
      pre.epochs = m.pretrain_epochs;
      train(model, data, pre, 0.0, on_epoch);
    }
    const PathResult result = run_path(model, data, m.config, m.schedule, on_epoch);
    fs::create_directories(dir / "snapshots");
    for (std::size_t k = 0; k < result.steps.size(); ++k) {
      std::ostringstream name;
      name << "step_" << std::setw(3) << std::setfill('0') << k << ".json";
      json snap = sparselvq::to_json(result.steps[k].snapshot);
      snap["reg_weight"] = result.steps[k].reg_weight;
      snap["metrics"] = sparselvq::to_json(result.steps[k].metrics);
      write_json(snap, (dir / "snapshots" / name.str()).string());
    }
    write_path_csv(result.steps, (dir / "path.csv").string());
  }
  metrics.close();
  write_json(sparselvq::to_json(model), (dir / "model.json").string());
  write_profile_csv(model.profile(), data.train.dim_names, (dir / "profile.csv").string());

  const EpochMetrics final_metrics = measure(model, data, m.config, 0.0);
  out << "train_accuracy " << final_metrics.train_accuracy;
  if (final_metrics.test_accuracy) out << "  test_accuracy " << *final_metrics.test_accuracy;
  out << "  sparsity " << final_metrics.sparsity << '\n';
  return 0;
}

struct EvalOptions {
  std::string model_path;
  std::string run_dir;
  std::string subset = "test";
  DataSpec data;
  std::string out;
};

inline int execute_eval(const EvalOptions& o, std::ostream& out) {
  namespace fs = std::filesystem;
  Model model;
  LabeledDataset data;
  std::string out_dir = o.out;
  if (!o.run_dir.empty()) {
    const fs::path dir(o.run_dir);
    const RunManifest m = manifest_from_json(read_json((dir / "manifest.json").string()));
    model = model_from_json(read_json((dir / (o.model_path.empty() ? "model.json" : o.model_path)).string()));
    if (o.subset == "all") {
      data = load_prepared(m.data.path, m.data);
    } else {
      DataSplits splits = prepare_splits(m);
      data = o.subset == "train" ? std::move(splits.train) : std::move(*splits.test);
    }
    if (out_dir.empty()) out_dir = o.run_dir;
  } else {
    if (o.model_path.empty() || o.data.path.empty()) throw UsageError("eval needs --run, or --model and --data");
    if (out_dir.empty()) throw UsageError("--out is required with --model/--data");
    model = model_from_json(read_json(o.model_path));
    data = load_prepared(o.data.path, o.data);
  }
  if (model.dims() != data.dims()) {
    throw Error(ErrorCode::DimensionMismatch, "model has n_model=" + std::to_string(model.dims()) +
                                                  " dimensions but data has n_data=" + std::to_string(data.dims()));
  }
  const double acc = evaluate(model, data);
  const auto confusion = confusion_matrix(model, data);
  out << "accuracy " << acc << " (" << data.size() << " samples)\n";
  out << "confusion (rows: true, cols: predicted)\n";
  for (const auto& row : confusion) {
    for (std::size_t k = 0; k < row.size(); ++k) out << (k ? " " : "") << row[k];
    out << '\n';
  }
  fs::create_directories(out_dir);
  write_json(json{{"accuracy", acc}, {"num_samples", data.size()}, {"confusion", confusion}},
             (fs::path(out_dir) / "eval.json").string());
  return 0;
}

struct SynthOptions {
  SynthSpec spec;
  std::string out;
};

/// Writes <out> and a sidecar <out stem>.json beside it.
inline int execute_synth(const SynthOptions& o, std::ostream& out) {
  namespace fs = std::filesystem;
  try {
    check_synth_spec(o.spec);
  } catch (const Error& e) {
    throw UsageError(e.what());
  }
  const RowMatrix means = synth_class_means(o.spec);
  const LabeledDataset ds = synth_sparse(o.spec);
  const fs::path csv(o.out);
  if (csv.has_parent_path()) fs::create_directories(csv.parent_path());
  write_csv(ds, csv.string(), "label");
  json meta = metadata_json(ds);
  std::vector<Eigen::Index> informative(static_cast<std::size_t>(o.spec.n_informative));
  std::iota(informative.begin(), informative.end(), Eigen::Index{0});
  meta["informative_dims"] = informative;
  meta["generator"] = {{"dims", o.spec.n_dims},      {"informative", o.spec.n_informative},
                       {"classes", o.spec.classes},  {"per_class", o.spec.per_class},
                       {"noise_sigma", o.spec.noise_sigma}, {"seed", o.spec.seed}};
  meta["class_means"] = detail::matrix_to_json(means);
  fs::path sidecar = csv;
  sidecar.replace_extension(".json");
  write_json(meta, sidecar.string());
  out << "wrote " << ds.size() << " rows x " << ds.dims() << " dims to " << csv.string() << '\n';
  return 0;
}

namespace detail {

inline void add_data_options(CLI::App* cmd, DataSpec& d) {
  cmd->add_option("--data", d.path, "CSV file, one sample per row");
  cmd->add_option("--label-col", d.label_col, "Label column name (or 0-based index)")->capture_default_str();
  cmd->add_flag("--normalize", d.normalize, "Scale every row to unit l2 norm");
  cmd->add_option("--bands", d.bands, "Columns to keep after loading, e.g. 0-199");
}

inline void add_run_options(CLI::App* cmd, RunManifest& m, std::string& model_name, std::string& transfer,
                            std::string& manifest_path, std::optional<std::uint64_t>& split_seed) {
  add_data_options(cmd, m.data);
  cmd->add_option("--test-data", m.data.test_path, "Separate evaluation CSV (otherwise split --data)");
  cmd->add_option("--train-fraction", m.split.train_fraction, "Training share of a split")
      ->check(CLI::Range(0.0, 1.0))
      ->capture_default_str();
  cmd->add_flag("!--no-stratify", m.split.stratified, "Split without preserving class proportions");
  cmd->add_option("--split-seed", split_seed, "Split seed (default: --seed)");
  cmd->add_option("--out", m.out, "Run directory");
  cmd->add_option("--seed", m.config.seed, "Random seed")->capture_default_str();
  cmd->add_option("--model", model_name, "glvq | grlvq | gmlvq")
      ->check(CLI::IsMember({"glvq", "grlvq", "gmlvq"}))
      ->capture_default_str();
  cmd->add_option("--alpha", m.config.alpha.alpha, "Smoothing parameter of |x|_alpha")
      ->check(CLI::PositiveNumber)
      ->capture_default_str();
  cmd->add_option("--omega-rows", m.config.omega_rows, "Rows m of Omega (gmlvq; default n)")->check(CLI::PositiveNumber);
  cmd->add_option("--sparsity-threshold", m.config.sparsity_threshold, "Threshold on lambda_i^2")
      ->check(CLI::PositiveNumber)
      ->capture_default_str();
  cmd->add_option("--rate-proto", m.config.rate_proto, "Prototype learning rate")
      ->check(CLI::NonNegativeNumber)
      ->capture_default_str();
  cmd->add_option("--rate-metric", m.config.rate_metric, "Metric learning rate")
      ->check(CLI::NonNegativeNumber)
      ->capture_default_str();
  cmd->add_option("--decay", m.config.decay, "Rate decay per epoch")->check(CLI::NonNegativeNumber)->capture_default_str();
  cmd->add_option("--prototypes-per-class", m.config.prototypes_per_class)->check(CLI::PositiveNumber)->capture_default_str();
  cmd->add_option("--transfer", transfer, "identity | sigmoid")
      ->check(CLI::IsMember({"identity", "sigmoid"}))
      ->capture_default_str();
  cmd->add_option("--sigmoid-slope", m.config.transfer.slope)->check(CLI::PositiveNumber)->capture_default_str();
  cmd->add_option("--manifest", manifest_path, "Replay the run described by a manifest.json");
}

}  // namespace detail

/// Parses argv and runs one command.
inline int run(int argc, const char* const* argv, std::ostream& out = std::cout, std::ostream& err = std::cerr) {
  CLI::App app{"Sparse relevance learning vector quantization"};
  app.require_subcommand(1);

  SynthOptions synth;
  auto* synth_cmd = app.add_subcommand("synth", "Generate a synthetic sparse dataset");
  synth_cmd->add_option("--dims", synth.spec.n_dims, "Number of dimensions")->required()->check(CLI::PositiveNumber);
  synth_cmd->add_option("--informative", synth.spec.n_informative, "Leading informative dimensions")
      ->required()
      ->check(CLI::NonNegativeNumber);
  synth_cmd->add_option("--classes", synth.spec.classes)->required()->check(CLI::Range(2, 1 << 20));
  synth_cmd->add_option("--per-class", synth.spec.per_class)->required()->check(CLI::PositiveNumber);
  synth_cmd->add_option("--noise", synth.spec.noise_sigma, "Noise standard deviation")
      ->check(CLI::NonNegativeNumber)
      ->capture_default_str();
  synth_cmd->add_option("--seed", synth.spec.seed)->capture_default_str();
  synth_cmd->add_option("--out", synth.out, "Output CSV path")->required();

  RunManifest train_m;
  train_m.command = "train";
  std::string train_model = "grlvq", train_transfer = "identity", train_manifest;
  std::optional<std::uint64_t> train_split_seed;
  auto* train_cmd = app.add_subcommand("train", "Train a model at a fixed penalty weight of 0");
  detail::add_run_options(train_cmd, train_m, train_model, train_transfer, train_manifest, train_split_seed);
  train_cmd->add_option("--epochs", train_m.config.epochs)->check(CLI::PositiveNumber)->capture_default_str();

  RunManifest path_m;
  path_m.command = "path";
  std::string path_model = "grlvq", path_transfer = "identity", path_manifest;
  std::optional<std::uint64_t> path_split_seed;
  auto* path_cmd = app.add_subcommand("path", "Pretrain, then ramp the l1 penalty weight linearly");
  detail::add_run_options(path_cmd, path_m, path_model, path_transfer, path_manifest, path_split_seed);
  path_cmd->add_option("--pretrain-epochs", path_m.pretrain_epochs, "Epochs at weight 0 before the ramp")
      ->check(CLI::NonNegativeNumber)
      ->capture_default_str();
  path_cmd->add_option("--reg-start", path_m.schedule.reg_weight_start)->check(CLI::NonNegativeNumber)->capture_default_str();
  path_cmd->add_option("--reg-end", path_m.schedule.reg_weight_end)->check(CLI::NonNegativeNumber)->capture_default_str();
  path_cmd->add_option("--reg-steps", path_m.schedule.steps)->check(CLI::PositiveNumber)->capture_default_str();
  path_cmd->add_option("--epochs-per-step", path_m.schedule.epochs_per_step)
      ->check(CLI::PositiveNumber)
      ->capture_default_str();

  EvalOptions eval;
  auto* eval_cmd = app.add_subcommand("eval", "Accuracy and confusion matrix of a trained model");
  eval_cmd->add_option("--model", eval.model_path, "model.json (relative to --run when given)");
  eval_cmd->add_option("--run", eval.run_dir, "Run directory; reuses its manifest's data and split");
  eval_cmd->add_option("--subset", eval.subset, "train | test | all (with --run)")
      ->check(CLI::IsMember({"train", "test", "all"}))
      ->capture_default_str();
  eval_cmd->add_option("--out", eval.out, "Directory for eval.json");
  detail::add_data_options(eval_cmd, eval.data);

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return 0;
  } catch (const CLI::ParseError& e) {
    err << "usage error: " << e.what() << '\n';
    if (auto* sub = app.get_subcommands().empty() ? nullptr : app.get_subcommands().front()) err << sub->help();
    return 2;
  }

  auto finish_run = [&](RunManifest& m, const std::string& model_name, const std::string& transfer,
                        const std::string& manifest_path, const std::optional<std::uint64_t>& split_seed,
                        const std::string& expected) -> int {
    if (!manifest_path.empty()) {
      const std::string out_override = m.out;
      m = manifest_from_json(read_json(manifest_path));
      if (m.command != expected) throw UsageError("manifest is for '" + m.command + "', not '" + expected + "'");
      if (!out_override.empty()) m.out = out_override;
    } else {
      m.config.model_kind = parse_model_kind(model_name);
      m.config.transfer = transfer == "sigmoid" ? TransferFn::sigmoid(m.config.transfer.slope)
                                                : TransferFn{TransferFn::Kind::Identity, m.config.transfer.slope};
      m.split.seed = split_seed.value_or(m.config.seed);
      if (m.config.model_kind != ModelKind::Gmlvq) m.config.omega_rows = 0;
    }
    return execute_run(m, out, err);
  };

  try {
    if (synth_cmd->parsed()) return execute_synth(synth, out);
    if (train_cmd->parsed()) return finish_run(train_m, train_model, train_transfer, train_manifest, train_split_seed, "train");
    if (path_cmd->parsed()) {
      if (path_m.schedule.reg_weight_end < path_m.schedule.reg_weight_start) {
        throw UsageError("--reg-end must be >= --reg-start");
      }
      return finish_run(path_m, path_model, path_transfer, path_manifest, path_split_seed, "path");
    }
    if (eval_cmd->parsed()) return execute_eval(eval, out);
  } catch (const UsageError& e) {
    err << "usage error: " << e.what() << '\n';
    return 2;
  } catch (const Error& e) {
    err << "error: " << e.what() << '\n';
    return e.code() == ErrorCode::InvalidConfig ? 2 : 1;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return 1;
  }
  return 2;
}

}  // namespace sparselvq::cli
