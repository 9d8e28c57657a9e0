#pragma once

// Labeled vector data: CSV ingestion, preprocessing, splitting and a
// synthetic generator with a known set of informative dimensions.

#include "sparselvq/types.hpp"

#include <nlohmann/json.hpp>

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <map>
#include <random>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

namespace sparselvq {

struct LabeledDataset {
  RowMatrix features;               // N x n
  std::vector<int> labels;          // N entries in [0, num_classes)
  int num_classes = 0;
  std::vector<std::string> dim_names;    // empty or n entries
  std::vector<std::string> class_names;  // label index -> original label text

  Eigen::Index size() const { return features.rows(); }
  Eigen::Index dims() const { return features.cols(); }

  auto sample(Eigen::Index i) const { return features.row(i).transpose(); }

  std::vector<std::size_t> class_counts() const {
    std::vector<std::size_t> counts(static_cast<std::size_t>(num_classes), 0);
    for (int y : labels) ++counts[static_cast<std::size_t>(y)];
    return counts;
  }

  /// Subset of rows, in the given order.
  LabeledDataset rows(const std::vector<Eigen::Index>& idx) const {
    LabeledDataset out;
    out.features.resize(static_cast<Eigen::Index>(idx.size()), dims());
    out.labels.reserve(idx.size());
    for (std::size_t k = 0; k < idx.size(); ++k) {
      out.features.row(static_cast<Eigen::Index>(k)) = features.row(idx[k]);
      out.labels.push_back(labels[static_cast<std::size_t>(idx[k])]);
    }
    out.num_classes = num_classes;
    out.dim_names = dim_names;
    out.class_names = class_names;
    return out;
  }
};

struct SplitSpec {
  double train_fraction = 0.7;
  bool stratified = true;
  std::uint64_t seed = 0;
};

namespace detail {

inline std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
  if (s.size() >= 2 && s.front() == '"' && s.back() == '"') s = s.substr(1, s.size() - 2);
  return s;
}

inline std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> cells;
  std::string cur;
  bool quoted = false;
  for (char c : line) {
    if (c == '"') {
      quoted = !quoted;
      cur.push_back(c);
    } else if (c == ',' && !quoted) {
      cells.emplace_back(trim(cur));
      cur.clear();
    } else {
      cur.push_back(c);
    }
  }
  cells.emplace_back(trim(cur));
  return cells;
}

inline std::optional<double> parse_double(std::string_view s) {
  if (!s.empty() && s.front() == '+') s.remove_prefix(1);
  if (s.empty()) return std::nullopt;
  double value = 0.0;
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), value);
  if (ec != std::errc() || ptr != s.data() + s.size()) return std::nullopt;
  return value;
}

inline std::optional<long long> parse_nonneg_int(std::string_view s) {
  if (s.empty()) return std::nullopt;
  long long value = 0;
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), value);
  if (ec != std::errc() || ptr != s.data() + s.size() || value < 0) return std::nullopt;
  return value;
}

/// Shortest representation that parses back to the same double.
inline std::string format_double(double x) {
  char buf[64];
  const auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), x);
  return std::string(buf, ptr);
}

}  // namespace detail

/// Checks the dataset invariants; throws on the first violation.
inline void validate(const LabeledDataset& ds) {
  if (static_cast<std::size_t>(ds.size()) != ds.labels.size()) {
    throw Error(ErrorCode::DimensionMismatch, "feature rows and labels differ in count");
  }
  if (!ds.dim_names.empty() && static_cast<Eigen::Index>(ds.dim_names.size()) != ds.dims()) {
    throw Error(ErrorCode::DimensionMismatch, "dim_names length differs from feature count");
  }
  for (int y : ds.labels) {
    if (y < 0 || y >= ds.num_classes) {
      throw Error(ErrorCode::IndexOutOfRange, "label " + std::to_string(y) + " outside [0, C)");
    }
  }
  for (Eigen::Index i = 0; i < ds.size(); ++i) {
    for (Eigen::Index j = 0; j < ds.dims(); ++j) {
      if (!std::isfinite(ds.features(i, j))) {
        throw Error(ErrorCode::NonFiniteValue, "non-finite feature", static_cast<std::size_t>(i),
                    static_cast<std::size_t>(j));
      }
    }
  }
}

/// Reads a CSV with one header row. `label_column` is a header name, or a
/// 0-based column index when no header cell carries that name. Labels that
/// are all nonnegative integers are used as class indices directly; any other
/// labels are mapped to 0..C-1 in order of first appearance.
/// Cell errors report the 1-based file line and the 0-based column.
inline LabeledDataset load_csv(const std::string& path, const std::string& label_column) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::Io, "cannot open " + path);

  std::string line;
  std::size_t line_no = 0;
  std::vector<std::string> header;
  while (std::getline(in, line)) {
    ++line_no;
    if (!detail::trim(line).empty()) {
      header = detail::split_csv_line(line);
      break;
    }
  }
  if (header.empty()) throw Error(ErrorCode::EmptyFile, path + " has no header");

  std::size_t label_idx = header.size();
  for (std::size_t c = 0; c < header.size(); ++c) {
    if (header[c] == label_column) label_idx = c;
  }
  if (label_idx == header.size()) {
    if (auto idx = detail::parse_nonneg_int(label_column); idx && *idx < static_cast<long long>(header.size())) {
      label_idx = static_cast<std::size_t>(*idx);
    } else {
      throw Error(ErrorCode::MissingLabelColumn, "no column '" + label_column + "' in " + path);
    }
  }

  std::vector<std::vector<double>> rows;
  std::vector<std::string> raw_labels;
  while (std::getline(in, line)) {
    ++line_no;
    if (detail::trim(line).empty()) continue;
    const auto cells = detail::split_csv_line(line);
    if (cells.size() != header.size()) {
      throw Error(ErrorCode::MalformedCell,
                  path + ":" + std::to_string(line_no) + ": expected " + std::to_string(header.size()) +
                      " cells, got " + std::to_string(cells.size()),
                  line_no, std::min(cells.size(), header.size()));
    }
    std::vector<double> row;
    row.reserve(header.size() - 1);
    for (std::size_t c = 0; c < cells.size(); ++c) {
      if (c == label_idx) continue;
      const auto v = detail::parse_double(cells[c]);
      if (!v) {
        throw Error(ErrorCode::MalformedCell,
                    path + ":" + std::to_string(line_no) + ": cannot parse '" + cells[c] + "'", line_no, c);
      }
      if (!std::isfinite(*v)) {
        throw Error(ErrorCode::NonFiniteValue,
                    path + ":" + std::to_string(line_no) + ": non-finite value '" + cells[c] + "'", line_no, c);
      }
      row.push_back(*v);
    }
    rows.push_back(std::move(row));
    raw_labels.push_back(cells[label_idx]);
  }
  if (rows.empty()) throw Error(ErrorCode::EmptyFile, path + " has no data rows");

  LabeledDataset ds;
  const auto n_rows = static_cast<Eigen::Index>(rows.size());
  const auto n_dims = static_cast<Eigen::Index>(header.size() - 1);
  if (n_dims < 1) throw Error(ErrorCode::InvalidCounts, path + " has no feature columns");
  ds.features.resize(n_rows, n_dims);
  for (Eigen::Index i = 0; i < n_rows; ++i) {
    for (Eigen::Index j = 0; j < n_dims; ++j) ds.features(i, j) = rows[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)];
  }
  for (std::size_t c = 0; c < header.size(); ++c) {
    if (c != label_idx) ds.dim_names.push_back(header[c]);
  }

  const bool integer_labels = std::all_of(raw_labels.begin(), raw_labels.end(), [](const std::string& s) {
    return detail::parse_nonneg_int(s).has_value();
  });
  if (integer_labels) {
    long long max_label = 0;
    for (const auto& s : raw_labels) {
      const long long y = *detail::parse_nonneg_int(s);
      max_label = std::max(max_label, y);
      ds.labels.push_back(static_cast<int>(y));
    }
    ds.num_classes = static_cast<int>(max_label + 1);
    for (int c = 0; c < ds.num_classes; ++c) ds.class_names.push_back(std::to_string(c));
  } else {
    std::map<std::string, int> index;
    for (const auto& s : raw_labels) {
      auto [it, inserted] = index.try_emplace(s, static_cast<int>(ds.class_names.size()));
      if (inserted) ds.class_names.push_back(s);
      ds.labels.push_back(it->second);
    }
    ds.num_classes = static_cast<int>(ds.class_names.size());
  }
  if (ds.num_classes < 2) throw Error(ErrorCode::InvalidCounts, path + " holds fewer than two classes");
  return ds;
}

/// Writes features at round-trip precision followed by the label column.
/// Labels are written as their class names when present.
inline void write_csv(const LabeledDataset& ds, const std::string& path, const std::string& label_column = "label") {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(ErrorCode::Io, "cannot write " + path);
  for (Eigen::Index j = 0; j < ds.dims(); ++j) {
    out << (ds.dim_names.empty() ? "f" + std::to_string(j) : ds.dim_names[static_cast<std::size_t>(j)]) << ',';
  }
  out << label_column << '\n';
  for (Eigen::Index i = 0; i < ds.size(); ++i) {
    for (Eigen::Index j = 0; j < ds.dims(); ++j) out << detail::format_double(ds.features(i, j)) << ',';
    const int y = ds.labels[static_cast<std::size_t>(i)];
    out << (ds.class_names.empty() ? std::to_string(y) : ds.class_names[static_cast<std::size_t>(y)]) << '\n';
  }
  if (!out) throw Error(ErrorCode::Io, "write failed for " + path);
}

/// JSON sidecar: label mapping and dimension names.
inline nlohmann::json metadata_json(const LabeledDataset& ds) {
  nlohmann::json j;
  j["num_samples"] = ds.size();
  j["num_dims"] = ds.dims();
  j["num_classes"] = ds.num_classes;
  nlohmann::json mapping = nlohmann::json::array();
  for (std::size_t c = 0; c < ds.class_names.size(); ++c) {
    mapping.push_back({{"index", c}, {"label", ds.class_names[c]}});
  }
  j["label_mapping"] = mapping;
  j["dim_names"] = ds.dim_names;
  return j;
}

inline LabeledDataset l2_normalize(const LabeledDataset& ds) {
  LabeledDataset out = ds;
  for (Eigen::Index i = 0; i < out.size(); ++i) {
    const double norm = out.features.row(i).norm();
    if (!(norm > 0.0)) {
      throw Error(ErrorCode::ZeroVectorRow, "row " + std::to_string(i) + " has zero norm",
                  static_cast<std::size_t>(i));
    }
    out.features.row(i) /= norm;
  }
  return out;
}

/// Keeps the listed columns, which must be strictly increasing and < n.
inline LabeledDataset select_bands(const LabeledDataset& ds, const std::vector<Eigen::Index>& keep) {
  for (std::size_t k = 0; k < keep.size(); ++k) {
    if (keep[k] < 0 || keep[k] >= ds.dims()) {
      throw Error(ErrorCode::IndexOutOfRange, "band index " + std::to_string(keep[k]) + " not in [0, " +
                                                  std::to_string(ds.dims()) + ")");
    }
    if (k > 0 && keep[k] <= keep[k - 1]) {
      throw Error(ErrorCode::IndexOutOfRange, "band indices must be strictly increasing");
    }
  }
  LabeledDataset out;
  out.features.resize(ds.size(), static_cast<Eigen::Index>(keep.size()));
  for (std::size_t k = 0; k < keep.size(); ++k) {
    out.features.col(static_cast<Eigen::Index>(k)) = ds.features.col(keep[k]);
    if (!ds.dim_names.empty()) out.dim_names.push_back(ds.dim_names[static_cast<std::size_t>(keep[k])]);
  }
  out.labels = ds.labels;
  out.num_classes = ds.num_classes;
  out.class_names = ds.class_names;
  return out;
}

/// Inclusive index range [first, last].
inline std::vector<Eigen::Index> band_range(Eigen::Index first, Eigen::Index last) {
  std::vector<Eigen::Index> out;
  for (Eigen::Index i = first; i <= last; ++i) out.push_back(i);
  return out;
}

/// Parses "0-199", "3,5,9" or mixtures such as "0-9,20,30-39".
inline std::vector<Eigen::Index> parse_band_list(const std::string& text) {
  std::vector<Eigen::Index> out;
  std::stringstream ss(text);
  std::string part;
  while (std::getline(ss, part, ',')) {
    const auto item = detail::trim(part);
    const auto dash = item.find('-', 1);
    const auto lo = detail::parse_nonneg_int(item.substr(0, dash));
    if (!lo) throw Error(ErrorCode::InvalidConfig, "bad band list '" + text + "'");
    if (dash == std::string_view::npos) {
      out.push_back(static_cast<Eigen::Index>(*lo));
      continue;
    }
    const auto hi = detail::parse_nonneg_int(item.substr(dash + 1));
    if (!hi || *hi < *lo) throw Error(ErrorCode::InvalidConfig, "bad band range '" + std::string(item) + "'");
    for (long long i = *lo; i <= *hi; ++i) out.push_back(static_cast<Eigen::Index>(i));
  }
  return out;
}

/// Seeded split into (train, test); both keep the input row order.
/// Stratified splits put round(f * count_c) rows of every class c into the
/// training part, clamped so each side keeps at least one row per class.
inline std::pair<LabeledDataset, LabeledDataset> split(const LabeledDataset& ds, const SplitSpec& spec) {
  if (!(spec.train_fraction > 0.0 && spec.train_fraction < 1.0)) {
    throw Error(ErrorCode::InvalidConfig, "train_fraction must lie in (0, 1)");
  }
  std::mt19937_64 rng(spec.seed);
  std::vector<char> in_train(static_cast<std::size_t>(ds.size()), 0);

  auto take = [&](std::vector<Eigen::Index>& pool, std::size_t count) {
    std::shuffle(pool.begin(), pool.end(), rng);
    for (std::size_t k = 0; k < count; ++k) in_train[static_cast<std::size_t>(pool[k])] = 1;
  };

  if (spec.stratified) {
    std::vector<std::vector<Eigen::Index>> by_class(static_cast<std::size_t>(ds.num_classes));
    for (Eigen::Index i = 0; i < ds.size(); ++i) by_class[static_cast<std::size_t>(ds.labels[static_cast<std::size_t>(i)])].push_back(i);
    for (std::size_t c = 0; c < by_class.size(); ++c) {
      auto& pool = by_class[c];
      if (pool.empty()) continue;
      if (pool.size() < 2) {
        throw Error(ErrorCode::ClassTooSmall, "class " + std::to_string(c) + " has fewer than 2 samples",
                    std::nullopt, c);
      }
      auto count = static_cast<std::size_t>(std::lround(spec.train_fraction * static_cast<double>(pool.size())));
      count = std::clamp<std::size_t>(count, 1, pool.size() - 1);
      take(pool, count);
    }
  } else {
    std::vector<Eigen::Index> pool(static_cast<std::size_t>(ds.size()));
    for (Eigen::Index i = 0; i < ds.size(); ++i) pool[static_cast<std::size_t>(i)] = i;
    const auto count = static_cast<std::size_t>(std::lround(spec.train_fraction * static_cast<double>(pool.size())));
    take(pool, count);
  }

  std::vector<Eigen::Index> train_idx, test_idx;
  for (Eigen::Index i = 0; i < ds.size(); ++i) {
    (in_train[static_cast<std::size_t>(i)] ? train_idx : test_idx).push_back(i);
  }
  return {ds.rows(train_idx), ds.rows(test_idx)};
}

struct SynthSpec {
  Eigen::Index n_dims = 200;
  Eigen::Index n_informative = 10;
  int classes = 5;
  Eigen::Index per_class = 200;
  double noise_sigma = 1.0;
  std::uint64_t seed = 0;
};

inline void check_synth_spec(const SynthSpec& spec) {
  if (spec.n_dims < 1 || spec.n_informative < 0 || spec.n_informative > spec.n_dims || spec.classes < 2 ||
      spec.per_class < 1 || !(spec.noise_sigma >= 0.0) || !std::isfinite(spec.noise_sigma)) {
    throw Error(ErrorCode::InvalidCounts,
                "need 1 <= dims, 0 <= informative <= dims, classes >= 2, per_class >= 1, sigma >= 0");
  }
}

/// True class means (classes x n_dims). Coordinates >= n_informative are 0
/// for every class. Informative coordinates carry offsets s * u * (+-1) with
/// u ~ U[1, 2] and s = 4 sigma (s = 1 when sigma = 0).
inline RowMatrix synth_class_means(const SynthSpec& spec) {
  check_synth_spec(spec);
  std::mt19937_64 rng(spec.seed);
  std::uniform_real_distribution<double> mag(1.0, 2.0);
  std::bernoulli_distribution sign(0.5);
  const double scale = spec.noise_sigma > 0.0 ? 4.0 * spec.noise_sigma : 1.0;
  RowMatrix means = RowMatrix::Zero(spec.classes, spec.n_dims);
  for (int c = 0; c < spec.classes; ++c) {
    for (Eigen::Index j = 0; j < spec.n_informative; ++j) {
      means(c, j) = (sign(rng) ? 1.0 : -1.0) * scale * mag(rng);
    }
  }
  return means;
}

/// Draws per_class rows around each mean with isotropic N(0, sigma^2) noise.
/// Rows are grouped by class.
inline LabeledDataset synth_sample(const RowMatrix& means, Eigen::Index per_class, double noise_sigma,
                                   std::uint64_t noise_seed) {
  std::mt19937_64 rng(noise_seed);
  std::normal_distribution<double> noise(0.0, 1.0);
  const auto classes = static_cast<int>(means.rows());
  LabeledDataset ds;
  ds.features.resize(classes * per_class, means.cols());
  for (int c = 0; c < classes; ++c) {
    for (Eigen::Index k = 0; k < per_class; ++k) {
      const Eigen::Index row = c * per_class + k;
      for (Eigen::Index j = 0; j < means.cols(); ++j) ds.features(row, j) = means(c, j) + noise_sigma * noise(rng);
      ds.labels.push_back(c);
    }
  }
  ds.num_classes = classes;
  for (Eigen::Index j = 0; j < means.cols(); ++j) ds.dim_names.push_back("d" + std::to_string(j));
  for (int c = 0; c < classes; ++c) ds.class_names.push_back(std::to_string(c));
  return ds;
}

/// Gaussian class clouds whose means differ only in the first n_informative
/// coordinates. Deterministic given spec.seed.
inline LabeledDataset synth_sparse(const SynthSpec& spec) {
  const RowMatrix means = synth_class_means(spec);
  return synth_sample(means, spec.per_class, spec.noise_sigma, spec.seed ^ 0x9e3779b97f4a7c15ULL);
}

}  // namespace sparselvq
