#pragma once

#include <Eigen/Dense>

#include <cstddef>
#include <optional>
#include <stdexcept>
#include <string>

namespace sparselvq {

using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;
// Row-major storage so each sample / prototype row is contiguous.
using RowMatrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using VecRef = Eigen::Ref<const Vector>;

enum class ErrorCode {
  MalformedCell,
  MissingLabelColumn,
  NonFiniteValue,
  EmptyFile,
  ZeroVectorRow,
  IndexOutOfRange,
  ClassTooSmall,
  InvalidCounts,
  NoSameClassPrototype,
  NoOtherClassPrototype,
  DegenerateDistances,
  DimensionMismatch,
  AllZeroParameters,
  NonFiniteUpdate,
  InvalidConfig,
  Io,
};

inline const char* to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::MalformedCell: return "MalformedCell";
    case ErrorCode::MissingLabelColumn: return "MissingLabelColumn";
    case ErrorCode::NonFiniteValue: return "NonFiniteValue";
    case ErrorCode::EmptyFile: return "EmptyFile";
    case ErrorCode::ZeroVectorRow: return "ZeroVectorRow";
    case ErrorCode::IndexOutOfRange: return "IndexOutOfRange";
    case ErrorCode::ClassTooSmall: return "ClassTooSmall";
    case ErrorCode::InvalidCounts: return "InvalidCounts";
    case ErrorCode::NoSameClassPrototype: return "NoSameClassPrototype";
    case ErrorCode::NoOtherClassPrototype: return "NoOtherClassPrototype";
    case ErrorCode::DegenerateDistances: return "DegenerateDistances";
    case ErrorCode::DimensionMismatch: return "DimensionMismatch";
    case ErrorCode::AllZeroParameters: return "AllZeroParameters";
    case ErrorCode::NonFiniteUpdate: return "NonFiniteUpdate";
    case ErrorCode::InvalidConfig: return "InvalidConfig";
    case ErrorCode::Io: return "Io";
  }
  return "Unknown";
}

/// Library-wide exception. `row`/`col` locate cell-level data errors when
/// known; see the throwing function for their numbering.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what,
        std::optional<std::size_t> row = std::nullopt,
        std::optional<std::size_t> col = std::nullopt)
      : std::runtime_error(std::string(to_string(code)) + ": " + what),
        code_(code), row_(row), col_(col) {}

  ErrorCode code() const noexcept { return code_; }
  std::optional<std::size_t> row() const noexcept { return row_; }
  std::optional<std::size_t> col() const noexcept { return col_; }

 private:
  ErrorCode code_;
  std::optional<std::size_t> row_;
  std::optional<std::size_t> col_;
};

inline void require_same_dim(Eigen::Index a, Eigen::Index b, const char* where) {
  if (a != b) {
    throw Error(ErrorCode::DimensionMismatch,
                std::string(where) + ": " + std::to_string(a) + " vs " + std::to_string(b));
  }
}

}  // namespace sparselvq
