#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>
#include <utility>

#include <Eigen/Dense>

namespace lasso_audit {

enum class ErrorCode {
  InvalidArgument,
  InvalidParameter,
  DimensionMismatch,
  CapExceeded,
  SingularBlock,
  SingularUniformEigenvalue,
  AllSubmatricesSingular,
  DenominatorNonPositive,
  NonpositiveDenominator,
  ZeroDiagonal,
  MaxItersExceeded,
  IterationLimit,
  MissingNoise,
  MissingInput,
  ParseError,
};

inline const char* to_string(ErrorCode c) {
  switch (c) {
    case ErrorCode::InvalidArgument: return "InvalidArgument";
    case ErrorCode::InvalidParameter: return "InvalidParameter";
    case ErrorCode::DimensionMismatch: return "DimensionMismatch";
    case ErrorCode::CapExceeded: return "CapExceeded";
    case ErrorCode::SingularBlock: return "SingularBlock";
    case ErrorCode::SingularUniformEigenvalue: return "SingularUniformEigenvalue";
    case ErrorCode::AllSubmatricesSingular: return "AllSubmatricesSingular";
    case ErrorCode::DenominatorNonPositive: return "DenominatorNonPositive";
    case ErrorCode::NonpositiveDenominator: return "NonpositiveDenominator";
    case ErrorCode::ZeroDiagonal: return "ZeroDiagonal";
    case ErrorCode::MaxItersExceeded: return "MaxItersExceeded";
    case ErrorCode::IterationLimit: return "IterationLimit";
    case ErrorCode::MissingNoise: return "MissingNoise";
    case ErrorCode::MissingInput: return "MissingInput";
    case ErrorCode::ParseError: return "ParseError";
  }
  return "Unknown";
}

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what)
      : std::runtime_error(std::string(to_string(code)) + ": " + what), code_(code) {}
  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

// needed = number of items the enumeration would have to visit
class CapExceeded : public Error {
 public:
  CapExceeded(std::uint64_t needed, std::uint64_t cap, const std::string& what)
      : Error(ErrorCode::CapExceeded,
              what + " needs " + std::to_string(needed) + " > cap " + std::to_string(cap)),
        needed_(needed), cap_(cap) {}
  std::uint64_t needed() const noexcept { return needed_; }
  std::uint64_t cap() const noexcept { return cap_; }

 private:
  std::uint64_t needed_;
  std::uint64_t cap_;
};

class MaxItersExceeded : public Error {
 public:
  MaxItersExceeded(Eigen::VectorXd best, double residual, const std::string& what)
      : Error(ErrorCode::MaxItersExceeded,
              what + " (residual " + std::to_string(residual) + ")"),
        best_(std::move(best)), residual_(residual) {}
  const Eigen::VectorXd& best() const noexcept { return best_; }
  double residual() const noexcept { return residual_; }

 private:
  Eigen::VectorXd best_;
  double residual_;
};

class MissingInput : public Error {
 public:
  MissingInput(std::string edge, std::string key)
      : Error(ErrorCode::MissingInput, edge + " needs '" + key + "'"),
        edge_(std::move(edge)), key_(std::move(key)) {}
  const std::string& edge() const noexcept { return edge_; }
  const std::string& key() const noexcept { return key_; }

 private:
  std::string edge_;
  std::string key_;
};

}  // namespace lasso_audit
