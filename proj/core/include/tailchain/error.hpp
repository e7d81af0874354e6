#pragma once

#include <stdexcept>
#include <string>
#include <vector>

namespace tailchain {

/// Failure categories. The CLI maps each to its own exit code.
enum class ErrorKind { config, data, fit, simulation };

class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& what) : std::runtime_error(what), kind_(kind) {}
  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

class ConfigError : public Error {
 public:
  explicit ConfigError(const std::string& what) : Error(ErrorKind::config, what) {}
};

class DataError : public Error {
 public:
  explicit DataError(const std::string& what) : Error(ErrorKind::data, what) {}
};

/// Malformed input file; carries the 1-based data row and the column name.
class ParseError : public DataError {
 public:
  ParseError(std::size_t row, std::string column, const std::string& what)
      : DataError("row " + std::to_string(row) + ", column '" + column + "': " + what),
        row_(row),
        column_(std::move(column)) {}
  std::size_t row() const noexcept { return row_; }
  const std::string& column() const noexcept { return column_; }

 private:
  std::size_t row_;
  std::string column_;
};

class InsufficientDataError : public DataError {
 public:
  using DataError::DataError;
};

/// Argument outside the support of a distribution or map.
class DomainError : public DataError {
 public:
  using DataError::DataError;
};

/// The peak window of an excursion runs past the stored observations.
class CensoredPeakError : public DataError {
 public:
  using DataError::DataError;
};

class FitError : public Error {
 public:
  explicit FitError(const std::string& what, std::vector<double> best_point = {},
                    double gradient_norm = 0.0)
      : Error(ErrorKind::fit, what), best_point_(std::move(best_point)), gradient_norm_(gradient_norm) {}
  const std::vector<double>& best_point() const noexcept { return best_point_; }
  double gradient_norm() const noexcept { return gradient_norm_; }

 private:
  std::vector<double> best_point_;
  double gradient_norm_;
};

/// A divisor of the EVAR reparameterization map is zero.
class ReparamUndefinedError : public FitError {
 public:
  using FitError::FitError;
};

class SimulationError : public Error {
 public:
  explicit SimulationError(const std::string& what) : Error(ErrorKind::simulation, what) {}
};

}  // namespace tailchain
