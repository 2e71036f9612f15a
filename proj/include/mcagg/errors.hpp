#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>
#include <vector>

namespace mcagg {

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Bad input data or arguments. The CLI maps these to exit code 1.
class ValidationError : public Error {
 public:
  using Error::Error;
};

// Filesystem failures. The CLI maps these to exit code 2.
class IoError : public Error {
 public:
  using Error::Error;
};

class NonSquare : public ValidationError {
 public:
  NonSquare(std::size_t rows, std::size_t cols);
};

class RowSumViolation : public ValidationError {
 public:
  RowSumViolation(std::size_t row, double sum);
  std::size_t row() const { return row_; }
  double sum() const { return sum_; }

 private:
  std::size_t row_;
  double sum_;
};

class NegativeEntry : public ValidationError {
 public:
  NegativeEntry(std::size_t i, std::size_t j, double value);
  std::size_t i() const { return i_; }
  std::size_t j() const { return j_; }
  double value() const { return value_; }

 private:
  std::size_t i_, j_;
  double value_;
};

class DimensionMismatch : public ValidationError {
 public:
  using ValidationError::ValidationError;
};

class NonPositiveTemperature : public ValidationError {
 public:
  explicit NonPositiveTemperature(double t);
};

class EmptySuperstate : public ValidationError {
 public:
  explicit EmptySuperstate(std::size_t j);
  std::size_t superstate() const { return j_; }

 private:
  std::size_t j_;
};

class NoConvergence : public Error {
 public:
  explicit NoConvergence(int iterations);
  int iterations() const { return iterations_; }

 private:
  int iterations_;
};

class CholeskyFailure : public Error {
 public:
  explicit CholeskyFailure(std::size_t j);
  std::size_t superstate() const { return j_; }

 private:
  std::size_t j_;
};

class InadmissiblePerturbation : public ValidationError {
 public:
  InadmissiblePerturbation(std::size_t row, double sum);
};

class FloorViolation : public ValidationError {
 public:
  FloorViolation(std::size_t j, std::size_t coordinate);
  std::size_t superstate() const { return j_; }
  std::size_t coordinate() const { return coord_; }

 private:
  std::size_t j_, coord_;
};

class NonConsecutiveK : public ValidationError {
 public:
  explicit NonConsecutiveK(std::vector<std::size_t> gaps);
  const std::vector<std::size_t>& gaps() const { return gaps_; }

 private:
  std::vector<std::size_t> gaps_;
};

class BlockTooSmall : public ValidationError {
 public:
  using ValidationError::ValidationError;
};

class CountMismatch : public ValidationError {
 public:
  using ValidationError::ValidationError;
};

// Malformed file content; line and column are 1-based.
class ParseError : public ValidationError {
 public:
  ParseError(std::size_t line, std::size_t column, const std::string& what);
  std::size_t line() const { return line_; }
  std::size_t column() const { return column_; }

 private:
  std::size_t line_, column_;
};

class RaggedRows : public ValidationError {
 public:
  RaggedRows(std::size_t line, std::size_t expected, std::size_t got);
};

class BadBigram : public ValidationError {
 public:
  explicit BadBigram(std::size_t line);
  std::size_t line() const { return line_; }

 private:
  std::size_t line_;
};

class NonLetter : public ValidationError {
 public:
  explicit NonLetter(std::size_t line);
};

class NegativeCount : public ValidationError {
 public:
  explicit NegativeCount(std::size_t line);
};

class BadAssignment : public ValidationError {
 public:
  BadAssignment(std::size_t k, const std::string& why);
  std::size_t k() const { return k_; }

 private:
  std::size_t k_;
};

class LabelMismatch : public ValidationError {
 public:
  using ValidationError::ValidationError;
};

class DuplicateLabel : public ValidationError {
 public:
  explicit DuplicateLabel(const std::string& label);
};

}  // namespace mcagg
