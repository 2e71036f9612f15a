#include "mcagg/errors.hpp"

#include <sstream>

namespace mcagg {

namespace {

template <typename... Args>
std::string cat(const Args&... args) {
  std::ostringstream os;
  (os << ... << args);
  return os.str();
}

}  // namespace

NonSquare::NonSquare(std::size_t rows, std::size_t cols)
    : ValidationError(cat("matrix is not square: ", rows, "x", cols)) {}

RowSumViolation::RowSumViolation(std::size_t row, double sum)
    : ValidationError(cat("row ", row, " sums to ", sum, ", expected 1")), row_(row), sum_(sum) {}

NegativeEntry::NegativeEntry(std::size_t i, std::size_t j, double value)
    : ValidationError(cat("negative entry ", value, " at (", i, ", ", j, ")")), i_(i), j_(j), value_(value) {}

NonPositiveTemperature::NonPositiveTemperature(double t)
    : ValidationError(cat("temperature must be positive, got ", t)) {}

EmptySuperstate::EmptySuperstate(std::size_t j)
    : ValidationError(cat("superstate ", j, " has no mass")), j_(j) {}

NoConvergence::NoConvergence(int iterations)
    : Error(cat("no convergence after ", iterations, " iterations")), iterations_(iterations) {}

CholeskyFailure::CholeskyFailure(std::size_t j)
    : Error(cat("Cholesky factorization failed for superstate ", j)), j_(j) {}

InadmissiblePerturbation::InadmissiblePerturbation(std::size_t row, double sum)
    : ValidationError(cat("perturbation row ", row, " sums to ", sum, ", expected 0")) {}

FloorViolation::FloorViolation(std::size_t j, std::size_t coordinate)
    : ValidationError(cat("distribution of superstate ", j, " is below the floor at coordinate ", coordinate)),
      j_(j),
      coord_(coordinate) {}

namespace {

std::string gap_list(const std::vector<std::size_t>& gaps) {
  std::ostringstream os;
  os << "partition sizes are not consecutive; missing k =";
  for (auto g : gaps) os << ' ' << g;
  return os.str();
}

}  // namespace

NonConsecutiveK::NonConsecutiveK(std::vector<std::size_t> gaps)
    : ValidationError(gap_list(gaps)), gaps_(std::move(gaps)) {}

ParseError::ParseError(std::size_t line, std::size_t column, const std::string& what)
    : ValidationError(cat("parse error at line ", line, ", column ", column, ": ", what)),
      line_(line),
      column_(column) {}

RaggedRows::RaggedRows(std::size_t line, std::size_t expected, std::size_t got)
    : ValidationError(cat("ragged rows: line ", line, " has ", got, " fields, expected ", expected)) {}

BadBigram::BadBigram(std::size_t line)
    : ValidationError(cat("malformed bigram record on line ", line)), line_(line) {}

NonLetter::NonLetter(std::size_t line) : ValidationError(cat("non-letter bigram on line ", line)) {}

NegativeCount::NegativeCount(std::size_t line) : ValidationError(cat("negative count on line ", line)) {}

BadAssignment::BadAssignment(std::size_t k, const std::string& why)
    : ValidationError(cat("bad assignment for k=", k, ": ", why)), k_(k) {}

DuplicateLabel::DuplicateLabel(const std::string& label) : ValidationError(cat("duplicate label '", label, "'")) {}

}  // namespace mcagg
