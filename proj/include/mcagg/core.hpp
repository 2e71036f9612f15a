#pragma once

#include <Eigen/Dense>
#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include "mcagg/errors.hpp"

namespace mcagg {

using Matrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using Vector = Eigen::VectorXd;

inline std::span<const double> row_of(const Matrix& m, Eigen::Index i) {
  return {m.data() + i * m.cols(), static_cast<std::size_t>(m.cols())};
}

inline std::span<double> row_of(Matrix& m, Eigen::Index i) {
  return {m.data() + i * m.cols(), static_cast<std::size_t>(m.cols())};
}

/// Row-stochastic transition matrix of a finite chain, with optional state
/// labels. Immutable once validated.
class StochasticMatrix {
 public:
  std::size_t size() const { return static_cast<std::size_t>(rows_.rows()); }
  const Matrix& rows() const { return rows_; }
  std::span<const double> row(std::size_t i) const { return row_of(rows_, static_cast<Eigen::Index>(i)); }
  double operator()(std::size_t i, std::size_t j) const { return rows_(i, j); }
  const std::vector<std::string>& labels() const { return labels_; }

  // Same chain with a new label set (size must match, or empty).
  StochasticMatrix with_labels(std::vector<std::string> labels) const;

 private:
  friend StochasticMatrix validate_stochastic(Matrix rows, double tol, std::vector<std::string> labels);
  StochasticMatrix() = default;

  Matrix rows_;
  std::vector<std::string> labels_;
};

/// Checks squareness, non-negativity and unit row sums. Entries in [-tol, 0)
/// are clamped to zero; a row whose sum is not exactly 1 after that is
/// divided by its sum.
StochasticMatrix validate_stochastic(Matrix rows, double tol, std::vector<std::string> labels = {});

/// Relative state weights rho, a probability vector over the states.
class StateWeights {
 public:
  static StateWeights uniform(std::size_t n);
  // Requires non-negative entries summing to 1 within 1e-12.
  static StateWeights from_probabilities(std::vector<double> rho);

  std::size_t size() const { return rho_.size(); }
  std::span<const double> values() const { return rho_; }
  double operator[](std::size_t i) const { return rho_[i]; }

 private:
  explicit StateWeights(std::vector<double> rho) : rho_(std::move(rho)) {}
  std::vector<double> rho_;
};

/// Surjective map from n states onto k superstates.
class Partition {
 public:
  // Throws BadAssignment if an index is out of range or a superstate is unused.
  Partition(std::size_t k, std::vector<std::size_t> assign);

  // Trivial one-superstate partition.
  static Partition single(std::size_t n);

  std::size_t n() const { return assign_.size(); }
  std::size_t k() const { return k_; }
  std::size_t operator[](std::size_t i) const { return assign_[i]; }
  const std::vector<std::size_t>& assignment() const { return assign_; }
  std::vector<std::size_t> members(std::size_t j) const;

  bool operator==(const Partition&) const = default;

 private:
  std::size_t k_;
  std::vector<std::size_t> assign_;
};

/// Aggregated chain: partition, k x k transition matrix psi and the k x n
/// bank of superstate distributions w(j).
struct AggregatedModel {
  Partition partition;
  Matrix psi;
  Matrix distributions;
};

/// Builds the model with psi derived from the distributions and partition.
AggregatedModel make_aggregated_model(Partition partition, Matrix distributions);

/// Throws ValidationError if any AggregatedModel invariant fails at tol.
void check_model(const AggregatedModel& model, double tol = 1e-9);

/// Orthonormal basis (n x (n-1)) of the zero-sum hyperplane, Helmert form:
/// column m (1-based) has 1/sqrt(m(m+1)) in rows 1..m and -m/sqrt(m(m+1))
/// in row m+1.
class SimplexBasis {
 public:
  std::size_t n() const { return n_; }
  const Matrix& theta() const { return theta_; }

  // theta^T x and theta y in O(n), using the Helmert structure.
  Vector project(std::span<const double> x) const;
  Vector lift(std::span<const double> y) const;

 private:
  friend SimplexBasis simplex_basis(std::size_t n);
  std::size_t n_ = 0;
  Matrix theta_;
  std::vector<double> scale_;  // 1/sqrt(m(m+1)) per column
};

SimplexBasis simplex_basis(std::size_t n);

/// Power iteration on the lazy chain (I + P)/2 from the uniform start, which
/// has the same fixed points as P and does not oscillate on periodic chains.
/// Throws NoConvergence when ||rho P - rho||_inf stays above tol.
StateWeights stationary_distribution(const StochasticMatrix& pi, double tol = 1e-12,
                                     int max_iter = 100000);

}  // namespace mcagg
