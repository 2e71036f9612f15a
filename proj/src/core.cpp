#include "mcagg/core.hpp"

#include <cmath>
#include <numeric>
#include <sstream>

#include "mcagg/kl_geometry.hpp"
#include "mcagg/simd/kernels.hpp"

namespace mcagg {

StochasticMatrix validate_stochastic(Matrix rows, double tol, std::vector<std::string> labels) {
  if (rows.rows() != rows.cols()) throw NonSquare(rows.rows(), rows.cols());
  if (rows.rows() == 0) throw ValidationError("matrix must have at least one state");
  const auto n = static_cast<std::size_t>(rows.rows());
  if (!labels.empty() && labels.size() != n) {
    throw DimensionMismatch("label count does not match the number of states");
  }

  for (std::size_t i = 0; i < n; ++i) {
    auto r = row_of(rows, static_cast<Eigen::Index>(i));
    for (std::size_t j = 0; j < n; ++j) {
      if (!std::isfinite(r[j])) throw ValidationError("non-finite matrix entry");
      if (r[j] < -tol) throw NegativeEntry(i, j, r[j]);
      if (r[j] < 0.0) r[j] = 0.0;
    }
    const double sum = std::accumulate(r.begin(), r.end(), 0.0);
    if (!(std::fabs(sum - 1.0) <= tol)) throw RowSumViolation(i, sum);
    if (sum != 1.0) {
      for (auto& x : r) x /= sum;
    }
  }

  StochasticMatrix m;
  m.rows_ = std::move(rows);
  m.labels_ = std::move(labels);
  return m;
}

StochasticMatrix StochasticMatrix::with_labels(std::vector<std::string> labels) const {
  if (!labels.empty() && labels.size() != size()) {
    throw DimensionMismatch("label count does not match the number of states");
  }
  StochasticMatrix m = *this;
  m.labels_ = std::move(labels);
  return m;
}

StateWeights StateWeights::uniform(std::size_t n) {
  if (n == 0) throw ValidationError("state weights need at least one state");
  return StateWeights(std::vector<double>(n, 1.0 / static_cast<double>(n)));
}

StateWeights StateWeights::from_probabilities(std::vector<double> rho) {
  if (rho.empty()) throw ValidationError("state weights need at least one state");
  double sum = 0.0;
  for (double r : rho) {
    if (!(r >= 0.0) || !std::isfinite(r)) throw ValidationError("state weights must be finite and non-negative");
    sum += r;
  }
  if (std::fabs(sum - 1.0) > 1e-12) throw ValidationError("state weights must sum to 1");
  return StateWeights(std::move(rho));
}

Partition::Partition(std::size_t k, std::vector<std::size_t> assign) : k_(k), assign_(std::move(assign)) {
  if (assign_.empty()) throw BadAssignment(k, "partition of zero states");
  if (k == 0 || k > assign_.size()) throw BadAssignment(k, "k must lie in [1, n]");
  std::vector<bool> used(k, false);
  for (auto a : assign_) {
    if (a >= k) throw BadAssignment(k, "superstate index " + std::to_string(a) + " out of range");
    used[a] = true;
  }
  for (std::size_t j = 0; j < k; ++j) {
    if (!used[j]) throw BadAssignment(k, "superstate " + std::to_string(j) + " is unused");
  }
}

Partition Partition::single(std::size_t n) { return Partition(1, std::vector<std::size_t>(n, 0)); }

std::vector<std::size_t> Partition::members(std::size_t j) const {
  std::vector<std::size_t> out;
  for (std::size_t i = 0; i < assign_.size(); ++i) {
    if (assign_[i] == j) out.push_back(i);
  }
  return out;
}

AggregatedModel make_aggregated_model(Partition partition, Matrix distributions) {
  Matrix psi = aggregate_transitions(distributions, partition);
  return AggregatedModel{std::move(partition), std::move(psi), std::move(distributions)};
}

void check_model(const AggregatedModel& model, double tol) {
  const auto k = static_cast<Eigen::Index>(model.partition.k());
  const auto n = static_cast<Eigen::Index>(model.partition.n());
  if (model.psi.rows() != k || model.psi.cols() != k) throw DimensionMismatch("psi must be k x k");
  if (model.distributions.rows() != k || model.distributions.cols() != n) {
    throw DimensionMismatch("distributions must be k x n");
  }
  for (Eigen::Index j = 0; j < k; ++j) {
    if (std::fabs(model.psi.row(j).sum() - 1.0) > tol) throw RowSumViolation(j, model.psi.row(j).sum());
    if (std::fabs(model.distributions.row(j).sum() - 1.0) > tol) {
      throw RowSumViolation(j, model.distributions.row(j).sum());
    }
    for (Eigen::Index i = 0; i < n; ++i) {
      if (model.distributions(j, i) < 0.0) throw NegativeEntry(j, i, model.distributions(j, i));
    }
  }
  const Matrix expect = aggregate_transitions(model.distributions, model.partition);
  if ((expect - model.psi).cwiseAbs().maxCoeff() > tol) {
    throw ValidationError("psi is inconsistent with the distributions and partition");
  }
}

SimplexBasis simplex_basis(std::size_t n) {
  if (n < 2) throw ValidationError("simplex basis needs n >= 2");
  SimplexBasis b;
  b.n_ = n;
  b.theta_ = Matrix::Zero(n, n - 1);
  b.scale_.resize(n - 1);
  for (std::size_t c = 0; c + 1 < n; ++c) {
    const double m = static_cast<double>(c + 1);
    const double s = 1.0 / std::sqrt(m * (m + 1.0));
    b.scale_[c] = s;
    for (std::size_t t = 0; t <= c; ++t) b.theta_(t, c) = s;
    b.theta_(c + 1, c) = -m * s;
  }
  return b;
}

Vector SimplexBasis::project(std::span<const double> x) const {
  if (x.size() != n_) throw DimensionMismatch("projection input has wrong length");
  Vector y(n_ - 1);
  double prefix = 0.0;
  for (std::size_t c = 0; c + 1 < n_; ++c) {
    prefix += x[c];
    y[c] = scale_[c] * (prefix - static_cast<double>(c + 1) * x[c + 1]);
  }
  return y;
}

Vector SimplexBasis::lift(std::span<const double> y) const {
  if (y.size() + 1 != n_) throw DimensionMismatch("lift input has wrong length");
  Vector x(n_);
  // suffix[t] = sum_{c >= t} s_c y_c
  double suffix = 0.0;
  for (std::size_t t = n_; t-- > 0;) {
    if (t + 1 < n_) suffix += scale_[t] * y[t];
    double v = suffix;
    if (t >= 1) v -= static_cast<double>(t) * scale_[t - 1] * y[t - 1];
    x[t] = v;
  }
  return x;
}

StateWeights stationary_distribution(const StochasticMatrix& pi, double tol, int max_iter) {
  const std::size_t n = pi.size();
  const Matrix& P = pi.rows();
  Eigen::RowVectorXd rho = Eigen::RowVectorXd::Constant(n, 1.0 / static_cast<double>(n));
  for (int it = 0; it <= max_iter; ++it) {
    const Eigen::RowVectorXd next = rho * P;
    const double residual = (next - rho).cwiseAbs().maxCoeff();
    if (residual <= tol) {
      std::vector<double> out(rho.data(), rho.data() + n);
      const double s = std::accumulate(out.begin(), out.end(), 0.0);
      for (auto& v : out) v /= s;
      return StateWeights::from_probabilities(std::move(out));
    }
    rho = 0.5 * (rho + next);
  }
  throw NoConvergence(max_iter);
}

}  // namespace mcagg
