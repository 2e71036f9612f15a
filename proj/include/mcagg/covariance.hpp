#pragma once

// Weighted covariance of relative deviations (pi(i) - w) ./ w projected onto
// the zero-sum hyperplane, plus the generalized-eigenproblem whitening
// against diag(sum_i weight_i pi(i) ./ w.^2). Shared by the soft
// (critical temperature) and hard (heterogeneity) computations.

#include <span>
#include <utility>

#include "mcagg/core.hpp"

namespace mcagg {

/// sum_i weight_i (B^T v_i)(B^T v_i)^T with v_i = (rows(i) - w) ./ w and B the
/// Helmert basis; (n-1) x (n-1) for n = rows.cols(). Rows with zero weight
/// are skipped.
Matrix projected_covariance(const Matrix& rows, std::span<const double> weights, std::span<const double> w,
                            const SimplexBasis& basis);

/// Diagonal of sum_i weight_i rows(i) ./ w.^2.
Vector curvature_diagonal(const Matrix& rows, std::span<const double> weights, std::span<const double> w);

struct Whitened {
  Matrix covariance;  // L^-1 H1 L^-T
  Matrix chol;        // lower factor L of H0 = B^T diag(lambda) B
};

/// Throws CholeskyFailure(superstate) when H0 is not numerically positive definite.
Whitened whiten(const SimplexBasis& basis, const Vector& lambda, const Matrix& projected, std::size_t superstate);

/// Largest eigenvalue of a symmetric matrix.
double lambda_max(const Matrix& sym);

/// Largest eigenvalue and its unit eigenvector.
std::pair<double, Vector> top_eigenpair(const Matrix& sym);

}  // namespace mcagg
