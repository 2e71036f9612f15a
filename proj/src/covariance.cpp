#include "mcagg/covariance.hpp"

#include <Eigen/Cholesky>
#include <Eigen/Eigenvalues>
#include <cmath>
#include <vector>

#include "mcagg/simd/kernels.hpp"

namespace mcagg {

Matrix projected_covariance(const Matrix& rows, std::span<const double> weights, std::span<const double> w,
                            const SimplexBasis& basis) {
  const auto n = static_cast<std::size_t>(rows.cols());
  if (weights.size() != static_cast<std::size_t>(rows.rows()) || w.size() != n || basis.n() != n) {
    throw DimensionMismatch("projected_covariance: inconsistent dimensions");
  }
  const auto& kern = simd::active_kernels();
  const std::size_t m = n - 1;
  Matrix C = Matrix::Zero(m, m);
  std::vector<double> v(n);
  for (std::size_t i = 0; i < weights.size(); ++i) {
    if (weights[i] == 0.0) continue;
    kern.relative_deviation(row_of(rows, static_cast<Eigen::Index>(i)).data(), w.data(), v.data(), n);
    const Vector y = basis.project(v);
    kern.rank1_update(weights[i], y.data(), C.data(), m);
  }
  return 0.5 * (C + C.transpose());
}

Vector curvature_diagonal(const Matrix& rows, std::span<const double> weights, std::span<const double> w) {
  const auto n = static_cast<std::size_t>(rows.cols());
  if (weights.size() != static_cast<std::size_t>(rows.rows()) || w.size() != n) {
    throw DimensionMismatch("curvature_diagonal: inconsistent dimensions");
  }
  Vector lam = Vector::Zero(n);
  const auto& kern = simd::active_kernels();
  for (std::size_t i = 0; i < weights.size(); ++i) {
    if (weights[i] != 0.0) kern.axpy(weights[i], row_of(rows, static_cast<Eigen::Index>(i)).data(), lam.data(), n);
  }
  for (std::size_t c = 0; c < n; ++c) lam[c] /= w[c] * w[c];
  return lam;
}

Whitened whiten(const SimplexBasis& basis, const Vector& lambda, const Matrix& projected, std::size_t superstate) {
  const auto n = static_cast<Eigen::Index>(basis.n());
  if (lambda.size() != n || projected.rows() != n - 1) throw DimensionMismatch("whiten: inconsistent dimensions");
  if (!lambda.allFinite()) throw CholeskyFailure(superstate);

  // H0 = B^T diag(lambda) B, column by column through the O(n) projection.
  const Matrix& B = basis.theta();
  Matrix H0(n - 1, n - 1);
  Vector col(n);
  for (Eigen::Index c = 0; c < n - 1; ++c) {
    col = lambda.cwiseProduct(B.col(c));
    H0.col(c) = basis.project(std::span<const double>(col.data(), static_cast<std::size_t>(n)));
  }
  H0 = 0.5 * (H0 + H0.transpose());

  Eigen::LLT<Matrix> llt(H0);
  if (llt.info() != Eigen::Success) throw CholeskyFailure(superstate);
  Matrix L = llt.matrixL();
  const double dmin = L.diagonal().minCoeff();
  if (!(dmin > 1e-150) || !L.allFinite()) throw CholeskyFailure(superstate);

  // L^-1 H1 L^-T via two triangular solves
  Matrix X = L.triangularView<Eigen::Lower>().solve(projected);
  Matrix Y = L.triangularView<Eigen::Lower>().solve(X.transpose());
  Whitened out;
  out.covariance = 0.5 * (Y + Y.transpose());
  out.chol = std::move(L);
  return out;
}

double lambda_max(const Matrix& sym) {
  if (sym.rows() == 0) return 0.0;
  if (sym.rows() == 1) return sym(0, 0);
  Eigen::SelfAdjointEigenSolver<Matrix> es(sym, Eigen::EigenvaluesOnly);
  if (es.info() != Eigen::Success) throw Error("symmetric eigensolver failed");
  return es.eigenvalues()[sym.rows() - 1];
}

std::pair<double, Vector> top_eigenpair(const Matrix& sym) {
  Eigen::SelfAdjointEigenSolver<Matrix> es(sym, Eigen::ComputeEigenvectors);
  if (es.info() != Eigen::Success) throw Error("symmetric eigensolver failed");
  const Eigen::Index last = sym.rows() - 1;
  return {es.eigenvalues()[last], es.eigenvectors().col(last)};
}

}  // namespace mcagg
