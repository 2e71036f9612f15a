#include "mcagg/kl_geometry.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "mcagg/simd/kernels.hpp"

namespace mcagg {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr double kMinMass = 1e-300;

double neg_entropy(std::span<const double> p) {
  double s = 0.0;
  for (double v : p) {
    if (v > 0.0) s += v * std::log(v);
  }
  return s;
}

void require_positive(double T) {
  if (!(T > 0.0)) throw NonPositiveTemperature(T);
}

}  // namespace

double kl_divergence(std::span<const double> p, std::span<const double> q, double floor) {
  if (p.size() != q.size()) throw DimensionMismatch("kl_divergence: vectors differ in length");
  double s = 0.0;
  for (std::size_t k = 0; k < p.size(); ++k) {
    if (p[k] == 0.0) continue;
    const double qk = std::max(q[k], floor);
    if (qk <= 0.0) return kInf;
    s += p[k] * std::log(p[k] / qk);
  }
  return s;
}

Matrix distance_matrix(const StochasticMatrix& pi, const Matrix& Z, double floor) {
  const auto n = static_cast<Eigen::Index>(pi.size());
  if (Z.cols() != n) throw DimensionMismatch("distance_matrix: Z must have n columns");
  const Eigen::Index k = Z.rows();

  Matrix logZ(k, n);
  for (Eigen::Index j = 0; j < k; ++j) {
    for (Eigen::Index c = 0; c < n; ++c) {
      const double z = std::max(Z(j, c), floor);
      logZ(j, c) = z > 0.0 ? std::log(z) : -kInf;
    }
  }

  const auto& kern = simd::active_kernels();
  Matrix d(n, k);
  for (Eigen::Index i = 0; i < n; ++i) {
    const auto row = pi.row(static_cast<std::size_t>(i));
    const double h = neg_entropy(row);
    for (Eigen::Index j = 0; j < k; ++j) {
      const double cross = kern.masked_dot(row.data(), logZ.data() + j * n, row.size());
      // exact zeros are kept; rounding can leave tiny negatives
      d(i, j) = std::isinf(cross) ? kInf : std::max(h - cross, 0.0);
    }
  }
  return d;
}

double distortion(const StochasticMatrix& pi, const AggregatedModel& model, std::span<const double> rho) {
  const std::size_t n = pi.size();
  if (model.partition.n() != n || rho.size() != n ||
      model.distributions.cols() != static_cast<Eigen::Index>(n) ||
      model.distributions.rows() != static_cast<Eigen::Index>(model.partition.k())) {
    throw DimensionMismatch("distortion: inconsistent dimensions");
  }
  double D = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    if (rho[i] == 0.0) continue;
    const auto w = row_of(model.distributions, static_cast<Eigen::Index>(model.partition[i]));
    D += rho[i] * kl_divergence(pi.row(i), w);
  }
  return D;
}

Matrix gibbs_weights(const Matrix& distances, double T) {
  require_positive(T);
  const Eigen::Index n = distances.rows();
  const Eigen::Index k = distances.cols();
  Matrix p(n, k);
  for (Eigen::Index i = 0; i < n; ++i) {
    const double dmin = distances.row(i).minCoeff();
    if (std::isinf(dmin)) {
      p.row(i).setConstant(1.0 / static_cast<double>(k));
      continue;
    }
    double sum = 0.0;
    for (Eigen::Index j = 0; j < k; ++j) {
      const double e = std::exp(-(distances(i, j) - dmin) / T);
      p(i, j) = e;
      sum += e;
    }
    p.row(i) /= sum;
  }
  return p;
}

CentroidUpdate posterior_and_centroids(const StochasticMatrix& pi, const Matrix& p, std::span<const double> rho) {
  const auto n = static_cast<Eigen::Index>(pi.size());
  if (p.rows() != n || rho.size() != pi.size()) throw DimensionMismatch("posterior_and_centroids: bad dimensions");
  const Eigen::Index k = p.cols();

  CentroidUpdate out;
  out.mass = Vector::Zero(k);
  for (Eigen::Index j = 0; j < k; ++j) {
    double m = 0.0;
    for (Eigen::Index i = 0; i < n; ++i) m += rho[i] * p(i, j);
    if (!(m >= kMinMass)) throw EmptySuperstate(static_cast<std::size_t>(j));
    out.mass[j] = m;
  }

  out.posterior.resize(n, k);
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index j = 0; j < k; ++j) out.posterior(i, j) = rho[i] * p(i, j) / out.mass[j];
  }

  const auto& kern = simd::active_kernels();
  out.Z = Matrix::Zero(k, n);
  for (Eigen::Index j = 0; j < k; ++j) {
    double* zj = out.Z.data() + j * n;
    for (Eigen::Index i = 0; i < n; ++i) {
      const double w = out.posterior(i, j);
      if (w != 0.0) kern.axpy(w, pi.row(static_cast<std::size_t>(i)).data(), zj, static_cast<std::size_t>(n));
    }
    // convex combination of simplex rows: renormalize away rounding drift
    const double s = out.Z.row(j).sum();
    out.Z.row(j) /= s;
  }
  return out;
}

double free_energy_from_distances(const Matrix& d, std::span<const double> rho, double T) {
  require_positive(T);
  if (rho.size() != static_cast<std::size_t>(d.rows())) throw DimensionMismatch("free_energy: rho has wrong length");
  double F = 0.0;
  for (Eigen::Index i = 0; i < d.rows(); ++i) {
    if (rho[i] == 0.0) continue;
    const double dmin = d.row(i).minCoeff();
    if (std::isinf(dmin)) return kInf;
    double s = 0.0;
    for (Eigen::Index j = 0; j < d.cols(); ++j) s += std::exp(-(d(i, j) - dmin) / T);
    F += rho[i] * (dmin - T * std::log(s));
  }
  return F;
}

double free_energy(const StochasticMatrix& pi, const Matrix& Z, std::span<const double> rho, double T, double floor) {
  require_positive(T);
  return free_energy_from_distances(distance_matrix(pi, Z, floor), rho, T);
}

Matrix aggregate_transitions(const Matrix& Z, const Partition& partition) {
  const auto k = static_cast<Eigen::Index>(partition.k());
  if (Z.rows() != k || Z.cols() != static_cast<Eigen::Index>(partition.n())) {
    throw DimensionMismatch("aggregate_transitions: Z must be k x n for the partition");
  }
  Matrix psi = Matrix::Zero(k, k);
  for (Eigen::Index j = 0; j < k; ++j) {
    for (Eigen::Index i = 0; i < Z.cols(); ++i) psi(j, static_cast<Eigen::Index>(partition[i])) += Z(j, i);
  }
  return psi;
}

}  // namespace mcagg
