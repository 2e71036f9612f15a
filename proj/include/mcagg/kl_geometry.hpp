#pragma once

// KL distance between transition rows and superstate distributions, and the
// quantities built on it: distortion, Gibbs association weights, posterior
// and centroid updates, free energy, aggregated transitions. All logs are
// natural (results in nats).
//
// State weights are passed as plain spans so callers can use any positive
// scale where the result is scale-invariant (posteriors, centroids).

#include <span>

#include "mcagg/core.hpp"

namespace mcagg {

/// sum_k p_k log(p_k / max(q_k, floor)), with 0 log 0 = 0. Returns +inf when
/// some p_k > 0 meets a zero (floored) q_k.
double kl_divergence(std::span<const double> p, std::span<const double> q, double floor = 0.0);

/// n x k matrix of d(x_i, y_j) = KL(pi(i) || z(j)), evaluated as
/// sum p log p - sum p log max(z, floor) through the SIMD kernels.
Matrix distance_matrix(const StochasticMatrix& pi, const Matrix& Z, double floor = 0.0);

/// rho-weighted KL distance of every state to the distribution of its
/// assigned superstate.
double distortion(const StochasticMatrix& pi, const AggregatedModel& model, std::span<const double> rho);

/// Association weights p_{j|i} (n x k) with per-row max subtraction. A row
/// whose distances are all +inf falls back to uniform.
Matrix gibbs_weights(const Matrix& distances, double T);

/// Soft partition: p (n x k, rows on the simplex) and posterior
/// [P]_ij = rho_i p_{j|i} / sum_t rho_t p_{j|t} (columns on the simplex).
struct SoftAssociation {
  Matrix p;
  Matrix posterior;
};

struct CentroidUpdate {
  Matrix posterior;  // n x k
  Matrix Z;          // k x n, Z = posterior^T Pi
  Vector mass;       // q_j = sum_i rho_i p_{j|i}
};

/// Throws EmptySuperstate(j) when a column mass falls below 1e-300.
CentroidUpdate posterior_and_centroids(const StochasticMatrix& pi, const Matrix& p, std::span<const double> rho);

/// -T sum_i rho_i log sum_j exp(-KL(pi(i) || z(j)) / T), log-sum-exp stabilized.
double free_energy(const StochasticMatrix& pi, const Matrix& Z, std::span<const double> rho, double T,
                   double floor = 0.0);

/// Same value from a precomputed distance matrix.
double free_energy_from_distances(const Matrix& distances, std::span<const double> rho, double T);

/// psi_{jm} = sum over states i in superstate m of z_{ji}.
Matrix aggregate_transitions(const Matrix& Z, const Partition& partition);

}  // namespace mcagg
