#pragma once

// Deterministic-annealing aggregation: fixed-point iteration of the Gibbs
// association / centroid equations at a fixed temperature, the critical
// temperature at which coincident superstate distributions split, the
// Hessian of the free energy along a perturbation, and the cooling sweep
// that records one hard partition per number of distinct superstates.

#include <cstdint>
#include <span>
#include <vector>

#include "mcagg/core.hpp"
#include "mcagg/kl_geometry.hpp"

namespace mcagg {

struct FixedPointResult {
  Matrix Z;                          // k x n distributions at exit
  SoftAssociation assoc;             // Gibbs weights and posterior of Z at T
  Vector mass;                       // q_j
  int iterations = 0;
  bool converged = false;            // false: max_iter reached, Z is the last iterate
  std::vector<double> free_energy;   // one value per iterate, starting at Z0
};

/// Alternates gibbs_weights and posterior_and_centroids from Z0 until the
/// sup-norm change of Z drops below tol. Non-convergence is reported through
/// the result, not thrown. Throws EmptySuperstate if a row loses all mass.
FixedPointResult fixed_point(const StochasticMatrix& pi, std::span<const double> rho, Matrix Z0, double T,
                             double tol = 1e-8, int max_iter = 500);

struct CriticalReport {
  std::vector<double> per_superstate;  // T_cr,j
  double t_cr = 0.0;                   // max_j T_cr,j
};

/// T_cr,j = lambda_max(L^-1 (B^T C_T(j) B) L^-T) with B B^T-orthonormal
/// Helmert basis and L L^T = B^T Lambda_T(j) B. Throws CholeskyFailure(j)
/// if some coordinate of z(j) is below floor or the factorization fails.
CriticalReport critical_temperature(const StochasticMatrix& pi, std::span<const double> rho, const Matrix& Z,
                                    const SoftAssociation& assoc, double floor = 1e-12);

/// Retry form: coordinates of z(j) at or below floor are treated as
/// structurally zero and dropped before the eigenproblem is formed.
CriticalReport critical_temperature_floored(const StochasticMatrix& pi, std::span<const double> rho, const Matrix& Z,
                                            const SoftAssociation& assoc, double floor = 1e-12);

enum class HessianForm {
  // Second derivative of the free energy: the coupling term carries rho_i / T.
  Derived,
  // Coupling term with coefficient T and no rho_i, as the closed form is
  // commonly printed. Kept for comparison against the finite-difference value.
  AsPrinted,
};

/// d^2/de^2 of the free energy at Z + e * perturbation, e = 0. assoc must be
/// the Gibbs weights of Z at T. Each perturbation row must sum to zero
/// within 1e-10 (InadmissiblePerturbation otherwise).
double hessian_quadratic_form(const StochasticMatrix& pi, std::span<const double> rho, const Matrix& Z,
                              const SoftAssociation& assoc, double T, const Matrix& perturbation,
                              HessianForm form = HessianForm::Derived);

/// Groups rows of Z whose sup-norm distance to a group's first row is below
/// tol. Returns row -> group index, groups numbered by first appearance.
std::vector<std::size_t> merge_centroids(const Matrix& Z, double tol);

/// Argmax hardening of p after summing the columns that merge_map identifies;
/// ties go to the lowest group index and unused groups are compacted away.
Partition extract_hard_partition(const Matrix& p, std::span<const std::size_t> merge_map);

enum class Schedule { Geometric, Adaptive };

// Which hard partition is kept for a given k: the one seen when the distinct
// count first reaches k, or the last one before it grows again.
enum class Snapshot { OnSplit, LastBeforeSplit };

struct AnnealConfig {
  double alpha = 0.9;          // geometric cooling factor
  double t0_factor = 2.0;      // T0 = t0_factor * critical temperature of the one-superstate solution
  double t_min_factor = 1e-8;  // stop below t_min_factor * T0
  double merge_tol = 1e-6;
  double delta = 1e-4;         // relative split perturbation
  double fp_tol = 1e-8;
  int fp_max_iter = 500;
  std::size_t k_max = 0;       // 0 means n
  std::uint64_t seed = 0;
  Schedule schedule = Schedule::Geometric;
  bool per_k = false;
  Snapshot snapshot = Snapshot::OnSplit;
  double floor = 1e-12;
};

void check_config(const AnnealConfig& cfg, std::size_t n);

struct TraceRecord {
  double T = 0.0;
  double free_energy = 0.0;
  std::size_t effective_count = 0;
  int iterations = 0;
  bool converged = true;
};

/// Mutable state of one annealing run.
struct AnnealState {
  double T = 0.0;
  Matrix Z;                 // distinct distributions
  SoftAssociation assoc;    // merged association of the distinct distributions
  std::size_t effective_count = 0;
  std::vector<TraceRecord> trace;
};

struct AnnealEntry {
  std::size_t k = 0;
  Partition partition;
  AggregatedModel model;
  double T = 0.0;  // temperature at which the entry was recorded (+inf for k = 1)
};

struct AnnealResult {
  std::vector<AnnealEntry> entries;  // strictly increasing k, starting at 1
  AnnealState state;
  double t0 = 0.0;
};

/// Cooling sweep with shadow-duplicated distributions. Each distinct
/// distribution is carried as two copies offset along the top eigenvector of
/// its whitened soft covariance; after every fixed point the copies are
/// merged, and whenever the number of distinct superstates reaches a new
/// value the hardened partition and its aggregated model are recorded.
/// With cfg.per_k set, runs anneal_per_k for every k in [2, k_max] instead.
AnnealResult anneal(const StochasticMatrix& pi, const StateWeights& rho, const AnnealConfig& cfg);

/// Independent runs with exactly k distributions per requested k, each
/// cooled until the hardened partition has k superstates and the weights
/// are hard. Values of k that never materialize are absent from the output.
std::vector<AnnealEntry> anneal_per_k(const StochasticMatrix& pi, const StateWeights& rho, const AnnealConfig& cfg,
                                      std::span<const std::size_t> ks);

}  // namespace mcagg
