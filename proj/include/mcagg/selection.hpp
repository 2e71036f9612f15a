#pragma once

// Model-order selection from hard partitions: per-superstate heterogeneity
// (largest eigenvalue of the projected covariance of relative deviations),
// marginal return between consecutive k, and the k with the largest return.

#include <limits>
#include <map>
#include <optional>
#include <span>
#include <vector>

#include "mcagg/core.hpp"

namespace mcagg {

enum class Membership {
  Normalized,  // rho-weighted, columns sum to 1, so Q^T Pi has simplex rows
  Raw,         // 0/1 indicator
};

enum class CovarianceMode {
  Plain,   // B^T C B with the Helmert basis only
  Whiten,  // L^-1 (B^T C B) L^-T against the curvature diagonal
};

/// n x k membership matrix of a hard partition.
Matrix hard_membership(const Partition& partition, const StateWeights& rho, Membership membership = Membership::Normalized);

/// (n-1) x (n-1) covariance of superstate j. Throws FloorViolation(j, c)
/// when w_c < floor while some member row has a nonzero entry at c that
/// differs from w_c.
Matrix covariance_matrix(const StochasticMatrix& pi, const Matrix& membership, std::size_t j, const SimplexBasis& basis,
                         double floor = 1e-12, CovarianceMode mode = CovarianceMode::Plain);

struct Heterogeneity {
  double t_bar = 0.0;
  std::vector<double> per_superstate;
};

Heterogeneity heterogeneity(const StochasticMatrix& pi, const Partition& partition, const StateWeights& rho,
                            const SimplexBasis& basis, double floor = 1e-12, CovarianceMode mode = CovarianceMode::Plain,
                            Membership membership = Membership::Normalized);

/// nu(k) = log t_bar(k-1) - log t_bar(k) for every k whose predecessor is
/// present. A zero t_bar(k) after a positive one gives +inf; two zeros give 0.
std::map<std::size_t, double> marginal_return(const std::map<std::size_t, double>& t_bars);

struct SelectionOptions {
  CovarianceMode mode = CovarianceMode::Plain;
  Membership membership = Membership::Normalized;
  double floor = 1e-12;
};

struct SelectionReport {
  std::vector<std::size_t> k_values;
  std::vector<double> t_bar;
  std::vector<std::vector<double>> t_bar_per_superstate;
  std::vector<double> nu;  // aligned with k_values; NaN at the first k
  std::size_t k_t = 0;
  // Smallest k with t_bar = 0 (an exact fit); overrides the argmax when set.
  std::optional<std::size_t> exact_fit;
  SelectionOptions options;

  double nu_at(std::size_t k) const;
};

/// Heterogeneity for every supplied partition and the argmax of the
/// marginal return (ties to the smallest k). Keys must be consecutive;
/// NonConsecutiveK lists the missing ones.
SelectionReport select_k(const StochasticMatrix& pi, const std::map<std::size_t, Partition>& partitions,
                         const StateWeights& rho, const SelectionOptions& options = {});

}  // namespace mcagg
