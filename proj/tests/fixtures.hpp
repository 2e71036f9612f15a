#pragma once

#include <random>
#include <span>

#include "mcagg/kl_geometry.hpp"

namespace fixture {

using mcagg::Matrix;

inline mcagg::SoftAssociation gibbs_assoc(const mcagg::StochasticMatrix& pi, const Matrix& Z,
                                          std::span<const double> rho, double T) {
  const Matrix p = mcagg::gibbs_weights(mcagg::distance_matrix(pi, Z), T);
  return {p, mcagg::posterior_and_centroids(pi, p, rho).posterior};
}

// Gaussian rows projected onto the zero-sum hyperplane.
inline Matrix random_admissible(Eigen::Index k, Eigen::Index n, std::mt19937_64& rng) {
  std::normal_distribution<double> g;
  Matrix psi(k, n);
  for (Eigen::Index j = 0; j < k; ++j) {
    for (Eigen::Index c = 0; c < n; ++c) psi(j, c) = g(rng);
    psi.row(j).array() -= psi.row(j).mean();
  }
  return psi;
}

}  // namespace fixture
