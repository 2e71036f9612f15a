#pragma once

// Seeded synthetic chains with a known superstate structure: nearly
// decomposable block chains and chains built from a few replicated rows,
// both mixed with a random stochastic matrix at level eps.

#include <cstdint>
#include <random>
#include <string>
#include <vector>

#include "mcagg/core.hpp"

namespace mcagg {

enum class Family { Ncd, ReplicatedRows };

struct GenSpec {
  Family family = Family::Ncd;
  std::vector<std::size_t> blocks;  // ncd: block sizes
  std::size_t n = 0;                // replicated rows: number of states
  std::size_t k_t = 0;              // replicated rows: number of distinct rows
  std::vector<std::size_t> counts;  // replicated rows: states per class
  double eps = 0.0;
  std::uint64_t seed = 0;
};

struct GeneratedChain {
  StochasticMatrix pi;
  Partition truth;
};

/// Portable draws from a 64-bit Mersenne twister: uniforms use the top 53
/// bits, Dirichlet(1) rows are normalized exponentials.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}
  double uniform();  // [0, 1)
  std::vector<double> dirichlet(std::size_t dim);

 private:
  std::mt19937_64 engine_;
};

/// Block-diagonal Dirichlet(1) rows mixed as (1 - eps) Pi* + eps R.
GeneratedChain gen_ncd(const GenSpec& spec);

/// k_t Dirichlet(1) rows over all n states, replicated into contiguous
/// classes of the given counts, then mixed with R at level eps.
GeneratedChain gen_replicated_rows(const GenSpec& spec);

GeneratedChain generate(const GenSpec& spec);

/// (1 - eps) Pi + eps R with R a seeded random stochastic matrix.
/// eps = 0 returns pi unchanged.
StochasticMatrix perturb(const StochasticMatrix& pi, double eps, std::uint64_t seed);

}  // namespace mcagg
