#include "mcagg/generators.hpp"

#include <cmath>
#include <numeric>

namespace mcagg {

namespace {

constexpr double kGenTol = 1e-12;

void check_eps(double eps, bool allow_one) {
  if (!(eps >= 0.0) || eps > 1.0 || (!allow_one && eps == 1.0)) {
    throw ValidationError("eps must lie in [0, 1), got " + std::to_string(eps));
  }
}

Matrix random_stochastic(std::size_t n, Rng& rng) {
  Matrix R(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(n));
  for (std::size_t i = 0; i < n; ++i) {
    const auto row = rng.dirichlet(n);
    for (std::size_t c = 0; c < n; ++c) R(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(c)) = row[c];
  }
  return R;
}

Matrix mix(const Matrix& base, double eps, Rng& rng) {
  if (eps == 0.0) return base;
  const Matrix R = random_stochastic(static_cast<std::size_t>(base.rows()), rng);
  return (1.0 - eps) * base + eps * R;
}

std::vector<std::size_t> contiguous_classes(const std::vector<std::size_t>& sizes) {
  std::vector<std::size_t> assign;
  for (std::size_t b = 0; b < sizes.size(); ++b) assign.insert(assign.end(), sizes[b], b);
  return assign;
}

}  // namespace

double Rng::uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

std::vector<double> Rng::dirichlet(std::size_t dim) {
  std::vector<double> x(dim);
  double s = 0.0;
  for (auto& v : x) {
    v = -std::log1p(-uniform());
    s += v;
  }
  for (auto& v : x) v /= s;
  return x;
}

GeneratedChain gen_ncd(const GenSpec& spec) {
  if (spec.blocks.empty()) throw BlockTooSmall("at least one block is required");
  for (std::size_t b : spec.blocks) {
    if (b < 1) throw BlockTooSmall("block sizes must be at least 1");
  }
  check_eps(spec.eps, false);
  const std::size_t n = std::accumulate(spec.blocks.begin(), spec.blocks.end(), std::size_t{0});
  if (n < 2) throw BlockTooSmall("the chain needs at least 2 states");

  Rng rng(spec.seed);
  Matrix base = Matrix::Zero(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(n));
  std::size_t start = 0;
  for (std::size_t b : spec.blocks) {
    for (std::size_t i = start; i < start + b; ++i) {
      const auto row = rng.dirichlet(b);
      for (std::size_t c = 0; c < b; ++c) {
        base(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(start + c)) = row[c];
      }
    }
    start += b;
  }
  Matrix pi = mix(base, spec.eps, rng);
  auto assign = contiguous_classes(spec.blocks);
  return {validate_stochastic(std::move(pi), kGenTol), Partition(spec.blocks.size(), std::move(assign))};
}

GeneratedChain gen_replicated_rows(const GenSpec& spec) {
  check_eps(spec.eps, false);
  if (spec.n < 2) throw CountMismatch("the chain needs at least 2 states");
  if (spec.k_t < 1 || spec.k_t > spec.n) throw CountMismatch("k_t must lie in [1, n]");
  std::vector<std::size_t> counts = spec.counts;
  if (counts.empty()) {
    // as even as possible, larger classes first
    for (std::size_t j = 0; j < spec.k_t; ++j) counts.push_back(spec.n / spec.k_t + (j < spec.n % spec.k_t ? 1 : 0));
  }
  if (counts.size() != spec.k_t) throw CountMismatch("expected " + std::to_string(spec.k_t) + " counts");
  for (std::size_t c : counts) {
    if (c < 1) throw CountMismatch("every class needs at least one state");
  }
  if (std::accumulate(counts.begin(), counts.end(), std::size_t{0}) != spec.n) {
    throw CountMismatch("counts must sum to n = " + std::to_string(spec.n));
  }

  Rng rng(spec.seed);
  std::vector<std::vector<double>> xi;
  for (std::size_t j = 0; j < spec.k_t; ++j) xi.push_back(rng.dirichlet(spec.n));
  auto assign = contiguous_classes(counts);
  Matrix base(static_cast<Eigen::Index>(spec.n), static_cast<Eigen::Index>(spec.n));
  for (std::size_t i = 0; i < spec.n; ++i) {
    for (std::size_t c = 0; c < spec.n; ++c) base(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(c)) = xi[assign[i]][c];
  }
  Matrix pi = mix(base, spec.eps, rng);
  return {validate_stochastic(std::move(pi), kGenTol), Partition(spec.k_t, std::move(assign))};
}

GeneratedChain generate(const GenSpec& spec) {
  return spec.family == Family::Ncd ? gen_ncd(spec) : gen_replicated_rows(spec);
}

StochasticMatrix perturb(const StochasticMatrix& pi, double eps, std::uint64_t seed) {
  check_eps(eps, true);
  if (eps == 0.0) return pi;
  Rng rng(seed);
  return validate_stochastic(mix(pi.rows(), eps, rng), kGenTol, pi.labels());
}

}  // namespace mcagg
