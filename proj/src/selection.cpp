#include "mcagg/selection.hpp"

#include <cmath>
#include <limits>

#include "mcagg/covariance.hpp"

namespace mcagg {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

}  // namespace

Matrix hard_membership(const Partition& partition, const StateWeights& rho, Membership membership) {
  const std::size_t n = partition.n();
  if (rho.size() != n) throw DimensionMismatch("hard_membership: rho has wrong length");
  Matrix Q = Matrix::Zero(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(partition.k()));
  if (membership == Membership::Raw) {
    for (std::size_t i = 0; i < n; ++i) Q(static_cast<Eigen::Index>(i), partition[i]) = 1.0;
    return Q;
  }
  std::vector<double> mass(partition.k(), 0.0);
  for (std::size_t i = 0; i < n; ++i) mass[partition[i]] += rho[i];
  for (std::size_t j = 0; j < partition.k(); ++j) {
    if (!(mass[j] > 0.0)) throw EmptySuperstate(j);
  }
  for (std::size_t i = 0; i < n; ++i) Q(static_cast<Eigen::Index>(i), partition[i]) = rho[i] / mass[partition[i]];
  return Q;
}

Matrix covariance_matrix(const StochasticMatrix& pi, const Matrix& membership, std::size_t j, const SimplexBasis& basis,
                         double floor, CovarianceMode mode) {
  const auto n = static_cast<Eigen::Index>(pi.size());
  if (membership.rows() != n || static_cast<Eigen::Index>(j) >= membership.cols() || basis.n() != pi.size()) {
    throw DimensionMismatch("covariance_matrix: inconsistent dimensions");
  }
  const auto jj = static_cast<Eigen::Index>(j);
  std::vector<double> weights(static_cast<std::size_t>(n));
  Vector w = Vector::Zero(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    weights[static_cast<std::size_t>(i)] = membership(i, jj);
    if (membership(i, jj) != 0.0) w += membership(i, jj) * pi.rows().row(i).transpose();
  }

  // Coordinates below the floor are admissible only if every member agrees
  // with w there (a shared structural zero); their deviation is zero.
  std::vector<std::size_t> support;
  for (Eigen::Index c = 0; c < n; ++c) {
    if (w[c] >= floor && w[c] > 0.0) {
      support.push_back(static_cast<std::size_t>(c));
      continue;
    }
    for (Eigen::Index i = 0; i < n; ++i) {
      if (membership(i, jj) != 0.0 && pi.rows()(i, c) != w[c]) throw FloorViolation(j, static_cast<std::size_t>(c));
    }
  }

  const std::size_t m = support.size();
  Matrix out = Matrix::Zero(n - 1, n - 1);
  if (m < 2) return out;

  if (m == static_cast<std::size_t>(n)) {
    const std::span<const double> ws(w.data(), static_cast<std::size_t>(n));
    Matrix C = projected_covariance(pi.rows(), weights, ws, basis);
    if (mode == CovarianceMode::Plain) return C;
    return whiten(basis, curvature_diagonal(pi.rows(), weights, ws), C, j).covariance;
  }

  // Restricted problem on the support; padded back with zeros.
  Matrix rows(n, static_cast<Eigen::Index>(m));
  std::vector<double> wsub(m);
  for (std::size_t c = 0; c < m; ++c) {
    rows.col(static_cast<Eigen::Index>(c)) = pi.rows().col(static_cast<Eigen::Index>(support[c]));
    wsub[c] = w[static_cast<Eigen::Index>(support[c])];
  }
  if (mode == CovarianceMode::Plain) {
    // Off-support coordinates are filled so their deviation is exactly zero.
    Matrix full = Matrix::Ones(n, n);
    std::vector<double> wfull(static_cast<std::size_t>(n), 1.0);
    for (Eigen::Index i = 0; i < n; ++i) {
      for (std::size_t c = 0; c < m; ++c) full(i, static_cast<Eigen::Index>(support[c])) = rows(i, static_cast<Eigen::Index>(c));
    }
    for (std::size_t c = 0; c < m; ++c) wfull[support[c]] = wsub[c];
    return projected_covariance(full, weights, wfull, basis);
  }
  const SimplexBasis sub = simplex_basis(m);
  Matrix C = projected_covariance(rows, weights, wsub, sub);
  const Matrix wc = whiten(sub, curvature_diagonal(rows, weights, wsub), C, j).covariance;
  out.topLeftCorner(wc.rows(), wc.cols()) = wc;
  return out;
}

Heterogeneity heterogeneity(const StochasticMatrix& pi, const Partition& partition, const StateWeights& rho,
                            const SimplexBasis& basis, double floor, CovarianceMode mode, Membership membership) {
  if (partition.n() != pi.size()) throw DimensionMismatch("heterogeneity: partition does not match the chain");
  Heterogeneity h;
  if (pi.size() < 2) {
    h.per_superstate.assign(partition.k(), 0.0);
    return h;
  }
  const Matrix Q = hard_membership(partition, rho, membership);
  for (std::size_t j = 0; j < partition.k(); ++j) {
    const double t = std::max(lambda_max(covariance_matrix(pi, Q, j, basis, floor, mode)), 0.0);
    h.per_superstate.push_back(t);
    h.t_bar = std::max(h.t_bar, t);
  }
  return h;
}

std::map<std::size_t, double> marginal_return(const std::map<std::size_t, double>& t_bars) {
  std::map<std::size_t, double> nu;
  for (const auto& [k, t] : t_bars) {
    if (k == 0) continue;
    auto prev = t_bars.find(k - 1);
    if (prev == t_bars.end()) continue;
    const double a = prev->second;
    if (a == 0.0 && t == 0.0) {
      nu[k] = 0.0;
    } else if (t == 0.0) {
      nu[k] = kInf;
    } else {
      nu[k] = std::log(a) - std::log(t);
    }
  }
  return nu;
}

double SelectionReport::nu_at(std::size_t k) const {
  for (std::size_t r = 0; r < k_values.size(); ++r) {
    if (k_values[r] == k) return nu[r];
  }
  return std::numeric_limits<double>::quiet_NaN();
}

SelectionReport select_k(const StochasticMatrix& pi, const std::map<std::size_t, Partition>& partitions,
                         const StateWeights& rho, const SelectionOptions& options) {
  if (partitions.empty()) throw ValidationError("select_k: no partitions supplied");
  std::vector<std::size_t> gaps;
  std::size_t expect = partitions.begin()->first;
  for (const auto& [k, part] : partitions) {
    while (expect < k) gaps.push_back(expect++);
    ++expect;
    if (part.n() != pi.size()) throw BadAssignment(k, "partition covers " + std::to_string(part.n()) + " states");
    if (part.k() != k) throw BadAssignment(k, "partition has " + std::to_string(part.k()) + " superstates");
  }
  if (!gaps.empty()) throw NonConsecutiveK(std::move(gaps));
  if (rho.size() != pi.size()) throw DimensionMismatch("select_k: rho has wrong length");

  SelectionReport rep;
  rep.options = options;
  const std::size_t n = pi.size();
  std::optional<SimplexBasis> basis;
  if (n >= 2) basis = simplex_basis(n);

  std::map<std::size_t, double> tb;
  for (const auto& [k, part] : partitions) {
    Heterogeneity h;
    if (basis) {
      h = heterogeneity(pi, part, rho, *basis, options.floor, options.mode, options.membership);
    } else {
      h.per_superstate.assign(part.k(), 0.0);
    }
    rep.k_values.push_back(k);
    rep.t_bar.push_back(h.t_bar);
    rep.t_bar_per_superstate.push_back(std::move(h.per_superstate));
    tb[k] = h.t_bar;
  }

  const auto nu = marginal_return(tb);
  double best = -kInf;
  for (std::size_t r = 0; r < rep.k_values.size(); ++r) {
    const std::size_t k = rep.k_values[r];
    auto it = nu.find(k);
    const double v = it == nu.end() ? std::numeric_limits<double>::quiet_NaN() : it->second;
    rep.nu.push_back(v);
    if (rep.t_bar[r] == 0.0 && !rep.exact_fit) rep.exact_fit = k;
    if (!std::isnan(v) && v > best) {
      best = v;
      rep.k_t = k;
    }
  }
  if (rep.exact_fit) {
    rep.k_t = *rep.exact_fit;
  } else if (rep.k_t == 0) {
    rep.k_t = rep.k_values.front();
  }
  return rep;
}

}  // namespace mcagg
