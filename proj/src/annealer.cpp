#include "mcagg/annealer.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <optional>
#include <random>
#include <string>

#include "mcagg/covariance.hpp"
#include "mcagg/simd/kernels.hpp"

namespace mcagg {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr double kMinMass = 1e-300;

double uniform01(std::mt19937_64& rng) { return static_cast<double>(rng() >> 11) * 0x1.0p-53; }

Matrix indicator(const Partition& partition) {
  Matrix p = Matrix::Zero(static_cast<Eigen::Index>(partition.n()), static_cast<Eigen::Index>(partition.k()));
  for (std::size_t i = 0; i < partition.n(); ++i) p(static_cast<Eigen::Index>(i), partition[i]) = 1.0;
  return p;
}

// rho-weighted within-superstate means of the rows of pi.
Matrix hard_centroids(const StochasticMatrix& pi, const Partition& partition, std::span<const double> rho) {
  return posterior_and_centroids(pi, indicator(partition), rho).Z;
}

AnnealEntry make_entry(const StochasticMatrix& pi, std::span<const double> rho, Partition partition, double T) {
  Matrix W = hard_centroids(pi, partition, rho);
  AnnealEntry e{partition.k(), partition, make_aggregated_model(partition, std::move(W)), T};
  return e;
}

struct IterateResult {
  Matrix Z;
  Matrix p;
  int iterations = 0;
  bool converged = false;
  std::vector<double> free_energy;
};

// Fixed point of the association / centroid map. With prune set, rows that
// lose all mass are dropped instead of raising EmptySuperstate.
IterateResult iterate(const StochasticMatrix& pi, std::span<const double> rho, Matrix Z, double T, double tol,
                      int max_iter, bool prune) {
  IterateResult out;
  const auto& kern = simd::active_kernels();
  Matrix d = distance_matrix(pi, Z);
  out.free_energy.push_back(free_energy_from_distances(d, rho, T));
  Matrix p = gibbs_weights(d, T);
  while (out.iterations < max_iter) {
    if (prune) {
      std::vector<Eigen::Index> keep;
      for (Eigen::Index j = 0; j < p.cols(); ++j) {
        double m = 0.0;
        for (Eigen::Index i = 0; i < p.rows(); ++i) m += rho[i] * p(i, j);
        if (m >= kMinMass) keep.push_back(j);
      }
      if (static_cast<Eigen::Index>(keep.size()) != Z.rows()) {
        Matrix Zk(static_cast<Eigen::Index>(keep.size()), Z.cols());
        for (std::size_t r = 0; r < keep.size(); ++r) Zk.row(static_cast<Eigen::Index>(r)) = Z.row(keep[r]);
        Z = std::move(Zk);
        d = distance_matrix(pi, Z);
        p = gibbs_weights(d, T);
      }
    }
    CentroidUpdate upd = posterior_and_centroids(pi, p, rho);
    double change = 0.0;
    for (Eigen::Index j = 0; j < Z.rows(); ++j) {
      change = std::max(change, kern.max_abs_diff(upd.Z.data() + j * Z.cols(), Z.data() + j * Z.cols(),
                                                  static_cast<std::size_t>(Z.cols())));
    }
    Z = std::move(upd.Z);
    ++out.iterations;
    d = distance_matrix(pi, Z);
    out.free_energy.push_back(free_energy_from_distances(d, rho, T));
    p = gibbs_weights(d, T);
    if (change < tol) {
      out.converged = true;
      break;
    }
  }
  out.Z = std::move(Z);
  out.p = std::move(p);
  return out;
}

struct SplitMode {
  double t_cr = 0.0;
  Vector direction;  // zero-sum, length n; empty when unavailable
};

// Critical temperature of one superstate and, optionally, the admissible
// direction B L^-T e along which the Hessian first loses positivity.
// With restrict set, coordinates of w at or below floor are dropped.
SplitMode superstate_mode(const StochasticMatrix& pi, std::span<const double> weights, std::span<const double> w,
                          std::size_t j, double floor, bool restrict, bool want_direction) {
  const std::size_t n = w.size();
  std::vector<std::size_t> support;
  for (std::size_t c = 0; c < n; ++c) {
    if (w[c] > floor) {
      support.push_back(c);
    } else if (!restrict) {
      throw CholeskyFailure(j);
    }
  }
  SplitMode out;
  if (support.size() < 2) return out;

  const std::size_t m = support.size();
  const Matrix* rows = &pi.rows();
  Matrix sub;
  std::vector<double> wsub;
  std::span<const double> ws = w;
  if (m != n) {
    sub.resize(rows->rows(), static_cast<Eigen::Index>(m));
    wsub.resize(m);
    for (std::size_t c = 0; c < m; ++c) {
      sub.col(static_cast<Eigen::Index>(c)) = rows->col(static_cast<Eigen::Index>(support[c]));
      wsub[c] = w[support[c]];
    }
    rows = &sub;
    ws = wsub;
  }

  const SimplexBasis basis = simplex_basis(m);
  const Matrix projected = projected_covariance(*rows, weights, ws, basis);
  const Vector lambda = curvature_diagonal(*rows, weights, ws);
  const Whitened wh = whiten(basis, lambda, projected, j);
  if (!want_direction) {
    out.t_cr = std::max(lambda_max(wh.covariance), 0.0);
    return out;
  }
  auto [top, e] = top_eigenpair(wh.covariance);
  out.t_cr = std::max(top, 0.0);
  const Vector x = wh.chol.transpose().triangularView<Eigen::Upper>().solve(e);
  const Vector u = basis.lift(std::span<const double>(x.data(), static_cast<std::size_t>(x.size())));
  if (!u.allFinite()) return out;
  out.direction = Vector::Zero(static_cast<Eigen::Index>(n));
  for (std::size_t c = 0; c < m; ++c) out.direction[static_cast<Eigen::Index>(support[c])] = u[static_cast<Eigen::Index>(c)];
  return out;
}

CriticalReport critical_report(const StochasticMatrix& pi, const Matrix& Z, const SoftAssociation& assoc,
                               double floor, bool restrict) {
  const auto n = static_cast<Eigen::Index>(pi.size());
  if (Z.cols() != n || assoc.posterior.rows() != n || assoc.posterior.cols() != Z.rows()) {
    throw DimensionMismatch("critical_temperature: Z and association disagree");
  }
  CriticalReport rep;
  if (n < 2) {
    rep.per_superstate.assign(static_cast<std::size_t>(Z.rows()), 0.0);
    return rep;
  }
  std::vector<double> weights(static_cast<std::size_t>(n));
  for (Eigen::Index j = 0; j < Z.rows(); ++j) {
    for (Eigen::Index i = 0; i < n; ++i) weights[static_cast<std::size_t>(i)] = assoc.posterior(i, j);
    const SplitMode mode =
        superstate_mode(pi, weights, row_of(Z, j), static_cast<std::size_t>(j), floor, restrict, false);
    rep.per_superstate.push_back(mode.t_cr);
    rep.t_cr = std::max(rep.t_cr, mode.t_cr);
  }
  return rep;
}

SoftAssociation association(const Matrix& p, std::span<const double> rho) {
  SoftAssociation a{p, Matrix(p.rows(), p.cols())};
  for (Eigen::Index j = 0; j < p.cols(); ++j) {
    double m = 0.0;
    for (Eigen::Index i = 0; i < p.rows(); ++i) m += rho[i] * p(i, j);
    for (Eigen::Index i = 0; i < p.rows(); ++i) a.posterior(i, j) = m > 0.0 ? rho[i] * p(i, j) / m : 0.0;
  }
  return a;
}

// Random admissible direction z o (g - <z, g>), g uniform in [-1, 1)^n.
Vector random_direction(std::span<const double> z, std::mt19937_64& rng) {
  const auto n = static_cast<Eigen::Index>(z.size());
  Vector g(n);
  for (Eigen::Index c = 0; c < n; ++c) g[c] = 2.0 * uniform01(rng) - 1.0;
  double zg = 0.0;
  for (Eigen::Index c = 0; c < n; ++c) zg += z[static_cast<std::size_t>(c)] * g[c];
  Vector u(n);
  for (Eigen::Index c = 0; c < n; ++c) u[c] = z[static_cast<std::size_t>(c)] * (g[c] - zg);
  return u;
}

// z + s * delta * u / max|u ./ z| keeps every coordinate within a relative
// delta of z, so the copy stays strictly inside the simplex support of z.
Vector offset(std::span<const double> z, const Vector& u, double delta, double s) {
  const auto n = static_cast<Eigen::Index>(z.size());
  double scale = 0.0;
  for (Eigen::Index c = 0; c < n; ++c) {
    const double zc = z[static_cast<std::size_t>(c)];
    if (zc > 0.0) scale = std::max(scale, std::abs(u[c]) / zc);
  }
  Vector out(n);
  for (Eigen::Index c = 0; c < n; ++c) out[c] = z[static_cast<std::size_t>(c)];
  if (!(scale > 0.0) || !std::isfinite(scale)) return out;
  for (Eigen::Index c = 0; c < n; ++c) {
    if (z[static_cast<std::size_t>(c)] > 0.0) out[c] += s * delta * u[c] / scale;
  }
  out /= out.sum();
  return out;
}

Vector split_direction(const StochasticMatrix& pi, const Matrix& posterior, const Matrix& Z, Eigen::Index j,
                       double floor, std::mt19937_64& rng) {
  std::vector<double> weights(static_cast<std::size_t>(posterior.rows()));
  for (Eigen::Index i = 0; i < posterior.rows(); ++i) weights[static_cast<std::size_t>(i)] = posterior(i, j);
  try {
    SplitMode mode = superstate_mode(pi, weights, row_of(Z, j), static_cast<std::size_t>(j), floor, true, true);
    if (mode.direction.size() > 0 && mode.direction.lpNorm<Eigen::Infinity>() > 0.0) return mode.direction;
  } catch (const Error&) {
    // fall through to a random admissible direction
  }
  return random_direction(row_of(Z, j), rng);
}

// Sum of p columns per merge group.
Matrix merge_columns(const Matrix& p, std::span<const std::size_t> merge_map, std::size_t groups) {
  Matrix s = Matrix::Zero(p.rows(), static_cast<Eigen::Index>(groups));
  for (Eigen::Index j = 0; j < p.cols(); ++j) s.col(static_cast<Eigen::Index>(merge_map[j])) += p.col(j);
  return s;
}

// Mass-weighted mean of the rows in each merge group.
Matrix merge_rows(const Matrix& Z, const Matrix& p, std::span<const double> rho, std::span<const std::size_t> merge_map,
                  std::size_t groups) {
  Matrix out = Matrix::Zero(static_cast<Eigen::Index>(groups), Z.cols());
  Vector total = Vector::Zero(static_cast<Eigen::Index>(groups));
  for (Eigen::Index j = 0; j < Z.rows(); ++j) {
    double m = 0.0;
    for (Eigen::Index i = 0; i < p.rows(); ++i) m += rho[i] * p(i, j);
    const auto g = static_cast<Eigen::Index>(merge_map[j]);
    out.row(g) += m * Z.row(j);
    total[g] += m;
  }
  for (Eigen::Index g = 0; g < out.rows(); ++g) {
    out.row(g) /= total[g];
    out.row(g) /= out.row(g).sum();
  }
  return out;
}

bool essentially_hard(const Matrix& p) {
  for (Eigen::Index i = 0; i < p.rows(); ++i) {
    if (p.row(i).maxCoeff() < 1.0 - 1e-6) return false;
  }
  return true;
}

Matrix single_centroid(const StochasticMatrix& pi, std::span<const double> rho) {
  return hard_centroids(pi, Partition::single(pi.size()), rho);
}

}  // namespace

FixedPointResult fixed_point(const StochasticMatrix& pi, std::span<const double> rho, Matrix Z0, double T, double tol,
                             int max_iter) {
  if (!(T > 0.0)) throw NonPositiveTemperature(T);
  if (Z0.cols() != static_cast<Eigen::Index>(pi.size()) || rho.size() != pi.size() || Z0.rows() < 1) {
    throw DimensionMismatch("fixed_point: Z0 must be k x n and rho of length n");
  }
  IterateResult it = iterate(pi, rho, std::move(Z0), T, tol, max_iter, false);
  FixedPointResult out;
  const CentroidUpdate final_step = posterior_and_centroids(pi, it.p, rho);
  out.assoc = SoftAssociation{std::move(it.p), final_step.posterior};
  out.mass = final_step.mass;
  out.Z = std::move(it.Z);
  out.iterations = it.iterations;
  out.converged = it.converged;
  out.free_energy = std::move(it.free_energy);
  return out;
}

CriticalReport critical_temperature(const StochasticMatrix& pi, std::span<const double>, const Matrix& Z,
                                    const SoftAssociation& assoc, double floor) {
  return critical_report(pi, Z, assoc, floor, false);
}

CriticalReport critical_temperature_floored(const StochasticMatrix& pi, std::span<const double>, const Matrix& Z,
                                            const SoftAssociation& assoc, double floor) {
  return critical_report(pi, Z, assoc, floor, true);
}

double hessian_quadratic_form(const StochasticMatrix& pi, std::span<const double> rho, const Matrix& Z,
                              const SoftAssociation& assoc, double T, const Matrix& perturbation, HessianForm form) {
  if (!(T > 0.0)) throw NonPositiveTemperature(T);
  const auto n = static_cast<Eigen::Index>(pi.size());
  const Eigen::Index k = Z.rows();
  if (Z.cols() != n || perturbation.rows() != k || perturbation.cols() != n || assoc.p.rows() != n ||
      assoc.p.cols() != k || rho.size() != pi.size()) {
    throw DimensionMismatch("hessian_quadratic_form: inconsistent dimensions");
  }
  for (Eigen::Index j = 0; j < k; ++j) {
    const double s = perturbation.row(j).sum();
    if (std::abs(s) > 1e-10) throw InadmissiblePerturbation(static_cast<std::size_t>(j), s);
  }

  // a(i, j) = (pi(i) ./ z(j))^T psi_j
  Matrix a(n, k);
  for (Eigen::Index j = 0; j < k; ++j) {
    for (Eigen::Index i = 0; i < n; ++i) {
      double s = 0.0;
      for (Eigen::Index c = 0; c < n; ++c) {
        const double pic = pi(static_cast<std::size_t>(i), static_cast<std::size_t>(c));
        if (pic != 0.0 && perturbation(j, c) != 0.0) s += pic * perturbation(j, c) / Z(j, c);
      }
      a(i, j) = s;
    }
  }

  double first = 0.0;
  for (Eigen::Index j = 0; j < k; ++j) {
    double q = 0.0;
    for (Eigen::Index i = 0; i < n; ++i) q += rho[i] * assoc.p(i, j);
    if (q == 0.0) continue;
    // Lambda term: sum_c psi_c^2 sum_i post_ij pi_ic / z_c^2
    double lam = 0.0;
    double cov = 0.0;
    for (Eigen::Index i = 0; i < n; ++i) {
      const double w = rho[i] * assoc.p(i, j) / q;
      if (w == 0.0) continue;
      double li = 0.0;
      double vi = 0.0;
      for (Eigen::Index c = 0; c < n; ++c) {
        const double psi = perturbation(j, c);
        if (psi == 0.0) continue;
        const double z = Z(j, c);
        const double pic = pi(static_cast<std::size_t>(i), static_cast<std::size_t>(c));
        li += pic * psi * psi / (z * z);
        vi += (pic - z) / z * psi;
      }
      lam += w * li;
      cov += w * vi * vi;
    }
    first += q * (lam - cov / T);
  }

  double second = 0.0;
  for (Eigen::Index i = 0; i < n; ++i) {
    double s = 0.0;
    for (Eigen::Index j = 0; j < k; ++j) s += assoc.p(i, j) * a(i, j);
    const double coef = form == HessianForm::Derived ? rho[i] / T : T;
    second += coef * s * s;
  }
  return first + second;
}

std::vector<std::size_t> merge_centroids(const Matrix& Z, double tol) {
  const auto& kern = simd::active_kernels();
  std::vector<std::size_t> map(static_cast<std::size_t>(Z.rows()));
  std::vector<Eigen::Index> leaders;
  for (Eigen::Index j = 0; j < Z.rows(); ++j) {
    std::size_t g = leaders.size();
    for (std::size_t l = 0; l < leaders.size(); ++l) {
      const double dist = kern.max_abs_diff(Z.data() + j * Z.cols(), Z.data() + leaders[l] * Z.cols(),
                                            static_cast<std::size_t>(Z.cols()));
      if (dist < tol) {
        g = l;
        break;
      }
    }
    if (g == leaders.size()) leaders.push_back(j);
    map[static_cast<std::size_t>(j)] = g;
  }
  return map;
}

Partition extract_hard_partition(const Matrix& p, std::span<const std::size_t> merge_map) {
  if (merge_map.size() != static_cast<std::size_t>(p.cols())) {
    throw DimensionMismatch("extract_hard_partition: merge map must cover every column");
  }
  const std::size_t groups = merge_map.empty() ? 0 : *std::max_element(merge_map.begin(), merge_map.end()) + 1;
  const Matrix s = merge_columns(p, merge_map, groups);
  std::vector<std::size_t> raw(static_cast<std::size_t>(p.rows()));
  for (Eigen::Index i = 0; i < s.rows(); ++i) {
    Eigen::Index best = 0;
    for (Eigen::Index g = 1; g < s.cols(); ++g) {
      if (s(i, g) > s(i, best)) best = g;
    }
    raw[static_cast<std::size_t>(i)] = static_cast<std::size_t>(best);
  }
  std::vector<std::size_t> remap(groups, groups);
  std::vector<bool> used(groups, false);
  for (std::size_t g : raw) used[g] = true;
  std::size_t next = 0;
  for (std::size_t g = 0; g < groups; ++g) {
    if (used[g]) remap[g] = next++;
  }
  for (auto& g : raw) g = remap[g];
  return Partition(next, std::move(raw));
}

void check_config(const AnnealConfig& cfg, std::size_t n) {
  auto fail = [](const std::string& what) { throw ValidationError("invalid annealing config: " + what); };
  if (!(cfg.alpha > 0.0 && cfg.alpha < 1.0)) fail("alpha must lie in (0, 1)");
  if (!(cfg.t0_factor > 0.0)) fail("t0_factor must be positive");
  if (!(cfg.t_min_factor > 0.0 && cfg.t_min_factor < 1.0)) fail("t_min_factor must lie in (0, 1)");
  if (!(cfg.merge_tol > 0.0)) fail("merge_tol must be positive");
  if (!(cfg.delta > 0.0 && cfg.delta < 1.0)) fail("delta must lie in (0, 1)");
  if (!(cfg.fp_tol > 0.0)) fail("fp_tol must be positive");
  if (cfg.fp_max_iter < 1) fail("fp_max_iter must be at least 1");
  if (cfg.k_max > n) fail("k_max exceeds the number of states");
  if (!(cfg.floor >= 0.0)) fail("floor must be non-negative");
}

AnnealResult anneal(const StochasticMatrix& pi, const StateWeights& rho_w, const AnnealConfig& cfg) {
  const std::size_t n = pi.size();
  if (rho_w.size() != n) throw DimensionMismatch("anneal: rho has wrong length");
  check_config(cfg, n);
  const auto rho = rho_w.values();
  const std::size_t k_max = cfg.k_max == 0 ? n : cfg.k_max;

  AnnealResult res;
  Matrix Z = single_centroid(pi, rho);
  res.entries.push_back(make_entry(pi, rho, Partition::single(n), kInf));
  res.state.Z = Z;
  res.state.assoc = association(Matrix::Ones(static_cast<Eigen::Index>(n), 1), rho);
  res.state.effective_count = 1;

  if (cfg.per_k) {
    std::vector<std::size_t> ks;
    for (std::size_t k = 2; k <= k_max; ++k) ks.push_back(k);
    for (auto& e : anneal_per_k(pi, rho_w, cfg, ks)) res.entries.push_back(std::move(e));
    return res;
  }

  const double t_cr0 = critical_temperature_floored(pi, rho, Z, res.state.assoc, cfg.floor).t_cr;
  if (!(t_cr0 > 1e-12) || k_max < 2) return res;

  std::mt19937_64 rng(cfg.seed);
  res.t0 = cfg.t0_factor * t_cr0;
  const double t_min = cfg.t_min_factor * res.t0;
  double T = res.t0;
  Matrix posterior = res.state.assoc.posterior;
  std::size_t last_k = 1;

  while (T >= t_min) {
    // two copies per distinct distribution, offset along its split direction
    Matrix bank(2 * Z.rows(), Z.cols());
    for (Eigen::Index j = 0; j < Z.rows(); ++j) {
      const Vector u = split_direction(pi, posterior, Z, j, cfg.floor, rng);
      bank.row(2 * j) = offset(row_of(Z, j), u, cfg.delta, 1.0).transpose();
      bank.row(2 * j + 1) = offset(row_of(Z, j), u, cfg.delta, -1.0).transpose();
    }

    IterateResult it = iterate(pi, rho, std::move(bank), T, cfg.fp_tol, cfg.fp_max_iter, true);
    const std::vector<std::size_t> map = merge_centroids(it.Z, cfg.merge_tol);
    const std::size_t groups = *std::max_element(map.begin(), map.end()) + 1;
    Z = merge_rows(it.Z, it.p, rho, map, groups);
    const Matrix merged_p = merge_columns(it.p, map, groups);
    SoftAssociation assoc = association(merged_p, rho);
    posterior = assoc.posterior;

    res.state.T = T;
    res.state.Z = Z;
    res.state.assoc = std::move(assoc);
    res.state.effective_count = groups;
    res.state.trace.push_back({T, it.free_energy.back(), groups, it.iterations, it.converged});

    Partition hard = extract_hard_partition(it.p, map);
    // jumped past k_max: the pipeline fills the skipped k with per-k runs
    if (hard.k() > k_max) break;
    if (hard.k() > last_k) {
      last_k = hard.k();
      res.entries.push_back(make_entry(pi, rho, std::move(hard), T));
    } else if (cfg.snapshot == Snapshot::LastBeforeSplit && hard.k() == last_k && last_k > 1) {
      res.entries.back() = make_entry(pi, rho, std::move(hard), T);
    }
    if (last_k >= k_max) break;

    double next = cfg.alpha * T;
    if (cfg.schedule == Schedule::Adaptive) {
      double t_cr = 0.0;
      try {
        t_cr = critical_temperature_floored(pi, rho, Z, res.state.assoc, cfg.floor).t_cr;
      } catch (const Error&) {
        t_cr = 0.0;
      }
      if (t_cr < next) next = std::max(0.95 * t_cr, 0.5 * t_min);
    }
    T = next;
  }
  return res;
}

std::vector<AnnealEntry> anneal_per_k(const StochasticMatrix& pi, const StateWeights& rho_w, const AnnealConfig& cfg,
                                      std::span<const std::size_t> ks) {
  const std::size_t n = pi.size();
  if (rho_w.size() != n) throw DimensionMismatch("anneal_per_k: rho has wrong length");
  check_config(cfg, n);
  const auto rho = rho_w.values();
  const Matrix z1 = single_centroid(pi, rho);
  const SoftAssociation one = association(Matrix::Ones(static_cast<Eigen::Index>(n), 1), rho);
  const double t_cr0 = critical_temperature_floored(pi, rho, z1, one, cfg.floor).t_cr;

  std::vector<std::size_t> order(ks.begin(), ks.end());
  std::sort(order.begin(), order.end());
  order.erase(std::unique(order.begin(), order.end()), order.end());

  std::vector<AnnealEntry> out;
  for (std::size_t k : order) {
    if (k < 1 || k > n) throw ValidationError("anneal_per_k: k=" + std::to_string(k) + " outside [1, n]");
    if (k == 1) {
      out.push_back(make_entry(pi, rho, Partition::single(n), kInf));
      continue;
    }
    if (!(t_cr0 > 1e-12)) continue;

    std::mt19937_64 rng(cfg.seed ^ (0x9e3779b97f4a7c15ULL * k));
    const double t0 = cfg.t0_factor * t_cr0;
    const double t_min = cfg.t_min_factor * t0;
    Matrix Z = z1.replicate(static_cast<Eigen::Index>(k), 1);

    std::optional<AnnealEntry> best;
    Matrix posterior = one.posterior;
    for (double T = t0; T >= t_min; T *= cfg.alpha) {
      // coincident rows are pushed apart again: the first two copies along
      // the split direction of their group, further copies at random
      {
        const std::vector<std::size_t> map = merge_centroids(Z, cfg.merge_tol);
        const std::size_t groups = *std::max_element(map.begin(), map.end()) + 1;
        Matrix leaders(static_cast<Eigen::Index>(groups), Z.cols());
        std::vector<Eigen::Index> leader_of(groups, -1);
        for (Eigen::Index j = 0; j < Z.rows(); ++j) {
          const std::size_t g = map[static_cast<std::size_t>(j)];
          if (leader_of[g] < 0) {
            leader_of[g] = j;
            leaders.row(static_cast<Eigen::Index>(g)) = Z.row(j);
          }
        }
        if (posterior.cols() != static_cast<Eigen::Index>(groups)) {
          const Matrix d = distance_matrix(pi, leaders);
          posterior = association(gibbs_weights(d, T), rho).posterior;
        }
        std::vector<int> seen(groups, 0);
        std::vector<Vector> dir(groups);
        for (Eigen::Index j = 0; j < Z.rows(); ++j) {
          const std::size_t g = map[static_cast<std::size_t>(j)];
          const int c = seen[g]++;
          const auto z = row_of(leaders, static_cast<Eigen::Index>(g));
          if (c == 0) {
            dir[g] = split_direction(pi, posterior, leaders, static_cast<Eigen::Index>(g), cfg.floor, rng);
            Z.row(j) = offset(z, dir[g], cfg.delta, 1.0).transpose();
          } else if (c == 1) {
            Z.row(j) = offset(z, dir[g], cfg.delta, -1.0).transpose();
          } else {
            Z.row(j) = offset(z, random_direction(z, rng), cfg.delta, 1.0).transpose();
          }
        }
        // a lone row is left where it was
        for (Eigen::Index j = 0; j < Z.rows(); ++j) {
          const std::size_t g = map[static_cast<std::size_t>(j)];
          if (seen[g] == 1) Z.row(j) = leaders.row(static_cast<Eigen::Index>(g));
        }
      }

      IterateResult it = iterate(pi, rho, Z, T, cfg.fp_tol, cfg.fp_max_iter, true);
      Z = std::move(it.Z);
      // re-seed lost rows as perturbed copies of the heaviest one
      while (static_cast<std::size_t>(Z.rows()) < k) {
        Eigen::Index heavy = 0;
        double heavy_mass = -1.0;
        for (Eigen::Index j = 0; j < it.p.cols(); ++j) {
          double m = 0.0;
          for (Eigen::Index i = 0; i < it.p.rows(); ++i) m += rho[i] * it.p(i, j);
          if (m > heavy_mass) {
            heavy_mass = m;
            heavy = j;
          }
        }
        Matrix grown(Z.rows() + 1, Z.cols());
        grown.topRows(Z.rows()) = Z;
        grown.row(Z.rows()) = Z.row(heavy);
        Z = std::move(grown);
        it.p = Matrix();
      }
      if (it.p.size() == 0) continue;

      const std::vector<std::size_t> map = merge_centroids(Z, cfg.merge_tol);
      const std::size_t groups = *std::max_element(map.begin(), map.end()) + 1;
      posterior = association(merge_columns(it.p, map, groups), rho).posterior;
      Partition hard = extract_hard_partition(it.p, map);
      if (hard.k() == k) {
        best = make_entry(pi, rho, std::move(hard), T);
        if (essentially_hard(it.p)) break;
      }
    }
    if (best) out.push_back(std::move(*best));
  }
  return out;
}

}  // namespace mcagg
