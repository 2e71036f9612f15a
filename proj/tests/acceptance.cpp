// Acceptance runner: one PASS/FAIL line per criterion, tolerances fixed
// below. Exit status is nonzero if any criterion fails.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <functional>
#include <iostream>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "fixtures.hpp"
#include "mcagg/annealer.hpp"
#include "mcagg/cli.hpp"
#include "mcagg/generators.hpp"
#include "mcagg/io.hpp"
#include "mcagg/pipeline.hpp"
#include "mcagg/simd/kernels.hpp"
#include "oracles.hpp"
#include "properties.hpp"

using namespace mcagg;
namespace fs = std::filesystem;

namespace {

constexpr int kSeeds = 30;

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

std::string fmt(const char* f, auto... args) {
  char buf[512];
  std::snprintf(buf, sizeof buf, f, args...);
  return buf;
}

int failures = 0;

void report(int id, bool pass, const std::string& detail) {
  if (!pass) ++failures;
  std::cout << (pass ? "PASS" : "FAIL") << " criterion " << id << ": " << detail << std::endl;
}

void info(int id, const std::string& detail) { std::cout << "INFO criterion " << id << ": " << detail << std::endl; }

GenSpec ncd(std::vector<std::size_t> blocks, double eps, std::uint64_t seed) {
  GenSpec s;
  s.blocks = std::move(blocks);
  s.eps = eps;
  s.seed = seed;
  return s;
}

SelectionReport pipeline_report(const StochasticMatrix& pi, std::size_t k_max) {
  AnnealConfig cfg;
  cfg.k_max = k_max;
  return run_pipeline(pi, StateWeights::uniform(pi.size()), cfg).report;
}

void ncd_recovery() {
  const auto t0 = std::chrono::steady_clock::now();
  int hits = 0;
  for (int seed = 1; seed <= kSeeds; ++seed) {
    hits += pipeline_report(gen_ncd(ncd({3, 3, 3}, 0.05, seed)).pi, 6).k_t == 3;
  }
  const double t = seconds_since(t0);
  report(1, hits >= 27 && t < 10.0, fmt("blocks (3,3,3), eps 0.05: k_t = 3 in %d/30 (need >= 27), %.2f s (limit 10 s)", hits, t));
}

void large_ncd() {
  const auto t0 = std::chrono::steady_clock::now();
  int hits = 0;
  std::string got;
  for (int seed = 1; seed <= 5; ++seed) {
    const auto k = pipeline_report(gen_ncd(ncd({10, 30, 20, 20, 20}, 0.02, seed)).pi, 8).k_t;
    hits += k == 5;
    got += (got.empty() ? "" : ",") + std::to_string(k);
  }
  const double t = seconds_since(t0);
  report(2, hits >= 4 && t < 120.0,
         fmt("N=100, blocks (10,30,20,20,20), eps 0.02: k_t = 5 in %d/5 (need >= 4; got %s), %.2f s (limit 120 s)", hits,
             got.c_str(), t));
}

void replicated_rows() {
  const auto t0 = std::chrono::steady_clock::now();
  int hits[2] = {0, 0}, whitened[2] = {0, 0};
  for (std::size_t kt : {3, 4}) {
    for (int seed = 1; seed <= kSeeds; ++seed) {
      GenSpec s;
      s.family = Family::ReplicatedRows;
      s.n = 10;
      s.k_t = kt;
      s.eps = 0.1;
      s.seed = static_cast<std::uint64_t>(seed);
      const auto pi = gen_replicated_rows(s).pi;
      AnnealConfig cfg;
      cfg.k_max = 6;
      const auto rho = StateWeights::uniform(pi.size());
      const auto res = run_pipeline(pi, rho, cfg);
      hits[kt - 3] += res.report.k_t == kt;
      SelectionOptions white;
      white.mode = CovarianceMode::Whiten;
      whitened[kt - 3] += select_k(pi, res.partitions, rho, white).k_t == kt;
    }
  }
  const double t = seconds_since(t0);
  report(3, hits[0] >= 27 && hits[1] >= 27 && t < 10.0,
         fmt("n=10, eps 0.1: k_t=3 recovered %d/30, k_t=4 recovered %d/30 (need >= 27 each), %.2f s (limit 10 s)",
             hits[0], hits[1], t));
  info(3, fmt("same partitions, whitened covariance: k_t=3 recovered %d/30, k_t=4 recovered %d/30", whitened[0],
              whitened[1]));
}

void separation_ratio() {
  int hits = 0;
  std::vector<double> ratios;
  for (int seed = 1; seed <= kSeeds; ++seed) {
    const auto rep = pipeline_report(gen_ncd(ncd({3, 3, 3}, 0.01, seed)).pi, 6);
    double second = 0.0;
    for (std::size_t k = 2; k <= 6; ++k) {
      if (k != 3) second = std::max(second, rep.nu_at(k));
    }
    const double ratio = rep.nu_at(3) / second;
    ratios.push_back(ratio);
    hits += ratio >= 10.0;
  }
  std::sort(ratios.begin(), ratios.end());
  report(4, hits >= 25,
         fmt("eps 0.01: nu(3) >= 10 x second-largest nu in %d/30 (need >= 25); ratio min %.2f, median %.2f, max %.2f",
             hits, ratios.front(), ratios[ratios.size() / 2], ratios.back()));
}

double closed_form_t_cr(const StochasticMatrix& pi, const std::vector<double>& rho) {
  Matrix z = Matrix::Zero(1, pi.rows().cols());
  for (std::size_t i = 0; i < pi.size(); ++i) z += rho[i] * pi.rows().row(static_cast<Eigen::Index>(i));
  return critical_temperature(pi, rho, z, fixture::gibbs_assoc(pi, z, rho, 1.0)).t_cr;
}

void critical_temperature_oracle() {
  Matrix m(2, 2);
  m << 0.9, 0.1, 0.1, 0.9;
  auto two = validate_stochastic(m, 1e-12);
  const std::vector<double> half{0.5, 0.5};
  const double closed2 = closed_form_t_cr(two, half);
  const double fd2 = oracle::split_crossing(two.rows(), half, 0.3, 1.0);
  bool pass = std::abs(closed2 - 0.64) <= 1e-12 && std::abs(fd2 - 0.64) <= 1e-3 * 0.64;

  std::mt19937_64 rng(5);
  double worst = 0.0;
  for (int trial = 0; trial < 10; ++trial) {
    const std::size_t n = 2 + static_cast<std::size_t>(trial % 4);
    auto pi = validate_stochastic(oracle::random_stochastic(n, rng, 0.05), 1e-9);
    auto rho = oracle::random_simplex(n, rng, 0.2);
    const double closed = closed_form_t_cr(pi, rho);
    const double fd = oracle::split_crossing(pi.rows(), rho, 0.5 * closed, 2.0 * closed);
    worst = std::max(worst, std::abs(fd - closed) / closed);
  }
  pass = pass && worst <= 1e-2;
  report(5, pass,
         fmt("2-state closed form %.12f, finite-difference crossing %.6f (rel tol 1e-3 of 0.64); 10 random instances worst rel "
             "diff %.2e (tol 1e-2)",
             closed2, fd2, worst));
}

void hessian_identity() {
  std::mt19937_64 rng(6);
  double worst = 0.0;
  int printed_mismatch = 0;
  for (int trial = 0; trial < 50; ++trial) {
    const std::size_t n = 2 + static_cast<std::size_t>(trial % 6);
    auto pi = validate_stochastic(oracle::random_stochastic(n, rng), 1e-9);
    auto rho = oracle::random_simplex(n, rng, 0.2);
    const auto k = static_cast<Eigen::Index>(1 + trial % 4);
    Matrix Z(k, static_cast<Eigen::Index>(n));
    for (Eigen::Index j = 0; j < k; ++j) {
      auto z = oracle::random_simplex(n, rng, 0.3);
      for (Eigen::Index c = 0; c < Z.cols(); ++c) Z(j, c) = z[static_cast<std::size_t>(c)];
    }
    const double T = 0.02 + 0.25 * (trial % 7);
    const Matrix psi = 0.1 * fixture::random_admissible(k, static_cast<Eigen::Index>(n), rng);
    const auto assoc = fixture::gibbs_assoc(pi, Z, rho, T);
    const double fd =
        oracle::second_derivative([&](double e) { return oracle::free_energy(pi.rows(), Z + e * psi, rho, T); }, 1e-3);
    const double closed = hessian_quadratic_form(pi, rho, Z, assoc, T, psi);
    worst = std::max(worst, std::abs(closed - fd) / std::max(std::abs(fd), 1e-12));
    const double printed = hessian_quadratic_form(pi, rho, Z, assoc, T, psi, HessianForm::AsPrinted);
    printed_mismatch += std::abs(printed - fd) > 1e-4 * std::abs(fd);
  }
  report(6, worst <= 1e-4,
         fmt("50 pairs: worst rel diff %.2e (tol 1e-4); coupling coefficient T without rho_i mismatches in %d/50", worst,
             printed_mismatch));
}

StochasticMatrix small_instance(int seed) {
  // odd seeds: nearly decomposable; even seeds: unstructured Dirichlet rows
  GenSpec s;
  s.seed = static_cast<std::uint64_t>(seed);
  if (seed % 2) {
    s.blocks = {3, 3, 2};
    s.eps = 0.1;
  } else {
    s.family = Family::ReplicatedRows;
    s.n = 8;
    s.k_t = 8;
  }
  return generate(s).pi;
}

// Instances, out of 20, whose partitions for every k in 1..3 are within 5%
// of the enumerated minimum distortion.
int within_five_percent(bool per_k, double* worst_gap, double* worst_eig) {
  int within = 0;
  for (int seed = 1; seed <= 20; ++seed) {
    const auto pi = small_instance(seed);
    const std::size_t n = pi.size();
    const std::vector<double> rho(n, 1.0 / static_cast<double>(n));
    AnnealConfig cfg;
    cfg.k_max = 3;
    cfg.per_k = per_k;
    const auto entries = aggregate(pi, StateWeights::uniform(n), cfg);
    bool ok = entries.size() == 3;
    for (const auto& e : entries) {
      const double best = oracle::min_distortion(pi.rows(), e.k, rho);
      const double got = oracle::hard_distortion(pi.rows(), e.partition.assignment(), e.k, rho);
      if (best > 0.0) *worst_gap = std::max(*worst_gap, got / best - 1.0);
      ok = ok && got <= 1.05 * best + 1e-15;

      const auto h = heterogeneity(pi, e.partition, StateWeights::uniform(n), simplex_basis(n));
      for (std::size_t j = 0; j < e.k; ++j) {
        const double power = oracle::power_lambda_max(oracle::plain_covariance(pi.rows(), e.partition.assignment(), j, rho));
        // singletons are exactly zero in one and round-off in the other
        *worst_eig = std::max(*worst_eig, std::abs(h.per_superstate[j] - power) / std::max(power, 1e-12));
      }
    }
    within += ok;
  }
  return within;
}

void brute_force_oracle() {
  double gap = 0.0, eig = 0.0, sweep_gap = 0.0, sweep_eig = 0.0;
  const int within = within_five_percent(true, &gap, &eig);
  const int sweep = within_five_percent(false, &sweep_gap, &sweep_eig);
  report(7, within >= 16 && std::max(eig, sweep_eig) <= 1e-8,
         fmt("n = 8, k <= 3, annealed per k: within 5%% of the enumerated minimum in %d/20 (need >= 16), worst gap "
             "%.2e; heterogeneity vs power iteration worst rel diff %.2e (tol 1e-8)",
             within, gap, std::max(eig, sweep_eig)));
  info(7, fmt("partitions taken at the split temperature of a single sweep: %d/20 within 5%%, worst gap %.2e", sweep,
              sweep_gap));
}

int cli(std::vector<std::string> args, std::string* err = nullptr) {
  std::ostringstream out, e;
  const int code = run_cli(args, out, e);
  if (err) *err = e.str();
  return code;
}

void bigrams() {
  const fs::path data = MCAGG_DATA_DIR;
  const fs::path dir = fs::temp_directory_path() / ("mcagg_acceptance_" + std::to_string(std::random_device{}()));
  fs::create_directories(dir);
  const auto t0 = std::chrono::steady_clock::now();
  const std::string matrix = (dir / "bigrams.csv").string();
  const std::string rep = (dir / "report.json").string();
  bool pass = cli({"ingest-bigrams", "--input", (data / "bigrams_en.txt").string(), "--out", matrix}) == 0;
  std::string err;
  pass = pass && cli({"select", "--matrix", matrix, "--partitions", (data / "letter_partitions.json").string(), "--out", rep},
                     &err) == 0;
  const auto r = pass ? parse_report_json(read_file(rep)) : SelectionReport{};
  const double t = seconds_since(t0);
  const bool k2_ok =
      cli({"select", "--matrix", matrix, "--partitions", (data / "letter_k2.json").string(), "--out", rep}) == 0;
  std::string nus;
  for (std::size_t i = 1; i < r.k_values.size(); ++i) nus += fmt(" nu(%zu)=%.3f", r.k_values[i], r.nu[i]);
  report(8, pass && r.k_t == 2 && k2_ok && t < 5.0,
         fmt("reference letter partitions, uniform weights, plain covariance: k_t = %zu (need 2);%s; k=2 file accepted: %s; %.3f s "
             "(limit 5 s)",
             r.k_t, nus.c_str(), k2_ok ? "yes" : "no", t));

  for (const char* weights : {"uniform", "stationary"}) {
    for (const char* mode : {"plain", "whiten"}) {
      if (std::string(weights) == "uniform" && std::string(mode) == "plain") continue;
      if (cli({"select", "--matrix", matrix, "--partitions", (data / "letter_partitions.json").string(), "--out", rep,
               "--rho", weights, "--mode", mode}) == 0) {
        info(8, fmt("%s weights, %s covariance: k_t = %zu", weights, mode, parse_report_json(read_file(rep)).k_t));
      }
    }
  }
  fs::remove_all(dir);
}

void invariants() {
  const auto t0 = std::chrono::steady_clock::now();
  std::string detail;
  bool pass = true;
  for (const auto& o : props::all(1000)) {
    pass = pass && o.failures == 0 && o.cases == 1000;
    detail += fmt("%s %d/%d; ", o.name.c_str(), o.cases - o.failures, o.cases);
    if (o.failures) detail += "first failure " + o.first_failure + "; ";
  }
  report(9, pass, detail + fmt("%.2f s", seconds_since(t0)));
}

}  // namespace

int main() {
  std::cout << "simd=" << simd::to_string(simd::active_kernels().level) << std::endl;
  const std::vector<std::function<void()>> criteria{ncd_recovery,     large_ncd,          replicated_rows,
                                                    separation_ratio, critical_temperature_oracle,
                                                    hessian_identity, brute_force_oracle, bigrams,
                                                    invariants};
  for (std::size_t i = 0; i < criteria.size(); ++i) {
    try {
      criteria[i]();
    } catch (const std::exception& e) {
      report(static_cast<int>(i + 1), false, std::string("exception: ") + e.what());
    }
  }
  std::cout << failures << " criteria failed" << std::endl;
  return failures == 0 ? 0 : 1;
}
