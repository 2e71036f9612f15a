#include <doctest.h>

#include <cmath>
#include <random>

#include "mcagg/kl_geometry.hpp"
#include "oracles.hpp"

using namespace mcagg;

namespace {

StochasticMatrix two_state() {
  Matrix m(2, 2);
  m << 0.9, 0.1, 0.1, 0.9;
  return validate_stochastic(m, 1e-12);
}

}  // namespace

TEST_CASE("kl divergence values") {
  std::vector<double> h{0.5, 0.5};
  std::vector<double> one{1.0, 0.0};
  std::vector<double> q{0.75, 0.25};
  CHECK(kl_divergence(h, h) == 0.0);
  CHECK(kl_divergence(one, h) == doctest::Approx(std::log(2.0)));
  CHECK(kl_divergence(q, h) == doctest::Approx(0.130812).epsilon(1e-6));
  CHECK(std::isinf(kl_divergence(h, one)));
  CHECK(kl_divergence(h, one, 0.5) == doctest::Approx(0.5 * std::log(0.5 / 1.0) + 0.5 * std::log(0.5 / 0.5)));
  CHECK_THROWS_AS(kl_divergence(h, std::vector<double>{1.0}), DimensionMismatch);
}

TEST_CASE("distance matrix matches direct kl") {
  std::mt19937_64 rng(5);
  auto pi = validate_stochastic(oracle::random_stochastic(9, rng), 1e-9);
  Matrix Z(3, 9);
  for (Eigen::Index j = 0; j < 3; ++j) {
    auto z = oracle::random_simplex(9, rng, 0.01);
    for (Eigen::Index c = 0; c < 9; ++c) Z(j, c) = z[static_cast<std::size_t>(c)];
  }
  const Matrix d = distance_matrix(pi, Z);
  for (Eigen::Index i = 0; i < 9; ++i) {
    for (Eigen::Index j = 0; j < 3; ++j) {
      CHECK(d(i, j) == doctest::Approx(oracle::kl(oracle::row(pi.rows(), i), oracle::row(Z, j))).epsilon(1e-12));
    }
  }
}

TEST_CASE("distance is infinite when a supported coordinate is missing") {
  auto pi = two_state();
  Matrix Z(1, 2);
  Z << 1.0, 0.0;
  const Matrix d = distance_matrix(pi, Z);
  CHECK(std::isinf(d(0, 0)));
  CHECK(std::isfinite(distance_matrix(pi, Z, 1e-3)(0, 0)));
}

TEST_CASE("distortion") {
  auto pi = two_state();
  Matrix W(1, 2);
  W << 0.5, 0.5;
  auto model = make_aggregated_model(Partition::single(2), W);
  auto rho = StateWeights::uniform(2);
  CHECK(distortion(pi, model, rho.values()) == doctest::Approx(0.9 * std::log(1.8) + 0.1 * std::log(0.2)).epsilon(1e-12));

  Matrix same(2, 2);
  same << 0.3, 0.7, 0.3, 0.7;
  auto flat = validate_stochastic(same, 1e-12);
  Matrix w1(1, 2);
  w1 << 0.3, 0.7;
  CHECK(distortion(flat, make_aggregated_model(Partition::single(2), w1), rho.values()) == 0.0);
}

TEST_CASE("gibbs weights") {
  Matrix d(1, 3);
  d << 0.4, 0.4, 0.4;
  const Matrix p = gibbs_weights(d, 0.01);
  for (int j = 0; j < 3; ++j) CHECK(p(0, j) == doctest::Approx(1.0 / 3));

  Matrix d2(1, 2);
  d2 << 0.0, 1.0;
  const Matrix p2 = gibbs_weights(d2, 0.1);
  CHECK(p2(0, 0) == doctest::Approx(0.9999546).epsilon(1e-7));
  CHECK(p2(0, 1) == doctest::Approx(4.5398e-5).epsilon(1e-4));
  const Matrix p3 = gibbs_weights(d2, 1e12);
  CHECK(p3(0, 0) == doctest::Approx(0.5));

  // would overflow without the shift
  Matrix far(1, 2);
  far << 800.0, 801.0;
  const Matrix p4 = gibbs_weights(far, 1e-3);
  CHECK(p4(0, 0) == 1.0);
  CHECK_THROWS_AS(gibbs_weights(d2, 0.0), NonPositiveTemperature);
  CHECK_THROWS_AS(gibbs_weights(d2, -1.0), NonPositiveTemperature);
}

TEST_CASE("posterior and centroids") {
  auto pi = two_state();
  auto rho = StateWeights::uniform(2);
  const auto singletons = posterior_and_centroids(pi, Matrix::Identity(2, 2), rho.values());
  CHECK((singletons.Z - pi.rows()).cwiseAbs().maxCoeff() <= 1e-15);

  const auto one = posterior_and_centroids(pi, Matrix::Ones(2, 1), rho.values());
  CHECK(one.Z(0, 0) == doctest::Approx(0.5));
  CHECK(one.mass[0] == doctest::Approx(1.0));

  Matrix p(2, 2);
  p << 1.0, 0.0, 1.0, 0.0;
  CHECK_THROWS_AS(posterior_and_centroids(pi, p, rho.values()), EmptySuperstate);
}

TEST_CASE("centroids are invariant to rho scale") {
  std::mt19937_64 rng(9);
  auto pi = validate_stochastic(oracle::random_stochastic(6, rng), 1e-9);
  Matrix p(6, 2);
  std::uniform_real_distribution<double> u(0.1, 1.0);
  for (Eigen::Index i = 0; i < 6; ++i) {
    p(i, 0) = u(rng);
    p(i, 1) = 1.0 - p(i, 0);
  }
  std::vector<double> rho(6, 1.0 / 6), big(6, 7.0);
  const auto a = posterior_and_centroids(pi, p, rho);
  const auto b = posterior_and_centroids(pi, p, big);
  CHECK((a.Z - b.Z).cwiseAbs().maxCoeff() <= 1e-14);
}

TEST_CASE("free energy") {
  auto pi = two_state();
  auto rho = StateWeights::uniform(2);
  Matrix Z(1, 2);
  Z << 0.5, 0.5;
  CHECK(free_energy(pi, Z, rho.values(), 1.0) == doctest::Approx(0.9 * std::log(1.8) + 0.1 * std::log(0.2)).epsilon(1e-12));

  std::mt19937_64 rng(2);
  auto r = validate_stochastic(oracle::random_stochastic(5, rng), 1e-9);
  std::vector<double> rw(5, 0.2);
  Matrix Z3(3, 5);
  for (Eigen::Index j = 0; j < 3; ++j) {
    auto z = oracle::random_simplex(5, rng, 0.05);
    for (Eigen::Index c = 0; c < 5; ++c) Z3(j, c) = z[static_cast<std::size_t>(c)];
  }
  for (double T : {1e-3, 0.1, 10.0}) {
    CHECK(free_energy(r, Z3, rw, T) == doctest::Approx(oracle::free_energy(r.rows(), Z3, rw, T)).epsilon(1e-11));
  }
  CHECK_THROWS_AS(free_energy(pi, Z, rho.values(), 0.0), NonPositiveTemperature);
}

TEST_CASE("aggregate transitions") {
  Matrix Z(2, 3);
  Z << 0.2, 0.3, 0.5, 0.1, 0.1, 0.8;
  const Matrix psi = aggregate_transitions(Z, Partition(2, {0, 0, 1}));
  CHECK(psi(0, 0) == doctest::Approx(0.5));
  CHECK(psi(0, 1) == doctest::Approx(0.5));
  CHECK(psi(1, 0) == doctest::Approx(0.2));
  CHECK(psi(1, 1) == doctest::Approx(0.8));
  CHECK(aggregate_transitions(Z.topRows(1), Partition::single(3))(0, 0) == doctest::Approx(1.0));
  CHECK_THROWS_AS(aggregate_transitions(Z, Partition::single(3)), DimensionMismatch);
}
