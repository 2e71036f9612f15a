#include <doctest.h>

#include "properties.hpp"

namespace {

void expect_clean(const props::Outcome& o) {
  INFO(o.name, ": ", o.first_failure);
  CHECK(o.cases == 1000);
  CHECK(o.failures == 0);
}

}  // namespace

TEST_CASE("KL is non-negative") { expect_clean(props::kl_nonnegativity(1000, 11)); }
TEST_CASE("marginal returns telescope") { expect_clean(props::nu_telescoping(1000, 12)); }
TEST_CASE("covariances are PSD") { expect_clean(props::covariance_psd(1000, 13)); }
TEST_CASE("heterogeneity is permutation equivariant") { expect_clean(props::permutation_equivariance(1000, 14)); }
TEST_CASE("rows stay stochastic") { expect_clean(props::row_stochasticity(1000, 15)); }
