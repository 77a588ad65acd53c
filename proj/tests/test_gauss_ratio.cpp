#include <doctest.h>

#include <cmath>
#include <numbers>

#include "projlab/gauss_ratio.hpp"

using namespace projlab;

namespace {

// Closed form evaluated through a full inverse and determinant.
double ratio_oracle(const Matrix& s, int d, double x) {
  const int k = static_cast<int>(s.rows());
  const double det = s.determinant();
  if (!(det > 0.0)) return 0.0;
  const double q = s.inverse().sum();
  if (x * x * q >= d) return 0.0;
  const double c = std::pow(d / 2.0, -k / 2.0) * std::tgamma(d / 2.0) / std::tgamma((d - k) / 2.0);
  return c / std::sqrt(det) * std::pow(1.0 - x * x * q / d, (d - k - 2) / 2.0) *
         std::exp(k * x * x / 2.0);
}

Matrix random_columns(int d, int k, Stream& s) {
  Matrix z(d, k);
  for (int i = 0; i < d; ++i)
    for (int j = 0; j < k; ++j) z(i, j) = s.normal();
  return z;
}

FunctionalOptions opts(std::int64_t reps) { return {reps, 1}; }

}  // namespace

TEST_CASE("k = 1, x = 0, w'w = d, d = 4") {
  const double expected = std::pow(2.0, -0.5) * 1.0 / (std::sqrt(std::numbers::pi) / 2.0);
  CHECK(density_ratio(GramDeviation::identity(1, 4), 0.0) == doctest::Approx(expected).epsilon(1e-14));
  CHECK(expected == doctest::Approx(0.797885).epsilon(1e-6));
}

TEST_CASE("singular or out-of-range Gram gives zero") {
  Matrix e(2, 2);
  e << 0, 1, 1, 0;  // S = [[1,1],[1,1]]
  CHECK(density_ratio(GramDeviation::from_matrix(e, 10), 0.5) == 0.0);
  CHECK(std::isinf(log_density_ratio(GramDeviation::from_matrix(e, 10), 0.5)));
  // x^2 q >= d.
  CHECK(density_ratio(GramDeviation::identity(1, 4), 2.0) == 0.0);
  CHECK_THROWS_AS(density_ratio(GramDeviation::identity(4, 4), 0.0), InvalidArgument);
}

TEST_CASE("log and product evaluation paths agree") {
  Stream s(1);
  for (int rep = 0; rep < 200; ++rep) {
    const int k = 1 + rep % 4;
    const int d = 8 + rep;
    const double x = 0.01 * rep - 1.0;
    const GramDeviation g = GramDeviation::from_columns(random_columns(d, k, s));
    const double lr = log_density_ratio(g, x);
    const Matrix sm = g.matrix() + Matrix::Identity(k, k);
    if (std::isinf(lr)) {
      CHECK(x * x * sm.inverse().sum() >= d);
      continue;
    }
    const double manual = log_ratio_constant(k, d) - 0.5 * std::log(sm.determinant()) +
                          0.5 * (d - k - 2) * std::log1p(-x * x * sm.inverse().sum() / d) +
                          0.5 * k * x * x;
    CHECK(std::abs(lr - manual) <= 1e-12 * std::max(1.0, std::abs(lr)));
    CHECK(density_ratio(g, x) == doctest::Approx(std::exp(lr)).epsilon(1e-12));
    CHECK(density_ratio(g, x) == doctest::Approx(ratio_oracle(sm, d, x)).epsilon(1e-10));
  }
}

TEST_CASE("ratio is invariant under permutations") {
  Stream s(2);
  const Matrix z = random_columns(30, 4, s);
  Matrix zp(30, 4);
  const int perm[4] = {2, 0, 3, 1};
  for (int j = 0; j < 4; ++j) zp.col(j) = z.col(perm[j]);
  const double a = log_density_ratio(GramDeviation::from_columns(z), 1.3);
  const double b = log_density_ratio(GramDeviation::from_columns(zp), 1.3);
  CHECK(a == doctest::Approx(b).epsilon(1e-13));
}

TEST_CASE("ratio reweights Gaussian draws to the law of W") {
  // E[W1'W2] = x^2 and E[W1'W1] = x^2 + d - 1.
  const int d = 16;
  const double x = 1.0;
  const auto spec = DistributionSpec::gaussian(d);
  const McEstimate cross = functional_B(spec, 2, {2}, x, Stream(3), opts(100000));
  CHECK(std::abs(cross.mean) <= 4.0 * cross.se);
  const McEstimate sq = mc_mean(100000, Stream(4), 1, [&](Stream& s) {
    Vector v(d);
    for (int i = 0; i < d; ++i) v[i] = s.normal();
    Matrix z = v;
    return v.squaredNorm() * density_ratio(GramDeviation::from_columns(z), x);
  });
  CHECK(std::abs(sq.mean - (x * x + d - 1)) <= 4.0 * sq.se);
}

TEST_CASE("ratio mean is one, k = 2, d = 16, x = 1") {
  const McEstimate m = ratio_mean(DistributionSpec::gaussian(16), 2, 1.0, Stream(5), opts(100000));
  CHECK(std::abs(m.mean - 1.0) <= 4.0 * m.se);
}

TEST_CASE("e1 is exactly zero per draw for the Gaussian") {
  for (double x : {0.0, 1.0, 2.5}) {
    const McEstimate e = functional_e1(DistributionSpec::gaussian(12), x, Stream(6), opts(2000));
    CHECK(e.min == 0.0);
    CHECK(e.max == 0.0);
    CHECK(e.mean == 0.0);
  }
}

TEST_CASE("e1 shared-direction form agrees with the i.i.d. form") {
  for (double x : {0.0, 1.0}) {
    const auto spec = DistributionSpec::product_uniform(6);
    const McEstimate e1 = functional_e1(spec, x, Stream(7), opts(200000));
    const McEstimate c = functional_c(spec, x, Stream(8), opts(200000));
    CAPTURE(x);
    CHECK(std::abs(e1.mean - c.mean) <= 4.0 * std::hypot(e1.se, c.se));
  }
}

TEST_CASE("Gaussian functionals a, B, C vanish") {
  const auto spec = DistributionSpec::gaussian(16);
  for (double x : {0.0, 1.0, 2.0}) {
    CAPTURE(x);
    const McEstimate a = functional_a(spec, x, Stream(9), opts(40000));
    CHECK(std::abs(a.mean) <= 4.0 * a.se);
    const McEstimate b = functional_B(spec, 4, {2, 4}, x, Stream(10), opts(40000));
    CHECK(std::abs(b.mean) <= 4.0 * b.se);
    const McEstimate c = functional_C(spec, 2, x, Stream(11), opts(40000));
    CHECK(std::abs(c.mean) <= 4.0 * c.se);
  }
}

TEST_CASE("B with m = 0 is the normalization check") {
  const auto spec = DistributionSpec::product_laplace(16);
  const McEstimate b = functional_B(spec, 2, {}, 0.7, Stream(12), opts(20000));
  const McEstimate r = ratio_mean(spec, 2, 0.7, Stream(12), opts(20000));
  CHECK(b.mean == doctest::Approx(r.mean - 1.0).epsilon(1e-12));
}

TEST_CASE("chain index validation names the constraint") {
  CHECK_NOTHROW(validate_chain_indices(4, {2, 4}));
  CHECK_NOTHROW(validate_chain_indices(3, {}));
  try {
    validate_chain_indices(4, {2, 3});
    FAIL("expected rejection");
  } catch (const InvalidArgument& e) {
    CHECK(std::string(e.what()).find("j_{i-1}+1 < j_i") != std::string::npos);
  }
  try {
    validate_chain_indices(2, {3});
    FAIL("expected rejection");
  } catch (const InvalidArgument& e) {
    CHECK(std::string(e.what()).find("j_m <= l") != std::string::npos);
  }
  CHECK_THROWS(functional_C(DistributionSpec::gaussian(8), 3, 0.0, Stream(1)));
}

TEST_CASE("chain products") {
  Matrix g(3, 3);
  g << 1, 2, 3, 2, 4, 5, 3, 5, 6;
  CHECK(open_chain(g, {}) == 1.0);
  CHECK(open_chain(g, {3}) == 2.0 * 5.0);
  CHECK(open_chain(g, {2}) == 2.0);
  CHECK(closed_chain(g, 1) == 1.0);
  CHECK(closed_chain(g, 2) == 4.0);
  CHECK(closed_chain(g, 3) == 2.0 * 5.0 * 3.0);
  CHECK(binomial(4, 2) == 6);
  CHECK(binomial(4, 5) == 0);
}
