#include <doctest.h>

#include "projlab/deviation.hpp"

using namespace projlab;

TEST_CASE("Gaussian d1 is within noise of zero") {
  const int d = 10;
  Stream s(1);
  const Direction b = sample_direction(d, s);
  const auto est = estimate_slicing(sample(DistributionSpec::gaussian(d), 100000, Stream(2)), b, 20);
  for (const auto& r : deviation_d1(est)) CHECK(std::abs(r.d1) <= 4.0 * r.se_d1);
}

TEST_CASE("spherical law has linear conditional mean but not constant variance") {
  const int d = 10;
  Stream s(3);
  const Direction b = sample_direction(d, s);
  const auto spec = DistributionSpec::spherical_shell_mixture(d);
  const auto est = estimate_slicing(sample(spec, 200000, Stream(4)), b, 20, {10});
  const auto rep = deviation_report(est, b, 2.5);
  double max_z = 0.0;
  for (const auto& r : rep.records) {
    CHECK(std::abs(r.d1) <= 4.0 * r.se_d1);
    max_z = std::max(max_z, r.d2 / r.se_d2);
  }
  CHECK(max_z > 10.0);
}

TEST_CASE("d2 on exact moments") {
  const int d = 4;
  Stream s(5);
  const Direction b = sample_direction(d, s);
  const double x = 1.3;
  const Matrix exact = Matrix::Identity(d, d) + (x * x - 1) * b.beta() * b.beta().transpose();
  CHECK(d2_value(exact, b.beta()) <= 1e-12);
  Matrix bumped = exact;
  bumped(0, 0) += 0.5;
  CHECK(d2_value(bumped, b.beta()) > 0.0);
  // Symmetrization precedes the norm.
  Matrix asym = bumped;
  asym(0, 1) += 0.2;
  asym(1, 0) -= 0.2;
  CHECK(d2_value(asym, b.beta()) == doctest::Approx(d2_value(bumped, b.beta())).epsilon(1e-12));
}

TEST_CASE("report sups equal the max over records") {
  const int d = 6;
  Stream s(6);
  const Direction b = sample_direction(d, s);
  const auto est = estimate_slicing(sample(DistributionSpec::product_laplace(d), 20000, Stream(7)), b, 12);
  const auto rep = deviation_report(est, b, 1.5);
  double m1 = -INFINITY, m2 = 0.0;
  for (const auto& r : rep.records) {
    CHECK(r.d2 >= 0.0);
    if (std::abs(r.x) > 1.5) continue;
    m1 = std::max(m1, r.d1);
    m2 = std::max(m2, r.d2);
  }
  CHECK(rep.sup_d1 == m1);
  CHECK(rep.sup_d2 == m2);
}

TEST_CASE("population d1 dominates every coordinate deviation") {
  // With beta'mu = x, ||mu||^2 - x^2 = ||mu - x beta||^2.
  const int d = 3;
  Vector bv(3);
  bv << 0.8, 0.5, 0.2;
  const Direction b = Direction::from_vector(bv);
  const auto est = estimate_gauss_is(DistributionSpec::product_uniform(d), b, 1.2, 100000, Stream(8));
  const Vector mu = est.points[0].mu;
  const double d1 = mu.squaredNorm() - 1.2 * 1.2;
  for (int j = 0; j < d; ++j) {
    const double dev = mu[j] - b.beta()[j] * 1.2;
    CHECK(d1 >= dev * dev - 1e-8);
  }
}
