#include <doctest.h>

#include <cmath>
#include <cstdio>

#include "projlab/csv.hpp"
#include "projlab/moment_lab.hpp"

using namespace projlab;

namespace {

bool within(const McEstimate& e, double target, double nse) {
  return std::abs(e.mean - target) <= nse * e.se + 1e-12;
}

}  // namespace

TEST_CASE("t1a analytic values") {
  const auto g = DistributionSpec::gaussian(16);
  const auto u = DistributionSpec::product_uniform(16);
  const auto s = DistributionSpec::spherical_shell_mixture(16);
  CHECK(*t1a_analytic(g, MonomialSpec::parse(4, "e12*e12")) == 1.0);
  CHECK(*t1a_analytic(g, MonomialSpec::parse(4, "e12*e12*e34*e34")) == 1.0);
  CHECK(*t1a_analytic(g, MonomialSpec::parse(4, "e12")) == 0.0);
  CHECK(*t1a_analytic(g, MonomialSpec::parse(4, "e11")) == 0.0);
  CHECK(*t1a_analytic(g, MonomialSpec::parse(4, "e12*e13")) == 0.0);
  CHECK(*t1a_analytic(g, MonomialSpec::parse(4, "e11*e11")) == doctest::Approx(2.0));
  CHECK(*t1a_analytic(u, MonomialSpec::parse(4, "e11*e11")) == doctest::Approx(0.8));
  CHECK_FALSE(t1a_analytic(s, MonomialSpec::parse(4, "e11*e11")).has_value());
  CHECK_FALSE(t1a_analytic(g, MonomialSpec::parse(4, "e12*e12*e13*e13")).has_value());
  CHECK(*t1a_analytic(s, MonomialSpec::parse(4, "e12*e12")) == 1.0);
}

TEST_CASE("t1a Monte Carlo matches analytic values") {
  FunctionalOptions opts{20000, 4};
  for (const auto& spec : {DistributionSpec::gaussian(16), DistributionSpec::product_laplace(16),
                           DistributionSpec::spherical_shell_mixture(16)}) {
    for (const char* h : {"e12*e12", "e12*e12*e34*e34", "e12", "e11", "e11*e11"}) {
      const auto m = MonomialSpec::parse(4, h);
      const auto r = t1a_diagnostic(spec, m, Stream(11), opts);
      CHECK(std::isfinite(r.norm_moment.mean));
      CHECK(r.norm_moment.mean > 0.0);
      if (r.analytic) {
        INFO(spec.name(), " ", h, " ", r.scaled_moment.mean, " +- ", r.scaled_moment.se);
        CHECK(within(r.scaled_moment, *r.analytic, 4.5));
      }
    }
  }
}

TEST_CASE("t1a norm moment against an independent Gaussian oracle") {
  // At k = 1, sqrt(d)|S_1 - 1| with S_1 = chi2_d / d.
  const int d = 32;
  FunctionalOptions opts{40000, 4};
  const auto r = t1a_diagnostic(DistributionSpec::gaussian(d), MonomialSpec::parse(1, "e11"),
                                Stream(5), opts);
  // E|N(0,2)|^3 = 2^{3/2} * 2 sqrt(2/pi) to leading order; chi-square skewness adds O(1/d).
  const double leading = std::pow(2.0, 1.5) * 2.0 * std::sqrt(2.0 / M_PI);
  CHECK(r.norm_moment.mean == doctest::Approx(leading).epsilon(0.15));
}

TEST_CASE("t1b constraints") {
  CHECK_THROWS_WITH_AS(validate_t1b(3, MonomialSpec::parse(4, "e12*e12")),
                       doctest::Contains("missing 3"), InvalidArgument);
  CHECK_THROWS_WITH_AS(validate_t1b(2, MonomialSpec::parse(4, "e12*e12")),
                       doctest::Contains("deg H < g"), InvalidArgument);
  CHECK_THROWS_WITH_AS(validate_t1b(3, MonomialSpec::parse(4, "e13")),
                       doctest::Contains("2 <= deg H"), InvalidArgument);
  CHECK_THROWS_WITH_AS(validate_t1b(5, MonomialSpec::parse(4, "e12*e34*e13")),
                       doctest::Contains("g <= k"), InvalidArgument);
  CHECK_NOTHROW(validate_t1b(3, MonomialSpec::parse(4, "e12*e13")));
  CHECK_NOTHROW(validate_t1b(4, MonomialSpec::parse(4, "e12*e34*e13")));
}

TEST_CASE("t1b diagnostic is finite and vanishes for sign-symmetric laws") {
  FunctionalOptions opts{20000, 4};
  const auto r = t1b_diagnostic(DistributionSpec::product_uniform(16), 3,
                                MonomialSpec::parse(4, "e12*e13"), Stream(3), opts);
  CHECK(std::isfinite(r.mean));
  CHECK(within(r, 0.0, 4.5));
}

TEST_CASE("chain expectations") {
  CHECK(chain_expectation(MonomialSpec::closed_chain(4, 1), 10) == 0.0);
  int len = -1;
  CHECK(chain_expectation(MonomialSpec::closed_chain(4, 3), 10, &len) == doctest::Approx(0.01));
  CHECK(len == 3);
  CHECK(chain_expectation(MonomialSpec::open_chain(4, {2, 4}), 10, &len) == 0.0);
  CHECK(len == 0);
  CHECK_THROWS_AS(chain_expectation(MonomialSpec::parse(4, "e13"), 10), InvalidArgument);
}

TEST_CASE("exceptional case classification") {
  CHECK(classify_exceptional(2, MonomialSpec::parse(4, "e11")) == ExceptionalCase::kA);
  CHECK(classify_exceptional(2, MonomialSpec::parse(4, "e12")) == ExceptionalCase::kB);
  CHECK(classify_exceptional(2, MonomialSpec::parse(4, "e12*e12")) == ExceptionalCase::kC);
  CHECK(classify_exceptional(2, MonomialSpec::parse(4, "e33")) == ExceptionalCase::kNone);
  CHECK(classify_exceptional(0, MonomialSpec::parse(4, "e11")) == ExceptionalCase::kNone);
  CHECK(classify_exceptional(1, MonomialSpec::parse(4, "e12")) == ExceptionalCase::kNone);
  const auto g = DistributionSpec::gaussian(16);
  CHECK(*exceptional_value(g, ExceptionalCase::kA) == 0.0);
  CHECK(*exceptional_value(g, ExceptionalCase::kB) == 0.0);
  CHECK(*exceptional_value(g, ExceptionalCase::kC) == 0.0);
  const auto l = DistributionSpec::product_laplace(16);
  CHECK(*exceptional_value(l, ExceptionalCase::kA) == doctest::Approx(3.0));
  CHECK(*exceptional_value(l, ExceptionalCase::kC) == doctest::Approx(27.0 / 16.0));
  CHECK_FALSE(exceptional_value(DistributionSpec::spherical_shell_mixture(16), ExceptionalCase::kA));
}

TEST_CASE("Gaussian-replacement differences match analytic values") {
  FunctionalOptions opts{60000, 4};
  const auto g2 = MonomialSpec::closed_chain(4, 2);
  for (int d : {16, 64}) {
    for (const auto& spec : {DistributionSpec::gaussian(d), DistributionSpec::product_uniform(d),
                             DistributionSpec::product_laplace(d)}) {
      for (const char* h : {"e11", "e12", "e12*e12"}) {
        const auto r = prop5_difference(spec, g2, MonomialSpec::parse(4, h), Stream(d), opts);
        REQUIRE(r.analytic.has_value());
        INFO(spec.name(), " d=", d, " H=", h, " ", r.difference.mean, " +- ", r.difference.se,
             " analytic ", *r.analytic);
        CHECK(within(r.difference, *r.analytic, 4.0));
      }
    }
  }
  // Closed chain of length 1 with H = e11.
  const auto r1 = prop5_difference(DistributionSpec::product_uniform(32),
                                   MonomialSpec::closed_chain(4, 1), MonomialSpec::parse(4, "e11"),
                                   Stream(1), opts);
  CHECK(r1.exceptional == ExceptionalCase::kA);
  CHECK(within(r1.difference, -1.2, 4.0));
}

TEST_CASE("non-exceptional chain pairs have no analytic value") {
  FunctionalOptions opts{2000, 2};
  const auto r = prop5_difference(DistributionSpec::product_uniform(16),
                                  MonomialSpec::open_chain(4, {2}), MonomialSpec::parse(4, "e33"),
                                  Stream(1), opts);
  CHECK(r.exceptional == ExceptionalCase::kNone);
  CHECK_FALSE(r.analytic.has_value());
  CHECK(std::isfinite(r.difference.mean));
  CHECK_THROWS_AS(prop5_difference(DistributionSpec::gaussian(8), MonomialSpec::closed_chain(4, 2),
                                   MonomialSpec::parse(3, "e11"), Stream(1), opts),
                  InvalidArgument);
}

TEST_CASE("binomial identities") {
  for (int k = 1; k <= 12; ++k) {
    CHECK(alternating_sum_j(k) == alternating_sum_j_closed(k));
    CHECK(alternating_sum_pairs(k) == alternating_sum_pairs_closed(k));
  }
  CHECK(alternating_sum_j(4) == 0);
  CHECK(alternating_sum_pairs(4) == 0);
  CHECK(alternating_sum_j(1) == -1);
  CHECK(alternating_sum_pairs(2) == 1);
}

TEST_CASE("diagnostics csv schema") {
  const std::string path = "test_diag.csv";
  write_diagnostics_csv({{"gaussian", "t1a", "e12*e12", 16, 1.01, 0.02, 1.0},
                         {"product-uniform", "prop5", "G:e12*e12 H:e33", 16, 0.1, 0.05, {}}},
                        path);
  const auto t = read_csv(path);
  CHECK(t.header == std::vector<std::string>{"family", "condition", "monomial", "d", "estimate",
                                             "se", "analytic_value_if_any"});
  REQUIRE(t.rows.size() == 2);
  CHECK(t.rows[0][6] == "1");
  CHECK(t.rows[1][6].empty());
  std::remove(path.c_str());
}
