#pragma once

#include <string>
#include <string_view>
#include <vector>

#include "projlab/distributions.hpp"
#include "projlab/rng.hpp"
#include "projlab/types.hpp"

namespace projlab {

/// y = g(beta'Z) + noise. kIndependent ignores Z.
enum class Link { kLinear, kCubic, kSquare, kIndependent };

std::string_view link_name(Link link);
Link parse_link(std::string_view name);
double apply_link(Link link, double t);

/// Unit vector with its first nonzero coordinate positive.
Vector canonical_sign(Vector v);

/// Top eigenvector of sum_s p_s (m_s - m)(m_s - m)' over equal-count slices of y.
Vector sir_estimate(const Vector& y, const RowMatrix& z, int n_slices);

/// Top eigenvector of sum_s p_s (I - C_s)^2 with C_s the within-slice covariance.
Vector save_estimate(const Vector& y, const RowMatrix& z, int n_slices);

struct AlignmentResult {
  double alignment = 0.0;
  Vector beta;
  Vector estimate;
};

/// Draws beta uniformly, Z from spec, y = g(beta'Z) + noise_sd N(0,1), and
/// returns |<estimate, beta>| for the SIR ("sir") or SAVE ("save") estimate.
AlignmentResult direction_recovery(const DistributionSpec& spec, Index n, Link link,
                                   const std::string& method, int n_slices, double noise_sd,
                                   const Stream& stream);

struct SparseModelCase {
  Vector theta;
  /// Symmetric positive-definite square root of the covariance of w = M Z.
  Matrix m;
  Link link = Link::kLinear;
  double noise_sd = 0.0;

  void validate() const;
};

/// Random case: M = Q diag(lambda) Q' with Haar Q and lambda uniform on
/// [0.5, 2], theta standard Gaussian.
SparseModelCase random_sparse_case(int d, Stream& stream, double noise_sd = 0.5);

struct SparseReport {
  double c_hat = 0.0;
  /// Heteroskedasticity-robust standard error of c_hat.
  double se_c_hat = 0.0;
  double c_theory = 0.0;
  std::vector<double> x;
  std::vector<double> residual_mean;
  std::vector<double> residual_mean_se;
  std::vector<double> residual_var;
  std::vector<double> residual_var_se;
  /// Residual variance over all samples.
  double residual_var_all = 0.0;
  /// max |E[e|x]| / sd(e) and max |Var[e|x] / Var(e) - 1| over the grid.
  double max_mean_dev = 0.0;
  double max_var_dev = 0.0;
};

/// Cov[theta'w, w_1] / Var[w_1] with Cov(w) = M M'.
double sparse_c_theory(const SparseModelCase& c);

/// Simulates w = M Z, y = g(theta'w) + eps, fits y = c w_1 + e by least
/// squares and slices the residuals on w_1.
SparseReport sparse_submodel_check(const SparseModelCase& c, const DistributionSpec& spec, Index n,
                                   const Stream& stream, int n_slices = 20, double x_range = 2.5);

struct SirSaveRow {
  std::string family;
  int d = 0;
  Index n = 0;
  std::string link;
  std::string method;
  double alignment = 0.0;
};

struct SparseRow {
  std::string family;
  int d = 0;
  Index n = 0;
  double c_hat = 0.0;
  double c_theory = 0.0;
  double max_mean_dev = 0.0;
  double max_var_dev = 0.0;
  double null_floor = 0.0;
  /// Not part of sparse.csv.
  double se_c_hat = 0.0;
};

struct AppsConfig {
  std::string family = "gaussian";
  int df = 20;
  double shell_low = 0.5;
  int d = 20;
  Index n = 2000;
  /// Sample size for the square link, which needs second moments.
  Index n_square = 4000;
  std::vector<std::string> links{"linear", "cubic", "square"};
  std::vector<std::string> methods{"sir", "save"};
  int n_slices = 10;
  double noise_sd = 0.2;
  int repeats = 20;
  int sparse_d = 20;
  Index sparse_n = 100000;
  int sparse_cases = 20;
  double sparse_noise = 0.5;
  int sparse_slices = 20;
  double x_range = 2.5;
  std::uint64_t seed = 42;
  int workers = 0;

  void validate() const;
};

/// One row per (link, method, repeat).
std::vector<SirSaveRow> run_sir_save(const AppsConfig& cfg);

/// One row per random case; null_floor is the larger Gaussian deviation of
/// the same case.
std::vector<SparseRow> run_sparse(const AppsConfig& cfg);

void write_sir_save_csv(const std::vector<SirSaveRow>& rows, std::uint64_t seed,
                        const std::string& path);
void write_sparse_csv(const std::vector<SparseRow>& rows, std::uint64_t seed,
                      const std::string& path);

}  // namespace projlab
