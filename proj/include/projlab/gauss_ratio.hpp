#pragma once

#include <cstdint>
#include <functional>
#include <vector>

#include "projlab/distributions.hpp"
#include "projlab/monte_carlo.hpp"
#include "projlab/types.hpp"

namespace projlab {

/// S_k - I_k for k vectors in R^d, S_k = (w_i'w_j / d).
class GramDeviation {
 public:
  /// From the columns of a d x k matrix.
  static GramDeviation from_columns(const Matrix& w);
  /// From S_k - I_k directly; symmetrized.
  static GramDeviation from_matrix(const Matrix& s_minus_i, int d);
  /// The zero deviation (S_k = I_k).
  static GramDeviation identity(int k, int d);

  int k() const { return static_cast<int>(e_.rows()); }
  int d() const { return d_; }
  const Matrix& matrix() const { return e_; }
  /// (S_k - I_k)_{ij}, 0-based.
  double operator()(int i, int j) const { return e_(i, j); }
  /// Spectral norm of S_k - I_k.
  double norm() const;

 private:
  GramDeviation(Matrix e, int d) : e_(std::move(e)), d_(d) {}
  Matrix e_;
  int d_;
};

/// -(k/2) log(d/2) + lgamma(d/2) - lgamma((d-k)/2).
double log_ratio_constant(int k, int d);

/// Log of the density ratio; -infinity where the ratio is zero. Throws
/// InvalidArgument if k >= d.
double log_density_ratio(const GramDeviation& gram, double x);

/// The density ratio evaluated as a product of its factors (a separate path
/// from log_density_ratio).
double density_ratio(const GramDeviation& gram, double x);

/// Product over i of Z_{a_i}'Z_{a_i+1} ... Z_{b_i - 1}'Z_{b_i}, a_i = j_{i-1} + 1,
/// b_i = j_i, from an unscaled Gram matrix G (0-based storage, 1-based j).
double open_chain(const Matrix& g, const std::vector<int>& j_indices);

/// Z_1'Z_2 Z_2'Z_3 ... Z_j'Z_1 (for j = 1: Z_1'Z_1).
double closed_chain(const Matrix& g, int j);

/// Throws InvalidArgument naming the violated constraint unless j_0 = 0 <
/// j_1 < ... with j_{i-1} + 1 < j_i and j_m <= l.
void validate_chain_indices(int l, const std::vector<int>& j_indices);

/// Integer binomial coefficient.
std::int64_t binomial(int n, int r);

/// Weight applied in place of the exact ratio (e.g. a polynomial approximation).
using GramWeight = std::function<double(const GramDeviation&)>;

struct FunctionalOptions {
  std::int64_t reps = 100000;
  int workers = 1;
};

/// E[(h(x|b) - 1)^2] through one b and two V's per replicate: mean of
/// r1 r2 - 2 r1 + 1 with r_i = f(W_i)/phi(W_i).
/// `weight_ess`, when given, receives the effective sample size of the r_1
/// weights; values below kMinWeightEss mark the estimate as degenerate.
McEstimate functional_e1(const DistributionSpec& spec, double x, const Stream& stream,
                         const FunctionalOptions& opts = {}, double* weight_ess = nullptr);

inline constexpr double kMinWeightEss = 100.0;

/// The same quantity through i.i.d. Z's: ratio(Z1,Z2) - 2 ratio(Z1) + 1.
McEstimate functional_c(const DistributionSpec& spec, double x, const Stream& stream,
                        const FunctionalOptions& opts = {});

/// E[(Z1'Z2 - x^2) ratio(Z1, Z2)].
McEstimate functional_a(const DistributionSpec& spec, double x, const Stream& stream,
                        const FunctionalOptions& opts = {});

/// E[open_chain * weight(S_l - I_l)] - x^{2(j_m - m)}; exact ratio if weight is empty.
McEstimate functional_B(const DistributionSpec& spec, int l, const std::vector<int>& j_indices,
                        double x, const Stream& stream, const FunctionalOptions& opts = {},
                        const GramWeight& weight = {});

/// sum_j C(k,j)(-1)^j E[(closed_chain_j - d) weight(S_k - I_k)] - (1 - x^2)^k, k even.
McEstimate functional_C(const DistributionSpec& spec, int k, double x, const Stream& stream,
                        const FunctionalOptions& opts = {}, const GramWeight& weight = {});

/// Mean of the exact ratio over i.i.d. draws of spec (normalization check).
McEstimate ratio_mean(const DistributionSpec& spec, int k, double x, const Stream& stream,
                      const FunctionalOptions& opts = {});

}  // namespace projlab
