#pragma once

#include <limits>
#include <string>
#include <string_view>
#include <vector>

#include "projlab/distributions.hpp"
#include "projlab/geometry.hpp"
#include "projlab/rng.hpp"
#include "projlab/types.hpp"

namespace projlab {

enum class Method { kSlicing, kKernel, kGaussIs };

std::string_view method_name(Method m);

/// Conditional moments at one conditioning value x.
struct MomentPoint {
  double x = 0.0;
  /// Estimate of E[(beta'Z)^2 | point]; equals x^2 for gauss-is.
  double x2 = 0.0;
  bool present = false;
  Vector mu;
  Matrix m2;
  /// Density of beta'Z relative to the N(0,1) density, with its SE.
  double h = 0.0;
  double h_se = 0.0;
  double n_eff = 0.0;

  // Estimated covariance C of mu, restricted to the complement of beta:
  // tr(P C P), mu_p' C mu_p and ||P C P||_F^2 with P = I - beta beta'.
  double cov_trace_perp = 0.0;
  double cov_quad_perp = 0.0;
  double cov_frob2_perp = 0.0;
  /// Delete-one-block jackknife SE of the bias-corrected ||P mu||^2 (gauss-is);
  /// NaN for the sample estimators.
  double d1_se_jackknife = std::numeric_limits<double>::quiet_NaN();

  /// Leave-one-group-out m2 estimates; empty unless requested.
  std::vector<Matrix> m2_jackknife;
};

struct ConditionalMomentEstimate {
  Method method = Method::kSlicing;
  Vector beta;
  std::vector<MomentPoint> points;
  /// Set by gauss-is when the importance weights are degenerate.
  bool degenerate = false;
  std::string note;

  std::vector<double> x_grid() const;
};

/// ceil(n^{1/3}) clamped to [8, 50].
int default_slice_count(Index n);

/// Silverman bandwidth 1.06 * sd * n^{-1/5}.
double default_bandwidth(double sd, Index n);

struct EstimatorOptions {
  /// Jackknife groups for d2 standard errors; 0 disables.
  int jackknife_groups = 0;
};

/// Equal-count slicing on the order statistics of beta'Z. Ties are broken by
/// sample index; slice sizes differ by at most one.
ConditionalMomentEstimate estimate_slicing(const RowMatrix& samples, const Direction& beta,
                                           int n_slices, const EstimatorOptions& opts = {});

/// Slice holding the sample of the given rank (0-based, sorted by (beta'Z, index)).
int slice_of_rank(Index rank, Index n, int n_slices);

/// Rank of sample i in the order used by estimate_slicing.
Index stable_rank(const Vector& t, Index i);

/// Nadaraya-Watson with a Gaussian kernel. Points with n_eff < 30 are absent.
ConditionalMomentEstimate estimate_kernel(const RowMatrix& samples, const Direction& beta,
                                          double bandwidth, const std::vector<double>& x_grid,
                                          const EstimatorOptions& opts = {});

/// Importance sampling with W = x beta + (I - beta beta')V, V ~ N(0, I_d), and
/// weights f(W)/phi(W). Weights are handled in log space.
ConditionalMomentEstimate estimate_gauss_is(const DistributionSpec& spec, const Direction& beta,
                                            double x, Index m, const Stream& stream,
                                            int workers = 1, const EstimatorOptions& opts = {});

}  // namespace projlab
