#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>

#include "projlab/rng.hpp"
#include "projlab/types.hpp"

namespace projlab {

enum class Family {
  kGaussian,
  kProductUniform,
  kProductLaplace,
  kProductScaledT,
  kSphericalShellMixture,
};

std::string_view family_name(Family family);
/// Parses "gaussian", "product-uniform", ...; throws ConfigError otherwise.
Family parse_family(std::string_view name);

enum class Attestation { kHoldsAnalytically, kUnknown };

std::string_view attestation_name(Attestation a);

/// Analytic status of the moment conditions at k = 4.
struct ConditionAttestations {
  Attestation t1a_k4 = Attestation::kUnknown;
  Attestation t1b_k4 = Attestation::kUnknown;
  Attestation t2_k4 = Attestation::kUnknown;

  bool all_hold() const {
    return t1a_k4 == Attestation::kHoldsAnalytically &&
           t1b_k4 == Attestation::kHoldsAnalytically &&
           t2_k4 == Attestation::kHoldsAnalytically;
  }
};

/// Univariate component moments of a product law (unit variance).
struct ComponentMoments {
  double m3 = 0.0;
  double m4 = 0.0;
};

/// A standardized d-dimensional law: E Z = 0, E ZZ' = I_d, Lebesgue density.
///
/// The spherical-shell mixture is Z = S * V with V ~ N(0, I_d) and S^2 equal
/// to `shell_low` or 2 - `shell_low` with probability 1/2 each, so that
/// ||Z|| concentrates on two shells while E S^2 = 1.
class DistributionSpec {
 public:
  static DistributionSpec gaussian(int d);
  static DistributionSpec product_uniform(int d);
  static DistributionSpec product_laplace(int d);
  static DistributionSpec product_scaled_t(int d, int df);
  static DistributionSpec spherical_shell_mixture(int d, double shell_low = 0.5);

  /// Builds from a family name; `df` is read only for product-scaled-t.
  static DistributionSpec make(Family family, int d, int df = 11,
                               double shell_low = 0.5);

  Family family() const { return family_; }
  int dim() const { return d_; }
  int df() const { return df_; }
  double shell_low() const { return shell_low_; }
  std::string name() const;
  bool is_product() const { return family_ != Family::kSphericalShellMixture; }

  ConditionAttestations attestations() const;

  /// Component moments for product laws; nullopt for non-product laws.
  std::optional<ComponentMoments> component_moments() const;

  /// Same law in another dimension.
  DistributionSpec with_dim(int d) const;

 private:
  DistributionSpec(Family family, int d, int df, double shell_low);

  Family family_;
  int d_;
  int df_ = 0;
  double shell_low_ = 0.5;
};

/// Draws one d-vector into `out`.
void sample_one(const DistributionSpec& spec, Stream& stream, VectorRef out);

/// n draws, one per row. Row i uses stream.substream(i).
RowMatrix sample(const DistributionSpec& spec, Index n, const Stream& stream);

/// log f(z); -infinity outside the support.
double log_density(const DistributionSpec& spec, ConstVectorRef z);
double density(const DistributionSpec& spec, ConstVectorRef z);

/// log f(z) - log phi_d(z). Exactly 0 for the Gaussian family.
double log_weight(const DistributionSpec& spec, ConstVectorRef z);

/// log phi_d(z) for the standard d-variate normal.
double log_std_normal_density(ConstVectorRef z);

}  // namespace projlab
