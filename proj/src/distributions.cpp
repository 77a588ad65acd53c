#include "projlab/distributions.hpp"

#include <cmath>
#include <limits>
#include <numbers>

namespace projlab {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();
const double kSqrt3 = std::sqrt(3.0);
const double kLaplaceScale = 1.0 / std::numbers::sqrt2;
const double kLogTwoPi = std::log(2.0 * std::numbers::pi);

double log_sum_exp(double a, double b) {
  const double m = std::max(a, b);
  if (m == -kInf) return -kInf;
  return m + std::log(std::exp(a - m) + std::exp(b - m));
}

double t_scale(int df) { return std::sqrt((df - 2.0) / df); }

double log_t_density(double t, int df) {
  const double nu = df;
  return std::lgamma((nu + 1.0) / 2.0) - std::lgamma(nu / 2.0) -
         0.5 * std::log(nu * std::numbers::pi) -
         (nu + 1.0) / 2.0 * std::log1p(t * t / nu);
}

}  // namespace

std::string_view family_name(Family family) {
  switch (family) {
    case Family::kGaussian: return "gaussian";
    case Family::kProductUniform: return "product-uniform";
    case Family::kProductLaplace: return "product-laplace";
    case Family::kProductScaledT: return "product-scaled-t";
    case Family::kSphericalShellMixture: return "spherical-shell-mixture";
  }
  return "unknown";
}

Family parse_family(std::string_view name) {
  for (Family f : {Family::kGaussian, Family::kProductUniform, Family::kProductLaplace,
                   Family::kProductScaledT, Family::kSphericalShellMixture}) {
    if (family_name(f) == name) return f;
  }
  throw ConfigError("family: unknown distribution family '" + std::string(name) + "'");
}

std::string_view attestation_name(Attestation a) {
  return a == Attestation::kHoldsAnalytically ? "holds-analytically" : "unknown";
}

DistributionSpec::DistributionSpec(Family family, int d, int df, double shell_low)
    : family_(family), d_(d), df_(df), shell_low_(shell_low) {
  if (d < 1) throw InvalidArgument("dimension d must be >= 1");
  if (family == Family::kProductScaledT && df <= 10) {
    throw InvalidArgument(
        "product-scaled-t requires df >= 11 (moments through order 9 for k = 4)");
  }
  if (family == Family::kSphericalShellMixture && !(shell_low > 0.0 && shell_low < 1.0)) {
    throw InvalidArgument("spherical-shell-mixture requires 0 < shell_low < 1");
  }
}

DistributionSpec DistributionSpec::gaussian(int d) {
  return DistributionSpec(Family::kGaussian, d, 0, 0.5);
}
DistributionSpec DistributionSpec::product_uniform(int d) {
  return DistributionSpec(Family::kProductUniform, d, 0, 0.5);
}
DistributionSpec DistributionSpec::product_laplace(int d) {
  return DistributionSpec(Family::kProductLaplace, d, 0, 0.5);
}
DistributionSpec DistributionSpec::product_scaled_t(int d, int df) {
  return DistributionSpec(Family::kProductScaledT, d, df, 0.5);
}
DistributionSpec DistributionSpec::spherical_shell_mixture(int d, double shell_low) {
  return DistributionSpec(Family::kSphericalShellMixture, d, 0, shell_low);
}

DistributionSpec DistributionSpec::make(Family family, int d, int df, double shell_low) {
  return DistributionSpec(family, d, family == Family::kProductScaledT ? df : 0, shell_low);
}

DistributionSpec DistributionSpec::with_dim(int d) const {
  return DistributionSpec(family_, d, df_, shell_low_);
}

std::string DistributionSpec::name() const {
  if (family_ == Family::kProductScaledT) {
    return std::string(family_name(family_)) + "(" + std::to_string(df_) + ")";
  }
  return std::string(family_name(family_));
}

ConditionAttestations DistributionSpec::attestations() const {
  constexpr auto H = Attestation::kHoldsAnalytically;
  switch (family_) {
    case Family::kGaussian:
    case Family::kProductUniform:
    case Family::kProductLaplace:
      return {H, H, H};
    case Family::kProductScaledT:
      // ||sqrt(d)(S_4 - I_4)||^9 involves z^18.
      if (df_ > 18) return {H, H, H};
      return {};
    case Family::kSphericalShellMixture:
      return {};
  }
  return {};
}

std::optional<ComponentMoments> DistributionSpec::component_moments() const {
  switch (family_) {
    case Family::kGaussian: return ComponentMoments{0.0, 3.0};
    case Family::kProductUniform: return ComponentMoments{0.0, 9.0 / 5.0};
    case Family::kProductLaplace: return ComponentMoments{0.0, 6.0};
    case Family::kProductScaledT:
      return ComponentMoments{0.0, 3.0 * (df_ - 2.0) / (df_ - 4.0)};
    case Family::kSphericalShellMixture: return std::nullopt;
  }
  return std::nullopt;
}

void sample_one(const DistributionSpec& spec, Stream& stream, VectorRef out) {
  const int d = spec.dim();
  switch (spec.family()) {
    case Family::kGaussian:
      for (int i = 0; i < d; ++i) out[i] = stream.normal();
      break;
    case Family::kProductUniform:
      for (int i = 0; i < d; ++i) out[i] = kSqrt3 * (2.0 * stream.uniform() - 1.0);
      break;
    case Family::kProductLaplace:
      for (int i = 0; i < d; ++i) {
        const double v = stream.uniform() - 0.5;
        const double mag = -kLaplaceScale * std::log1p(-2.0 * std::abs(v));
        out[i] = v < 0.0 ? -mag : mag;
      }
      break;
    case Family::kProductScaledT: {
      const int df = spec.df();
      const double s = t_scale(df);
      for (int i = 0; i < d; ++i) {
        const double num = stream.normal();
        double chi2 = 0.0;
        for (int j = 0; j < df; ++j) {
          const double g = stream.normal();
          chi2 += g * g;
        }
        out[i] = s * num / std::sqrt(chi2 / df);
      }
      break;
    }
    case Family::kSphericalShellMixture: {
      const double a = spec.shell_low();
      const double scale = std::sqrt(stream.uniform() < 0.5 ? a : 2.0 - a);
      for (int i = 0; i < d; ++i) out[i] = scale * stream.normal();
      break;
    }
  }
}

RowMatrix sample(const DistributionSpec& spec, Index n, const Stream& stream) {
  if (n < 1) throw InvalidArgument("sample: n must be >= 1");
  RowMatrix out(n, spec.dim());
  Vector row(spec.dim());
  for (Index i = 0; i < n; ++i) {
    Stream s = stream.substream(static_cast<std::uint64_t>(i));
    sample_one(spec, s, row);
    out.row(i) = row.transpose();
  }
  return out;
}

double log_std_normal_density(ConstVectorRef z) {
  return -0.5 * static_cast<double>(z.size()) * kLogTwoPi - 0.5 * z.squaredNorm();
}

double log_density(const DistributionSpec& spec, ConstVectorRef z) {
  const int d = spec.dim();
  switch (spec.family()) {
    case Family::kGaussian:
      return log_std_normal_density(z);
    case Family::kProductUniform:
      if (z.cwiseAbs().maxCoeff() > kSqrt3) return -kInf;
      return -d * std::log(2.0 * kSqrt3);
    case Family::kProductLaplace:
      return -d * std::log(2.0 * kLaplaceScale) - z.lpNorm<1>() / kLaplaceScale;
    case Family::kProductScaledT: {
      const double s = t_scale(spec.df());
      double acc = -d * std::log(s);
      for (int i = 0; i < d; ++i) acc += log_t_density(z[i] / s, spec.df());
      return acc;
    }
    case Family::kSphericalShellMixture: {
      const double r2 = z.squaredNorm();
      const double a = spec.shell_low();
      const double b = 2.0 - a;
      const double la = -0.5 * d * (kLogTwoPi + std::log(a)) - 0.5 * r2 / a;
      const double lb = -0.5 * d * (kLogTwoPi + std::log(b)) - 0.5 * r2 / b;
      return std::log(0.5) + log_sum_exp(la, lb);
    }
  }
  return -kInf;
}

double density(const DistributionSpec& spec, ConstVectorRef z) {
  return std::exp(log_density(spec, z));
}

double log_weight(const DistributionSpec& spec, ConstVectorRef z) {
  switch (spec.family()) {
    case Family::kGaussian:
      return 0.0;
    case Family::kSphericalShellMixture: {
      // Shared (2 pi)^{-d/2} cancels; keeps the ratio exact for large d.
      const int d = spec.dim();
      const double r2 = z.squaredNorm();
      const double a = spec.shell_low();
      const double b = 2.0 - a;
      const double la = -0.5 * d * std::log(a) - 0.5 * r2 * (1.0 / a - 1.0);
      const double lb = -0.5 * d * std::log(b) - 0.5 * r2 * (1.0 / b - 1.0);
      return std::log(0.5) + log_sum_exp(la, lb);
    }
    default: {
      const double lf = log_density(spec, z);
      if (lf == -kInf) return -kInf;
      return lf - log_std_normal_density(z);
    }
  }
}

}  // namespace projlab
