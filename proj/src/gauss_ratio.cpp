#include "projlab/gauss_ratio.hpp"

#include <Eigen/Cholesky>
#include <cmath>
#include <limits>
#include <string>

#include "projlab/geometry.hpp"
#include "projlab/spectral.hpp"

namespace projlab {

namespace {

constexpr double kNegInf = -std::numeric_limits<double>::infinity();

struct RatioParts {
  bool positive = false;
  double log_det = 0.0;
  double det = 0.0;
  double t = 0.0;  // x^2 q / d
};

RatioParts ratio_parts(const GramDeviation& gram, double x) {
  const int k = gram.k();
  const int d = gram.d();
  if (k >= d) throw InvalidArgument("density ratio: requires k < d");
  RatioParts parts;
  const Matrix s = gram.matrix() + Matrix::Identity(k, k);
  Eigen::LLT<Matrix> llt(s);
  if (llt.info() != Eigen::Success) return parts;
  const Vector diag = llt.matrixL().toDenseMatrix().diagonal();
  if ((diag.array() <= 0.0).any()) return parts;
  parts.log_det = 2.0 * diag.array().log().sum();
  parts.det = diag.array().square().prod();
  const double q = llt.solve(Vector::Ones(k)).sum();
  parts.t = x * x * q / d;
  parts.positive = parts.t < 1.0;
  return parts;
}

// Draws `count` vectors from spec into the columns of z.
void draw_columns(const DistributionSpec& spec, Stream& s, Matrix& z) {
  Vector v(spec.dim());
  for (Index c = 0; c < z.cols(); ++c) {
    sample_one(spec, s, v);
    z.col(c) = v;
  }
}

double exact_weight(const GramDeviation& g, double x) {
  return std::exp(log_density_ratio(g, x));
}

}  // namespace

GramDeviation GramDeviation::from_columns(const Matrix& w) {
  const int d = static_cast<int>(w.rows());
  Matrix e = (w.transpose() * w) / static_cast<double>(d);
  e.diagonal().array() -= 1.0;
  return GramDeviation(0.5 * (e + e.transpose()), d);
}

GramDeviation GramDeviation::from_matrix(const Matrix& s_minus_i, int d) {
  if (s_minus_i.rows() != s_minus_i.cols()) throw InvalidArgument("gram: matrix must be square");
  return GramDeviation(0.5 * (s_minus_i + s_minus_i.transpose()), d);
}

GramDeviation GramDeviation::identity(int k, int d) {
  return GramDeviation(Matrix::Zero(k, k), d);
}

double GramDeviation::norm() const { return spectral_norm(e_); }

double log_ratio_constant(int k, int d) {
  return -0.5 * k * std::log(0.5 * d) + std::lgamma(0.5 * d) - std::lgamma(0.5 * (d - k));
}

double log_density_ratio(const GramDeviation& gram, double x) {
  const RatioParts p = ratio_parts(gram, x);
  if (!p.positive) return kNegInf;
  const int k = gram.k(), d = gram.d();
  return log_ratio_constant(k, d) - 0.5 * p.log_det + 0.5 * (d - k - 2) * std::log1p(-p.t) +
         0.5 * k * x * x;
}

double density_ratio(const GramDeviation& gram, double x) {
  const RatioParts p = ratio_parts(gram, x);
  if (!p.positive) return 0.0;
  const int k = gram.k(), d = gram.d();
  return std::exp(log_ratio_constant(k, d)) / std::sqrt(p.det) *
         std::pow(1.0 - p.t, 0.5 * (d - k - 2)) * std::exp(0.5 * k * x * x);
}

double open_chain(const Matrix& g, const std::vector<int>& j_indices) {
  double prod = 1.0;
  int prev = 0;
  for (int j : j_indices) {
    for (int t = prev + 1; t < j; ++t) prod *= g(t - 1, t);
    prev = j;
  }
  return prod;
}

double closed_chain(const Matrix& g, int j) {
  if (j == 1) return g(0, 0);
  double prod = g(j - 1, 0);
  for (int t = 0; t + 1 < j; ++t) prod *= g(t, t + 1);
  return prod;
}

void validate_chain_indices(int l, const std::vector<int>& j_indices) {
  if (l < 1) throw InvalidArgument("chain indices: requires l >= 1");
  int prev = 0;
  for (std::size_t i = 0; i < j_indices.size(); ++i) {
    if (!(prev + 1 < j_indices[i])) {
      throw InvalidArgument("chain indices: requires j_{i-1}+1 < j_i (violated at i=" +
                            std::to_string(i + 1) + ")");
    }
    prev = j_indices[i];
  }
  if (prev > l) throw InvalidArgument("chain indices: requires j_m <= l");
}

std::int64_t binomial(int n, int r) {
  if (r < 0 || r > n) return 0;
  std::int64_t c = 1;
  for (int i = 1; i <= r; ++i) c = c * (n - r + i) / i;
  return c;
}

McEstimate functional_e1(const DistributionSpec& spec, double x, const Stream& stream,
                         const FunctionalOptions& opts, double* weight_ess) {
  const int d = spec.dim();
  const auto est = mc_run(opts.reps, 3, stream, opts.workers, [&](Stream& s, double* out) {
    const Direction b = sample_direction(d, s);
    Vector v(d), w(d);
    double r[2];
    for (double& ri : r) {
      for (int i = 0; i < d; ++i) v[i] = s.normal();
      make_w_into(b, x, v, w);
      ri = std::exp(log_weight(spec, w));
    }
    out[0] = r[0] * r[1] - 2.0 * r[0] + 1.0;
    out[1] = r[0];
    out[2] = r[0] * r[0];
  });
  if (weight_ess) {
    const double m1 = est[1].mean, m2 = est[2].mean;
    *weight_ess = m2 > 0.0 ? static_cast<double>(opts.reps) * m1 * m1 / m2 : 0.0;
  }
  return est[0];
}

McEstimate functional_c(const DistributionSpec& spec, double x, const Stream& stream,
                        const FunctionalOptions& opts) {
  const int d = spec.dim();
  return mc_mean(opts.reps, stream, opts.workers, [&](Stream& s) {
    Matrix z(d, 2);
    draw_columns(spec, s, z);
    const double r2 = exact_weight(GramDeviation::from_columns(z), x);
    const double r1 = exact_weight(GramDeviation::from_columns(z.leftCols(1)), x);
    return r2 - 2.0 * r1 + 1.0;
  });
}

McEstimate functional_a(const DistributionSpec& spec, double x, const Stream& stream,
                        const FunctionalOptions& opts) {
  const int d = spec.dim();
  return mc_mean(opts.reps, stream, opts.workers, [&](Stream& s) {
    Matrix z(d, 2);
    draw_columns(spec, s, z);
    const double r = exact_weight(GramDeviation::from_columns(z), x);
    return (z.col(0).dot(z.col(1)) - x * x) * r;
  });
}

McEstimate functional_B(const DistributionSpec& spec, int l, const std::vector<int>& j_indices,
                        double x, const Stream& stream, const FunctionalOptions& opts,
                        const GramWeight& weight) {
  validate_chain_indices(l, j_indices);
  const int d = spec.dim();
  if (l >= d) throw InvalidArgument("functional B: requires l < d");
  const int m = static_cast<int>(j_indices.size());
  const int jm = m == 0 ? 0 : j_indices.back();
  const double centering = std::pow(x, 2.0 * (jm - m));
  return mc_mean(opts.reps, stream, opts.workers, [&](Stream& s) {
    Matrix z(d, l);
    draw_columns(spec, s, z);
    const Matrix g = z.transpose() * z;
    const GramDeviation gram = GramDeviation::from_columns(z);
    const double r = weight ? weight(gram) : exact_weight(gram, x);
    return open_chain(g, j_indices) * r - centering;
  });
}

McEstimate functional_C(const DistributionSpec& spec, int k, double x, const Stream& stream,
                        const FunctionalOptions& opts, const GramWeight& weight) {
  if (k < 2 || k % 2 != 0) throw InvalidArgument("functional C: requires k even and >= 2");
  const int d = spec.dim();
  if (k >= d) throw InvalidArgument("functional C: requires k < d");
  const double centering = std::pow(1.0 - x * x, k);
  return mc_mean(opts.reps, stream, opts.workers, [&](Stream& s) {
    Matrix z(d, k);
    draw_columns(spec, s, z);
    const Matrix g = z.transpose() * z;
    const GramDeviation gram = GramDeviation::from_columns(z);
    const double r = weight ? weight(gram) : exact_weight(gram, x);
    double acc = 0.0;
    for (int j = 1; j <= k; ++j) {
      const double sign = j % 2 == 0 ? 1.0 : -1.0;
      acc += sign * static_cast<double>(binomial(k, j)) * (closed_chain(g, j) - d);
    }
    return acc * r - centering;
  });
}

McEstimate ratio_mean(const DistributionSpec& spec, int k, double x, const Stream& stream,
                      const FunctionalOptions& opts) {
  const int d = spec.dim();
  if (k >= d) throw InvalidArgument("ratio mean: requires k < d");
  return mc_mean(opts.reps, stream, opts.workers, [&](Stream& s) {
    Matrix z(d, k);
    draw_columns(spec, s, z);
    return exact_weight(GramDeviation::from_columns(z), x);
  });
}

}  // namespace projlab
