#include "projlab/cond_estimators.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <numeric>

#include "projlab/monte_carlo.hpp"

namespace projlab {

namespace {

constexpr double kMinKernelNeff = 30.0;

double std_normal_pdf(double x) {
  return std::exp(-0.5 * x * x) / std::sqrt(2.0 * std::numbers::pi);
}

// Fills the complement-restricted summaries of the covariance C of mu.
void fill_cov_summaries(MomentPoint& p, const Matrix& c, const Vector& beta) {
  const Vector cb = c * beta;
  const double bcb = beta.dot(cb);
  Matrix pcp = c - beta * cb.transpose() - cb * beta.transpose() + bcb * beta * beta.transpose();
  pcp = (0.5 * (pcp + pcp.transpose())).eval();
  const Vector mu_perp = p.mu - beta * beta.dot(p.mu);
  p.cov_trace_perp = pcp.trace();
  p.cov_quad_perp = mu_perp.dot(pcp * mu_perp);
  p.cov_frob2_perp = pcp.squaredNorm();
}

Matrix symmetric_gram(const Matrix& z) {
  Matrix g = Matrix::Zero(z.cols(), z.cols());
  g.selfadjointView<Eigen::Lower>().rankUpdate(z.transpose());
  return g.selfadjointView<Eigen::Lower>();
}

// Moments of the rows of z with unit weights.
MomentPoint unit_point(const Matrix& z, const Vector& t, const Vector& beta, int groups) {
  const Index n = z.rows();
  MomentPoint p;
  p.present = true;
  p.n_eff = static_cast<double>(n);
  p.x = t.mean();
  p.x2 = t.squaredNorm() / static_cast<double>(n);
  p.mu = z.colwise().mean().transpose();
  const Matrix sum2 = symmetric_gram(z);
  p.m2 = sum2 / static_cast<double>(n);
  const Matrix c = (p.m2 - p.mu * p.mu.transpose()) / static_cast<double>(n - 1);
  fill_cov_summaries(p, c, beta);
  if (groups > 1) {
    for (int g = 0; g < groups; ++g) {
      Index count = 0;
      for (Index i = g; i < n; i += groups) ++count;
      Matrix zg(count, z.cols());
      Index r = 0;
      for (Index i = g; i < n; i += groups) zg.row(r++) = z.row(i);
      p.m2_jackknife.push_back((sum2 - symmetric_gram(zg)) / static_cast<double>(n - count));
    }
  }
  return p;
}

// Moments of the rows of z under nonnegative weights w (not all zero).
MomentPoint weighted_point(const Matrix& z, const Vector& w, const Vector& beta, int groups) {
  const double wsum = w.sum();
  MomentPoint p;
  p.present = true;
  p.n_eff = wsum * wsum / w.squaredNorm();
  p.mu = z.transpose() * w / wsum;
  const Vector sw = w.cwiseSqrt();
  const Matrix zw = sw.asDiagonal() * z;
  const Matrix sum2 = symmetric_gram(zw);
  p.m2 = sum2 / wsum;
  const Matrix centered = (z.rowwise() - p.mu.transpose());
  const Matrix cw = w.asDiagonal() * centered;
  Matrix c = symmetric_gram(cw) / (wsum * wsum);
  if (p.n_eff > 1.0) c *= p.n_eff / (p.n_eff - 1.0);
  fill_cov_summaries(p, c, beta);
  if (groups > 1) {
    const Index n = z.rows();
    for (int g = 0; g < groups; ++g) {
      Index count = 0;
      double wg = 0.0;
      for (Index i = g; i < n; i += groups) ++count;
      Matrix zg(count, z.cols());
      Index r = 0;
      for (Index i = g; i < n; i += groups) {
        zg.row(r++) = zw.row(i);
        wg += w[i];
      }
      p.m2_jackknife.push_back((sum2 - symmetric_gram(zg)) / (wsum - wg));
    }
  }
  return p;
}

}  // namespace

std::string_view method_name(Method m) {
  switch (m) {
    case Method::kSlicing: return "slicing";
    case Method::kKernel: return "kernel";
    case Method::kGaussIs: return "gauss-is";
  }
  return "unknown";
}

std::vector<double> ConditionalMomentEstimate::x_grid() const {
  std::vector<double> xs;
  xs.reserve(points.size());
  for (const auto& p : points) xs.push_back(p.x);
  return xs;
}

int default_slice_count(Index n) {
  const int s = static_cast<int>(std::ceil(std::cbrt(static_cast<double>(n)) - 1e-9));
  return std::clamp(s, 8, 50);
}

double default_bandwidth(double sd, Index n) {
  return 1.06 * sd * std::pow(static_cast<double>(n), -0.2);
}

ConditionalMomentEstimate estimate_slicing(const RowMatrix& samples, const Direction& beta,
                                           int n_slices, const EstimatorOptions& opts) {
  const Index n = samples.rows();
  if (samples.cols() != beta.dim()) throw InvalidArgument("slicing: dimension mismatch");
  if (n_slices < 2) throw InvalidArgument("slicing: n_slices must be >= 2");
  if (n < 10 * static_cast<Index>(n_slices)) {
    throw InvalidArgument("slicing: requires n >= 10 * n_slices");
  }
  const Vector t = samples * beta.beta();
  if (t.maxCoeff() == t.minCoeff()) throw InvalidArgument("slicing: degenerate samples (beta'Z constant)");

  std::vector<Index> order(n);
  std::iota(order.begin(), order.end(), Index{0});
  std::sort(order.begin(), order.end(), [&](Index a, Index b) {
    return t[a] < t[b] || (t[a] == t[b] && a < b);
  });

  ConditionalMomentEstimate est;
  est.method = Method::kSlicing;
  est.beta = beta.beta();
  Index start = 0;
  for (int s = 0; s < n_slices; ++s) {
    const Index size = n / n_slices + (s < n % n_slices ? 1 : 0);
    Matrix z(size, samples.cols());
    Vector ts(size);
    for (Index r = 0; r < size; ++r) {
      z.row(r) = samples.row(order[start + r]);
      ts[r] = t[order[start + r]];
    }
    MomentPoint p = unit_point(z, ts, est.beta, opts.jackknife_groups);
    const double width = ts[size - 1] - ts[0];
    if (width > 0.0) {
      p.h = (static_cast<double>(size) / static_cast<double>(n)) / width / std_normal_pdf(p.x);
    }
    est.points.push_back(std::move(p));
    start += size;
  }
  return est;
}

int slice_of_rank(Index rank, Index n, int n_slices) {
  if (rank < 0 || rank >= n) throw InvalidArgument("slice_of_rank: rank out of range");
  const Index base = n / n_slices;
  const Index extra = n % n_slices;
  // The first `extra` slices hold base + 1 samples.
  const Index big = extra * (base + 1);
  if (rank < big) return static_cast<int>(rank / (base + 1));
  return static_cast<int>(extra + (rank - big) / base);
}

Index stable_rank(const Vector& t, Index i) {
  Index r = 0;
  for (Index j = 0; j < t.size(); ++j) {
    if (t[j] < t[i] || (t[j] == t[i] && j < i)) ++r;
  }
  return r;
}

ConditionalMomentEstimate estimate_kernel(const RowMatrix& samples, const Direction& beta,
                                          double bandwidth, const std::vector<double>& x_grid,
                                          const EstimatorOptions& opts) {
  if (!(bandwidth > 0.0)) throw InvalidArgument("kernel: bandwidth must be > 0");
  if (samples.cols() != beta.dim()) throw InvalidArgument("kernel: dimension mismatch");
  const Index n = samples.rows();
  const Vector t = samples * beta.beta();
  const Matrix z = samples;

  ConditionalMomentEstimate est;
  est.method = Method::kKernel;
  est.beta = beta.beta();
  for (double x : x_grid) {
    Vector w(n);
    for (Index i = 0; i < n; ++i) {
      const double u = (t[i] - x) / bandwidth;
      w[i] = std::exp(-0.5 * u * u);
    }
    const double wsum = w.sum();
    const double n_eff = wsum > 0.0 ? wsum * wsum / w.squaredNorm() : 0.0;
    if (!(n_eff >= kMinKernelNeff)) {
      MomentPoint absent;
      absent.x = x;
      absent.n_eff = n_eff;
      est.points.push_back(std::move(absent));
      continue;
    }
    MomentPoint p = weighted_point(z, w, est.beta, opts.jackknife_groups);
    p.x = x;
    p.x2 = w.dot(t.cwiseAbs2()) / wsum;
    const double norm = 1.0 / (bandwidth * std::sqrt(2.0 * std::numbers::pi));
    const double fhat = norm * wsum / static_cast<double>(n);
    const double fsd = std::sqrt(std::max(0.0, norm * norm * w.squaredNorm() / n - fhat * fhat));
    p.h = fhat / std_normal_pdf(x);
    p.h_se = fsd / std::sqrt(static_cast<double>(n)) / std_normal_pdf(x);
    est.points.push_back(std::move(p));
  }
  return est;
}

ConditionalMomentEstimate estimate_gauss_is(const DistributionSpec& spec, const Direction& beta,
                                            double x, Index m, const Stream& stream, int workers,
                                            const EstimatorOptions& opts) {
  if (m < 1000) throw InvalidArgument("gauss-is: requires m >= 1000 replicates");
  if (spec.dim() != beta.dim()) throw InvalidArgument("gauss-is: dimension mismatch");
  const int d = spec.dim();
  const Index blocks = std::min<Index>(kMcBatches, m);
  auto block_range = [&](Index b) {
    return std::pair<Index, Index>{b * m / blocks, (b + 1) * m / blocks};
  };
  // Replicate j always draws V from stream.substream(j).
  auto draw_w = [&](Index j, Vector& v, Vector& w) {
    Stream s = stream.substream(static_cast<std::uint64_t>(j));
    for (int i = 0; i < d; ++i) v[i] = s.normal();
    make_w_into(beta, x, v, w);
  };

  Vector logw(m);
  parallel_for(blocks, workers, [&](std::int64_t b) {
    Vector v(d), w(d);
    const auto [lo, hi] = block_range(b);
    for (Index j = lo; j < hi; ++j) {
      draw_w(j, v, w);
      logw[j] = log_weight(spec, w);
    }
  });

  ConditionalMomentEstimate est;
  est.method = Method::kGaussIs;
  est.beta = beta.beta();
  MomentPoint p;
  p.x = x;
  p.x2 = x * x;
  const double lmax = logw.maxCoeff();
  if (lmax == -std::numeric_limits<double>::infinity()) {
    est.degenerate = true;
    est.note = "all importance weights are zero";
    est.points.push_back(std::move(p));
    return est;
  }

  // Per-block sums of w, w^2, w W, w^2 W, w WW', w^2 WW' with w = exp(logw - lmax).
  struct Partial {
    double sw = 0.0, sw2 = 0.0;
    Vector s1, s1b;
    Matrix s2, s2b;
    // tr(s2b) and beta' s2b beta.
    double t2b = 0.0, b2b = 0.0;
  };
  std::vector<Partial> parts(blocks);
  parallel_for(blocks, workers, [&](std::int64_t b) {
    const auto [lo, hi] = block_range(b);
    Matrix rows(hi - lo, d);
    Vector wt(hi - lo);
    Vector v(d), w(d);
    for (Index j = lo; j < hi; ++j) {
      draw_w(j, v, w);
      rows.row(j - lo) = w.transpose();
      wt[j - lo] = std::exp(logw[j] - lmax);
    }
    Partial& part = parts[b];
    part.sw = wt.sum();
    part.sw2 = wt.squaredNorm();
    part.s1 = rows.transpose() * wt;
    part.s1b = rows.transpose() * wt.cwiseAbs2();
    part.s2 = symmetric_gram(wt.cwiseSqrt().asDiagonal() * rows);
    part.s2b = symmetric_gram(wt.asDiagonal() * rows);
    part.t2b = part.s2b.trace();
    part.b2b = beta.beta().dot(part.s2b * beta.beta());
  });
  Partial total{0.0, 0.0, Vector::Zero(d), Vector::Zero(d), Matrix::Zero(d, d), Matrix::Zero(d, d)};
  for (const auto& part : parts) {
    total.sw += part.sw;
    total.sw2 += part.sw2;
    total.s1 += part.s1;
    total.s1b += part.s1b;
    total.s2 += part.s2;
    total.s2b += part.s2b;
    total.t2b += part.t2b;
    total.b2b += part.b2b;
  }

  const double scale = std::exp(lmax);
  const double mean_scaled = total.sw / static_cast<double>(m);
  p.h = scale * mean_scaled;
  const double var_scaled =
      std::max(0.0, (total.sw2 - total.sw * mean_scaled) / static_cast<double>(m - 1));
  p.h_se = scale * std::sqrt(var_scaled / static_cast<double>(m));
  if (p.h == 0.0 || mean_scaled < 1e-6) {
    est.degenerate = true;
    est.note = "importance weights degenerate: h_hat < 1e-6 * max weight";
  }
  p.present = !est.degenerate;
  p.n_eff = total.sw * total.sw / total.sw2;
  p.mu = total.s1 / total.sw;
  p.m2 = total.s2 / total.sw;
  Matrix c = total.s2b - p.mu * total.s1b.transpose() - total.s1b * p.mu.transpose() +
             total.sw2 * p.mu * p.mu.transpose();
  c /= total.sw * total.sw;
  if (p.n_eff > 1.0) c *= p.n_eff / (p.n_eff - 1.0);
  fill_cov_summaries(p, c, est.beta);
  // The bias correction tr(P C P) moves with ||P mu||^2 under heavy weights,
  // so the d1 SE is taken from a block jackknife of their difference.
  if (blocks > 1) {
    const Vector& b = est.beta;
    auto d1_of = [&](double sw, double sw2, const Vector& s1, const Vector& s1b, double t2b,
                     double b2b) {
      if (sw <= 0.0 || sw2 <= 0.0) return std::numeric_limits<double>::quiet_NaN();
      const Vector mu = s1 / sw;
      const double bm = b.dot(mu);
      const double mu_perp2 = mu.squaredNorm() - bm * bm;
      const double tr = t2b - 2.0 * mu.dot(s1b) + sw2 * mu.squaredNorm();
      const double bcb = b2b - 2.0 * bm * b.dot(s1b) + sw2 * bm * bm;
      const double neff = sw * sw / sw2;
      double trace_perp = (tr - bcb) / (sw * sw);
      if (neff > 1.0) trace_perp *= neff / (neff - 1.0);
      return mu_perp2 - trace_perp;
    };
    std::vector<double> loo(blocks);
    double mean = 0.0;
    bool finite = true;
    for (Index k = 0; k < blocks; ++k) {
      const Partial& q = parts[k];
      loo[k] = d1_of(total.sw - q.sw, total.sw2 - q.sw2, total.s1 - q.s1, total.s1b - q.s1b,
                     total.t2b - q.t2b, total.b2b - q.b2b);
      finite = finite && std::isfinite(loo[k]);
      mean += loo[k];
    }
    if (finite) {
      mean /= static_cast<double>(blocks);
      double ss = 0.0;
      for (double v : loo) ss += (v - mean) * (v - mean);
      p.d1_se_jackknife = std::sqrt((blocks - 1.0) / blocks * ss);
    }
  }
  if (opts.jackknife_groups > 1) {
    const int g_count = opts.jackknife_groups;
    for (int g = 0; g < g_count; ++g) {
      Matrix s2 = total.s2;
      double sw = total.sw;
      for (Index b = g; b < blocks; b += g_count) {
        s2 -= parts[b].s2;
        sw -= parts[b].sw;
      }
      p.m2_jackknife.push_back(s2 / sw);
    }
  }
  est.points.push_back(std::move(p));
  return est;
}

}  // namespace projlab
