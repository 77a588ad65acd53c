#include "projlab/applications.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include <Eigen/Eigenvalues>
#include <Eigen/QR>

#include "projlab/csv.hpp"
#include "projlab/geometry.hpp"
#include "projlab/monte_carlo.hpp"
#include "projlab/stream_tags.hpp"

namespace projlab {

namespace {

// Sample indices sorted by (y, index).
std::vector<Index> sorted_order(const Vector& y) {
  std::vector<Index> order(y.size());
  std::iota(order.begin(), order.end(), Index{0});
  std::sort(order.begin(), order.end(), [&](Index a, Index b) {
    return y[a] < y[b] || (y[a] == y[b] && a < b);
  });
  return order;
}

void check_inputs(const char* who, const Vector& y, const RowMatrix& z, int n_slices) {
  const Index n = y.size();
  if (z.rows() != n) throw InvalidArgument(std::string(who) + ": y and z sizes differ");
  if (n_slices < 2) throw InvalidArgument(std::string(who) + ": n_slices must be >= 2");
  if (n < 10 * static_cast<Index>(n_slices)) {
    throw InvalidArgument(std::string(who) + ": requires n >= 10 * n_slices");
  }
  if (y.maxCoeff() == y.minCoeff()) {
    throw InvalidArgument(std::string(who) + ": degenerate y (constant response)");
  }
}

struct SliceMoments {
  double weight = 0.0;
  Vector mean;
  Matrix second;  // within-slice mean of z z'
};

std::vector<SliceMoments> slice_moments(const Vector& y, const RowMatrix& z, int n_slices,
                                        bool with_second) {
  const Index n = y.size();
  const Index d = z.cols();
  const auto order = sorted_order(y);
  std::vector<SliceMoments> out;
  Index start = 0;
  for (int s = 0; s < n_slices; ++s) {
    const Index size = n / n_slices + (s < n % n_slices ? 1 : 0);
    Matrix zs(size, d);
    for (Index r = 0; r < size; ++r) zs.row(r) = z.row(order[start + r]);
    SliceMoments m;
    m.weight = static_cast<double>(size) / static_cast<double>(n);
    m.mean = zs.colwise().sum().transpose() / static_cast<double>(size);
    if (with_second) m.second = zs.transpose() * zs / static_cast<double>(size);
    out.push_back(std::move(m));
    start += size;
  }
  return out;
}

Vector top_eigenvector(const Matrix& a) {
  Eigen::SelfAdjointEigenSolver<Matrix> es(a);
  if (es.info() != Eigen::Success) throw NumericalError("eigen decomposition failed");
  return canonical_sign(es.eigenvectors().col(a.rows() - 1));
}

}  // namespace

std::string_view link_name(Link link) {
  switch (link) {
    case Link::kLinear: return "linear";
    case Link::kCubic: return "cubic";
    case Link::kSquare: return "square";
    case Link::kIndependent: return "independent";
  }
  return "unknown";
}

Link parse_link(std::string_view name) {
  for (Link l : {Link::kLinear, Link::kCubic, Link::kSquare, Link::kIndependent}) {
    if (link_name(l) == name) return l;
  }
  throw ConfigError("link: unknown link '" + std::string(name) + "'");
}

double apply_link(Link link, double t) {
  switch (link) {
    case Link::kLinear: return t;
    case Link::kCubic: return t * t * t;
    case Link::kSquare: return t * t;
    case Link::kIndependent: return 0.0;
  }
  return 0.0;
}

Vector canonical_sign(Vector v) {
  const double norm = v.norm();
  if (norm == 0.0) throw InvalidArgument("canonical_sign: zero vector");
  v /= norm;
  for (Index i = 0; i < v.size(); ++i) {
    if (v[i] != 0.0) {
      if (v[i] < 0.0) v = -v;
      break;
    }
  }
  return v;
}

Vector sir_estimate(const Vector& y, const RowMatrix& z, int n_slices) {
  check_inputs("sir", y, z, n_slices);
  const auto slices = slice_moments(y, z, n_slices, false);
  Vector overall = Vector::Zero(z.cols());
  for (const auto& s : slices) overall += s.weight * s.mean;
  Matrix between = Matrix::Zero(z.cols(), z.cols());
  for (const auto& s : slices) {
    const Vector c = s.mean - overall;
    between.noalias() += s.weight * c * c.transpose();
  }
  return top_eigenvector(between);
}

Vector save_estimate(const Vector& y, const RowMatrix& z, int n_slices) {
  check_inputs("save", y, z, n_slices);
  const auto slices = slice_moments(y, z, n_slices, true);
  const Index d = z.cols();
  Matrix acc = Matrix::Zero(d, d);
  for (const auto& s : slices) {
    Matrix dev = Matrix::Identity(d, d) - (s.second - s.mean * s.mean.transpose());
    dev = (0.5 * (dev + dev.transpose())).eval();
    acc.noalias() += s.weight * dev * dev;
  }
  return top_eigenvector((0.5 * (acc + acc.transpose())).eval());
}

AlignmentResult direction_recovery(const DistributionSpec& spec, Index n, Link link,
                                   const std::string& method, int n_slices, double noise_sd,
                                   const Stream& stream) {
  if (method != "sir" && method != "save") {
    throw InvalidArgument("method: must be 'sir' or 'save'");
  }
  Stream sb = stream.substream(0);
  const Direction beta = sample_direction(spec.dim(), sb);
  const RowMatrix z = sample(spec, n, stream.substream(1));
  Stream sn = stream.substream(2);
  const Vector t = z * beta.beta();
  Vector y(n);
  for (Index i = 0; i < n; ++i) y[i] = apply_link(link, t[i]) + noise_sd * sn.normal();
  AlignmentResult res;
  res.beta = beta.beta();
  res.estimate = method == "sir" ? sir_estimate(y, z, n_slices) : save_estimate(y, z, n_slices);
  res.alignment = std::abs(res.estimate.dot(res.beta));
  return res;
}

void SparseModelCase::validate() const {
  const Index d = theta.size();
  if (d < 1 || m.rows() != d || m.cols() != d) {
    throw InvalidArgument("sparse case: M must be d x d with d = size of theta");
  }
  if (!(theta.norm() > 0.0)) throw InvalidArgument("sparse case: theta must be nonzero");
  if ((m - m.transpose()).norm() > 1e-10 * std::max(1.0, m.norm())) {
    throw InvalidArgument("sparse case: M must be symmetric");
  }
  Eigen::SelfAdjointEigenSolver<Matrix> es(m, Eigen::EigenvaluesOnly);
  if (!(es.eigenvalues().minCoeff() > 1e-8)) {
    throw InvalidArgument("sparse case: M must be positive definite (min eigenvalue > 1e-8)");
  }
  if (!(noise_sd >= 0.0)) throw InvalidArgument("sparse case: noise_sd must be >= 0");
}

SparseModelCase random_sparse_case(int d, Stream& stream, double noise_sd) {
  Matrix g(d, d);
  for (int j = 0; j < d; ++j) {
    for (int i = 0; i < d; ++i) g(i, j) = stream.normal();
  }
  Eigen::HouseholderQR<Matrix> qr(g);
  Matrix q = qr.householderQ();
  const Matrix r = qr.matrixQR().triangularView<Eigen::Upper>();
  for (int j = 0; j < d; ++j) {
    if (r(j, j) < 0.0) q.col(j) = -q.col(j);
  }
  Vector lambda(d);
  for (int i = 0; i < d; ++i) lambda[i] = 0.5 + 1.5 * stream.uniform();
  SparseModelCase c;
  c.m = q * lambda.asDiagonal() * q.transpose();
  c.m = (0.5 * (c.m + c.m.transpose())).eval();
  c.theta.resize(d);
  for (int i = 0; i < d; ++i) c.theta[i] = stream.normal();
  c.link = Link::kLinear;
  c.noise_sd = noise_sd;
  return c;
}

double sparse_c_theory(const SparseModelCase& c) {
  const Matrix sigma = c.m * c.m.transpose();
  return sigma.row(0).dot(c.theta) / sigma(0, 0);
}

SparseReport sparse_submodel_check(const SparseModelCase& c, const DistributionSpec& spec, Index n,
                                   const Stream& stream, int n_slices, double x_range) {
  c.validate();
  if (spec.dim() != c.theta.size()) throw InvalidArgument("sparse check: spec dimension mismatch");
  if (n < 10 * static_cast<Index>(n_slices)) {
    throw InvalidArgument("sparse check: requires n >= 10 * n_slices");
  }
  const RowMatrix z = sample(spec, n, stream.substream(0));
  Stream sn = stream.substream(1);
  // theta'w = (M'theta)'Z and w_1 = (row 1 of M) Z.
  const Vector t = z * (c.m.transpose() * c.theta);
  const Vector w1 = z * c.m.row(0).transpose();
  Vector y(n);
  for (Index i = 0; i < n; ++i) y[i] = apply_link(c.link, t[i]) + c.noise_sd * sn.normal();

  SparseReport rep;
  rep.c_theory = sparse_c_theory(c);
  const double sxx = w1.squaredNorm();
  rep.c_hat = w1.dot(y) / sxx;
  const Vector e = y - rep.c_hat * w1;
  rep.se_c_hat = std::sqrt((w1.array().square() * e.array().square()).sum()) / sxx;

  const double e_mean = e.mean();
  rep.residual_var_all = (e.array() - e_mean).square().sum() / static_cast<double>(n - 1);
  const double e_sd = std::sqrt(rep.residual_var_all);
  const double w_sd = std::sqrt((w1.array() - w1.mean()).square().sum() / static_cast<double>(n - 1));

  const auto order = sorted_order(w1);
  Index start = 0;
  for (int s = 0; s < n_slices; ++s) {
    const Index size = n / n_slices + (s < n % n_slices ? 1 : 0);
    double xs = 0.0, m = 0.0;
    for (Index r = 0; r < size; ++r) {
      xs += w1[order[start + r]];
      m += e[order[start + r]];
    }
    xs /= static_cast<double>(size);
    m /= static_cast<double>(size);
    double m2 = 0.0, m4 = 0.0;
    for (Index r = 0; r < size; ++r) {
      const double dv = e[order[start + r]] - m;
      m2 += dv * dv;
      m4 += dv * dv * dv * dv;
    }
    const double var = m2 / static_cast<double>(size - 1);
    const double m2b = m2 / static_cast<double>(size);
    m4 /= static_cast<double>(size);
    start += size;
    if (std::abs(xs) > x_range * w_sd) continue;
    rep.x.push_back(xs);
    rep.residual_mean.push_back(m);
    rep.residual_mean_se.push_back(std::sqrt(var / static_cast<double>(size)));
    rep.residual_var.push_back(var);
    rep.residual_var_se.push_back(std::sqrt(std::max(0.0, m4 - m2b * m2b) / static_cast<double>(size)));
    rep.max_mean_dev = std::max(rep.max_mean_dev, std::abs(m) / e_sd);
    rep.max_var_dev = std::max(rep.max_var_dev, std::abs(var / rep.residual_var_all - 1.0));
  }
  return rep;
}

void AppsConfig::validate() const {
  const Family fam = parse_family(family);
  if (fam == Family::kProductScaledT && df <= 10) throw ConfigError("df: must be >= 11");
  if (d < 2) throw ConfigError("d: must be >= 2");
  if (n_slices < 2) throw ConfigError("n_slices: must be >= 2");
  if (n < 10 * static_cast<Index>(n_slices)) throw ConfigError("n: requires n >= 10 * n_slices");
  if (n_square < 10 * static_cast<Index>(n_slices)) {
    throw ConfigError("n_square: requires n_square >= 10 * n_slices");
  }
  for (const auto& l : links) parse_link(l);
  for (const auto& m : methods) {
    if (m != "sir" && m != "save") throw ConfigError("methods: unknown method '" + m + "'");
  }
  if (!(noise_sd >= 0.0)) throw ConfigError("noise_sd: must be >= 0");
  if (repeats < 1) throw ConfigError("repeats: must be positive");
  if (sparse_d < 1) throw ConfigError("sparse_d: must be positive");
  if (sparse_cases < 0) throw ConfigError("sparse_cases: must be >= 0");
  if (sparse_slices < 2 || sparse_n < 10 * static_cast<Index>(sparse_slices)) {
    throw ConfigError("sparse_n: requires sparse_n >= 10 * sparse_slices");
  }
  if (!(sparse_noise >= 0.0)) throw ConfigError("sparse_noise: must be >= 0");
  if (!(x_range > 0.0)) throw ConfigError("x_range: must be positive");
}

std::vector<SirSaveRow> run_sir_save(const AppsConfig& cfg) {
  cfg.validate();
  const auto spec = DistributionSpec::make(parse_family(cfg.family), cfg.d, cfg.df, cfg.shell_low);
  const Stream root = Stream(cfg.seed).substream(kAppsTag).substream(0);
  const int workers = cfg.workers > 0 ? cfg.workers : default_workers();
  std::vector<SirSaveRow> rows;
  for (const auto& ln : cfg.links) {
    const Link link = parse_link(ln);
    const Index n = link == Link::kSquare ? cfg.n_square : cfg.n;
    for (const auto& method : cfg.methods) {
      const Stream s = root.substream(static_cast<std::uint64_t>(link))
                           .substream(method == "sir" ? 0 : 1);
      std::vector<double> align(cfg.repeats);
      parallel_for(cfg.repeats, workers, [&](std::int64_t r) {
        align[r] = direction_recovery(spec, n, link, method, cfg.n_slices, cfg.noise_sd,
                                      s.substream(static_cast<std::uint64_t>(r)))
                       .alignment;
      });
      for (double a : align) rows.push_back({spec.name(), cfg.d, n, ln, method, a});
    }
  }
  return rows;
}

std::vector<SparseRow> run_sparse(const AppsConfig& cfg) {
  cfg.validate();
  const auto spec =
      DistributionSpec::make(parse_family(cfg.family), cfg.sparse_d, cfg.df, cfg.shell_low);
  const auto gauss = DistributionSpec::gaussian(cfg.sparse_d);
  const Stream root = Stream(cfg.seed).substream(kAppsTag).substream(1);
  const int workers = cfg.workers > 0 ? cfg.workers : default_workers();
  std::vector<SparseRow> rows(cfg.sparse_cases);
  parallel_for(cfg.sparse_cases, workers, [&](std::int64_t i) {
    const Stream s = root.substream(static_cast<std::uint64_t>(i));
    Stream sc = s.substream(0);
    const auto c = random_sparse_case(cfg.sparse_d, sc, cfg.sparse_noise);
    const auto rep = sparse_submodel_check(c, spec, cfg.sparse_n, s.substream(1),
                                           cfg.sparse_slices, cfg.x_range);
    const auto null = sparse_submodel_check(c, gauss, cfg.sparse_n, s.substream(2),
                                            cfg.sparse_slices, cfg.x_range);
    rows[i] = {spec.name(), cfg.sparse_d, cfg.sparse_n, rep.c_hat, rep.c_theory,
               rep.max_mean_dev, rep.max_var_dev, std::max(null.max_mean_dev, null.max_var_dev),
               rep.se_c_hat};
  });
  return rows;
}

void write_sir_save_csv(const std::vector<SirSaveRow>& rows, std::uint64_t seed,
                        const std::string& path) {
  CsvWriter out(path, {"family", "d", "n", "link", "method", "alignment", "seed"});
  for (const auto& r : rows) {
    out.row(r.family, r.d, static_cast<std::int64_t>(r.n), r.link, r.method, r.alignment,
            std::to_string(seed));
  }
}

void write_sparse_csv(const std::vector<SparseRow>& rows, std::uint64_t seed,
                      const std::string& path) {
  CsvWriter out(path, {"family", "d", "n", "c_hat", "c_theory", "max_mean_dev", "max_var_dev",
                       "null_floor", "seed"});
  for (const auto& r : rows) {
    out.row(r.family, r.d, static_cast<std::int64_t>(r.n), r.c_hat, r.c_theory, r.max_mean_dev,
            r.max_var_dev, r.null_floor, std::to_string(seed));
  }
}

}  // namespace projlab
