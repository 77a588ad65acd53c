#include "projlab/spectral.hpp"

#include <Eigen/Eigenvalues>
#include <algorithm>
#include <cmath>
#include <sstream>

#include "projlab/rng.hpp"

namespace projlab {

namespace {

constexpr int kMaxSteps = 400;
constexpr std::uint64_t kStartSeed = 0x5EC7A1u;

struct RitzExtreme {
  double theta = 0.0;
  double residual = 0.0;
};

RitzExtreme extreme_ritz(const std::vector<double>& alpha, const std::vector<double>& beta,
                         double next_beta) {
  const int j = static_cast<int>(alpha.size());
  Vector diag = Eigen::Map<const Vector>(alpha.data(), j);
  Vector sub = Eigen::Map<const Vector>(beta.data(), j - 1);
  Eigen::SelfAdjointEigenSolver<Matrix> es;
  es.computeFromTridiagonal(diag, sub, Eigen::ComputeEigenvectors);
  const Vector& ev = es.eigenvalues();
  const int idx = std::abs(ev[0]) >= std::abs(ev[j - 1]) ? 0 : j - 1;
  return {ev[idx], std::abs(next_beta * es.eigenvectors()(j - 1, idx))};
}

}  // namespace

double spectral_norm(const Matrix& m, double tol) {
  if (m.rows() != m.cols()) throw InvalidArgument("spectral_norm: matrix must be square");
  const Index n = m.rows();
  if (n == 0) return 0.0;
  const Matrix a = 0.5 * (m + m.transpose());
  const double scale = a.cwiseAbs().maxCoeff();
  if (scale == 0.0) return 0.0;
  if (n == 1) return std::abs(a(0, 0));

  Stream start(kStartSeed);
  Vector q(n);
  for (Index i = 0; i < n; ++i) q[i] = start.uniform() - 0.5;
  q.normalize();

  const int cap = static_cast<int>(std::min<Index>(n, kMaxSteps));
  Matrix basis(n, cap);
  std::vector<double> alpha, beta;
  Vector w(n);
  RitzExtreme ritz;
  for (int j = 0; j < cap; ++j) {
    basis.col(j) = q;
    w.noalias() = a * q;
    const double aj = q.dot(w);
    alpha.push_back(aj);
    // Two passes of classical Gram-Schmidt against the full basis.
    for (int pass = 0; pass < 2; ++pass) {
      const Vector coef = basis.leftCols(j + 1).transpose() * w;
      w.noalias() -= basis.leftCols(j + 1) * coef;
    }
    const double bj = w.norm();
    const bool exhausted = bj <= 1e-14 * scale || j + 1 == n;
    if (exhausted || j % 4 == 3 || j + 1 == cap) {
      ritz = extreme_ritz(alpha, beta, exhausted ? 0.0 : bj);
      if (exhausted || ritz.residual <= tol * std::abs(ritz.theta)) {
        return std::abs(ritz.theta);
      }
    }
    beta.push_back(bj);
    q = w / bj;
  }
  std::ostringstream msg;
  msg.precision(17);
  msg << "spectral_norm: no convergence after " << cap << " Lanczos steps; bracket ["
      << std::abs(ritz.theta) << ", " << std::abs(ritz.theta) + ritz.residual << "]";
  throw NumericalError(msg.str());
}

}  // namespace projlab
